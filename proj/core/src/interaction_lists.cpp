#include "afmm/interaction_lists.hpp"

#include <algorithm>
#include <utility>

namespace afmm {

namespace {

class Walker {
 public:
  Walker(const Tree& tree, InteractionSink& sink) : tree_(tree), sink_(sink), dim_(tree.dim()) {}

  void run() {
    const std::size_t n = tree_.node_count();
    colleague_offsets_.assign(n + 1, 0);
    colleagues_.clear();
    colleagues_.reserve(n * 8);

    colleagues_.push_back(tree_.root());
    colleague_offsets_[1] = 1;
    for (NodeId c = 1; c < n; ++c) {
      const Node& node = tree_.node(c);
      const NodeId parent = node.parent;
      for (std::size_t k = colleague_offsets_[parent]; k < colleague_offsets_[parent + 1]; ++k) {
        for (NodeId cand : tree_.children(colleagues_[k])) {
          if (adjacent(tree_.node(cand), node, dim_)) {
            colleagues_.push_back(cand);
          } else {
            sink_.on_v(c, cand);
          }
        }
      }
      colleague_offsets_[c + 1] = colleagues_.size();
    }

    for (NodeId c = 0; c < n; ++c) {
      if (!tree_.node(c).is_leaf()) continue;
      sink_.on_u(c, c);
      for (std::size_t k = colleague_offsets_[c]; k < colleague_offsets_[c + 1]; ++k) {
        const NodeId a = colleagues_[k];
        if (a == c) continue;
        if (tree_.node(a).is_leaf()) {
          sink_.on_u(c, a);
        } else {
          descend(c, a);
        }
      }
    }
  }

 private:
  void descend(NodeId leaf, NodeId from) {
    const Node& target = tree_.node(leaf);
    for (NodeId alpha : tree_.children(from)) {
      const Node& a = tree_.node(alpha);
      if (adjacent(a, target, dim_)) {
        if (a.is_leaf()) {
          sink_.on_u(leaf, alpha);
          sink_.on_u(alpha, leaf);
        } else {
          descend(leaf, alpha);
        }
      } else {
        sink_.on_w(leaf, alpha);
        sink_.on_x(alpha, leaf);
      }
    }
  }

  const Tree& tree_;
  InteractionSink& sink_;
  int dim_;
  std::vector<std::size_t> colleague_offsets_;
  std::vector<NodeId> colleagues_;
};

class Collector final : public InteractionSink {
 public:
  std::array<std::vector<std::pair<NodeId, NodeId>>, 4> pairs;
  void on_u(NodeId t, NodeId s) override { pairs[0].emplace_back(t, s); }
  void on_v(NodeId t, NodeId s) override { pairs[1].emplace_back(t, s); }
  void on_w(NodeId t, NodeId s) override { pairs[2].emplace_back(t, s); }
  void on_x(NodeId t, NodeId s) override { pairs[3].emplace_back(t, s); }
};

}  // namespace

void enumerate_interactions(const Tree& tree, InteractionSink& sink) {
  Walker(tree, sink).run();
}

std::span<const NodeId> InteractionLists::list(ListKind kind, NodeId id) const {
  const int k = static_cast<int>(kind);
  const auto& off = offsets_[k];
  return std::span<const NodeId>(entries_[k]).subspan(off[id], off[id + 1] - off[id]);
}

InteractionLists build_interaction_lists(const Tree& tree) {
  Collector collector;
  enumerate_interactions(tree, collector);

  InteractionLists lists;
  lists.node_count_ = tree.node_count();
  for (int k = 0; k < 4; ++k) {
    auto& pairs = collector.pairs[k];
    std::sort(pairs.begin(), pairs.end());
    auto& off = lists.offsets_[k];
    off.assign(tree.node_count() + 1, 0);
    for (const auto& [t, s] : pairs) ++off[t + 1];
    for (std::size_t i = 0; i < tree.node_count(); ++i) off[i + 1] += off[i];
    auto& entries = lists.entries_[k];
    entries.reserve(pairs.size());
    for (const auto& [t, s] : pairs) entries.push_back(s);
  }
  return lists;
}

}  // namespace afmm
