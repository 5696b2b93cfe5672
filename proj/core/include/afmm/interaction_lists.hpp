#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "afmm/tree.hpp"

namespace afmm {

enum class ListKind { u = 0, v = 1, w = 2, x = 3 };

/// Receives every (target, source) list membership exactly once.
/// on_u(c, a) means a is in U(c); likewise for V, W and X.
class InteractionSink {
 public:
  virtual ~InteractionSink() = default;
  virtual void on_u(NodeId target, NodeId source) = 0;
  virtual void on_v(NodeId target, NodeId source) = 0;
  virtual void on_w(NodeId target, NodeId source) = 0;
  virtual void on_x(NodeId target, NodeId source) = 0;
};

/// Walks the tree once and reports all U/V/W/X memberships.
///
/// Colleagues of a node are the adjacent same-depth children of its parent's
/// colleagues. V(C) collects the non-adjacent ones. For a leaf C the
/// descendants of its colleagues are searched while they stay adjacent to C:
/// adjacent leaves go to U (in both directions when deeper than C), the first
/// non-adjacent node on each branch goes to W(C), and C joins its X list.
void enumerate_interactions(const Tree& tree, InteractionSink& sink);

/// Stored per-node lists in compressed-row form; every list is sorted by id.
class InteractionLists {
 public:
  std::span<const NodeId> u(NodeId id) const { return list(ListKind::u, id); }
  std::span<const NodeId> v(NodeId id) const { return list(ListKind::v, id); }
  std::span<const NodeId> w(NodeId id) const { return list(ListKind::w, id); }
  std::span<const NodeId> x(NodeId id) const { return list(ListKind::x, id); }
  std::span<const NodeId> list(ListKind kind, NodeId id) const;

  std::size_t total(ListKind kind) const { return entries_[static_cast<int>(kind)].size(); }
  std::size_t node_count() const { return node_count_; }

 private:
  friend InteractionLists build_interaction_lists(const Tree&);
  std::size_t node_count_ = 0;
  std::array<std::vector<std::size_t>, 4> offsets_;
  std::array<std::vector<NodeId>, 4> entries_;
};

InteractionLists build_interaction_lists(const Tree& tree);

}  // namespace afmm
