#include "afmm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "afmm/error.hpp"

namespace afmm {

void TreeConfig::validate() const {
  if (threshold < 1) throw ParameterError("threshold t must be >= 1");
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
  if (max_depth < 0) throw ParameterError("lmax must be >= 0");
  if (bounded() && max_depth > kMaxDepthCap)
    throw ParameterError("lmax " + std::to_string(max_depth) + " exceeds the depth cap " +
                         std::to_string(kMaxDepthCap));
}

bool Cube::contains(const Point& p, int dim, double slack) const {
  for (int a = 0; a < dim; ++a) {
    if (p[a] < lower[a] - slack || p[a] > lower[a] + edge + slack) return false;
  }
  return true;
}

namespace {

std::uint64_t cell_of(double x, int depth) {
  const std::uint64_t cells = std::uint64_t{1} << depth;
  const auto c = static_cast<std::uint64_t>(std::ldexp(x, depth));
  return c >= cells ? cells - 1 : c;
}

struct Span1D {
  std::uint64_t lo, hi;
};

Span1D scaled(const Node& n, int axis, int depth) {
  const int shift = depth - n.depth;
  return {n.anchor[axis] << shift, (n.anchor[axis] + 1) << shift};
}

bool all_identical(const PointSet& pts, std::uint32_t begin, std::uint32_t end) {
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    if (pts.positions[i] != pts.positions[begin]) return false;
  }
  return true;
}

}  // namespace

bool adjacent(const Node& a, const Node& b, int dim) {
  const int depth = std::max(a.depth, b.depth);
  for (int axis = 0; axis < dim; ++axis) {
    const Span1D sa = scaled(a, axis, depth), sb = scaled(b, axis, depth);
    if (sa.lo > sb.hi || sb.lo > sa.hi) return false;
  }
  return true;
}

bool interiors_overlap(const Node& a, const Node& b, int dim) {
  const int depth = std::max(a.depth, b.depth);
  for (int axis = 0; axis < dim; ++axis) {
    const Span1D sa = scaled(a, axis, depth), sb = scaled(b, axis, depth);
    if (sa.lo >= sb.hi || sb.lo >= sa.hi) return false;
  }
  return true;
}

bool contains_cell(const Node& anc, const Node& desc, int dim) {
  if (desc.depth < anc.depth) return false;
  const int shift = desc.depth - anc.depth;
  for (int axis = 0; axis < dim; ++axis) {
    if ((desc.anchor[axis] >> shift) != anc.anchor[axis]) return false;
  }
  return true;
}

std::span<const NodeId> Tree::divided_children(NodeId id) const {
  const Node& n = nodes_[id];
  return std::span<const NodeId>(divided_children_).subspan(
      n.divided_children_begin, n.divided_children_end - n.divided_children_begin);
}

Cube Tree::cube(NodeId id) const {
  const Node& n = nodes_[id];
  Cube c;
  c.edge = std::ldexp(1.0, -n.depth);
  for (int a = 0; a < 3; ++a) {
    c.lower[a] = a < dim() ? std::ldexp(static_cast<double>(n.anchor[a]), -n.depth) : 0.0;
  }
  return c;
}

Tree Tree::build(const PointSet& points, const TreeConfig& config, bool split_to_max_depth) {
  config.validate();
  if (points.dim != config.dim)
    throw InputError("point set dimension " + std::to_string(points.dim) +
                     " does not match tree dimension " + std::to_string(config.dim));
  if (points.empty()) throw InputError("cannot build a tree over zero points");
  if (points.size() >= std::numeric_limits<std::uint32_t>::max())
    throw InputError("too many points");
  points.validate();

  Tree tree;
  tree.config_ = config;
  tree.points_ = points;
  tree.original_index_.resize(points.size());
  std::iota(tree.original_index_.begin(), tree.original_index_.end(), 0u);

  const int dim = config.dim;
  const int fanout = 1 << dim;
  const int depth_limit = config.bounded() ? config.max_depth : kMaxDepthCap;
  const std::size_t threshold = split_to_max_depth ? 0 : config.threshold;

  Node root;
  root.end = static_cast<std::uint32_t>(points.size());
  tree.nodes_.push_back(root);

  std::vector<std::uint8_t> bucket(points.size());
  std::vector<Point> pos_scratch(points.size());
  std::vector<double> sigma_scratch(points.size());
  std::vector<std::uint32_t> index_scratch(points.size());
  auto& pos = tree.points_.positions;
  auto& sigma = tree.points_.intensities;

  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    const Node node = tree.nodes_[i];
    if (node.count() <= threshold) continue;
    if (!split_to_max_depth && all_identical(tree.points_, node.begin, node.end)) {
      tree.nodes_[i].oversized = true;
      continue;
    }
    if (node.depth >= depth_limit) {
      if (!config.bounded() && !split_to_max_depth)
        throw InputError("points cannot be separated within the depth cap " +
                         std::to_string(kMaxDepthCap) + " at threshold " +
                         std::to_string(config.threshold));
      continue;
    }

    const int child_depth = node.depth + 1;
    std::array<std::uint32_t, 8> counts{};
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      int b = 0;
      for (int a = 0; a < dim; ++a) {
        const std::uint64_t cell = cell_of(pos[k][a], child_depth);
        b |= static_cast<int>(cell - 2 * node.anchor[a]) << a;
      }
      bucket[k] = static_cast<std::uint8_t>(b);
      ++counts[b];
    }
    std::array<std::uint32_t, 8> offsets{};
    std::uint32_t running = node.begin;
    for (int b = 0; b < fanout; ++b) {
      offsets[b] = running;
      running += counts[b];
    }
    std::array<std::uint32_t, 8> cursor = offsets;
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const std::uint32_t dst = cursor[bucket[k]]++;
      pos_scratch[dst] = pos[k];
      sigma_scratch[dst] = sigma[k];
      index_scratch[dst] = tree.original_index_[k];
    }
    std::copy(pos_scratch.begin() + node.begin, pos_scratch.begin() + node.end,
              pos.begin() + node.begin);
    std::copy(sigma_scratch.begin() + node.begin, sigma_scratch.begin() + node.end,
              sigma.begin() + node.begin);
    std::copy(index_scratch.begin() + node.begin, index_scratch.begin() + node.end,
              tree.original_index_.begin() + node.begin);

    const auto first_child = static_cast<NodeId>(tree.nodes_.size());
    std::uint32_t made = 0;
    for (int b = 0; b < fanout; ++b) {
      if (counts[b] == 0) continue;
      Node child;
      child.depth = child_depth;
      child.parent = static_cast<NodeId>(i);
      for (int a = 0; a < dim; ++a) child.anchor[a] = 2 * node.anchor[a] + ((b >> a) & 1);
      child.begin = offsets[b];
      child.end = offsets[b] + counts[b];
      tree.nodes_.push_back(child);
      ++made;
    }
    tree.nodes_[i].first_child = first_child;
    tree.nodes_[i].num_children = made;
  }

  tree.depth_ = tree.nodes_.back().depth;
  tree.level_offsets_.assign(tree.depth_ + 2, 0);
  for (const Node& n : tree.nodes_) ++tree.level_offsets_[n.depth + 1];
  for (int l = 0; l <= tree.depth_; ++l) tree.level_offsets_[l + 1] += tree.level_offsets_[l];

  tree.link_structure();
  return tree;
}

void Tree::link_structure() {
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    Node& n = nodes_[k];
    n.representative = n.is_singleton() ? nodes_[n.first_child].representative : static_cast<NodeId>(k);
  }
  divided_children_.clear();
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    Node& n = nodes_[k];
    if (n.parent != kNoNode) {
      const Node& p = nodes_[n.parent];
      n.divided_parent = (p.is_divided() || p.parent == kNoNode) ? n.parent : p.divided_parent;
    }
    n.divided_children_begin = static_cast<std::uint32_t>(divided_children_.size());
    for (NodeId c : children(static_cast<NodeId>(k))) divided_children_.push_back(nodes_[c].representative);
    n.divided_children_end = static_cast<std::uint32_t>(divided_children_.size());
  }
}

Tree build_tree(const PointSet& points, const TreeConfig& config) {
  if (config.enable_wx) return Tree::build(points, config, false);
  TreeConfig base = config;
  base.enable_wx = true;
  return extend_tree(Tree::build(points, base, false));
}

Tree extend_tree(const Tree& tree) {
  TreeConfig config = tree.config();
  config.max_depth = config.bounded() ? config.max_depth : tree.depth();
  config.enable_wx = false;
  // Leaves already at lmax keep all their points; everything shallower is
  // split regardless of the threshold.
  Tree out = Tree::build(tree.points(), config, true);
  for (std::uint32_t& i : out.original_index_) i = tree.original_index_[i];
  return out;
}

StructureSummary classify_structure(const Tree& tree) {
  StructureSummary s;
  std::vector<std::size_t> run(tree.node_count(), 0);
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const Node& n = tree.node(id);
    if (n.is_leaf()) {
      ++s.leaf_count;
      continue;
    }
    s.excess_children += n.num_children - 1;
    if (n.is_divided()) {
      ++s.divided_count;
      continue;
    }
    ++s.singleton_count;
    const bool continues = n.parent != kNoNode && tree.node(n.parent).is_singleton();
    run[id] = continues ? run[n.parent] + 1 : 1;
    if (!continues) ++s.singleton_chain_count;
    s.longest_singleton_chain = std::max(s.longest_singleton_chain, run[id]);
  }
  return s;
}

OccupancyProfile occupancy_profile(const Tree& tree) {
  OccupancyProfile p;
  const int depth = tree.depth();
  const int dim = tree.dim();
  p.occupied.assign(depth + 1, 0);
  p.c.assign(depth + 1, 0.0);
  for (int l = 0; l <= depth; ++l) p.occupied[l] = tree.level_size(l);
  // Cells below a leaf are not nodes; count them from the leaf's points.
  const auto& pos = tree.points().positions;
  std::vector<std::array<std::uint64_t, 3>> cells;
  for (const Node& n : tree.nodes()) {
    if (!n.is_leaf() || n.depth == depth) continue;
    for (int l = n.depth + 1; l <= depth; ++l) {
      cells.clear();
      for (std::uint32_t k = n.begin; k < n.end; ++k) {
        std::array<std::uint64_t, 3> c{0, 0, 0};
        for (int a = 0; a < dim; ++a) c[a] = cell_of(pos[k][a], l);
        cells.push_back(c);
      }
      std::sort(cells.begin(), cells.end());
      p.occupied[l] += static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
    }
  }
  for (int l = 1; l <= depth; ++l) p.c[l] = std::log2(static_cast<double>(p.occupied[l])) / l;
  return p;
}

TreeStats tree_stats(const Tree& tree) {
  TreeStats s;
  s.depth = tree.depth();
  s.node_count = tree.node_count();
  for (const Node& n : tree.nodes()) {
    if (!n.is_leaf()) continue;
    ++s.leaf_count;
    s.max_leaf_points = std::max<std::size_t>(s.max_leaf_points, n.count());
  }
  return s;
}

}  // namespace afmm
