#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ranges>
#include <span>
#include <vector>

#include "afmm/point_set.hpp"

namespace afmm {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Cells at this depth have edge 2^-40; deeper subdivision is refused.
inline constexpr int kMaxDepthCap = 40;
/// lmax sentinel for the conventional single-threshold rule.
inline constexpr int kUnboundedDepth = std::numeric_limits<int>::max();

/// Double-threshold subdivision: a node is split iff depth < max_depth and it
/// holds more than `threshold` points.
struct TreeConfig {
  std::size_t threshold = 1;
  int max_depth = kUnboundedDepth;
  int dim = 3;
  /// false selects extended-tree mode: every occupied leaf is pushed to the
  /// deepest level, so W and X lists are empty.
  bool enable_wx = true;

  bool bounded() const { return max_depth != kUnboundedDepth; }
  void validate() const;
};

/// Axis-aligned closed cube [lower, lower + edge]^dim.
struct Cube {
  Point lower{0.0, 0.0, 0.0};
  double edge = 1.0;

  Point center() const {
    return {lower[0] + edge / 2, lower[1] + edge / 2, lower[2] + edge / 2};
  }
  bool contains(const Point& p, int dim, double slack = 0.0) const;
};

/// One occupied node. Children are stored contiguously; every node owns the
/// contiguous range [begin, end) of the tree's reordered points.
struct Node {
  std::array<std::uint64_t, 3> anchor{0, 0, 0};  // cell index at `depth` along each axis
  int depth = 0;
  NodeId parent = kNoNode;
  NodeId first_child = kNoNode;
  std::uint32_t num_children = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  /// All points coincide and exceed the threshold; subdivision stopped.
  bool oversized = false;
  /// Deepest divided ancestor, or the root.
  NodeId divided_parent = kNoNode;
  /// First non-singleton node reached by walking down from here; the node
  /// itself unless it is a singleton. Holds the coefficients in the modified FMM.
  NodeId representative = kNoNode;
  std::uint32_t divided_children_begin = 0;
  std::uint32_t divided_children_end = 0;

  std::uint32_t count() const { return end - begin; }
  bool is_leaf() const { return num_children == 0; }
  bool is_singleton() const { return num_children == 1; }
  bool is_divided() const { return num_children >= 2; }
};

/// Closed-cube intersection of two cells (possibly at different depths).
bool adjacent(const Node& a, const Node& b, int dim);
/// Open-cube intersection of two cells.
bool interiors_overlap(const Node& a, const Node& b, int dim);
/// `desc` lies inside `anc` (or is it).
bool contains_cell(const Node& anc, const Node& desc, int dim);

class Tree {
 public:
  const TreeConfig& config() const { return config_; }
  int dim() const { return config_.dim; }

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t node_count() const { return nodes_.size(); }
  NodeId root() const { return 0; }

  /// Children are contiguous ids [first_child, first_child + num_children).
  std::ranges::iota_view<NodeId, NodeId> children(NodeId id) const {
    const Node& n = nodes_[id];
    const NodeId first = n.num_children ? n.first_child : 0;
    return {first, first + n.num_children};
  }
  std::span<const NodeId> divided_children(NodeId id) const;

  /// Points reordered so that every node owns a contiguous range.
  const PointSet& points() const { return points_; }
  /// original_index()[k] is the input index of reordered point k.
  std::span<const std::uint32_t> original_index() const { return original_index_; }

  /// Maximum depth of any node.
  int depth() const { return depth_; }
  /// Nodes are stored level by level; [level_begin(l), level_begin(l+1)) is level l.
  std::size_t level_begin(int level) const { return level_offsets_[level]; }
  std::size_t level_size(int level) const { return level_offsets_[level + 1] - level_offsets_[level]; }

  Cube cube(NodeId id) const;
  std::size_t point_count() const { return points_.size(); }

 private:
  friend Tree build_tree(const PointSet&, const TreeConfig&);
  friend Tree extend_tree(const Tree&);
  static Tree build(const PointSet& points, const TreeConfig& config, bool split_to_max_depth);
  void link_structure();

  TreeConfig config_;
  PointSet points_;
  std::vector<std::uint32_t> original_index_;
  std::vector<Node> nodes_;
  std::vector<NodeId> divided_children_;  // flat storage behind Node::divided_children_*
  std::vector<std::size_t> level_offsets_;
  int depth_ = 0;
};

/// Build the adaptive 2^d-tree. Throws InputError for points outside the unit
/// cube or points that cannot be separated within the depth cap, and
/// ParameterError for an invalid configuration. With enable_wx = false the
/// extended tree is returned.
Tree build_tree(const PointSet& points, const TreeConfig& config);

/// Push every occupied leaf shallower than lmax down to lmax (lmax = the
/// configured maximum depth, or the observed depth when unbounded).
Tree extend_tree(const Tree& tree);

struct StructureSummary {
  std::size_t divided_count = 0;
  std::size_t singleton_count = 0;
  std::size_t leaf_count = 0;
  std::size_t longest_singleton_chain = 0;
  std::size_t singleton_chain_count = 0;
  /// Sum over occupied non-leaf nodes of (occupied children - 1).
  std::size_t excess_children = 0;
};

StructureSummary classify_structure(const Tree& tree);

struct OccupancyProfile {
  /// N_ocp,l for l = 0..depth: occupied cells at level l, including those
  /// below shallower leaves.
  std::vector<std::size_t> occupied;
  std::vector<double> c;              // c_l = log2(N_ocp,l) / l for l >= 1; c[0] is unused (0)
};

OccupancyProfile occupancy_profile(const Tree& tree);

struct TreeStats {
  std::size_t leaf_count = 0;
  std::size_t max_leaf_points = 0;  // s(lmax)
  int depth = 0;
  std::size_t node_count = 0;
};

TreeStats tree_stats(const Tree& tree);

}  // namespace afmm
