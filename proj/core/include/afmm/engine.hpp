#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afmm/cost_model.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/kernel.hpp"
#include "afmm/operators.hpp"
#include "afmm/point_set.hpp"
#include "afmm/tree.hpp"

namespace afmm {

struct FmmOptions {
  int order = 4;  // Chebyshev nodes per axis, >= 2
  /// Singleton nodes carry no coefficients and M2M/L2L hop between divided
  /// relatives. false selects the hop-by-hop variant.
  bool modified = true;
  CacheOptions cache{};
};

struct FmmResult {
  std::vector<double> potentials;  // input order
  OperationCounts counts;          // instrumented
  double setup_seconds = 0.0;      // tree, lists and operator cache
  double evaluate_seconds = 0.0;
  std::size_t transfer_matrices = 0;
  std::size_t m2l_matrices = 0;
};

/// Holds the expansion coefficients of one FMM evaluation and applies the
/// eight operators with their preconditions checked. Potentials are kept in
/// the tree's point order.
class FmmEvaluator {
 public:
  FmmEvaluator(const Tree& tree, const InteractionLists& lists, const OperatorCache& cache,
               const Kernel& kernel, bool modified = true);

  void p2m(NodeId leaf);
  void m2m(NodeId child, NodeId parent);
  void m2l(NodeId source, NodeId target);
  void p2l(NodeId source, NodeId target);
  void m2p(NodeId source, NodeId target);
  void l2l(NodeId parent, NodeId child);
  void l2p(NodeId leaf);
  void p2p(NodeId source, NodeId target);

  void upward_pass();
  void interaction_pass();
  void downward_pass();
  void run();

  /// The node whose coefficients stand for `id`.
  NodeId holder(NodeId id) const;
  bool has_coefficients(NodeId id) const;
  const Vector& multipole(NodeId id) const;
  const Vector& local(NodeId id) const;

  std::span<const double> potentials() const { return potentials_; }
  std::vector<double> potentials_in_input_order() const;
  const OperationCounts& counts() const { return counts_; }

 private:
  void require_member(ListKind kind, NodeId target, NodeId source, const char* op) const;
  void require_coefficients(NodeId id, const char* op) const;
  /// Multipole of `id` expressed on its own grid.
  Vector expanded_multipole(NodeId id) const;
  /// Adds a local expansion given on the grid of `id` to its holder.
  void add_local(NodeId id, const Vector& v);
  std::span<const Point> positions(NodeId id) const;
  std::span<const double> intensities(NodeId id) const;

  const Tree& tree_;
  const InteractionLists& lists_;
  const OperatorCache& cache_;
  const Kernel& kernel_;
  bool modified_;
  std::vector<Vector> multipole_;
  std::vector<Vector> local_;
  std::vector<double> potentials_;
  OperationCounts counts_;
};

/// Full pipeline over a fresh tree. Throws ParameterError for order < 2.
FmmResult run_fmm(const PointSet& points, const TreeConfig& config, const Kernel& kernel,
                  const FmmOptions& options = {});

inline constexpr std::size_t kDirectSumCap = 20000;

/// O(N^2) reference: f_j = sum over i with x_i != y_j of K(x_i, y_j) sigma_i.
/// Throws OracleCapError above `cap` points.
std::vector<double> direct_sum(const PointSet& points, const Kernel& kernel, std::size_t cap = kDirectSumCap);

/// ||a - b||_2 / ||b||_2; nullopt when ||b||_2 is zero.
std::optional<double> relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace afmm
