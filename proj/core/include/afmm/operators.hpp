#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "afmm/chebyshev.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/kernel.hpp"
#include "afmm/tree.hpp"

namespace afmm {

/// Where a descendant cell sits inside an ancestor: `gap` levels down, at
/// integer position `position` (in descendant-size cells) within the ancestor.
struct Descent {
  int gap = 0;
  std::array<std::uint64_t, 3> position{0, 0, 0};
  auto operator<=>(const Descent&) const = default;
};

Descent descent(const Node& ancestor, const Node& descendant, int dim);

/// Same-level displacement between a target and a source cell.
struct OffsetKey {
  int level = 0;
  std::array<std::int64_t, 3> offset{0, 0, 0};
  auto operator<=>(const OffsetKey&) const = default;
};

OffsetKey offset_key(const Node& target, const Node& source, int dim);

/// Ancestor multipole += T * descendant multipole, with
/// T(m, n) = S_ancestor(m; descendant grid node n). Exact for any gap, so a
/// direct hop equals the product of the one-level hops.
Matrix transfer_matrix(const ChebyshevBasis& basis, const Descent& d);

/// M(m, n) = K(source node n, target node m) for cells of edge 2^-level.
Matrix m2l_matrix(const Kernel& kernel, const ChebyshevBasis& basis, const OffsetKey& key);

struct CacheOptions {
  /// Reuse the level-0 M2L matrices scaled by 2^(-level p) for kernels of
  /// homogeneity degree p. Off by default.
  bool homogeneous_scaling = false;
};

/// A cached M2L matrix and the scalar it has to be multiplied by.
struct M2LOperator {
  const Matrix* matrix = nullptr;
  double scale = 1.0;
};

/// Precomputed transfer and M2L matrices. Immutable after construction.
class OperatorCache {
 public:
  OperatorCache(const ChebyshevBasis& basis, const CacheOptions& options, int dim);

  const ChebyshevBasis& basis() const { return basis_; }
  const CacheOptions& options() const { return options_; }

  const Matrix& transfer(const Descent& d) const;
  M2LOperator m2l(const OffsetKey& key) const;

  bool has_transfer(const Descent& d) const { return transfers_.count(d) > 0; }
  bool has_m2l(const OffsetKey& key) const;

  std::size_t transfer_count() const { return transfers_.size(); }
  std::size_t m2l_count() const { return m2l_.size(); }
  /// Number of distinct offsets cached for one level (all levels share one
  /// set under homogeneous scaling).
  std::size_t offsets_at_level(int level) const;

  void add_transfer(const Descent& d);
  void add_m2l(const Kernel& kernel, const OffsetKey& key);

 private:
  OffsetKey storage_key(const OffsetKey& key) const;

  ChebyshevBasis basis_;
  CacheOptions options_;
  int dim_;
  std::optional<double> degree_;
  std::map<Descent, Matrix> transfers_;
  std::map<OffsetKey, Matrix> m2l_;
};

/// Materialise every transfer and M2L matrix the FMM over `tree` will touch.
/// With `modified` the M2M/L2L hops go from divided nodes straight to their
/// divided children and singleton nodes reach their coefficient holder
/// through one direct transfer; otherwise only one-level transfers are built.
OperatorCache precompute_cache(const Tree& tree, const InteractionLists& lists, const Kernel& kernel,
                               int order, bool modified = true, const CacheOptions& options = {});

// Low-level kernels. Coefficient vectors have basis.size() entries.

void apply_p2m(const ChebyshevBasis& basis, const Cube& cube, std::span<const Point> points,
               std::span<const double> sigma, Vector& multipole);
void apply_l2p(const ChebyshevBasis& basis, const Cube& cube, const Vector& local,
               std::span<const Point> points, std::span<double> potentials);
void apply_m2l(const M2LOperator& op, const Vector& multipole, Vector& local);
/// f_j += sum_m K(grid_m, y_j) w_m
void apply_m2p(const Kernel& kernel, std::span<const Point> grid, const Vector& multipole,
               std::span<const Point> targets, std::span<double> potentials);
/// local_m += sum_i K(x_i, grid_m) sigma_i
void apply_p2l(const Kernel& kernel, std::span<const Point> sources, std::span<const double> sigma,
               std::span<const Point> grid, Vector& local);
/// f_j += sum_i K(x_i, y_j) sigma_i, skipping coincident pairs. Returns the
/// number of kernel evaluations.
std::uint64_t apply_p2p(const Kernel& kernel, std::span<const Point> sources,
                        std::span<const double> sigma, std::span<const Point> targets,
                        std::span<double> potentials);

}  // namespace afmm
