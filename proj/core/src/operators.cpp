#include "afmm/operators.hpp"

#include <cmath>
#include <string>

#include "afmm/error.hpp"

namespace afmm {

Descent descent(const Node& ancestor, const Node& descendant, int dim) {
  if (descendant.depth < ancestor.depth) throw ContractViolation("descent: node is shallower than its ancestor");
  Descent d;
  d.gap = descendant.depth - ancestor.depth;
  for (int a = 0; a < dim; ++a) {
    const std::uint64_t base = ancestor.anchor[a] << d.gap;
    if (descendant.anchor[a] < base || descendant.anchor[a] - base >= (std::uint64_t{1} << d.gap))
      throw ContractViolation("descent: cell is not inside the ancestor");
    d.position[a] = descendant.anchor[a] - base;
  }
  return d;
}

OffsetKey offset_key(const Node& target, const Node& source, int dim) {
  if (target.depth != source.depth) throw ContractViolation("offset_key: cells at different depths");
  OffsetKey key;
  key.level = target.depth;
  for (int a = 0; a < dim; ++a)
    key.offset[a] = static_cast<std::int64_t>(source.anchor[a]) - static_cast<std::int64_t>(target.anchor[a]);
  return key;
}

Matrix transfer_matrix(const ChebyshevBasis& basis, const Descent& d) {
  const int n = basis.size();
  const int dim = basis.dim();
  const double scale = std::ldexp(1.0, -d.gap);
  Matrix t(n, n);
  std::vector<double> col(n);
  for (int j = 0; j < n; ++j) {
    const Point ref = basis.reference_node(j);
    Point y{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a)
      y[a] = -1.0 + 2.0 * static_cast<double>(d.position[a]) * scale + (ref[a] + 1.0) * scale;
    basis.weights(y, col);
    for (int i = 0; i < n; ++i) t(i, j) = col[i];
  }
  return t;
}

Matrix m2l_matrix(const Kernel& kernel, const ChebyshevBasis& basis, const OffsetKey& key) {
  const int dim = basis.dim();
  const double h = std::ldexp(1.0, -key.level);
  Cube target{{0.0, 0.0, 0.0}, h};
  Cube source{{0.0, 0.0, 0.0}, h};
  for (int a = 0; a < dim; ++a) source.lower[a] = static_cast<double>(key.offset[a]) * h;
  const auto tg = basis.grid(target);
  const auto sg = basis.grid(source);
  Matrix m(basis.size(), basis.size());
  for (int j = 0; j < basis.size(); ++j)
    for (int i = 0; i < basis.size(); ++i) {
      const double k = kernel(sg[j], tg[i]);
      if (!std::isfinite(k)) throw NumericError("m2l_matrix: kernel is not finite between separated cells");
      m(i, j) = k;
    }
  return m;
}

OperatorCache::OperatorCache(const ChebyshevBasis& basis, const CacheOptions& options, int dim)
    : basis_(basis), options_(options), dim_(dim) {}

OffsetKey OperatorCache::storage_key(const OffsetKey& key) const {
  if (!options_.homogeneous_scaling) return key;
  OffsetKey k = key;
  k.level = 0;
  return k;
}

const Matrix& OperatorCache::transfer(const Descent& d) const {
  auto it = transfers_.find(d);
  if (it == transfers_.end()) throw ContractViolation("transfer matrix not in cache");
  return it->second;
}

M2LOperator OperatorCache::m2l(const OffsetKey& key) const {
  auto it = m2l_.find(storage_key(key));
  if (it == m2l_.end()) throw ContractViolation("M2L matrix not in cache");
  M2LOperator op{&it->second, 1.0};
  if (options_.homogeneous_scaling) op.scale = std::exp2(-static_cast<double>(key.level) * *degree_);
  return op;
}

bool OperatorCache::has_m2l(const OffsetKey& key) const { return m2l_.count(storage_key(key)) > 0; }

std::size_t OperatorCache::offsets_at_level(int level) const {
  const int stored = options_.homogeneous_scaling ? 0 : level;
  std::size_t n = 0;
  for (const auto& [key, m] : m2l_)
    if (key.level == stored) ++n;
  return n;
}

void OperatorCache::add_transfer(const Descent& d) {
  if (transfers_.count(d)) return;
  transfers_.emplace(d, transfer_matrix(basis_, d));
}

void OperatorCache::add_m2l(const Kernel& kernel, const OffsetKey& key) {
  if (options_.homogeneous_scaling) {
    if (!kernel.homogeneity_degree())
      throw ParameterError("homogeneous scaling needs a homogeneous kernel, got " + std::string(kernel.name()));
    degree_ = kernel.homogeneity_degree();
  }
  const OffsetKey k = storage_key(key);
  if (m2l_.count(k)) return;
  m2l_.emplace(k, m2l_matrix(kernel, basis_, k));
}

OperatorCache precompute_cache(const Tree& tree, const InteractionLists& lists, const Kernel& kernel,
                               int order, bool modified, const CacheOptions& options) {
  if (!kernel.translation_invariant())
    throw ParameterError("offset-keyed M2L caching needs a translation-invariant kernel");
  const int dim = tree.dim();
  OperatorCache cache(ChebyshevBasis(order, dim), options, dim);
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const Node& n = tree.node(id);
    if (modified) {
      if (n.is_divided())
        for (NodeId c : tree.divided_children(id)) cache.add_transfer(descent(n, tree.node(c), dim));
      if (n.is_singleton() && (!lists.v(id).empty() || !lists.x(id).empty()))
        cache.add_transfer(descent(n, tree.node(n.representative), dim));
    } else if (id != tree.root()) {
      cache.add_transfer(descent(tree.node(n.parent), n, dim));
    }
    for (NodeId s : lists.v(id)) cache.add_m2l(kernel, offset_key(n, tree.node(s), dim));
  }
  return cache;
}

void apply_p2m(const ChebyshevBasis& basis, const Cube& cube, std::span<const Point> points,
               std::span<const double> sigma, Vector& multipole) {
  std::vector<double> w(basis.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    basis.weights(to_reference(points[i], cube, basis.dim()), w);
    for (int m = 0; m < basis.size(); ++m) multipole[m] += w[m] * sigma[i];
  }
}

void apply_l2p(const ChebyshevBasis& basis, const Cube& cube, const Vector& local,
               std::span<const Point> points, std::span<double> potentials) {
  std::vector<double> w(basis.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    basis.weights(to_reference(points[j], cube, basis.dim()), w);
    double s = 0.0;
    for (int m = 0; m < basis.size(); ++m) s += w[m] * local[m];
    potentials[j] += s;
  }
}

void apply_m2l(const M2LOperator& op, const Vector& multipole, Vector& local) {
  if (op.scale == 1.0) {
    local.noalias() += *op.matrix * multipole;
  } else {
    local.noalias() += op.scale * (*op.matrix * multipole);
  }
}

void apply_m2p(const Kernel& kernel, std::span<const Point> grid, const Vector& multipole,
               std::span<const Point> targets, std::span<double> potentials) {
  for (std::size_t j = 0; j < targets.size(); ++j) {
    double s = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) s += kernel(grid[m], targets[j]) * multipole[m];
    potentials[j] += s;
  }
}

void apply_p2l(const Kernel& kernel, std::span<const Point> sources, std::span<const double> sigma,
               std::span<const Point> grid, Vector& local) {
  for (std::size_t m = 0; m < grid.size(); ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) s += kernel(sources[i], grid[m]) * sigma[i];
    local[m] += s;
  }
}

std::uint64_t apply_p2p(const Kernel& kernel, std::span<const Point> sources, std::span<const double> sigma,
                        std::span<const Point> targets, std::span<double> potentials) {
  std::uint64_t evals = 0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    double f = potentials[j];
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i] == targets[j]) continue;
      f += kernel(sources[i], targets[j]) * sigma[i];
      ++evals;
    }
    potentials[j] = f;
  }
  return evals;
}

}  // namespace afmm
