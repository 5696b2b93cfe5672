#include "afmm/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "afmm/error.hpp"

namespace afmm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FmmEvaluator::FmmEvaluator(const Tree& tree, const InteractionLists& lists, const OperatorCache& cache,
                           const Kernel& kernel, bool modified)
    : tree_(tree), lists_(lists), cache_(cache), kernel_(kernel), modified_(modified) {
  if (cache.basis().dim() != tree.dim()) throw ContractViolation("operator cache built for another dimension");
  const int size = cache.basis().size();
  multipole_.resize(tree.node_count());
  local_.resize(tree.node_count());
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    if (holder(id) != id) continue;
    multipole_[id] = Vector::Zero(size);
    local_[id] = Vector::Zero(size);
  }
  potentials_.assign(tree.point_count(), 0.0);
}

NodeId FmmEvaluator::holder(NodeId id) const { return modified_ ? tree_.node(id).representative : id; }

bool FmmEvaluator::has_coefficients(NodeId id) const { return holder(id) == id; }

const Vector& FmmEvaluator::multipole(NodeId id) const {
  require_coefficients(id, "multipole");
  return multipole_[id];
}

const Vector& FmmEvaluator::local(NodeId id) const {
  require_coefficients(id, "local");
  return local_[id];
}

void FmmEvaluator::require_coefficients(NodeId id, const char* op) const {
  if (id >= tree_.node_count()) throw ContractViolation(std::string(op) + ": node id out of range");
  if (!has_coefficients(id))
    throw ContractViolation(std::string(op) + ": singleton node " + std::to_string(id) + " carries no coefficients");
}

void FmmEvaluator::require_member(ListKind kind, NodeId target, NodeId source, const char* op) const {
  if (target >= tree_.node_count() || source >= tree_.node_count())
    throw ContractViolation(std::string(op) + ": node id out of range");
  const auto list = lists_.list(kind, target);
  if (!std::binary_search(list.begin(), list.end(), source))
    throw ContractViolation(std::string(op) + ": node " + std::to_string(source) +
                            " is not in the required list of node " + std::to_string(target));
}

std::span<const Point> FmmEvaluator::positions(NodeId id) const {
  const Node& n = tree_.node(id);
  return std::span<const Point>(tree_.points().positions).subspan(n.begin, n.count());
}

std::span<const double> FmmEvaluator::intensities(NodeId id) const {
  const Node& n = tree_.node(id);
  return std::span<const double>(tree_.points().intensities).subspan(n.begin, n.count());
}

Vector FmmEvaluator::expanded_multipole(NodeId id) const {
  const NodeId h = holder(id);
  if (h == id) return multipole_[id];
  const Matrix& t = cache_.transfer(descent(tree_.node(id), tree_.node(h), tree_.dim()));
  return t * multipole_[h];
}

void FmmEvaluator::add_local(NodeId id, const Vector& v) {
  const NodeId h = holder(id);
  if (h == id) {
    local_[id] += v;
    return;
  }
  const Matrix& t = cache_.transfer(descent(tree_.node(id), tree_.node(h), tree_.dim()));
  local_[h].noalias() += t.transpose() * v;
}

void FmmEvaluator::p2m(NodeId leaf) {
  if (leaf >= tree_.node_count() || !tree_.node(leaf).is_leaf()) throw ContractViolation("p2m: node is not a leaf");
  apply_p2m(cache_.basis(), tree_.cube(leaf), positions(leaf), intensities(leaf), multipole_[leaf]);
  auto& c = counts_[Op::p2m];
  c.applications += tree_.node(leaf).count();
  c.units += tree_.node(leaf).count();
}

void FmmEvaluator::l2p(NodeId leaf) {
  if (leaf >= tree_.node_count() || !tree_.node(leaf).is_leaf()) throw ContractViolation("l2p: node is not a leaf");
  const Node& n = tree_.node(leaf);
  apply_l2p(cache_.basis(), tree_.cube(leaf), local_[leaf], positions(leaf),
            std::span<double>(potentials_).subspan(n.begin, n.count()));
  auto& c = counts_[Op::l2p];
  c.applications += n.count();
  c.units += n.count();
}

void FmmEvaluator::m2m(NodeId child, NodeId parent) {
  require_coefficients(parent, "m2m");
  require_coefficients(child, "m2m");
  const Node& p = tree_.node(parent);
  if (modified_) {
    const auto dc = tree_.divided_children(parent);
    if (!p.is_divided() || std::find(dc.begin(), dc.end(), child) == dc.end())
      throw ContractViolation("m2m: child is not a divided child of the parent");
  } else if (tree_.node(child).parent != parent) {
    throw ContractViolation("m2m: not a parent-child pair");
  }
  const Matrix& t = cache_.transfer(descent(p, tree_.node(child), tree_.dim()));
  multipole_[parent].noalias() += t * multipole_[child];
  ++counts_[Op::m2m].applications;
  ++counts_[Op::m2m].units;
}

void FmmEvaluator::l2l(NodeId parent, NodeId child) {
  require_coefficients(parent, "l2l");
  require_coefficients(child, "l2l");
  const Node& p = tree_.node(parent);
  if (modified_) {
    const auto dc = tree_.divided_children(parent);
    if (!p.is_divided() || std::find(dc.begin(), dc.end(), child) == dc.end())
      throw ContractViolation("l2l: child is not a divided child of the parent");
  } else if (tree_.node(child).parent != parent) {
    throw ContractViolation("l2l: not a parent-child pair");
  }
  const Matrix& t = cache_.transfer(descent(p, tree_.node(child), tree_.dim()));
  local_[child].noalias() += t.transpose() * local_[parent];
  ++counts_[Op::l2l].applications;
  ++counts_[Op::l2l].units;
}

void FmmEvaluator::m2l(NodeId source, NodeId target) {
  require_member(ListKind::v, target, source, "m2l");
  const M2LOperator op = cache_.m2l(offset_key(tree_.node(target), tree_.node(source), tree_.dim()));
  if (has_coefficients(source) && has_coefficients(target)) {
    apply_m2l(op, multipole_[source], local_[target]);
  } else {
    Vector v = Vector::Zero(cache_.basis().size());
    apply_m2l(op, expanded_multipole(source), v);
    add_local(target, v);
  }
  ++counts_[Op::m2l].applications;
  ++counts_[Op::m2l].units;
}

void FmmEvaluator::m2p(NodeId source, NodeId target) {
  require_member(ListKind::w, target, source, "m2p");
  const Node& t = tree_.node(target);
  const auto grid = cache_.basis().grid(tree_.cube(source));
  apply_m2p(kernel_, grid, expanded_multipole(source), positions(target),
            std::span<double>(potentials_).subspan(t.begin, t.count()));
  ++counts_[Op::m2p].applications;
  counts_[Op::m2p].units += t.count();
}

void FmmEvaluator::p2l(NodeId source, NodeId target) {
  require_member(ListKind::x, target, source, "p2l");
  const auto grid = cache_.basis().grid(tree_.cube(target));
  Vector v = Vector::Zero(cache_.basis().size());
  apply_p2l(kernel_, positions(source), intensities(source), grid, v);
  add_local(target, v);
  ++counts_[Op::p2l].applications;
  counts_[Op::p2l].units += tree_.node(source).count();
}

void FmmEvaluator::p2p(NodeId source, NodeId target) {
  require_member(ListKind::u, target, source, "p2p");
  const Node& t = tree_.node(target);
  const std::uint64_t evals = apply_p2p(kernel_, positions(source), intensities(source), positions(target),
                                        std::span<double>(potentials_).subspan(t.begin, t.count()));
  ++counts_[Op::p2p].applications;
  counts_[Op::p2p].units += evals;
}

void FmmEvaluator::upward_pass() {
  for (NodeId id = 0; id < tree_.node_count(); ++id)
    if (tree_.node(id).is_leaf()) p2m(id);
  for (NodeId id = static_cast<NodeId>(tree_.node_count()); id-- > 0;) {
    const Node& n = tree_.node(id);
    if (modified_) {
      if (n.is_divided())
        for (NodeId c : tree_.divided_children(id)) m2m(c, id);
    } else if (id != tree_.root()) {
      m2m(id, n.parent);
    }
  }
}

void FmmEvaluator::interaction_pass() {
  for (NodeId id = 0; id < tree_.node_count(); ++id) {
    for (NodeId s : lists_.v(id)) m2l(s, id);
    for (NodeId s : lists_.x(id)) p2l(s, id);
    for (NodeId s : lists_.w(id)) m2p(s, id);
  }
}

void FmmEvaluator::downward_pass() {
  for (NodeId id = 0; id < tree_.node_count(); ++id) {
    const Node& n = tree_.node(id);
    if (modified_) {
      if (n.is_divided())
        for (NodeId c : tree_.divided_children(id)) l2l(id, c);
    } else if (id != tree_.root()) {
      l2l(n.parent, id);
    }
  }
  for (NodeId id = 0; id < tree_.node_count(); ++id)
    if (tree_.node(id).is_leaf()) l2p(id);
  for (NodeId id = 0; id < tree_.node_count(); ++id)
    for (NodeId s : lists_.u(id)) p2p(s, id);
}

void FmmEvaluator::run() {
  upward_pass();
  interaction_pass();
  downward_pass();
}

std::vector<double> FmmEvaluator::potentials_in_input_order() const {
  std::vector<double> out(potentials_.size());
  const auto index = tree_.original_index();
  for (std::size_t k = 0; k < potentials_.size(); ++k) out[index[k]] = potentials_[k];
  return out;
}

FmmResult run_fmm(const PointSet& points, const TreeConfig& config, const Kernel& kernel, const FmmOptions& options) {
  if (options.order < 2) throw ParameterError("Chebyshev order r must be >= 2");
  const auto start = std::chrono::steady_clock::now();
  const Tree tree = build_tree(points, config);
  const InteractionLists lists = build_interaction_lists(tree);
  const OperatorCache cache = precompute_cache(tree, lists, kernel, options.order, options.modified, options.cache);
  FmmResult result;
  result.setup_seconds = seconds_since(start);
  result.transfer_matrices = cache.transfer_count();
  result.m2l_matrices = cache.m2l_count();

  const auto eval_start = std::chrono::steady_clock::now();
  FmmEvaluator evaluator(tree, lists, cache, kernel, options.modified);
  evaluator.run();
  result.potentials = evaluator.potentials_in_input_order();
  result.counts = evaluator.counts();
  result.evaluate_seconds = seconds_since(eval_start);
  return result;
}

std::vector<double> direct_sum(const PointSet& points, const Kernel& kernel, std::size_t cap) {
  if (points.size() > cap)
    throw OracleCapError("direct sum refused: " + std::to_string(points.size()) + " points exceed the cap of " +
                         std::to_string(cap));
  const auto& x = points.positions;
  const auto& sigma = points.intensities;
  std::vector<double> f(points.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double s = f[j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == x[j]) continue;
      s += kernel(x[i], x[j]) * sigma[i];
    }
    f[j] = s;
  }
  return f;
}

std::optional<double> relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("relative_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) return std::nullopt;
  return std::sqrt(num / den);
}

}  // namespace afmm
