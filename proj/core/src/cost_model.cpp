#include "afmm/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "afmm/error.hpp"
#include "json.hpp"

namespace afmm {

namespace {

constexpr std::array<std::string_view, 8> kOpNames{"p2m", "m2m", "m2l", "p2l", "l2l", "m2p", "p2p", "l2p"};

// Table row of each Op (rows follow P2M, M2M, M2L, P2L, L2L, L2P, M2P, P2P).
constexpr std::array<int, 8> kTableRow{0, 1, 2, 3, 4, 6, 7, 5};

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CountingSink final : public InteractionSink {
 public:
  CountingSink(const Tree& tree, OperationCounts& counts) : tree_(tree), counts_(counts) {}
  void on_u(NodeId t, NodeId s) override {
    auto& c = counts_[Op::p2p];
    ++c.applications;
    c.units += p2p_evaluations(tree_, t, s);
  }
  void on_v(NodeId, NodeId) override {
    auto& c = counts_[Op::m2l];
    ++c.applications;
    ++c.units;
  }
  void on_w(NodeId t, NodeId) override {
    auto& c = counts_[Op::m2p];
    ++c.applications;
    c.units += tree_.node(t).count();
  }
  void on_x(NodeId, NodeId s) override {
    auto& c = counts_[Op::p2l];
    ++c.applications;
    c.units += tree_.node(s).count();
  }

 private:
  const Tree& tree_;
  OperationCounts& counts_;
};

void add_traversal_counts(const Tree& tree, bool modified, OperationCounts& counts) {
  const auto n = static_cast<std::uint64_t>(tree.point_count());
  counts[Op::p2m] = {n, n};
  counts[Op::l2p] = {n, n};
  std::uint64_t hops = 0;
  if (modified) {
    for (NodeId id = 0; id < tree.node_count(); ++id)
      if (tree.node(id).is_divided()) hops += tree.divided_children(id).size();
  } else {
    hops = tree.node_count() - 1;
  }
  counts[Op::m2m] = {hops, hops};
  counts[Op::l2l] = {hops, hops};
}

NodeId deepest_divided(const Tree& tree, NodeId id) {
  const Node& n = tree.node(id);
  if (n.is_divided() || n.divided_parent == kNoNode) return id;
  return n.divided_parent;
}

}  // namespace

std::string_view to_string(Op op) { return kOpNames[static_cast<int>(op)]; }

CostTable CostTable::defaults() {
  CostTable t;
  t.c = {10.0, 1.25,           // P2M
         10.0, 2.0,            // M2M
         10.0, 2.0,            // M2L
         10.0, 21.0 / 19.0,    // P2L
         10.0, 2.0,            // L2L
         10.0, 1.25,           // L2P
         10.0, 21.0 / 19.0,    // M2P
         3.0,  1.0};           // P2P
  t.k = 19.0;
  return t;
}

CostTable CostTable::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("cost table: ") + e.what());
  }
  if (!j.contains("C") || !j["C"].is_array() || j["C"].size() != 16)
    throw InputError("cost table: \"C\" must be an array of 16 numbers");
  CostTable t;
  for (int i = 0; i < 16; ++i) {
    if (!j["C"][i].is_number()) throw InputError("cost table: \"C\" must be an array of 16 numbers");
    t.c[i] = j["C"][i].get<double>();
  }
  if (j.contains("k")) {
    if (!j["k"].is_number()) throw InputError("cost table: \"k\" must be a number");
    t.k = j["k"].get<double>();
  }
  t.validate();
  return t;
}

CostTable CostTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cost table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

CostTable CostTable::from_environment() {
  const char* path = std::getenv("FMM_COST_TABLE");
  if (path == nullptr || *path == '\0') return defaults();
  return load(path);
}

std::string CostTable::to_json() const {
  nlohmann::json j;
  j["C"] = c;
  j["k"] = k;
  return j.dump(2);
}

void CostTable::validate() const {
  for (double v : c)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("cost table constants must be finite and >= 0");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ParameterError("cost table k must be finite and >= 0");
}

std::pair<double, double> CostTable::constants(Op op) const {
  const int row = kTableRow[static_cast<int>(op)];
  return {c[2 * row], c[2 * row + 1]};
}

std::uint64_t p2p_evaluations(const Tree& tree, NodeId target, NodeId source) {
  const Node& t = tree.node(target);
  const Node& s = tree.node(source);
  if (target != source) return static_cast<std::uint64_t>(t.count()) * s.count();
  // Only points of one leaf can coincide.
  const auto& pos = tree.points().positions;
  std::vector<Point> pts(pos.begin() + t.begin, pos.begin() + t.end);
  std::sort(pts.begin(), pts.end());
  std::uint64_t coincident = 0;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    coincident += static_cast<std::uint64_t>(j - i) * (j - i);
    i = j;
  }
  return static_cast<std::uint64_t>(t.count()) * t.count() - coincident;
}

OperationCounts count_operations(const Tree& tree, const InteractionLists& lists, bool modified) {
  OperationCounts counts;
  add_traversal_counts(tree, modified, counts);
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const auto v = lists.v(id);
    counts[Op::m2l].applications += v.size();
    counts[Op::m2l].units += v.size();
    for (NodeId a : lists.u(id)) {
      ++counts[Op::p2p].applications;
      counts[Op::p2p].units += p2p_evaluations(tree, id, a);
    }
    for (NodeId a : lists.w(id)) {
      (void)a;
      ++counts[Op::m2p].applications;
      counts[Op::m2p].units += tree.node(id).count();
    }
    for (NodeId a : lists.x(id)) {
      ++counts[Op::p2l].applications;
      counts[Op::p2l].units += tree.node(a).count();
    }
  }
  return counts;
}

OperationCounts count_operations(const Tree& tree, bool modified) {
  OperationCounts counts;
  add_traversal_counts(tree, modified, counts);
  CountingSink sink(tree, counts);
  enumerate_interactions(tree, sink);
  return counts;
}

double unit_weight(Op op, const CostTable& table, int order, int dim) {
  const double r = order;
  switch (op) {
    case Op::p2m:
    case Op::l2p:
      return ipow(r, dim + 1);
    case Op::m2m:
    case Op::m2l:
    case Op::l2l:
      return ipow(r, 2 * dim);
    case Op::p2l:
    case Op::m2p:
      return table.k * ipow(r, dim);
    case Op::p2p:
      return table.k;
  }
  return 0.0;
}

CostReport estimate_cycles(const OperationCounts& counts, const CostTable& table, int order, int dim) {
  CostReport report;
  report.counts = counts;
  report.order = order;
  report.dim = dim;
  for (Op op : kAllOps) {
    const auto [per_app, per_unit] = table.constants(op);
    const OpTally& c = counts[op];
    const double cycles = static_cast<double>(c.applications) * per_app +
                          static_cast<double>(c.units) * per_unit * unit_weight(op, table, order, dim);
    report.cycles[static_cast<int>(op)] = cycles;
    report.total += cycles;
  }
  return report;
}

bool BoundsReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
}

const BoundCheck& BoundsReport::operator[](std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw ContractViolation("no bound check named " + std::string(name));
}

std::uint64_t m2l_charge_limit(int dim) {
  const auto p = [](std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  return (p(6, dim) - p(3, dim)) + p(2, dim) * (p(6, dim) - 1);
}

BoundsReport verify_complexity_bounds(const Tree& tree, const InteractionLists& lists,
                                      const OperationCounts& counts) {
  BoundsReport report;
  const int dim = tree.dim();
  const StructureSummary summary = classify_structure(tree);
  const auto leaves = static_cast<double>(summary.leaf_count);

  {
    const Tree ext = extend_tree(tree);
    const StructureSummary es = classify_structure(ext);
    BoundCheck c{"branching_identity", es.excess_children + 1 == es.leaf_count,
                 static_cast<double>(es.excess_children), static_cast<double>(es.leaf_count) - 1.0};
    report.checks.push_back(c);
  }
  report.checks.push_back({"divided_count", summary.divided_count + 1 <= summary.leaf_count,
                           static_cast<double>(summary.divided_count), leaves - 1.0});
  report.checks.push_back({"m2m_pairs", counts[Op::m2m].applications < 2 * summary.leaf_count,
                           static_cast<double>(counts[Op::m2m].applications), 2.0 * leaves});

  {
    std::vector<std::uint64_t> charge(tree.node_count(), 0);
    for (NodeId b = 0; b < tree.node_count(); ++b) {
      for (NodeId a : lists.v(b)) {
        if (a < b) continue;
        const NodeId da = deepest_divided(tree, a), db = deepest_divided(tree, b);
        const int depth_a = tree.node(da).depth, depth_b = tree.node(db).depth;
        if (depth_a >= depth_b) ++charge[da];
        if (depth_b >= depth_a && db != da) ++charge[db];
      }
    }
    const auto it = std::max_element(charge.begin(), charge.end());
    BoundCheck c{"m2l_charge", true, 0.0, static_cast<double>(m2l_charge_limit(dim))};
    if (it != charge.end()) {
      c.value = static_cast<double>(*it);
      c.passed = *it <= m2l_charge_limit(dim);
      if (!c.passed) c.offending = static_cast<NodeId>(it - charge.begin());
    }
    report.checks.push_back(c);
  }

  {
    std::uint64_t limit = 1;
    for (int a = 0; a < dim; ++a) limit *= 3;
    limit -= 1;
    BoundCheck c{"leaf_out_degree", true, 0.0, static_cast<double>(limit)};
    for (NodeId id = 0; id < tree.node_count(); ++id) {
      const Node& n = tree.node(id);
      if (!n.is_leaf()) continue;
      std::uint64_t deg = 0;
      for (NodeId a : lists.u(id))
        if (a != id && tree.node(a).depth <= n.depth) ++deg;
      if (static_cast<double>(deg) > c.value) c.value = static_cast<double>(deg);
      if (deg > limit && c.passed) {
        c.passed = false;
        c.offending = id;
      }
    }
    report.checks.push_back(c);
  }

  const auto n = static_cast<std::uint64_t>(tree.point_count());
  report.checks.push_back({"p2m_count", counts[Op::p2m].applications == n,
                           static_cast<double>(counts[Op::p2m].applications), static_cast<double>(n)});
  report.checks.push_back({"l2p_count", counts[Op::l2p].applications == n,
                           static_cast<double>(counts[Op::l2p].applications), static_cast<double>(n)});
  return report;
}

std::string to_csv(const CostReport& report) {
  std::string out = "op,applications,units,cycles\n";
  for (Op op : kAllOps) {
    const OpTally& c = report.counts[op];
    out += std::string(to_string(op)) + "," + std::to_string(c.applications) + "," + std::to_string(c.units) +
           "," + format_double(report[op]) + "\n";
  }
  out += "total,,," + format_double(report.total) + "\n";
  return out;
}

std::string to_json(const CostReport& report) {
  nlohmann::json j;
  j["order"] = report.order;
  j["dim"] = report.dim;
  for (Op op : kAllOps) {
    const OpTally& c = report.counts[op];
    j["ops"][std::string(to_string(op))] = {
        {"applications", c.applications}, {"units", c.units}, {"cycles", report[op]}};
  }
  j["total"] = report.total;
  return j.dump(2);
}

}  // namespace afmm
