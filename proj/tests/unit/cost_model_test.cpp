#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include "json.hpp"

#include "afmm/cost_model.hpp"
#include "afmm/error.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/pointgen.hpp"
#include "oracles.hpp"

namespace afmm {
namespace {

struct Config {
  const char* name;
  PointSet points;
  TreeConfig tree;
};

std::vector<Config> matrix() {
  std::vector<Config> out;
  for (std::size_t t : {1u, 4u, 16u})
    for (int lmax : {2, 4, kUnboundedDepth}) {
      out.push_back({"uniform", generate_standard(DistributionKind::uniform, 800, 3), {t, lmax, 3}});
      out.push_back({"spiral", generate_standard(DistributionKind::spiral, 800, 3), {t, lmax, 3}});
      out.push_back({"cantor", sample_cantor(FractalSpec{DistributionKind::cantor, 0.5, 10, 3, 4}, 800), {t, lmax, 3}});
    }
  out.push_back({"stress", generate_singleton_stress(6, 2), {1, kUnboundedDepth, 1}});
  out.push_back({"cantor2d", sample_cantor(FractalSpec{DistributionKind::cantor, 0.3, 8, 2, 1}, 600), {2, 6, 2}});
  return out;
}

TEST(Counts, ListedEqualsStreamed) {
  for (const Config& c : matrix()) {
    const Tree t = build_tree(c.points, c.tree);
    const InteractionLists lists = build_interaction_lists(t);
    for (bool modified : {true, false}) EXPECT_EQ(count_operations(t, lists, modified), count_operations(t, modified)) << c.name;
  }
}

TEST(Counts, MatchDefinitions) {
  for (const Config& c : matrix()) {
    const Tree t = build_tree(c.points, c.tree);
    const InteractionLists lists = build_interaction_lists(t);
    const OperationCounts m = count_operations(t, lists, true), u = count_operations(t, lists, false);
    const auto n = static_cast<std::uint64_t>(c.points.size());
    EXPECT_EQ(m[Op::p2m], (OpTally{n, n}));
    EXPECT_EQ(m[Op::l2p], (OpTally{n, n}));
    EXPECT_EQ(u[Op::m2m].applications, t.node_count() - 1);
    // Modified hops: edges of the tree with singleton chains contracted.
    std::uint64_t contracted = 0;
    for (const Node& nd : t.nodes()) contracted += nd.is_divided() ? nd.num_children : 0;
    EXPECT_EQ(m[Op::m2m].applications, contracted);
    EXPECT_EQ(m[Op::l2l], m[Op::m2m]);
    std::uint64_t v = 0, p2p = 0;
    for (NodeId id = 0; id < t.node_count(); ++id) {
      v += lists.v(id).size();
      for (NodeId a : lists.u(id)) {
        std::uint64_t e = 0;
        for (std::uint32_t i = t.node(a).begin; i < t.node(a).end; ++i)
          for (std::uint32_t j = t.node(id).begin; j < t.node(id).end; ++j)
            e += t.points().positions[i] != t.points().positions[j];
        p2p += e;
      }
    }
    EXPECT_EQ(m[Op::m2l].applications, v);
    EXPECT_EQ(m[Op::p2p].units, p2p);
  }
}

TEST(Cycles, FormulaWithDefaults) {
  OperationCounts c;
  for (int i = 0; i < 8; ++i) c.ops[i] = {static_cast<std::uint64_t>(i + 1), static_cast<std::uint64_t>(10 * (i + 2))};
  const CostReport r = estimate_cycles(c, CostTable::defaults(), 4, 3);
  const double k = 19.0, r3 = 64.0, r4 = 256.0, r6 = 4096.0;
  // Op order: p2m, m2m, m2l, p2l, l2l, m2p, p2p, l2p.
  EXPECT_DOUBLE_EQ(r[Op::p2m], 1 * 10.0 + 20 * 1.25 * r4);
  EXPECT_DOUBLE_EQ(r[Op::m2m], 2 * 10.0 + 30 * 2.0 * r6);
  EXPECT_DOUBLE_EQ(r[Op::m2l], 3 * 10.0 + 40 * 2.0 * r6);
  EXPECT_DOUBLE_EQ(r[Op::p2l], 4 * 10.0 + 50 * (21.0 / 19.0) * k * r3);
  EXPECT_DOUBLE_EQ(r[Op::l2l], 5 * 10.0 + 60 * 2.0 * r6);
  EXPECT_DOUBLE_EQ(r[Op::m2p], 6 * 10.0 + 70 * (21.0 / 19.0) * k * r3);
  EXPECT_DOUBLE_EQ(r[Op::p2p], 7 * 3.0 + 80 * 1.0 * k);
  EXPECT_DOUBLE_EQ(r[Op::l2p], 8 * 10.0 + 90 * 1.25 * r4);
  double sum = 0.0;
  for (double x : r.cycles) sum += x;
  EXPECT_DOUBLE_EQ(r.total, sum);
}

TEST(Cycles, LinearInCounts) {
  const Tree t = build_tree(generate_standard(DistributionKind::spiral, 500, 1), TreeConfig{4, kUnboundedDepth, 3});
  OperationCounts c = count_operations(t);
  const CostReport a = estimate_cycles(c, CostTable::defaults(), 3);
  c += c;
  const CostReport b = estimate_cycles(c, CostTable::defaults(), 3);
  for (Op op : kAllOps) EXPECT_DOUBLE_EQ(b[op], 2.0 * a[op]);
}

TEST(Cycles, M2LScalesWithOrderToTheSixth) {
  CostTable t = CostTable::defaults();
  t.c[4] = 0.0;  // per-application M2L constant
  OperationCounts c;
  c[Op::m2l] = {100, 100};
  const double r2 = estimate_cycles(c, t, 2)[Op::m2l], r4 = estimate_cycles(c, t, 4)[Op::m2l];
  EXPECT_DOUBLE_EQ(r4 / r2, 64.0);
  EXPECT_DOUBLE_EQ(estimate_cycles(c, t, 4, 2)[Op::m2l] / estimate_cycles(c, t, 2, 2)[Op::m2l], 16.0);
}

TEST(Table, ShippedFileEqualsDefaults) {
  const CostTable f = CostTable::load(std::string(AFMM_DATA_DIR) + "/cost_table_v1.json");
  const CostTable d = CostTable::defaults();
  EXPECT_EQ(f.c, d.c);
  EXPECT_EQ(f.k, d.k);
}

TEST(Table, JsonRoundTripAndValidation) {
  CostTable t = CostTable::defaults();
  t.c[7] = 0.123456789012345678;
  t.k = 23.5;
  const CostTable back = CostTable::from_json(t.to_json());
  EXPECT_EQ(back.c, t.c);
  EXPECT_EQ(back.k, t.k);
  EXPECT_THROW(CostTable::from_json("{\"C\":[1,2,3]}"), InputError);
  EXPECT_THROW(CostTable::from_json("not json"), InputError);
  EXPECT_THROW(CostTable::from_json(R"({"C":[1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,-1]})"), ParameterError);
  EXPECT_THROW(CostTable::load("/nonexistent/table.json"), InputError);
}

TEST(Table, EnvironmentOverride) {
  const std::string path = ::testing::TempDir() + "afmm_table.json";
  CostTable t = CostTable::defaults();
  t.k = 7.0;
  std::ofstream(path) << t.to_json();
  ::setenv("FMM_COST_TABLE", path.c_str(), 1);
  EXPECT_EQ(CostTable::from_environment().k, 7.0);
  ::unsetenv("FMM_COST_TABLE");
  EXPECT_EQ(CostTable::from_environment().k, 19.0);
}

TEST(Bounds, ChargeLimits) {
  EXPECT_EQ(m2l_charge_limit(3), 1909u);
  EXPECT_EQ(m2l_charge_limit(2), 167u);
  EXPECT_EQ(m2l_charge_limit(1), 13u);
}

TEST(Bounds, HoldAcrossDistributionMatrix) {
  for (const Config& c : matrix()) {
    const Tree t = build_tree(c.points, c.tree);
    const InteractionLists lists = build_interaction_lists(t);
    const BoundsReport b = verify_complexity_bounds(t, lists, count_operations(t, lists));
    for (const BoundCheck& chk : b.checks) EXPECT_TRUE(chk.passed) << c.name << " " << chk.name << " " << chk.value;
    EXPECT_EQ(b.checks.size(), 7u);
  }
}

TEST(Bounds, DetectsBrokenCounts) {
  const Tree t = build_tree(generate_standard(DistributionKind::uniform, 200, 1), TreeConfig{4, kUnboundedDepth, 3});
  const InteractionLists lists = build_interaction_lists(t);
  OperationCounts c = count_operations(t, lists);
  c[Op::p2m].applications += 1;
  c[Op::m2m].applications = 10 * t.point_count();
  const BoundsReport b = verify_complexity_bounds(t, lists, c);
  EXPECT_FALSE(b.all_passed());
  EXPECT_FALSE(b["p2m_count"].passed);
  EXPECT_FALSE(b["m2m_pairs"].passed);
  EXPECT_TRUE(b["l2p_count"].passed);
  EXPECT_THROW(b["nope"], ContractViolation);
}

TEST(Report, CsvAndJson) {
  const Tree t = build_tree(generate_standard(DistributionKind::uniform, 100, 1), TreeConfig{4, kUnboundedDepth, 3});
  const CostReport r = estimate_cycles(count_operations(t), CostTable::defaults(), 3);
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "op,applications,units,cycles");
  EXPECT_NE(csv.find("\ntotal,,,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["ops"]["p2m"]["applications"].get<std::uint64_t>(), 100u);
  EXPECT_DOUBLE_EQ(j["total"].get<double>(), r.total);
}

}  // namespace
}  // namespace afmm
