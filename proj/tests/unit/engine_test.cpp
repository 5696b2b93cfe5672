#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "afmm/cost_model.hpp"
#include "afmm/engine.hpp"
#include "afmm/error.hpp"
#include "afmm/pointgen.hpp"
#include "oracles.hpp"

namespace afmm {
namespace {

PointSet with_random_charges(PointSet p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& s : p.intensities) s = u(rng);
  return p;
}

double fmm_error(const PointSet& p, const TreeConfig& c, const FmmOptions& o, const Kernel& k = LaplaceKernel()) {
  const auto ref = oracle::dense_potentials(p.positions, p.intensities, p.positions, k);
  return *relative_error(run_fmm(p, c, k, o).potentials, ref);
}

TEST(Engine, TwoPointsExact) {
  PointSet p;
  p.push_back({0.1, 0.2, 0.3}, 2.0);
  p.push_back({0.9, 0.7, 0.6}, -1.0);
  const LaplaceKernel k;
  for (int lmax : {0, 1, 3}) {
    const auto f = run_fmm(p, TreeConfig{1, lmax, 3}, k).potentials;
    const double d = 1.0 / std::sqrt(0.64 + 0.25 + 0.09);
    EXPECT_NEAR(f[0], -d, 1e-14);
    EXPECT_NEAR(f[1], 2.0 * d, 1e-14);
  }
}

TEST(Engine, RootOnlyTreeIsBitEqualToDirectSum) {
  const PointSet p = with_random_charges(generate_standard(DistributionKind::uniform, 300, 2), 5);
  const LaplaceKernel k;
  const auto f = run_fmm(p, TreeConfig{1, 0, 3}, k).potentials;
  EXPECT_EQ(f, direct_sum(p, k));
}

TEST(Engine, DirectSumMatchesDenseOracle) {
  const PointSet p = with_random_charges(generate_standard(DistributionKind::spiral, 200, 2), 1);
  const GaussianKernel k;
  const auto ref = oracle::dense_potentials(p.positions, p.intensities, p.positions, k);
  const auto f = direct_sum(p, k);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], ref[i], 1e-12 * std::abs(ref[i]) + 1e-14);
}

TEST(Engine, ErrorDecreasesWithOrder) {
  const PointSet p = with_random_charges(generate_standard(DistributionKind::uniform, 1500, 3), 4);
  const TreeConfig c{20, kUnboundedDepth, 3};
  double prev = 1.0;
  for (int r : {2, 3, 4, 6}) {
    FmmOptions o;
    o.order = r;
    const double e = fmm_error(p, c, o);
    EXPECT_LT(e, prev) << "r=" << r;
    prev = e;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Engine, AccurateAcrossDistributionsAndDimensions) {
  FmmOptions o;
  o.order = 5;
  FractalSpec f;
  f.gamma = 0.4;
  f.level = 4;
  f.dim = 2;
  f.placement = Placement::random_in_leaf;
  const std::vector<std::pair<PointSet, TreeConfig>> cases{
      {generate_standard(DistributionKind::spiral, 1200, 1), {8, kUnboundedDepth, 3}},
      {generate_standard(DistributionKind::uniform, 1200, 1), {4, 3, 3}},
      {generate_cantor(f), {2, kUnboundedDepth, 2}},
      {generate_singleton_stress(6, 1), {1, kUnboundedDepth, 1}},
      {sample_cantor(FractalSpec{DistributionKind::cantor, 0.5, 8, 3, 2}, 1000), {6, 5, 3}},
  };
  for (const auto& [p, c] : cases) EXPECT_LT(fmm_error(with_random_charges(p, 9), c, o), 1e-3);
}

TEST(Engine, ModifiedEqualsUnmodified) {
  FmmOptions m, u;
  m.order = u.order = 4;
  u.modified = false;
  const LaplaceKernel k;
  for (const PointSet& p : {generate_singleton_stress(6, 3), generate_standard(DistributionKind::spiral, 800, 3)}) {
    const TreeConfig c{1, kUnboundedDepth, p.dim};
    const auto a = run_fmm(p, c, k, m), b = run_fmm(p, c, k, u);
    EXPECT_LT(*relative_error(a.potentials, b.potentials), 1e-12);
    EXPECT_LE(a.counts[Op::m2m].applications, b.counts[Op::m2m].applications);
    EXPECT_EQ(a.counts[Op::m2l], b.counts[Op::m2l]);
    EXPECT_EQ(a.counts[Op::p2p], b.counts[Op::p2p]);
  }
}

TEST(Engine, ExtendedModeAndScalingAgree) {
  const PointSet p = with_random_charges(generate_standard(DistributionKind::spiral, 1000, 6), 2);
  const LaplaceKernel k;
  FmmOptions o;
  o.order = 5;
  const auto base = run_fmm(p, TreeConfig{4, 5, 3}, k, o);
  const auto ext = run_fmm(p, TreeConfig{4, 5, 3, false}, k, o);
  EXPECT_EQ(ext.counts[Op::m2p].applications, 0u);
  EXPECT_EQ(ext.counts[Op::p2l].applications, 0u);
  const auto ref = direct_sum(p, k);
  EXPECT_LT(*relative_error(ext.potentials, ref), 1e-3);
  o.cache.homogeneous_scaling = true;
  const auto sc = run_fmm(p, TreeConfig{4, 5, 3}, k, o);
  EXPECT_LT(*relative_error(sc.potentials, base.potentials), 1e-12);
  EXPECT_LT(sc.m2l_matrices, base.m2l_matrices);
}

TEST(Engine, InputOrderIsPreserved) {
  PointSet p = with_random_charges(generate_standard(DistributionKind::uniform, 400, 8), 3);
  const LaplaceKernel k;
  const TreeConfig c{5, kUnboundedDepth, 3};
  const auto f = run_fmm(p, c, k).potentials;
  std::vector<std::size_t> perm(p.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  PointSet q;
  for (std::size_t i : perm) q.push_back(p.positions[i], p.intensities[i]);
  const auto g = run_fmm(q, c, k).potentials;
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_NEAR(g[i], f[perm[i]], 1e-12 * std::abs(f[perm[i]]));
}

TEST(Engine, CoincidentPointsSkipEachOther) {
  PointSet p;
  p.dim = 2;
  for (int i = 0; i < 6; ++i) p.push_back({0.3, 0.3, 0}, 1.0);
  for (int i = 0; i < 40; ++i) p.push_back({0.02 + 0.024 * i, 0.8, 0}, 1.0);
  const LaplaceKernel k;
  FmmOptions o;
  o.order = 6;
  const auto f = run_fmm(p, TreeConfig{2, kUnboundedDepth, 2}, k, o).potentials;
  EXPECT_LT(*relative_error(f, direct_sum(p, k)), 1e-5);
}

TEST(Engine, InstrumentedCountsMatchListCounts) {
  for (bool modified : {true, false}) {
    const PointSet p = generate_standard(DistributionKind::spiral, 700, 4);
    const TreeConfig c{6, kUnboundedDepth, 3};
    FmmOptions o;
    o.order = 3;
    o.modified = modified;
    const auto r = run_fmm(p, c, LaplaceKernel(), o);
    const Tree t = build_tree(p, c);
    EXPECT_EQ(r.counts, count_operations(t, build_interaction_lists(t), modified));
  }
}

TEST(Engine, Contracts) {
  const PointSet p = generate_singleton_stress(4, 2);
  const Tree t = build_tree(p, TreeConfig{1, kUnboundedDepth, 1});
  const InteractionLists lists = build_interaction_lists(t);
  const LaplaceKernel k;
  const OperatorCache cache = precompute_cache(t, lists, k, 3);
  FmmEvaluator ev(t, lists, cache, k);
  NodeId singleton = kNoNode, internal = kNoNode, leaf = kNoNode;
  for (NodeId id = 0; id < t.node_count(); ++id) {
    if (t.node(id).is_singleton() && singleton == kNoNode) singleton = id;
    if (t.node(id).is_divided() && internal == kNoNode) internal = id;
    if (t.node(id).is_leaf() && leaf == kNoNode) leaf = id;
  }
  ASSERT_NE(singleton, kNoNode);
  EXPECT_FALSE(ev.has_coefficients(singleton));
  EXPECT_EQ(ev.holder(singleton), t.node(singleton).representative);
  EXPECT_THROW(ev.multipole(singleton), ContractViolation);
  EXPECT_THROW(ev.p2m(internal), ContractViolation);
  EXPECT_THROW(ev.l2p(internal), ContractViolation);
  EXPECT_THROW(ev.m2l(leaf, leaf), ContractViolation);
  EXPECT_THROW(ev.p2p(leaf, static_cast<NodeId>(t.node_count())), ContractViolation);
  NodeId nonmember = kNoNode;
  for (NodeId id = 1; id < t.node_count() && nonmember == kNoNode; ++id)
    if (!std::binary_search(lists.v(leaf).begin(), lists.v(leaf).end(), id)) nonmember = id;
  ASSERT_NE(nonmember, kNoNode);
  EXPECT_THROW(ev.m2l(nonmember, leaf), ContractViolation);
  EXPECT_THROW(run_fmm(p, TreeConfig{1, kUnboundedDepth, 1}, k, FmmOptions{1}), ParameterError);
}

TEST(Engine, OracleCapAndRelativeError) {
  const PointSet p = generate_standard(DistributionKind::uniform, 30, 2);
  EXPECT_THROW(direct_sum(p, LaplaceKernel(), 29), OracleCapError);
  EXPECT_NO_THROW(direct_sum(p, LaplaceKernel(), 30));
  const std::vector<double> a{3.0, 4.0}, z{0.0, 0.0}, b{3.0, 0.0};
  EXPECT_FALSE(relative_error(a, z).has_value());
  EXPECT_DOUBLE_EQ(*relative_error(b, a), 0.8);
  EXPECT_THROW(relative_error(a, std::vector<double>{1.0}), ParameterError);
}

}  // namespace
}  // namespace afmm
