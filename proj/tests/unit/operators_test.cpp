#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "afmm/chebyshev.hpp"
#include "afmm/error.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/kernel.hpp"
#include "afmm/operators.hpp"
#include "afmm/pointgen.hpp"
#include "afmm/tree.hpp"
#include "oracles.hpp"

namespace afmm {
namespace {

TEST(Chebyshev, NodesAreRootsOfTr) {
  for (int r : {1, 2, 3, 4, 6, 9}) {
    const ChebyshevBasis b(r, 1);
    for (double x : b.nodes()) EXPECT_NEAR(std::cos(r * std::acos(x)), 0.0, 1e-13);
  }
  EXPECT_THROW(ChebyshevBasis(0, 3), ParameterError);
}

TEST(Chebyshev, CardinalAtNodes) {
  const ChebyshevBasis b(5, 1);
  std::vector<double> w(5);
  for (int m = 0; m < 5; ++m) {
    b.weights_1d(b.nodes()[m], w);
    for (int n = 0; n < 5; ++n) EXPECT_NEAR(w[n], m == n ? 1.0 : 0.0, 1e-13);
  }
}

TEST(Chebyshev, PartitionOfUnity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim = 1; dim <= 3; ++dim) {
    const ChebyshevBasis b(4, dim);
    std::vector<double> w(b.size());
    for (int k = 0; k < 50; ++k) {
      b.weights({u(rng), u(rng), u(rng)}, w);
      double s = 0.0;
      for (double x : w) s += x;
      EXPECT_NEAR(s, 1.0, 1e-13);
    }
  }
}

TEST(Chebyshev, ReproducesPolynomialsBelowOrder) {
  const int r = 5;
  const ChebyshevBasis b(r, 2);
  auto poly = [](double x, double y) { return 1.0 - 2.0 * x + 0.5 * x * y * y + x * x * x * x - y * y * y; };
  std::vector<double> w(b.size());
  for (double x : {-0.9, -0.2, 0.3, 0.77})
    for (double y : {-0.6, 0.1, 0.95}) {
      b.weights({x, y, 0.0}, w);
      double s = 0.0;
      for (int m = 0; m < b.size(); ++m) {
        const Point g = b.reference_node(m);
        s += w[m] * poly(g[0], g[1]);
      }
      EXPECT_NEAR(s, poly(x, y), 1e-12);
    }
}

TEST(Chebyshev, InterpMatrixRowsSumToOne) {
  const ChebyshevBasis b(3, 3);
  const Cube cube{{0.25, 0.5, 0.0}, 0.25};
  std::vector<Point> pts{{0.3, 0.6, 0.1}, {0.5, 0.75, 0.25}, {0.25, 0.5, 0.0}};
  const Matrix m = interp_matrix(pts, cube, b);
  for (int i = 0; i < m.rows(); ++i) EXPECT_NEAR(m.row(i).sum(), 1.0, 1e-13);
  const Point ref = to_reference({0.5, 0.75, 0.25}, cube, 3);
  EXPECT_EQ(ref, (Point{1.0, 1.0, 1.0}));
}

Node cell(int depth, std::uint64_t x, std::uint64_t y = 0, std::uint64_t z = 0) {
  Node n;
  n.depth = depth;
  n.anchor = {x, y, z};
  return n;
}

TEST(Transfer, DescentOfNestedCells) {
  const Descent d = descent(cell(1, 1, 0, 1), cell(3, 6, 1, 7), 3);
  EXPECT_EQ(d.gap, 2);
  EXPECT_EQ(d.position, (std::array<std::uint64_t, 3>{2, 1, 3}));
  EXPECT_THROW(descent(cell(1, 1, 0, 1), cell(3, 1, 1, 7), 3), ContractViolation);
  EXPECT_THROW(descent(cell(3, 6, 1, 7), cell(1, 1, 0, 1), 3), ContractViolation);
  EXPECT_THROW(offset_key(cell(2, 0), cell(3, 0), 1), ContractViolation);
}

TEST(Transfer, DirectHopEqualsComposedHops) {
  const ChebyshevBasis b(4, 3);
  const Descent ab{1, {1, 0, 1}}, bc{2, {3, 2, 0}};
  const Descent ac{3, {1 * 4 + 3, 0 * 4 + 2, 1 * 4 + 0}};
  const Matrix composed = transfer_matrix(b, ab) * transfer_matrix(b, bc);
  EXPECT_LT((composed - transfer_matrix(b, ac)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((transfer_matrix(b, Descent{}) - Matrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Transfer, MomentsArePreserved) {
  // P2M on a child followed by M2M equals P2M on the parent for the
  // polynomial moments the basis reproduces.
  const ChebyshevBasis b(4, 2);
  const Cube parent{{0.0, 0.0, 0.0}, 1.0}, child{{0.5, 0.0, 0.0}, 0.5};
  std::vector<Point> pts{{0.6, 0.1, 0}, {0.9, 0.4, 0}, {0.55, 0.3, 0}};
  std::vector<double> sig{1.0, -2.0, 0.5};
  Vector wc = Vector::Zero(b.size()), wp = Vector::Zero(b.size());
  apply_p2m(b, child, pts, sig, wc);
  apply_p2m(b, parent, pts, sig, wp);
  const Vector via = transfer_matrix(b, Descent{1, {1, 0, 0}}) * wc;
  const auto grid = b.grid(parent);
  for (int px = 0; px < 3; ++px)
    for (int py = 0; py + px < 3; ++py) {
      double a = 0.0, c = 0.0;
      for (int m = 0; m < b.size(); ++m) {
        const double f = std::pow(grid[m][0], px) * std::pow(grid[m][1], py);
        a += wp[m] * f;
        c += via[m] * f;
      }
      EXPECT_NEAR(a, c, 1e-12);
    }
}

TEST(M2L, MatrixEntriesAreKernelValues) {
  const ChebyshevBasis b(3, 3);
  const LaplaceKernel k;
  const OffsetKey key{2, {2, -3, 0}};
  const Matrix m = m2l_matrix(k, b, key);
  const double h = 0.25;
  const auto tg = b.grid(Cube{{0, 0, 0}, h});
  const auto sg = b.grid(Cube{{2 * h, -3 * h, 0}, h});
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j) EXPECT_DOUBLE_EQ(m(i, j), k(sg[j], tg[i]));
}

TEST(M2L, HomogeneousScaling) {
  const LaplaceKernel k;
  const ChebyshevBasis b(4, 3);
  OperatorCache plain(b, {}, 3), scaled(b, {true}, 3);
  for (int level = 0; level <= 5; ++level) {
    const OffsetKey key{level, {3, 0, -2}};
    plain.add_m2l(k, key);
    scaled.add_m2l(k, key);
    const M2LOperator a = plain.m2l(key), s = scaled.m2l(key);
    EXPECT_EQ(a.scale, 1.0);
    EXPECT_DOUBLE_EQ(s.scale, std::ldexp(1.0, level));
    EXPECT_LT(((*s.matrix) * s.scale - *a.matrix).cwiseAbs().maxCoeff(), 1e-12 * a.matrix->cwiseAbs().maxCoeff());
  }
  EXPECT_EQ(scaled.m2l_count(), 1u);
  EXPECT_EQ(plain.m2l_count(), 6u);
  OperatorCache bad(b, {true}, 3);
  EXPECT_THROW(bad.add_m2l(GaussianKernel(), OffsetKey{1, {2, 0, 0}}), ParameterError);
}

TEST(M2L, SingularEntryRejected) {
  const ChebyshevBasis b(3, 1);
  EXPECT_THROW(m2l_matrix(LaplaceKernel(), b, OffsetKey{1, {0, 0, 0}}), NumericError);
}

TEST(Cache, OffsetsBoundedPerLevel) {
  const PointSet p = generate_standard(DistributionKind::uniform, 3000, 5);
  const Tree t = build_tree(p, TreeConfig{4, kUnboundedDepth, 3});
  const InteractionLists lists = build_interaction_lists(t);
  const OperatorCache c = precompute_cache(t, lists, LaplaceKernel(), 3);
  std::size_t total = 0;
  for (int l = 0; l <= t.depth(); ++l) {
    EXPECT_LE(c.offsets_at_level(l), 316u);
    total += c.offsets_at_level(l);
  }
  EXPECT_EQ(total, c.m2l_count());
  EXPECT_GT(c.offsets_at_level(3), 100u);
}

TEST(Cache, HoldsExactlyTheNeededTransfers) {
  const PointSet p = generate_singleton_stress(4, 1);
  const Tree t = build_tree(p, TreeConfig{1, kUnboundedDepth, 1});
  const InteractionLists lists = build_interaction_lists(t);
  const OperatorCache m = precompute_cache(t, lists, LaplaceKernel(), 3, true);
  const OperatorCache u = precompute_cache(t, lists, LaplaceKernel(), 3, false);
  for (NodeId id = 1; id < t.node_count(); ++id) {
    const Node& n = t.node(id);
    EXPECT_TRUE(u.has_transfer(descent(t.node(n.parent), n, 1)));
  }
  for (NodeId id = 0; id < t.node_count(); ++id)
    if (t.node(id).is_divided())
      for (NodeId c : t.divided_children(id)) EXPECT_TRUE(m.has_transfer(descent(t.node(id), t.node(c), 1)));
  std::size_t gaps = 0;
  for (NodeId id = 0; id < t.node_count(); ++id)
    for (NodeId c : t.divided_children(id)) gaps += t.node(c).depth - t.node(id).depth > 1;
  EXPECT_GT(gaps, 0u);
  EXPECT_THROW(m.transfer(Descent{30, {1, 0, 0}}), ContractViolation);
  EXPECT_THROW(m.m2l(OffsetKey{30, {5, 0, 0}}), ContractViolation);
}

TEST(Cache, NonTranslationInvariantKernelRejected) {
  struct Anchored final : Kernel {
    double operator()(const Point& s, const Point& t) const override { return s[0] * t[0]; }
    std::string_view name() const override { return "anchored"; }
    bool translation_invariant() const override { return false; }
  };
  const PointSet p = generate_standard(DistributionKind::uniform, 50, 1);
  const Tree t = build_tree(p, TreeConfig{4, kUnboundedDepth, 3});
  EXPECT_THROW(precompute_cache(t, build_interaction_lists(t), Anchored(), 3), ParameterError);
}

TEST(Leaf, P2PSkipsCoincidentPairsAndCounts) {
  const LaplaceKernel k;
  std::vector<Point> src{{0.1, 0.1, 0.1}, {0.2, 0.3, 0.4}, {0.7, 0.1, 0.0}};
  std::vector<double> sig{1.0, 2.0, -1.0};
  std::vector<Point> tgt{{0.1, 0.1, 0.1}, {0.5, 0.5, 0.5}};
  std::vector<double> f(2, 0.0);
  EXPECT_EQ(apply_p2p(k, src, sig, tgt, f), 5u);
  const auto ref = oracle::dense_potentials(src, sig, tgt, k);
  EXPECT_DOUBLE_EQ(f[0], ref[0]);
  EXPECT_DOUBLE_EQ(f[1], ref[1]);
}

TEST(Leaf, FarFieldExpansionsConverge) {
  // Source cluster in [0, 1/4]^3, targets in a cell two boxes away.
  const LaplaceKernel k;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 0.25);
  std::vector<Point> src, tgt;
  std::vector<double> sig;
  for (int i = 0; i < 40; ++i) {
    src.push_back({u(rng), u(rng), u(rng)});
    sig.push_back(u(rng) * 4 - 0.5);
    tgt.push_back({0.5 + u(rng), u(rng), u(rng)});
  }
  const auto ref = oracle::dense_potentials(src, sig, tgt, k);
  const Cube sc{{0, 0, 0}, 0.25}, tc{{0.5, 0, 0}, 0.25};
  double prev_m2p = 1.0, prev_p2l = 1.0, prev_m2l = 1.0;
  for (int r : {2, 4, 6, 8}) {
    const ChebyshevBasis b(r, 3);
    Vector w = Vector::Zero(b.size());
    apply_p2m(b, sc, src, sig, w);
    std::vector<double> f(tgt.size(), 0.0), g(tgt.size(), 0.0), h(tgt.size(), 0.0);
    apply_m2p(k, b.grid(sc), w, tgt, f);
    Vector loc = Vector::Zero(b.size());
    apply_p2l(k, src, sig, b.grid(tc), loc);
    apply_l2p(b, tc, loc, tgt, g);
    Vector loc2 = Vector::Zero(b.size());
    const Matrix m = m2l_matrix(k, b, OffsetKey{2, {-2, 0, 0}});
    apply_m2l(M2LOperator{&m, 1.0}, w, loc2);
    apply_l2p(b, tc, loc2, tgt, h);
    const double em = *oracle::relative_error_of(f, ref), ep = *oracle::relative_error_of(g, ref),
                 el = *oracle::relative_error_of(h, ref);
    EXPECT_LT(em, prev_m2p);
    EXPECT_LT(ep, prev_p2l);
    EXPECT_LT(el, 2.0 * std::max(em, ep) + 1e-14);
    EXPECT_GE(prev_m2l / el, 3.0) << "r=" << r;
    prev_m2l = el;
    prev_m2p = em;
    prev_p2l = ep;
  }
  EXPECT_LT(prev_m2p, 1e-6);
}

}  // namespace
}  // namespace afmm
