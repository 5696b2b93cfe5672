#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afmm/cost_model.hpp"
#include "afmm/point_set.hpp"
#include "afmm/tree.hpp"

namespace afmm {

struct SweepOptions {
  std::vector<int> lmax_values;          // kUnboundedDepth selects the single-threshold rule
  std::vector<std::size_t> t_values;
  int order = 4;
  CostTable table = CostTable::defaults();
  bool modified = true;
  bool enable_wx = true;
  /// Also evaluate (lmax, s(lmax)) for every finite lmax, the pairs reachable
  /// by the conventional single-threshold rule.
  bool include_conventional = true;
};

struct SweepCell {
  int lmax = 0;
  std::size_t t = 1;
  bool valid = true;
  std::string error;    // why the cell is invalid
  bool conventional = false;  // t == s(lmax)
  CostReport report;
  std::size_t s_lmax = 0;     // max points per leaf of this cell's tree
  int depth = 0;
  std::size_t leaves = 0;
  double seconds = 0.0;       // wall time of build + count, for reference

  double p2p_m2l() const { return report[Op::p2p] + report[Op::m2l]; }
};

struct SweepResult {
  std::size_t point_count = 0;
  int dim = 3;
  std::vector<SweepCell> cells;
  /// s(lmax) at t = 1, one entry per finite requested lmax.
  std::vector<std::pair<int, std::size_t>> s_lmax;

  std::optional<std::size_t> argmin() const;
  /// Cheapest cell among the conventional pairs (lmax, s(lmax)).
  std::optional<std::size_t> conventional_argmin() const;
  /// Cheapest valid cell with the given lmax / t; nullopt if none.
  std::optional<std::size_t> argmin_for_lmax(int lmax) const;
  std::optional<std::size_t> find(int lmax, std::size_t t) const;
};

/// Builds a tree per (lmax, t) pair, counts operator applications and
/// converts them to modelled cycles.
SweepResult sweep(const PointSet& points, const SweepOptions& options);

/// Modelled cost of one configuration.
CostReport modelled_cost(const PointSet& points, const TreeConfig& config, int order,
                         const CostTable& table, bool modified = true);

/// Parameters of the two-term model
///   cost(l) = alpha 3^d N^2 2^(-d l) + beta (2^(d(l+1)) - 1) / (2^d - 1) (6^d - 3^d).
struct HeuristicParams {
  double alpha = 1.0;
  double beta = 1.0;
  double d_h = 3.0;
  double n = 1.0;
  void validate() const;
};

double heuristic_cost(const HeuristicParams& params, double l);
double heuristic_p2p_term(const HeuristicParams& params, double l);
double heuristic_m2l_term(const HeuristicParams& params, double l);

struct HeuristicOptimum {
  double l_opt = 0.0;
  double cost_opt = 0.0;
  /// l_opt = (k1 + log2 N) / d_H + k2
  double k1 = 0.0;
  double k2 = -0.5;
  /// ln(cost_opt) ~ k3 + ln N + (ln 3 + ln 2 / 2) d_H, exact up to the -beta term.
  double k3 = 0.0;
  static constexpr double kLogCostSlope = 1.4451858789480825;  // ln 3 + ln 2 / 2
};

HeuristicOptimum heuristic_optimum(const HeuristicParams& params);

/// Integer level minimising heuristic_cost over [0, max_level].
int heuristic_argmin(const HeuristicParams& params, int max_level = 60);

struct LevelCost {
  int level = 0;
  double cost = 0.0;  // measured P2P + M2L cycles
  std::size_t max_leaf_points = 0;  // s(l) at t = 1; 0 when unknown
};

/// Least squares fit of alpha and beta minimising the relative residual
/// sum_l ((model(l) - y_l) / y_l)^2. Levels are used up to the first one
/// where 2^(d_H l) >= N or the leaves hold single points: deeper trees only
/// add singleton chains and the cost stays flat. Throws FitError unless at least two
/// levels carry positive cost and the system is well conditioned.
HeuristicParams fit_alpha_beta(std::span<const LevelCost> data, double d_h, double n);

/// Fit on the t = 1 cells of a sweep. Needs >= 3 distinct finite lmax values.
HeuristicParams fit_alpha_beta(const SweepResult& sweep, double d_h);

struct ThresholdInterval {
  std::size_t n = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t best_t = 0;
  double best_cost = 0.0;
  int depth = 0;            // tree depth at best_t
  bool contiguous = true;   // false: the near-optimal set had gaps, widest run kept
};

struct ThresholdIntervals {
  std::vector<ThresholdInterval> intervals;
  std::size_t t_min = 0;
  std::size_t t_cut = 0;     // max over N of the interval starts
  std::size_t t_max = 0;
  /// [max lo, min hi] when every interval overlaps, the intersection reading of t_cut.
  std::optional<std::pair<std::size_t, std::size_t>> intersection;
  /// 2^d estimate: per depth step, the factor between the bounding lines
  /// bound ~ N of intervals grouped by optimal depth. With a single depth
  /// group it falls back to sqrt(t_max / t_min).
  double ratio = 0.0;
  std::vector<std::string> warnings;
};

struct ThresholdOptions {
  std::vector<std::size_t> t_values;  // increasing
  double tolerance = 0.02;
  int order = 4;
  CostTable table = CostTable::defaults();
};

/// Geometric grid of distinct integers from `lo` to `hi` with about
/// `per_octave` values per doubling.
std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, int per_octave);

/// Near-optimal threshold interval of one point set under the single-threshold rule.
ThresholdInterval threshold_interval(const PointSet& points, const ThresholdOptions& options);

/// Intervals for a sequence of point sets of increasing size.
ThresholdIntervals threshold_intervals(std::span<const PointSet> point_sets, const ThresholdOptions& options);

/// Combine per-N intervals into t_min, t_cut, t_max and the ratio estimate.
ThresholdIntervals summarize_intervals(std::vector<ThresholdInterval> intervals);

struct DimensionEstimate {
  double value = 0.0;
  int first_level = 0;
  int last_level = 0;
};

/// Slope of log2 N_ocp,l against l from level 1 up to the first level whose
/// cells separate all distinct points (deeper counts are flat).
/// Throws ParameterError for trees shallower than 3 levels.
DimensionEstimate estimate_dimension(const Tree& tree);

/// Ordinary least squares y = a + b x; returns (a, b, r^2).
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace afmm
