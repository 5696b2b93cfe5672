#include "afmm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "afmm/error.hpp"

namespace afmm {

namespace {

bool cheaper(const SweepCell& a, const SweepCell& b) {
  if (a.report.total != b.report.total) return a.report.total < b.report.total;
  if (a.lmax != b.lmax) return a.lmax < b.lmax;
  return a.t < b.t;
}

template <typename Pred>
std::optional<std::size_t> best_cell(const std::vector<SweepCell>& cells, Pred pred) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].valid || !pred(cells[i])) continue;
    if (!best || cheaper(cells[i], cells[*best])) best = i;
  }
  return best;
}

SweepCell evaluate_cell(const PointSet& points, int lmax, std::size_t t, const SweepOptions& options) {
  SweepCell cell;
  cell.lmax = lmax;
  cell.t = t;
  const auto start = std::chrono::steady_clock::now();
  try {
    TreeConfig config;
    config.threshold = t;
    config.max_depth = lmax;
    config.dim = points.dim;
    config.enable_wx = options.enable_wx;
    const Tree tree = build_tree(points, config);
    const TreeStats stats = tree_stats(tree);
    cell.s_lmax = stats.max_leaf_points;
    cell.depth = stats.depth;
    cell.leaves = stats.leaf_count;
    cell.report = estimate_cycles(count_operations(tree, options.modified), options.table, options.order, points.dim);
  } catch (const InputError& e) {
    cell.valid = false;
    cell.error = e.what();
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

}  // namespace

std::optional<std::size_t> SweepResult::argmin() const {
  return best_cell(cells, [](const SweepCell&) { return true; });
}

std::optional<std::size_t> SweepResult::conventional_argmin() const {
  return best_cell(cells, [](const SweepCell& c) { return c.conventional; });
}

std::optional<std::size_t> SweepResult::argmin_for_lmax(int lmax) const {
  return best_cell(cells, [lmax](const SweepCell& c) { return c.lmax == lmax; });
}

std::optional<std::size_t> SweepResult::find(int lmax, std::size_t t) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].lmax == lmax && cells[i].t == t) return i;
  return std::nullopt;
}

SweepResult sweep(const PointSet& points, const SweepOptions& options) {
  if (options.lmax_values.empty() || options.t_values.empty())
    throw ParameterError("sweep needs at least one lmax and one t value");
  options.table.validate();
  SweepResult result;
  result.point_count = points.size();
  result.dim = points.dim;
  for (int lmax : options.lmax_values) {
    std::vector<std::size_t> ts = options.t_values;
    std::optional<std::size_t> s;
    if (lmax != kUnboundedDepth) {
      const SweepCell base = evaluate_cell(points, lmax, 1, options);
      if (base.valid) {
        s = base.s_lmax;
        result.s_lmax.emplace_back(lmax, *s);
      }
      if (options.include_conventional && s && std::find(ts.begin(), ts.end(), *s) == ts.end()) ts.push_back(*s);
    }
    for (std::size_t t : ts) {
      SweepCell cell = evaluate_cell(points, lmax, t, options);
      cell.conventional = options.include_conventional && s && t == *s;
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

CostReport modelled_cost(const PointSet& points, const TreeConfig& config, int order, const CostTable& table,
                         bool modified) {
  const Tree tree = build_tree(points, config);
  return estimate_cycles(count_operations(tree, modified), table, order, points.dim);
}

void HeuristicParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ParameterError("alpha and beta must be >= 0");
  if (!(d_h > 0.0 && d_h <= 3.0)) throw ParameterError("d_H must lie in (0, 3]");
  if (!(n >= 1.0)) throw ParameterError("N must be >= 1");
}

double heuristic_p2p_term(const HeuristicParams& p, double l) {
  return p.alpha * std::pow(3.0, p.d_h) * p.n * p.n * std::exp2(-p.d_h * l);
}

double heuristic_m2l_term(const HeuristicParams& p, double l) {
  const double nodes = (std::exp2(p.d_h * (l + 1.0)) - 1.0) / (std::exp2(p.d_h) - 1.0);
  return p.beta * nodes * (std::pow(6.0, p.d_h) - std::pow(3.0, p.d_h));
}

double heuristic_cost(const HeuristicParams& p, double l) {
  p.validate();
  if (l < 0.0) throw ParameterError("level must be >= 0");
  return heuristic_p2p_term(p, l) + heuristic_m2l_term(p, l);
}

HeuristicOptimum heuristic_optimum(const HeuristicParams& p) {
  p.validate();
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw ParameterError("heuristic optimum needs alpha, beta > 0");
  HeuristicOptimum o;
  o.k1 = std::log2(p.alpha / p.beta) / 2.0;
  o.l_opt = (o.k1 + std::log2(p.n)) / p.d_h + o.k2;
  o.cost_opt = std::pow(3.0, p.d_h) * (2.0 * std::sqrt(p.alpha * p.beta) * p.n * std::exp2(p.d_h / 2.0) - p.beta);
  o.k3 = std::log(2.0 * std::sqrt(p.alpha * p.beta));
  return o;
}

int heuristic_argmin(const HeuristicParams& p, int max_level) {
  int best = 0;
  double best_cost = heuristic_cost(p, 0.0);
  for (int l = 1; l <= max_level; ++l) {
    const double c = heuristic_cost(p, l);
    if (c < best_cost) {
      best_cost = c;
      best = l;
    }
  }
  return best;
}

HeuristicParams fit_alpha_beta(std::span<const LevelCost> data, double d_h, double n) {
  HeuristicParams unit{1.0, 1.0, d_h, n};
  unit.validate();
  // The model's occupancy 2^(d_H l) reaches N here; past it cells stop multiplying.
  int separated = static_cast<int>(std::ceil(std::log2(n) / d_h));
  for (const auto& d : data)
    if (d.max_leaf_points == 1) separated = std::min(separated, d.level);
  std::vector<LevelCost> used;
  for (const auto& d : data)
    if (d.cost > 0.0 && std::isfinite(d.cost) && d.level <= separated) used.push_back(d);
  std::set<int> levels;
  for (const auto& d : used) levels.insert(d.level);
  if (levels.size() < 2) throw FitError("fit needs at least two levels with positive cost");

  Eigen::MatrixXd a(used.size(), 2);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    a(i, 0) = heuristic_p2p_term(unit, used[i].level) / used[i].cost;
    a(i, 1) = heuristic_m2l_term(unit, used[i].level) / used[i].cost;
  }
  // Column scaling keeps the normal system well conditioned.
  const Eigen::Vector2d scale(a.col(0).norm(), a.col(1).norm());
  if (!(scale[0] > 0.0) || !(scale[1] > 0.0)) throw FitError("degenerate fit data");
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
  if (qr.rank() < 2) throw FitError("fit data do not determine both alpha and beta");
  const Eigen::Vector2d x = qr.solve(b).cwiseQuotient(scale);
  if (!(x[0] > 0.0) || !(x[1] > 0.0)) throw FitError("fit produced a non-positive alpha or beta");
  return {x[0], x[1], d_h, n};
}

HeuristicParams fit_alpha_beta(const SweepResult& sweep, double d_h) {
  std::vector<LevelCost> data;
  std::set<int> levels;
  for (const auto& c : sweep.cells) {
    if (!c.valid || c.t != 1 || c.lmax == kUnboundedDepth) continue;
    if (!levels.insert(c.lmax).second) continue;
    data.push_back({c.lmax, c.p2p_m2l(), c.s_lmax});
  }
  if (levels.size() < 3) throw FitError("fit needs t = 1 cells for at least three lmax values");
  return fit_alpha_beta(data, d_h, static_cast<double>(sweep.point_count));
}

std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, int per_octave) {
  if (lo < 1 || hi < lo || per_octave < 1) throw ParameterError("invalid geometric grid");
  std::vector<std::size_t> out;
  const double step = std::exp2(1.0 / per_octave);
  for (double v = static_cast<double>(lo); v <= static_cast<double>(hi) * (1.0 + 1e-12); v *= step) {
    const auto t = static_cast<std::size_t>(std::llround(v));
    if (out.empty() || t != out.back()) out.push_back(t);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

ThresholdInterval threshold_interval(const PointSet& points, const ThresholdOptions& options) {
  if (options.t_values.empty()) throw ParameterError("threshold sweep needs t values");
  std::vector<double> cost(options.t_values.size(), std::numeric_limits<double>::infinity());
  std::vector<int> depth(options.t_values.size(), 0);
  TreeConfig config;
  config.dim = points.dim;
  for (std::size_t i = 0; i < options.t_values.size(); ++i) {
    config.threshold = options.t_values[i];
    try {
      const Tree tree = build_tree(points, config);
      depth[i] = tree.depth();
      cost[i] = estimate_cycles(count_operations(tree), options.table, options.order, points.dim).total;
    } catch (const InputError&) {
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  if (!std::isfinite(cost[best])) throw InputError("no threshold produced a valid tree");
  const double limit = cost[best] * (1.0 + options.tolerance);

  ThresholdInterval iv;
  iv.n = points.size();
  iv.best_t = options.t_values[best];
  iv.best_cost = cost[best];
  iv.depth = depth[best];
  std::size_t runs = 0, best_len = 0;
  for (std::size_t i = 0; i < cost.size();) {
    if (!(cost[i] <= limit)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cost.size() && cost[j] <= limit) ++j;
    ++runs;
    const double width = std::log(static_cast<double>(options.t_values[j - 1])) -
                         std::log(static_cast<double>(options.t_values[i]));
    if (best_len == 0 || width > std::log(static_cast<double>(iv.hi)) - std::log(static_cast<double>(iv.lo))) {
      iv.lo = options.t_values[i];
      iv.hi = options.t_values[j - 1];
    }
    best_len = std::max(best_len, j - i);
    i = j;
  }
  iv.contiguous = runs == 1;
  return iv;
}

ThresholdIntervals summarize_intervals(std::vector<ThresholdInterval> intervals) {
  if (intervals.empty()) throw ParameterError("no threshold intervals to summarize");
  ThresholdIntervals out;
  out.intervals = std::move(intervals);
  out.t_min = std::numeric_limits<std::size_t>::max();
  std::size_t min_hi = std::numeric_limits<std::size_t>::max();
  for (const auto& iv : out.intervals) {
    out.t_min = std::min(out.t_min, iv.lo);
    out.t_max = std::max(out.t_max, iv.hi);
    out.t_cut = std::max(out.t_cut, iv.lo);
    min_hi = std::min(min_hi, iv.hi);
    if (!iv.contiguous)
      out.warnings.push_back("N=" + std::to_string(iv.n) + ": near-optimal thresholds are not contiguous; widest run kept");
  }
  if (out.t_cut <= min_hi) out.intersection = std::make_pair(out.t_cut, min_hi);
  // Intervals sharing an optimal depth have bounds proportional to N; the
  // bounding lines of consecutive depths differ in slope by the ratio.
  std::map<int, std::pair<double, std::size_t>> lines;  // depth -> (sum log(lo hi / N^2), count)
  for (const auto& iv : out.intervals) {
    const double n = static_cast<double>(iv.n);
    auto& [sum, count] = lines[iv.depth];
    sum += std::log(static_cast<double>(iv.lo) / n) + std::log(static_cast<double>(iv.hi) / n);
    ++count;
  }
  if (lines.size() < 2) {
    out.ratio = std::sqrt(static_cast<double>(out.t_max) / static_cast<double>(out.t_min));
    return out;
  }
  double log_ratio = 0.0;
  int steps = 0;
  for (auto it = lines.begin(), next = std::next(it); next != lines.end(); ++it, ++next) {
    const double a = it->second.first / (2.0 * it->second.second);
    const double b = next->second.first / (2.0 * next->second.second);
    log_ratio += a - b;
    steps += next->first - it->first;
  }
  out.ratio = std::exp(log_ratio / steps);
  return out;
}

ThresholdIntervals threshold_intervals(std::span<const PointSet> point_sets, const ThresholdOptions& options) {
  std::vector<ThresholdInterval> intervals;
  std::size_t previous = 0;
  for (const auto& points : point_sets) {
    if (points.size() <= previous) throw ParameterError("point sets must be given in increasing size");
    previous = points.size();
    intervals.push_back(threshold_interval(points, options));
  }
  return summarize_intervals(std::move(intervals));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("line fit needs two distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

DimensionEstimate estimate_dimension(const Tree& tree) {
  if (tree.depth() < 3) throw ParameterError("dimension estimate needs a tree of depth >= 3");
  const OccupancyProfile occ = occupancy_profile(tree);
  std::vector<Point> distinct(tree.points().positions);
  std::sort(distinct.begin(), distinct.end());
  const auto n = static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  DimensionEstimate est;
  est.first_level = 1;
  est.last_level = tree.depth();
  // Past the first level that separates every point the counts stay flat.
  for (int l = 1; l <= tree.depth(); ++l)
    if (occ.occupied[l] >= n) {
      est.last_level = std::max(l, 2);
      break;
    }
  std::vector<double> x, y;
  for (int l = est.first_level; l <= est.last_level; ++l) {
    x.push_back(l);
    y.push_back(std::log2(static_cast<double>(occ.occupied[l])));
  }
  est.value = fit_line(x, y).slope;
  return est;
}

}  // namespace afmm
