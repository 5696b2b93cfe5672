#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "afmm/cost_model.hpp"
#include "afmm/engine.hpp"
#include "afmm/error.hpp"
#include "afmm/interaction_lists.hpp"
#include "afmm/io.hpp"
#include "afmm/kernel.hpp"
#include "afmm/optimizer.hpp"
#include "afmm/pointgen.hpp"
#include "afmm/tree.hpp"

namespace afmm::cli {

namespace {

using nlohmann::json;

int parse_int(const std::string& s) {
  if (s == "inf") return kUnboundedDepth;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParameterError("not an integer: '" + s + "'");
  return v;
}

std::string depth_label(int lmax) { return lmax == kUnboundedDepth ? "inf" : std::to_string(lmax); }

/// Sends text to --out when given, otherwise to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

json counts_json(const CostReport& report) {
  json j;
  for (Op op : kAllOps) {
    const OpTally& t = report.counts[op];
    j[std::string(to_string(op))] = {{"applications", t.applications}, {"units", t.units}};
  }
  return j;
}

json cycles_json(const CostReport& report) {
  json j;
  for (Op op : kAllOps) j[std::string(to_string(op))] = report[op];
  j["total"] = report.total;
  return j;
}

struct TreeFlags {
  std::string points;
  std::size_t t = 1;
  std::string lmax = "inf";
  bool extended = false;

  void add(CLI::App* app) {
    app->add_option("--points", points, "Point CSV file")->required();
    app->add_option("--t", t, "Subdivision threshold")->capture_default_str();
    app->add_option("--lmax", lmax, "Maximum depth, or inf")->capture_default_str();
    app->add_flag("--extended", extended, "Push every leaf to lmax (no W/X lists)");
  }

  TreeConfig config(int dim) const {
    TreeConfig c;
    c.threshold = t;
    c.max_depth = parse_int(lmax);
    c.dim = dim;
    c.enable_wx = !extended;
    return c;
  }
};

int cmd_generate(const std::string& kind_name, std::optional<double> gamma, std::optional<double> dh, int level,
                 int dim, std::optional<std::size_t> n, int steps, std::uint64_t seed, const std::string& placement,
                 const std::string& intensity, const std::string& out_path, std::ostream& out) {
  const DistributionKind kind = parse_distribution_kind(kind_name);
  if (kind != DistributionKind::cantor && (gamma || dh))
    throw ParameterError("--gamma/--dh only apply to --kind cantor");
  if (gamma && dh) throw ParameterError("give either --gamma or --dh, not both");
  const IntensityRule rule = intensity == "one"      ? IntensityRule::constant_one
                             : intensity == "random" ? IntensityRule::random_uniform
                                                     : throw ParameterError("--intensity must be one or random");

  PointSet points;
  switch (kind) {
    case DistributionKind::cantor: {
      if (!gamma && !dh) throw ParameterError("--kind cantor needs --gamma or --dh");
      FractalSpec spec;
      spec.gamma = gamma ? *gamma : gamma_for_dimension(*dh, dim);
      spec.level = level;
      spec.dim = dim;
      spec.seed = seed;
      spec.intensity = rule;
      if (placement == "center") spec.placement = Placement::center;
      else if (placement == "random") spec.placement = Placement::random_in_leaf;
      else throw ParameterError("--placement must be center or random");
      points = n ? sample_cantor(spec, *n) : generate_cantor(spec);
      break;
    }
    case DistributionKind::uniform:
    case DistributionKind::spiral:
      if (!n) throw ParameterError("--kind " + kind_name + " needs --n");
      points = generate_standard(kind, *n, seed, rule);
      break;
    case DistributionKind::singleton_stress:
      points = generate_singleton_stress(steps, seed);
      break;
  }
  write_points_csv(out_path, points);
  out << "wrote " << points.size() << " points (dim " << points.dim << ") to " << out_path << "\n";
  return kExitOk;
}

int cmd_tree_stats(const TreeFlags& flags, const std::string& out_path, std::ostream& out) {
  const PointSet points = read_points_csv(flags.points);
  const Tree tree = build_tree(points, flags.config(points.dim));
  const TreeStats stats = tree_stats(tree);
  const StructureSummary s = classify_structure(tree);
  const OccupancyProfile occ = occupancy_profile(tree);
  json j;
  j["n"] = points.size();
  j["depth"] = stats.depth;
  j["n_leaves"] = stats.leaf_count;
  j["s_lmax"] = stats.max_leaf_points;
  j["n_nodes"] = stats.node_count;
  j["n_divided"] = s.divided_count;
  j["n_singleton"] = s.singleton_count;
  j["longest_singleton_chain"] = s.longest_singleton_chain;
  j["occupancy"] = occ.occupied;
  j["c_l"] = occ.c;
  if (tree.depth() >= 3) j["dimension_estimate"] = estimate_dimension(tree).value;
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

struct RunFlags {
  int r = 4;
  std::string kernel = "laplace";
  bool unmodified = false;
  bool scaling = false;
  bool oracle = false;

  void add(CLI::App* app) {
    app->add_option("--r", r, "Chebyshev nodes per axis")->capture_default_str();
    app->add_option("--kernel", kernel, "laplace or gaussian")->capture_default_str();
    app->add_flag("--unmodified", unmodified, "Hop-by-hop M2M/L2L through singleton nodes");
    app->add_flag("--homogeneous-scaling", scaling, "Reuse level-0 M2L matrices for homogeneous kernels");
    app->add_flag("--oracle", oracle, "Compare against the O(N^2) direct sum");
  }

  FmmOptions options() const {
    FmmOptions o;
    o.order = r;
    o.modified = !unmodified;
    o.cache.homogeneous_scaling = scaling;
    return o;
  }
};

int cmd_run(const TreeFlags& tf, const RunFlags& rf, bool timing, const std::string& format,
            const std::string& potentials_path, const std::string& out_path, std::ostream& out) {
  const PointSet points = read_points_csv(tf.points);
  const auto kernel = make_kernel(rf.kernel);
  const CostTable table = CostTable::from_environment();
  const FmmResult result = run_fmm(points, tf.config(points.dim), *kernel, rf.options());
  const CostReport report = estimate_cycles(result.counts, table, rf.r, points.dim);

  std::optional<double> error;
  if (rf.oracle) error = relative_error(result.potentials, direct_sum(points, *kernel));

  if (!potentials_path.empty()) {
    std::ofstream f(potentials_path);
    if (!f) throw InputError("cannot write " + potentials_path);
    f << "index,potential\n";
    for (std::size_t i = 0; i < result.potentials.size(); ++i)
      f << i << ',' << format_real(result.potentials[i]) << '\n';
  }

  if (format == "csv") {
    std::string text = to_csv(report);
    if (error) text += "error_vs_oracle,,," + format_real(*error) + "\n";
    emit(out_path, text, out);
    return kExitOk;
  }
  json j;
  j["n"] = points.size();
  j["t"] = tf.t;
  j["lmax"] = depth_label(parse_int(tf.lmax));
  j["r"] = rf.r;
  j["kernel"] = rf.kernel;
  j["modified"] = !rf.unmodified;
  if (rf.oracle) j["error_vs_oracle"] = error ? json(*error) : json(nullptr);
  j["counts"] = counts_json(report);
  j["cycles"] = cycles_json(report);
  j["transfer_matrices"] = result.transfer_matrices;
  j["m2l_matrices"] = result.m2l_matrices;
  if (timing) j["wall_time"] = {{"setup", result.setup_seconds}, {"evaluate", result.evaluate_seconds}};
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_verify(const TreeFlags& tf, const RunFlags& rf, double tolerance, const std::string& out_path,
               std::ostream& out) {
  const PointSet points = read_points_csv(tf.points);
  const auto kernel = make_kernel(rf.kernel);
  const Tree tree = build_tree(points, tf.config(points.dim));
  const InteractionLists lists = build_interaction_lists(tree);
  const FmmOptions options = rf.options();
  if (options.order < 2) throw ParameterError("Chebyshev order r must be >= 2");
  const OperatorCache cache = precompute_cache(tree, lists, *kernel, options.order, options.modified, options.cache);
  FmmEvaluator evaluator(tree, lists, cache, *kernel, options.modified);
  evaluator.run();

  const OperationCounts listed = count_operations(tree, lists, options.modified);
  const OperationCounts streamed = count_operations(tree, options.modified);
  BoundsReport bounds = verify_complexity_bounds(tree, lists, listed);
  bounds.checks.push_back({"instrumented_counts_match", evaluator.counts() == listed, 0.0, 0.0});
  bounds.checks.push_back({"streamed_counts_match", streamed == listed, 0.0, 0.0});
  if (tf.extended) {
    const double wx = static_cast<double>(lists.total(ListKind::w) + lists.total(ListKind::x));
    bounds.checks.push_back({"extended_no_wx", wx == 0.0, wx, 0.0});
  }
  if (rf.oracle) {
    const auto err = relative_error(evaluator.potentials_in_input_order(), direct_sum(points, *kernel));
    BoundCheck c{"oracle_error", true, err ? *err : 0.0, tolerance};
    c.passed = !err || *err <= tolerance;
    bounds.checks.push_back(c);
  }

  json j;
  j["passed"] = bounds.all_passed();
  for (const auto& c : bounds.checks) {
    json e = {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}};
    if (c.offending != kNoNode) e["offending_node"] = c.offending;
    j["checks"].push_back(e);
  }
  emit(out_path, j.dump(2) + "\n", out);
  return bounds.all_passed() ? kExitOk : kExitVerification;
}

int cmd_sweep(const std::string& points_path, const std::string& lmax_text, const std::string& t_text,
              const RunFlags& rf, bool no_conventional, const std::string& format, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const PointSet points = read_points_csv(points_path);
  SweepOptions o;
  o.lmax_values = parse_int_range(lmax_text);
  for (int t : parse_int_range(t_text)) {
    if (t < 1 || t == kUnboundedDepth) throw ParameterError("thresholds must be finite and >= 1");
    o.t_values.push_back(static_cast<std::size_t>(t));
  }
  o.order = rf.r;
  o.modified = !rf.unmodified;
  o.table = CostTable::from_environment();
  o.include_conventional = !no_conventional;
  const SweepResult result = sweep(points, o);

  for (const auto& c : result.cells)
    if (!c.valid) err << "skipped lmax=" << depth_label(c.lmax) << " t=" << c.t << ": " << c.error << "\n";

  if (format == "json") {
    json j;
    j["n"] = result.point_count;
    for (const auto& c : result.cells) {
      if (!c.valid) continue;
      j["cells"].push_back({{"lmax", depth_label(c.lmax)},
                            {"t", c.t},
                            {"conventional", c.conventional},
                            {"s_lmax", c.s_lmax},
                            {"depth", c.depth},
                            {"cycles", cycles_json(c.report)}});
    }
    if (const auto best = result.argmin()) {
      j["argmin"] = {{"lmax", depth_label(result.cells[*best].lmax)}, {"t", result.cells[*best].t}};
    }
    if (const auto best = result.conventional_argmin()) {
      j["conventional_argmin"] = {{"lmax", depth_label(result.cells[*best].lmax)}, {"t", result.cells[*best].t}};
    }
    emit(out_path, j.dump(2) + "\n", out);
    return kExitOk;
  }
  std::string text = "lmax,t,cycles_total,cycles_p2p,cycles_m2l,cycles_m2p,cycles_p2l,cycles_other,s_lmax\n";
  for (const auto& c : result.cells) {
    if (!c.valid) continue;
    const CostReport& r = c.report;
    const double other = r.total - r[Op::p2p] - r[Op::m2l] - r[Op::m2p] - r[Op::p2l];
    text += depth_label(c.lmax) + "," + std::to_string(c.t) + "," + format_real(r.total) + "," +
            format_real(r[Op::p2p]) + "," + format_real(r[Op::m2l]) + "," + format_real(r[Op::m2p]) + "," +
            format_real(r[Op::p2l]) + "," + format_real(other) + "," + std::to_string(c.s_lmax) + "\n";
  }
  emit(out_path, text, out);
  return kExitOk;
}

std::vector<LevelCost> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::vector<LevelCost> data;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 5) throw InputError("malformed sweep row: " + line);
    if (f[0] == "inf" || f[1] != "1") continue;
    data.push_back({parse_int(f[0]), std::stod(f[3]) + std::stod(f[4]),
                    f.size() > 8 ? static_cast<std::size_t>(std::stoull(f[8])) : 0});
  }
  return data;
}

int cmd_model(std::optional<double> alpha, std::optional<double> beta, double dh, double n,
              const std::string& sweep_path, const std::string& levels_text, const std::string& out_path,
              std::ostream& out) {
  HeuristicParams p;
  if (!sweep_path.empty()) {
    if (alpha || beta) throw ParameterError("give either --sweep or --alpha/--beta");
    const auto data = read_sweep_csv(sweep_path);
    p = fit_alpha_beta(data, dh, n);
  } else {
    if (!alpha || !beta) throw ParameterError("model needs --alpha and --beta, or --sweep");
    p = {*alpha, *beta, dh, n};
  }
  p.validate();
  json j;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["d_h"] = p.d_h;
  j["n"] = p.n;
  if (p.alpha > 0.0 && p.beta > 0.0) {
    const HeuristicOptimum o = heuristic_optimum(p);
    j["l_opt"] = o.l_opt;
    j["cost_opt"] = o.cost_opt;
    j["k1"] = o.k1;
    j["k2"] = o.k2;
    j["k3"] = o.k3;
  }
  const auto levels = parse_int_range(levels_text);
  int best = -1;
  double best_cost = 0.0;
  for (int l : levels) {
    const double c = heuristic_cost(p, l);
    j["costs"].push_back({{"level", l},
                          {"cost", c},
                          {"p2p", heuristic_p2p_term(p, l)},
                          {"m2l", heuristic_m2l_term(p, l)}});
    if (best < 0 || c < best_cost) {
      best = l;
      best_cost = c;
    }
  }
  j["argmin_level"] = best;
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

std::vector<int> parse_int_range(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) throw ParameterError("empty range");
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = parse_int(text.substr(0, dots));
    const int b = parse_int(text.substr(dots + 2));
    if (a == kUnboundedDepth || b == kUnboundedDepth || b < a) throw ParameterError("invalid range '" + text + "'");
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(item));
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive fast multipole method: point generation, evaluation and cost modelling"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a point set to CSV");
  std::string kind, placement = "center", intensity = "one", gen_out;
  std::optional<double> gamma, dh;
  std::optional<std::size_t> gen_n;
  int level = 0, dim = 3, steps = 3;
  std::uint64_t seed = 0;
  gen->add_option("--kind", kind, "cantor, uniform, spiral or singleton-stress")->required();
  gen->add_option("--gamma", gamma, "Removed fraction of every Cantor interval");
  gen->add_option("--dh", dh, "Target Hausdorff dimension (sets gamma)");
  gen->add_option("--level", level, "Cantor construction steps")->capture_default_str();
  gen->add_option("--dim", dim, "Topological dimension of the Cantor product")->capture_default_str();
  gen->add_option("--n", gen_n, "Point count (uniform, spiral; sampled cantor)");
  gen->add_option("--steps", steps, "Singleton-stress construction steps")->capture_default_str();
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("--placement", placement, "center or random")->capture_default_str();
  gen->add_option("--intensity", intensity, "one or random")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV")->required();

  auto* stats = app.add_subcommand("tree-stats", "Tree shape and occupancy as JSON");
  TreeFlags stats_tree;
  std::string stats_out;
  stats_tree.add(stats);
  stats->add_option("--out", stats_out, "Output JSON (default stdout)");

  auto* run = app.add_subcommand("run", "Evaluate potentials with the FMM");
  TreeFlags run_tree;
  RunFlags run_flags;
  std::string run_out, run_format = "json", potentials_out;
  bool timing = false;
  run_tree.add(run);
  run_flags.add(run);
  run->add_flag("--timing", timing, "Include wall-clock times in the report");
  run->add_option("--format", run_format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  run->add_option("--potentials", potentials_out, "Write potentials to this CSV");
  run->add_option("--out", run_out, "Output report (default stdout)");

  auto* verify = app.add_subcommand("verify", "Check complexity bounds, count consistency and accuracy");
  TreeFlags verify_tree;
  RunFlags verify_flags;
  double tolerance = 1e-3;
  std::string verify_out;
  verify_tree.add(verify);
  verify_flags.add(verify);
  verify->add_option("--tolerance", tolerance, "Largest accepted relative error vs the oracle")->capture_default_str();
  verify->add_option("--out", verify_out, "Output JSON (default stdout)");

  auto* sw = app.add_subcommand("sweep", "Modelled cost over a grid of (lmax, t)");
  std::string sw_points, sw_lmax = "2..10", sw_t = "1..64", sw_out, sw_format = "csv";
  RunFlags sw_flags;
  bool no_conventional = false;
  sw->add_option("--points", sw_points, "Point CSV file")->required();
  sw->add_option("--lmax", sw_lmax, "lmax values: a..b, a,b,c or inf")->capture_default_str();
  sw->add_option("--t", sw_t, "Threshold values: a..b or a,b,c")->capture_default_str();
  sw->add_option("--r", sw_flags.r, "Chebyshev nodes per axis")->capture_default_str();
  sw->add_flag("--unmodified", sw_flags.unmodified, "Count hop-by-hop M2M/L2L");
  sw->add_flag("--no-conventional", no_conventional, "Skip the (lmax, s(lmax)) cells");
  sw->add_option("--format", sw_format, "csv or json")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sw->add_option("--out", sw_out, "Output file (default stdout)");

  auto* model = app.add_subcommand("model", "Evaluate the two-term cost model");
  std::optional<double> alpha, beta;
  double model_dh = 3.0, model_n = 1e6;
  std::string sweep_in, levels = "0..20", model_out;
  model->add_option("--alpha", alpha, "P2P unit cost");
  model->add_option("--beta", beta, "M2L unit cost");
  model->add_option("--dh", model_dh, "Dimension d_H")->capture_default_str();
  model->add_option("--n", model_n, "Point count N")->capture_default_str();
  model->add_option("--sweep", sweep_in, "Fit alpha and beta to the t = 1 rows of a sweep CSV");
  model->add_option("--levels", levels, "Levels to tabulate")->capture_default_str();
  model->add_option("--out", model_out, "Output JSON (default stdout)");

  std::vector<std::string> storage = args;
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParameter;
  }

  try {
    if (*gen)
      return cmd_generate(kind, gamma, dh, level, dim, gen_n, steps, seed, placement, intensity, gen_out, out);
    if (*stats) return cmd_tree_stats(stats_tree, stats_out, out);
    if (*run) return cmd_run(run_tree, run_flags, timing, run_format, potentials_out, run_out, out);
    if (*verify) return cmd_verify(verify_tree, verify_flags, tolerance, verify_out, out);
    if (*sw) return cmd_sweep(sw_points, sw_lmax, sw_t, sw_flags, no_conventional, sw_format, sw_out, out, err);
    if (*model) return cmd_model(alpha, beta, model_dh, model_n, sweep_in, levels, model_out, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const OracleCapError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitParameter;
}

int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace afmm::cli
