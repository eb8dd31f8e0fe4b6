#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vclab/config.hpp"
#include "vclab/coupling.hpp"
#include "vclab/integrator.hpp"
#include "vclab/io.hpp"
#include "vclab/metric.hpp"
#include "vclab/model.hpp"
#include "vclab/network.hpp"
#include "vclab/stats.hpp"
#include "vclab/steady.hpp"
#include "vclab/transport.hpp"
#include "vclab/util.hpp"

namespace fs = std::filesystem;
using vclab::config::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitValidation = 2;
constexpr int kExitUsage = 64;

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string utc_iso() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// JSON has no inf/nan literals; keep reports readable instead of null
Json safe_num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

// every invocation gets a fresh timestamped directory; never overwrite
fs::path make_run_dir(const std::string& base, const std::string& command) {
  const std::string stamp = utc_stamp();
  for (int k = 0;; ++k) {
    fs::path dir = fs::path(base) /
                   (command + "-" + stamp + (k ? "-" + std::to_string(k) : ""));
    if (!fs::exists(dir)) {
      fs::create_directories(dir);
      return dir;
    }
  }
}

struct Run {
  std::string command;
  Json tree;  // resolved config, embedded in the manifest
  fs::path dir;
  uint64_t seed = 0;
  std::vector<std::string> outputs;
  Json report = Json::object();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void note_output(const std::string& name) { outputs.push_back(name); }

  void write_report() {
    std::ofstream out(dir / "report.json");
    out << report.dump(2) << "\n";
    note_output("report.json");
  }

  void write_manifest() {
    Json m;
    m["command"] = command;
    m["version"] = VCLAB_VERSION;
    m["created_utc"] = utc_iso();
    m["seed"] = seed;
    m["config"] = tree;
    m["outputs"] = outputs;
    m["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << "\n";
  }
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::optional<uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> overrides;
};

Run open_run(const std::string& command, const CommonOpts& opt) {
  Run run;
  run.command = command;
  try {
    run.tree = vclab::config::load_file(opt.config_path);
  } catch (const std::runtime_error& e) {
    // an unreadable config violates the command precondition
    throw std::invalid_argument(e.what());
  }
  if (!run.tree.is_object())
    throw std::invalid_argument("config root must be a JSON object");
  for (const auto& [key, value] : opt.overrides)
    vclab::config::apply_dotted_override(run.tree, key, value);
  if (opt.seed) run.tree["sim"]["seed"] = *opt.seed;

  std::vector<std::string> errs;
  vclab::config::check_top_level(run.tree, errs);
  vclab::config::require_clean(errs);

  // commands that use the integrator overwrite this with the parsed value
  if (run.tree.contains("sim") && run.tree["sim"].is_object() &&
      run.tree["sim"].contains("seed") &&
      run.tree["sim"]["seed"].is_number_integer())
    run.seed = run.tree["sim"]["seed"].get<uint64_t>();

  if (opt.threads > 0) vclab::set_thread_cap(opt.threads);
  std::string base = "runs";
  if (run.tree.contains("output_dir")) {
    if (!run.tree.at("output_dir").is_string())
      throw std::invalid_argument(
          "invalid configuration:\n  - output_dir: expected a string");
    base = run.tree.at("output_dir").get<std::string>();
  }
  if (!opt.out_dir.empty()) base = opt.out_dir;
  run.dir = make_run_dir(base, command);
  return run;
}

const Json& block(const Json& tree, const char* name,
                  std::vector<std::string>& errs) {
  static const Json empty = Json::object();
  if (!tree.contains(name)) {
    errs.push_back(std::string("config: required block '") + name +
                   "' is missing");
    return empty;
  }
  return tree.at(name);
}

// write resolved values back so the manifest pins every default in force
void echo_sim(Run& run, const vclab::SimConfig& sc) {
  Json& s = run.tree["sim"];
  s["dt"] = sc.dt;
  s["t_end"] = sc.t_end;
  s["snapshot_stride"] = sc.snapshot_stride;
  s["seed"] = sc.master_seed;
  run.seed = sc.master_seed;
}

void echo_coupling(Run& run, const vclab::CouplingKind& kind) {
  Json& c = run.tree["coupling"];
  switch (kind.variant) {
    case vclab::CouplingVariant::synchronous:
      c["variant"] = "synchronous";
      break;
    case vclab::CouplingVariant::mirror:
      c["variant"] = "mirror";
      break;
    case vclab::CouplingVariant::independent:
      c["variant"] = "independent";
      break;
  }
  c["xi"] = kind.xi;
}

// ---------------------------------------------------------------- commands

int cmd_fixed_point(const CommonOpts& opt) {
  Run run = open_run("fixed-point", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::config::require_clean(errs);

  const auto roots = vclab::fixed_points(p);
  const auto sync = vclab::check_sync_condition(p);
  {
    std::ofstream out(run.dir / "fixed_points.csv");
    out << "v_star,g_star,residual,uniqueness\n";
    char line[160];
    for (const auto& r : roots) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%d\n", r.v_star,
                    r.g_star, r.residual, r.uniqueness ? 1 : 0);
      out << line;
    }
  }
  run.note_output("fixed_points.csv");

  run.report["count"] = roots.size();
  run.report["sync_condition"] = {{"holds", sync.holds},
                                  {"margin", sync.margin}};
  Json list = Json::array();
  for (const auto& r : roots)
    list.push_back({{"v_star", r.v_star},
                    {"g_star", r.g_star},
                    {"residual", r.residual},
                    {"uniqueness", r.uniqueness}});
  run.report["roots"] = list;
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const CommonOpts& opt) {
  Run run = open_run("simulate", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  const int replicas = vclab::config::int_or(block(run.tree, "sim", errs),
                                             "replicas", 1, "sim", errs);
  vclab::InitSampler init = vclab::config::init_from(
      block(run.tree, "initial", errs), "initial", errs);
  if (replicas < 1) errs.push_back("sim.replicas: must be positive");
  vclab::config::require_clean(errs);
  echo_sim(run, sc);

  for (const auto& w : vclab::stability_warnings(p, sc))
    std::cerr << "warning: " << w << "\n";

  if (replicas == 1) {
    const vclab::State s0 = vclab::draw_init(init, sc.master_seed, 0);
    vclab::Trajectory tr = vclab::simulate(p, s0, sc, 0);
    vclab::write_trajectory_csv((run.dir / "trajectory.csv").string(), tr);
    run.note_output("trajectory.csv");
    run.report["final"] = {{"t", tr.times.back()},
                           {"v", tr.states.back().v},
                           {"g", tr.states.back().g}};
  } else {
    vclab::PointCloud cloud = vclab::ensemble(p, init, sc, replicas);
    vclab::write_cloud_csv((run.dir / "cloud_final.csv").string(), cloud);
    run.note_output("cloud_final.csv");
    std::vector<double> v(static_cast<size_t>(cloud.rows()));
    std::vector<double> g(static_cast<size_t>(cloud.rows()));
    for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
      v[static_cast<size_t>(i)] = cloud(i, 0);
      g[static_cast<size_t>(i)] = cloud(i, 1);
    }
    const auto sv = vclab::summarize(v), sg = vclab::summarize(g);
    run.report["v"] = {{"mean", sv.mean},
                       {"variance", sv.variance},
                       {"std_error", sv.std_error}};
    run.report["g"] = {{"mean", sg.mean},
                       {"variance", sg.variance},
                       {"std_error", sg.std_error}};
  }
  run.report["replicas"] = replicas;
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

// monitor selection shared by couple/contract; reads the contract block
struct MonitorChoice {
  vclab::PairMonitor monitor;
  std::string name;
  std::optional<vclab::SyncRate> rate;  // present when the weight came from it
};

MonitorChoice monitor_from(const Json& tree, const vclab::ModelParams& p,
                           std::vector<std::string>& errs) {
  MonitorChoice out;
  const Json contract =
      tree.contains("contract") ? tree.at("contract") : Json::object();
  vclab::config::check_keys(
      contract, {"n_pairs", "monitor", "weight", "fit_lo", "fit_hi"},
      "contract", errs);
  out.name = vclab::config::str_or(contract, "monitor", "weighted_sq",
                                   "contract", errs);
  if (out.name == "weighted_sq") {
    out.monitor.kind = vclab::PairMonitor::Kind::weighted_sq;
    if (contract.contains("weight")) {
      const double w =
          vclab::config::require_num(contract, "weight", "contract", errs);
      if (contract.at("weight").is_number() && !(w > 0))
        errs.push_back("contract.weight: must be positive");
      out.monitor.weight = w;
    } else {
      try {
        out.rate = vclab::sync_rate_theoretical(p);
        out.monitor.weight = out.rate->weight_a;
      } catch (const std::invalid_argument&) {
        out.monitor.weight = 1.0;  // slope condition fails; plain weight
      }
    }
  } else if (out.name == "rho") {
    out.monitor.kind = vclab::PairMonitor::Kind::rho;
    vclab::config::DistanceConfig dc = vclab::config::distance_from(
        tree.contains("distance") ? tree.at("distance") : Json::object(),
        errs);
    try {
      out.monitor.dist = vclab::build_distance_spec(p, dc.xi, dc.overrides);
    } catch (const std::exception& e) {
      errs.push_back(std::string("distance: ") + e.what());
    }
  } else {
    errs.push_back("contract.monitor: must be weighted_sq or rho");
  }
  return out;
}

void require_noise_for_reflection(const vclab::ModelParams& p,
                                  const vclab::CouplingKind& kind,
                                  std::vector<std::string>& errs) {
  if (kind.variant != vclab::CouplingVariant::synchronous && !(p.a > 0))
    errs.push_back(
        "model.a: reflection-based couplings require positive noise "
        "intensity; with a = 0 the conductance gap receives no noise and "
        "the coupled contraction mechanism is undefined");
}

int cmd_couple(const CommonOpts& opt) {
  Run run = open_run("couple", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  vclab::CouplingKind kind =
      vclab::config::coupling_from(block(run.tree, "coupling", errs), errs);
  vclab::PairSampler init = vclab::config::pair_init_from(
      block(run.tree, "pair_initial", errs), errs);
  MonitorChoice mon = monitor_from(run.tree, p, errs);
  require_noise_for_reflection(p, kind, errs);
  vclab::config::require_clean(errs);
  echo_sim(run, sc);
  echo_coupling(run, kind);

  const vclab::PairState s0 = vclab::draw_pair_init(init, sc.master_seed, 0);
  vclab::CoupledRun res =
      vclab::coupled_simulate(p, s0, sc, kind, mon.monitor, 0);
  vclab::write_pair_trajectory_csv((run.dir / "pair_trajectory.csv").string(),
                                   res.trajectory);
  run.note_output("pair_trajectory.csv");
  vclab::write_metric_series_csv((run.dir / "series.csv").string(),
                                 res.series);
  run.note_output("series.csv");

  run.report["monitor"] = mon.name;
  if (mon.monitor.kind == vclab::PairMonitor::Kind::weighted_sq)
    run.report["weight"] = mon.monitor.weight;
  run.report["initial_value"] = res.series.values.front();
  run.report["final_value"] = res.series.values.back();
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_contract(const CommonOpts& opt) {
  Run run = open_run("contract", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  vclab::CouplingKind kind =
      vclab::config::coupling_from(block(run.tree, "coupling", errs), errs);
  vclab::PairSampler init = vclab::config::pair_init_from(
      block(run.tree, "pair_initial", errs), errs);
  MonitorChoice mon = monitor_from(run.tree, p, errs);
  const Json contract =
      run.tree.contains("contract") ? run.tree.at("contract") : Json::object();
  const int n_pairs =
      vclab::config::int_or(contract, "n_pairs", 100, "contract", errs);
  if (n_pairs < 1) errs.push_back("contract.n_pairs: must be positive");
  require_noise_for_reflection(p, kind, errs);
  vclab::config::require_clean(errs);
  echo_sim(run, sc);
  echo_coupling(run, kind);

  vclab::CoupledEnsemble ens =
      vclab::coupled_ensemble(p, init, sc, kind, mon.monitor, n_pairs);
  vclab::write_metric_series_csv((run.dir / "mean_series.csv").string(),
                                 ens.mean_series);
  run.note_output("mean_series.csv");

  const double fit_lo =
      vclab::config::num_or(contract, "fit_lo", 0.0, "contract", errs);
  const double fit_hi =
      vclab::config::num_or(contract, "fit_hi", sc.t_end, "contract", errs);
  run.report["monitor"] = mon.name;
  run.report["n_pairs"] = n_pairs;
  if (mon.rate) {
    run.report["weight_a"] = mon.rate->weight_a;
    run.report["lambda_star"] = mon.rate->lambda_star;
    run.report["neg_q"] = mon.rate->neg_q;
  }
  run.report["initial_mean"] = ens.mean_series.values.front();
  run.report["final_mean"] = ens.mean_series.values.back();
  try {
    const vclab::FitResult fit =
        vclab::fit_decay_rate(ens.mean_series, fit_lo, fit_hi);
    run.report["fit"] = {{"rate", fit.rate},
                         {"r_squared", fit.r_squared},
                         {"n_used", fit.n_used},
                         {"t_lo", fit_lo},
                         {"t_hi", fit_hi}};
  } catch (const std::invalid_argument& e) {
    run.report["fit"] = {{"error", e.what()}};
  }
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_invariant(const CommonOpts& opt) {
  Run run = open_run("invariant", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  const Json inv = run.tree.contains("invariant") ? run.tree.at("invariant")
                                                  : Json::object();
  vclab::config::check_keys(inv, {"n", "burn_in"}, "invariant", errs);
  const int n = vclab::config::int_or(inv, "n", 10000, "invariant", errs);
  const double burn_in = vclab::config::num_or(
      inv, "burn_in", errs.empty() ? vclab::default_burn_in(p) : 0.0,
      "invariant", errs);
  if (n < 2) errs.push_back("invariant.n: needs at least 2 replicas");
  vclab::config::require_clean(errs);
  echo_sim(run, sc);

  vclab::PointCloud cloud = vclab::sample_invariant(p, sc, n, burn_in);
  vclab::write_cloud_csv((run.dir / "cloud.csv").string(), cloud);
  run.note_output("cloud.csv");

  std::vector<double> v(static_cast<size_t>(n)), g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<size_t>(i)] = cloud(i, 0);
    g[static_cast<size_t>(i)] = cloud(i, 1);
  }
  const auto sv = vclab::summarize(v), sg = vclab::summarize(g);
  run.report["n"] = n;
  run.report["burn_in"] = burn_in;
  run.report["v"] = {{"mean", sv.mean},
                     {"variance", sv.variance},
                     {"std_error", sv.std_error}};
  run.report["g"] = {{"mean", sg.mean},
                     {"variance", sg.variance},
                     {"std_error", sg.std_error}};
  if (const auto* c = std::get_if<vclab::ConstantG>(&p.conductance)) {
    const auto oracle = vclab::reflected_ou_moments(c->value, p.gamma, p.a);
    run.report["oracle"] = {{"mean", oracle.mean},
                            {"variance", oracle.variance}};
  }
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_noise_bound(const CommonOpts& opt) {
  Run run = open_run("noise-bound", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  const Json nb = run.tree.contains("noise_bound") ? run.tree.at("noise_bound")
                                                   : Json::object();
  vclab::config::check_keys(nb, {"n", "burn_in", "a_values"}, "noise_bound",
                            errs);
  const int n = vclab::config::int_or(nb, "n", 10000, "noise_bound", errs);
  const double burn_in = vclab::config::num_or(
      nb, "burn_in", errs.empty() ? vclab::default_burn_in(p) : 0.0,
      "noise_bound", errs);
  std::vector<double> a_values;
  if (nb.contains("a_values")) {
    if (!nb.at("a_values").is_array()) {
      errs.push_back("noise_bound.a_values: expected an array of numbers");
    } else {
      for (const auto& x : nb.at("a_values"))
        if (x.is_number())
          a_values.push_back(x.get<double>());
        else
          errs.push_back("noise_bound.a_values: entries must be numbers");
    }
  } else {
    a_values = {p.a};
  }
  if (a_values.empty()) errs.push_back("noise_bound.a_values: empty sweep");
  for (double a : a_values)
    if (!(a > 0)) errs.push_back("noise_bound.a_values: entries must be > 0");
  if (n < 2) errs.push_back("noise_bound.n: needs at least 2 replicas");
  vclab::config::require_clean(errs);
  echo_sim(run, sc);

  Json points = Json::array();
  std::vector<double> log_a, lhs_vals;
  bool all_hold = true;
  {
    std::ofstream out(run.dir / "sweep.csv");
    out << "a,lhs,lhs_std_error,rhs,holds\n";
    char line[200];
    for (double a : a_values) {
      vclab::ModelParams q = p;
      q.a = a;
      const auto rep = vclab::noise_bound_check(q, sc, n, burn_in);
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%d\n", a,
                    rep.lhs, rep.lhs_std_error, rep.rhs, rep.holds ? 1 : 0);
      out << line;
      points.push_back({{"a", a},
                        {"lhs", rep.lhs},
                        {"lhs_std_error", rep.lhs_std_error},
                        {"rhs", rep.rhs},
                        {"holds", rep.holds}});
      all_hold = all_hold && rep.holds;
      log_a.push_back(std::log(a));
      lhs_vals.push_back(rep.lhs);
      run.report["weight_a"] = rep.weight_a;
      run.report["lambda_star"] = rep.lambda_star;
    }
  }
  run.note_output("sweep.csv");
  run.report["points"] = points;
  run.report["all_hold"] = all_hold;
  if (log_a.size() >= 2) {
    // slope of log lhs against log a via the decay-rate fitter on t = log a
    vclab::MetricSeries s{log_a, lhs_vals};
    const auto [lo, hi] = std::minmax_element(log_a.begin(), log_a.end());
    const auto fit = vclab::fit_decay_rate(s, *lo, *hi);
    run.report["log_log_slope"] = -fit.rate;
    run.report["log_log_r_squared"] = fit.r_squared;
  }
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_constants(const CommonOpts& opt) {
  Run run = open_run("constants", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::config::DistanceConfig dc = vclab::config::distance_from(
      run.tree.contains("distance") ? run.tree.at("distance") : Json::object(),
      errs);
  vclab::config::require_clean(errs);

  const auto sync = vclab::check_sync_condition(p);
  run.report["sync_condition"] = {{"holds", sync.holds},
                                  {"margin", sync.margin}};
  run.report["conductance_lipschitz"] = p.g_lip();
  run.report["conductance_sup"] = p.g_sup();

  if (sync.holds) {
    const auto rate = vclab::sync_rate_theoretical(p);
    run.report["weighted_norm"] = {{"weight_a", rate.weight_a},
                                   {"lambda_star", rate.lambda_star},
                                   {"neg_q", rate.neg_q}};
  }
  try {
    const vclab::DistanceSpec d =
        vclab::build_distance_spec(p, dc.xi, dc.overrides);
    run.report["modified_distance"] = {
        {"m", d.m},
        {"M", d.M},
        {"r_star", d.r_star},
        {"k", d.k},
        {"xi", d.xi},
        {"ramp_end", d.ramp_end},
        {"k_r_star_sq", d.k * d.r_star * d.r_star},
        {"lambda", safe_num(d.lambda_guaranteed)},
        {"log_lambda", safe_num(d.log_lambda_guaranteed)}};
  } catch (const vclab::DeterministicRegimeError& e) {
    run.report["modified_distance"] = {{"regime", "weighted_norm"},
                                       {"detail", e.what()}};
  }
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_network(const CommonOpts& opt) {
  Run run = open_run("network", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  vclab::CouplingKind kind =
      vclab::config::coupling_from(block(run.tree, "coupling", errs), errs);
  const Json net = block(run.tree, "network", errs);
  vclab::config::check_keys(net, {"n", "h1", "reps"}, "network", errs);
  const int n = vclab::config::int_or(net, "n", 16, "network", errs);
  const int reps = vclab::config::int_or(net, "reps", 1, "network", errs);
  vclab::MeanFieldSpec spec;
  spec.h0 = p.conductance;
  if (net.contains("h1"))
    spec.h1 = vclab::config::interaction_from(net.at("h1"), "network.h1", errs);
  else
    errs.push_back("network.h1: required block is missing");
  vclab::config::DistanceConfig dc = vclab::config::distance_from(
      run.tree.contains("distance") ? run.tree.at("distance") : Json::object(),
      errs);
  vclab::InitSampler init = vclab::config::init_from(
      block(run.tree, "initial", errs), "initial", errs);
  if (n < 2) errs.push_back("network.n: needs at least 2 neurons");
  if (reps < 1) errs.push_back("network.reps: must be positive");
  require_noise_for_reflection(p, kind, errs);
  if (errs.empty())
    for (const auto& e : vclab::validate(spec, p))
      errs.push_back("network: " + e);
  vclab::config::require_clean(errs);
  echo_sim(run, sc);
  echo_coupling(run, kind);

  vclab::DistanceSpec dist;
  try {
    dist = vclab::build_distance_spec(p, dc.xi, dc.overrides);
  } catch (const vclab::DeterministicRegimeError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("distance: ") + e.what());
  }
  const auto eta_res = vclab::eta(spec, p, dist);

  // ensemble of coupled network pairs; each rep gets its own noise stream
  // and disjoint init slots for the two copies
  std::vector<double> mean_rho, mean_l1, times;
  for (int r = 0; r < reps; ++r) {
    const auto stream = static_cast<uint32_t>(r);
    vclab::NetworkState z0 =
        vclab::draw_network_init(init, n, sc.master_seed, stream, 0);
    vclab::NetworkState z0p = vclab::draw_network_init(
        init, n, sc.master_seed, stream, static_cast<uint32_t>(n));
    const auto res = vclab::network_coupled_simulate(spec, p, z0, z0p, sc,
                                                     kind, dist, stream);
    if (r == 0) {
      times = res.sum_rho.times;
      mean_rho.assign(times.size(), 0.0);
      mean_l1.assign(times.size(), 0.0);
    }
    for (size_t j = 0; j < times.size(); ++j) {
      mean_rho[j] += res.sum_rho.values[j] / reps;
      mean_l1[j] += res.sum_l1.values[j] / reps;
    }
  }
  vclab::MetricSeries rho_series{times, mean_rho};
  vclab::MetricSeries l1_series{times, mean_l1};
  vclab::write_metric_series_csv((run.dir / "mean_sum_rho.csv").string(),
                                 rho_series);
  run.note_output("mean_sum_rho.csv");
  vclab::write_metric_series_csv((run.dir / "mean_sum_l1.csv").string(),
                                 l1_series);
  run.note_output("mean_sum_l1.csv");

  run.report["n"] = n;
  run.report["reps"] = reps;
  run.report["eta"] = {{"value", safe_num(eta_res.value)},
                       {"log_value", safe_num(eta_res.log_value)}};
  run.report["initial_mean_sum_rho"] = mean_rho.front();
  run.report["final_mean_sum_rho"] = mean_rho.back();
  run.report["decay_factor"] =
      safe_num(mean_rho.back() > 0
                   ? mean_rho.front() / mean_rho.back()
                   : std::numeric_limits<double>::infinity());
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_chaos(const CommonOpts& opt) {
  Run run = open_run("chaos", opt);
  std::vector<std::string> errs;
  vclab::ModelParams p =
      vclab::config::model_from(block(run.tree, "model", errs), errs);
  vclab::SimConfig sc =
      vclab::config::sim_from(block(run.tree, "sim", errs), errs);
  const Json net = block(run.tree, "network", errs);
  vclab::config::check_keys(net, {"n", "h1", "reps"}, "network", errs);
  vclab::MeanFieldSpec spec;
  spec.h0 = p.conductance;
  if (net.contains("h1"))
    spec.h1 = vclab::config::interaction_from(net.at("h1"), "network.h1", errs);
  else
    errs.push_back("network.h1: required block is missing");
  const Json chaos =
      run.tree.contains("chaos") ? run.tree.at("chaos") : Json::object();
  vclab::config::check_keys(chaos, {"n_values", "reps"}, "chaos", errs);
  std::vector<int> n_values;
  if (chaos.contains("n_values")) {
    if (!chaos.at("n_values").is_array()) {
      errs.push_back("chaos.n_values: expected an array of integers");
    } else {
      for (const auto& x : chaos.at("n_values"))
        if (x.is_number_integer())
          n_values.push_back(x.get<int>());
        else
          errs.push_back("chaos.n_values: entries must be integers");
    }
  } else {
    n_values = {8, 32, 128};
  }
  const int reps = vclab::config::int_or(chaos, "reps", 64, "chaos", errs);
  vclab::InitSampler init = vclab::config::init_from(
      block(run.tree, "initial", errs), "initial", errs);
  if (errs.empty())
    for (const auto& e : vclab::validate(spec, p))
      errs.push_back("network: " + e);
  vclab::config::require_clean(errs);
  echo_sim(run, sc);

  const vclab::ChaosStudy study =
      vclab::chaos_study(spec, p, n_values, init, sc, reps);
  {
    std::ofstream out(run.dir / "chaos.csv");
    out << "n,error,std_error\n";
    char line[120];
    for (size_t i = 0; i < study.n_values.size(); ++i) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", study.n_values[i],
                    study.errors[i], study.std_errors[i]);
      out << line;
    }
  }
  run.note_output("chaos.csv");
  run.report["reps"] = reps;
  run.report["slope"] = study.slope;
  run.report["r_squared"] = study.r2;
  Json points = Json::array();
  for (size_t i = 0; i < study.n_values.size(); ++i)
    points.push_back({{"n", study.n_values[i]},
                      {"error", study.errors[i]},
                      {"std_error", study.std_errors[i]}});
  run.report["points"] = points;
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

int cmd_transport(const CommonOpts& opt) {
  Run run = open_run("transport", opt);
  std::vector<std::string> errs;
  const Json tp = block(run.tree, "transport", errs);
  vclab::config::check_keys(
      tp, {"cloud_a", "cloud_b", "order", "norm", "n_sub", "reps", "seed"},
      "transport", errs);
  const std::string cloud_a =
      vclab::config::str_or(tp, "cloud_a", "", "transport", errs);
  const std::string cloud_b =
      vclab::config::str_or(tp, "cloud_b", "", "transport", errs);
  if (cloud_a.empty() || cloud_b.empty())
    errs.push_back("transport: needs cloud_a and cloud_b CSV paths");
  const int order = vclab::config::int_or(tp, "order", 1, "transport", errs);
  const std::string norm_name =
      vclab::config::str_or(tp, "norm", "euclidean", "transport", errs);
  vclab::GroundNorm norm = vclab::GroundNorm::euclidean;
  if (norm_name == "l1")
    norm = vclab::GroundNorm::l1;
  else if (norm_name != "euclidean")
    errs.push_back("transport.norm: must be euclidean or l1");
  const int n_sub = vclab::config::int_or(tp, "n_sub", 0, "transport", errs);
  const int reps = vclab::config::int_or(tp, "reps", 32, "transport", errs);
  const int seed = vclab::config::int_or(tp, "seed", 0, "transport", errs);
  vclab::config::require_clean(errs);
  run.seed = static_cast<uint64_t>(seed);

  const vclab::PointCloud a = vclab::read_cloud_csv(cloud_a);
  const vclab::PointCloud b = vclab::read_cloud_csv(cloud_b);
  run.report["order"] = order;
  run.report["norm"] = norm_name;
  run.report["points"] = a.rows();
  if (n_sub > 0) {
    const auto est = vclab::w_subsampled(a, b, order, norm, n_sub, reps,
                                         static_cast<uint64_t>(seed));
    run.report["estimate"] = est.estimate;
    run.report["std_error"] = est.std_error;
    run.report["n_sub"] = est.n_sub;
    run.report["reps"] = est.reps;
  } else {
    run.report["distance"] = vclab::w_exact(a, b, order, norm);
  }
  run.write_report();
  run.write_manifest();
  std::cout << run.dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  // dotted tokens (--model.a 0.3 or --model.a=0.3) become config overrides;
  // everything else goes to the regular parser
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (int i = 1; i < argc; ++i) {
    const std::string tok = argv[i];
    if (tok.rfind("--", 0) == 0 && tok.find('.') != std::string::npos) {
      std::string key = tok.substr(2), value;
      const size_t eq = key.find('=');
      if (eq != std::string::npos) {
        value = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else if (i + 1 < argc) {
        value = argv[++i];
      } else {
        std::cerr << "override " << tok << " is missing a value\n";
        return kExitUsage;
      }
      overrides.emplace_back(key, value);
      continue;
    }
    args.push_back(tok);
  }

  CLI::App app{"simulation laboratory for a reflected voltage-conductance "
               "diffusion, its couplings, and mean-field networks"};
  app.set_version_flag("--version", VCLAB_VERSION);
  app.require_subcommand(1);

  CommonOpts opt;
  opt.overrides = overrides;
  uint64_t seed_value = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fixed-point", "equilibria of the noiseless flow"},
      {"simulate", "single path or ensemble of the reflected dynamics"},
      {"couple", "one coupled pair trajectory with a distance monitor"},
      {"contract", "ensemble mean of a coupled-pair distance and its decay"},
      {"invariant", "long-run samples of the stationary law"},
      {"noise-bound", "stationary second-moment bound over a noise sweep"},
      {"constants", "contraction constants and regime diagnostics"},
      {"network", "coupled mean-field network pair ensemble"},
      {"chaos", "network-size scaling of the mean-field gap"},
      {"transport", "Wasserstein distance between two stored clouds"}};
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opt.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", opt.out_dir,
                    "output directory (default from config, else 'runs')");
    sub->add_option("--threads", opt.threads, "worker thread cap");
    CLI::Option* seed_opt =
        sub->add_option("--seed", seed_value, "override sim.seed");
    sub->parse_complete_callback([&opt, &seed_value, seed_opt] {
      if (seed_opt->count() > 0) opt.seed = seed_value;
    });
  }

  std::vector<const char*> cargs;
  cargs.push_back("vclab");
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("fixed-point")) return cmd_fixed_point(opt);
    if (app.got_subcommand("simulate")) return cmd_simulate(opt);
    if (app.got_subcommand("couple")) return cmd_couple(opt);
    if (app.got_subcommand("contract")) return cmd_contract(opt);
    if (app.got_subcommand("invariant")) return cmd_invariant(opt);
    if (app.got_subcommand("noise-bound")) return cmd_noise_bound(opt);
    if (app.got_subcommand("constants")) return cmd_constants(opt);
    if (app.got_subcommand("network")) return cmd_network(opt);
    if (app.got_subcommand("chaos")) return cmd_chaos(opt);
    if (app.got_subcommand("transport")) return cmd_transport(opt);
    std::cerr << "no command selected\n";
    return kExitUsage;
  } catch (const vclab::DeterministicRegimeError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
