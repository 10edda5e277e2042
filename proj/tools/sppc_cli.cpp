// sppc: sparse packetized predictive control simulator.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sppc/config.hpp"
#include "sppc/error.hpp"
#include "sppc/report.hpp"
#include "sppc/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kValidation = 2, kSolver = 3 };

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "sppc-out";
  std::vector<std::string> controllers;
  std::optional<int> trials;
  std::optional<int> steps;
  std::optional<double> noise;
  std::optional<int> threads;
  std::string design;
  bool timing = false;
  bool svg = false;
  bool dump_horizon = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "Run configuration (JSON)");
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--out-dir", a.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--trials", a.trials, "Number of Monte Carlo trials");
  cmd->add_option("--steps", a.steps, "Steps per trial");
  cmd->add_option("--noise", a.noise, "Gaussian plant noise sigma per component");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--svg", a.svg, "Also write SVG plots");
}

sppc::SimConfig load_config(const CommonArgs& a, const sppc::SimConfig& defaults = {}) {
  sppc::SimConfig cfg =
      a.config.empty() ? defaults
                       : sppc::config_from_json_text(sppc::read_text_file(a.config), defaults);
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  if (a.steps) cfg.T = *a.steps;
  if (a.noise) cfg.noise_sigma = *a.noise;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.controllers.empty()) cfg.controller = sppc::parse_controller(a.controllers.front());
  sppc::validate(cfg);
  return cfg;
}

sppc::ClosedLoopSetup load_setup(const CommonArgs& a, sppc::SimConfig& cfg) {
  if (a.design.empty()) return sppc::make_setup(cfg);
  const auto loaded = sppc::design_from_json_text(sppc::read_text_file(a.design));
  cfg.plant = loaded.plant;
  cfg.plant_source = "inline";
  cfg.N = loaded.design.N;
  cfg.Q = loaded.design.Q;
  cfg.eta = loaded.design.eta;
  cfg.delta = loaded.design.delta;
  sppc::validate(cfg);
  return sppc::make_setup(loaded.plant, loaded.design);
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw sppc::Error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write(const fs::path& dir, const std::string& name, const std::string& text) {
  sppc::write_text_file((dir / name).string(), text);
}

json meta_base(const sppc::SimConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["config"] = json::parse(sppc::config_to_json_text(cfg));
  m["paired_trials"] = true;
  m["seed_derivation"] = "splitmix64(master, trial) -> streams 1 trace, 2 x0, 3 noise";
  return m;
}

std::vector<double> iota_k(std::size_t T) {
  std::vector<double> k(T);
  for (std::size_t i = 0; i < T; ++i) k[i] = static_cast<double>(i);
  return k;
}

int cmd_design(const CommonArgs& a) {
  sppc::SimConfig cfg = load_config(a);
  const auto setup = sppc::make_setup(cfg);
  const fs::path out = prepare_out_dir(a.out_dir);
  write(out, "design.json", sppc::design_to_json_text(setup.design, setup.plant));
  if (a.dump_horizon) {
    write(out, "G.csv", sppc::report::matrix_csv(setup.horizon.G));
    write(out, "H.csv", sppc::report::matrix_csv(setup.horizon.H));
  }
  json meta = meta_base(cfg, "design");
  meta["dare_iterations"] = setup.design.dare_iterations;
  meta["dare_residual"] = setup.design.dare_residual;
  meta["c1"] = setup.design.c1;
  meta["rho"] = setup.design.rho;
  meta["c"] = setup.design.c;
  write(out, "meta.json", meta.dump(2) + "\n");
  std::cout << "design: N=" << setup.design.N << " rho=" << sppc::report::fmt(setup.design.rho)
            << " c1=" << sppc::report::fmt(setup.design.c1)
            << " c=" << sppc::report::fmt(setup.design.c)
            << " dare_iterations=" << setup.design.dare_iterations << "\n";
  return kOk;
}

int cmd_simulate(const CommonArgs& a) {
  sppc::SimConfig cfg = load_config(a);
  const auto setup = load_setup(a, cfg);

  std::vector<sppc::ControllerSpec> specs;
  if (a.controllers.empty()) specs.push_back(cfg.controller);
  for (const auto& c : a.controllers) specs.push_back(sppc::parse_controller(c));

  sppc::TrialOptions opts;
  opts.noise_sigma = cfg.noise_sigma;
  std::vector<sppc::MonteCarloReport> reports;
  for (const auto& spec : specs) reports.push_back(sppc::monte_carlo(setup, cfg, spec, opts));
  std::vector<const sppc::MonteCarloReport*> ptrs;
  for (const auto& r : reports) ptrs.push_back(&r);

  const fs::path out = prepare_out_dir(a.out_dir);
  write(out, "trace.csv", sppc::report::trace_csv(cfg, cfg.seed));
  write(out, "trajectory.csv", sppc::report::trajectory_csv(ptrs));
  write(out, "summary.csv", sppc::report::summary_csv(ptrs));
  if (a.timing) write(out, "timing.csv", sppc::report::timing_csv(ptrs));

  json meta = meta_base(cfg, "simulate");
  json results = json::array();
  bool any_failure = false;
  for (const auto& r : reports) {
    int violations = 0;
    std::int64_t overrides = 0;
    for (std::size_t t = 0; t < r.trials.size(); ++t) {
      if (r.trials[t].norm.empty()) continue;
      violations += sppc::lyapunov_audit(r.trials[t]).violations();
      overrides += r.trials[t].overrides;
    }
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"trial", f.trial}, {"message", f.message}});
    any_failure = any_failure || !r.failures.empty();
    results.push_back({{"controller", r.controller.label()},
                       {"mean_trajectory_norm", r.mean_trajectory_norm},
                       {"mean_sparsity", r.mean_sparsity_overall},
                       {"final_mean_norm", r.mean_norm.empty() ? 0.0 : r.mean_norm.back()},
                       {"final_median_norm", r.median_norm.empty() ? 0.0 : r.median_norm.back()},
                       {"lyapunov_violations", violations},
                       {"forced_deliveries", overrides},
                       {"failures", failures}});
    std::cout << r.controller.label() << ": performance=" << sppc::report::fmt(r.mean_trajectory_norm)
              << " mean_sparsity=" << sppc::report::fmt(r.mean_sparsity_overall)
              << " final_median_norm=" << sppc::report::fmt(r.median_norm.back())
              << " lyapunov_violations=" << violations << " failures=" << r.failures.size() << "\n";
    for (const auto& f : r.failures) std::cerr << "  " << f.message << "\n";
  }
  meta["results"] = results;
  write(out, "meta.json", meta.dump(2) + "\n");

  if (a.svg) {
    const auto k = iota_k(static_cast<std::size_t>(cfg.T));
    std::vector<sppc::report::Series> norm, sparsity;
    for (const auto& r : reports) {
      norm.push_back({r.controller.label(), k, r.mean_norm});
      sparsity.push_back({r.controller.label(), k, r.mean_sparsity});
    }
    write(out, "norm.svg", sppc::report::svg_line_plot("Mean state norm", "k", "||x(k)||", norm, false, true));
    write(out, "norm_linear.svg", sppc::report::svg_line_plot("Mean state norm", "k", "||x(k)||", norm, false, false));
    write(out, "sparsity.svg", sppc::report::svg_line_plot("Mean packet sparsity", "k", "nonzeros", sparsity, false, false));
  }
  return any_failure ? kSolver : kOk;
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(std::pow(10.0, 0.25 * i));
  return g;
}

int cmd_sweep(const CommonArgs& a, const std::string& family_arg, std::vector<double> grid,
              std::vector<double> match_grid) {
  sppc::SimConfig cfg = load_config(a);
  const auto setup = load_setup(a, cfg);
  if (grid.empty()) grid = cfg.sweep_grid.empty() ? default_grid() : cfg.sweep_grid;
  const bool both = family_arg == "both";
  sppc::ControllerKind family = cfg.sweep_family;
  if (family_arg == "l2" || both) family = sppc::ControllerKind::L2;
  else if (family_arg == "l1l2") family = sppc::ControllerKind::L1L2;
  else if (!family_arg.empty()) throw sppc::ValidationError("--family must be l2, l1l2 or both");

  const auto curve = sppc::sweep_regularization(setup, cfg, family, grid);
  std::string csv = sppc::report::sweep_csv(curve);
  const auto& best = curve.points[curve.argmin];
  std::cout << sppc::to_string(family) << " argmin nu=" << sppc::report::fmt(best.nu)
            << " performance=" << sppc::report::fmt(best.performance) << "\n";

  json meta = meta_base(cfg, "sweep");
  meta["argmin"] = {{"family", sppc::to_string(family)}, {"nu", best.nu}, {"performance", best.performance}};
  std::vector<sppc::report::Series> series{{sppc::to_string(family), {}, {}}};
  for (const auto& p : curve.points) {
    series[0].x.push_back(p.nu);
    series[0].y.push_back(p.performance);
  }

  if (both) {
    if (match_grid.empty()) match_grid = grid;
    const auto l1 = sppc::sweep_regularization(setup, cfg, sppc::ControllerKind::L1L2, match_grid);
    const std::string extra = sppc::report::sweep_csv(l1);
    csv += extra.substr(extra.find('\n') + 1);
    const double nu1 = sppc::match_performance(l1, best.performance);
    meta["matched_l1l2_nu"] = nu1;
    std::cout << "l1l2 nu matching l2 argmin performance: " << sppc::report::fmt(nu1) << "\n";
    series.push_back({"l1l2", {}, {}});
    for (const auto& p : l1.points) {
      series[1].x.push_back(p.nu);
      series[1].y.push_back(p.performance);
    }
  }

  const fs::path out = prepare_out_dir(a.out_dir);
  write(out, "sweep.csv", csv);
  write(out, "meta.json", meta.dump(2) + "\n");
  if (a.svg)
    write(out, "sweep.svg", sppc::report::svg_line_plot("Regularization sweep", "nu", "performance", series, true, false));
  return kOk;
}

int cmd_bitrate(const CommonArgs& a, std::optional<int> train, std::optional<int> test) {
  sppc::SimConfig defaults;
  defaults.noise_sigma = 0.01;
  sppc::SimConfig cfg = load_config(a, defaults);
  if (train) cfg.train_trials = *train;
  if (test) cfg.test_trials = *test;
  sppc::validate(cfg);
  const auto setup = load_setup(a, cfg);
  const auto exp = sppc::bitrate_experiment(setup, cfg);

  const fs::path out = prepare_out_dir(a.out_dir);
  write(out, "rates.csv", sppc::report::rates_csv(exp));
  if (exp.omp_codec) write(out, "codec_omp.json", exp.omp_codec->to_json_text());
  if (exp.l2_codec) write(out, "codec_l2.json", exp.l2_codec->to_json_text());

  std::ostringstream summary;
  summary << "scheme,mean_bits\n"
          << "omp-sparse," << sppc::report::fmt(exp.omp_mean_bits) << "\n"
          << "l2-dense," << sppc::report::fmt(exp.l2_mean_bits) << "\n";
  write(out, "summary.csv", summary.str());

  json meta = meta_base(cfg, "bitrate");
  meta["omp_mean_bits"] = exp.omp_mean_bits;
  meta["l2_mean_bits"] = exp.l2_mean_bits;
  meta["reduction_percent"] = exp.reduction_percent;
  meta["test_packets"] = exp.test_packets;
  meta["roundtrip_failures"] = exp.roundtrip_failures;
  meta["max_quantization_error"] = exp.max_quantization_error;
  write(out, "meta.json", meta.dump(2) + "\n");

  std::cout << "omp-sparse mean bits: " << sppc::report::fmt(exp.omp_mean_bits) << "\n"
            << "l2-dense mean bits:   " << sppc::report::fmt(exp.l2_mean_bits) << "\n"
            << "reduction: " << sppc::report::fmt(exp.reduction_percent) << "%\n"
            << "roundtrip failures: " << exp.roundtrip_failures << " of " << exp.test_packets << "\n";
  return exp.roundtrip_failures == 0 ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse packetized predictive control over erasure channels"};
  app.require_subcommand(1);

  CommonArgs design_args, sim_args, sweep_args, rate_args;

  auto* design = app.add_subcommand("design", "Solve the Riccati design and write design.json");
  add_common(design, design_args);
  design->add_flag("--dump-horizon", design_args.dump_horizon, "Write G.csv and H.csv")
      ->group("");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo closed-loop simulation");
  add_common(simulate, sim_args);
  simulate->add_option("--controller", sim_args.controllers,
                       "Controller(s): omp, oracle, least_squares, l2:<nu>, l1l2:<nu>");
  simulate->add_option("--design", sim_args.design, "Precomputed design.json");
  simulate->add_flag("--timing", sim_args.timing, "Also write timing.csv (not reproducible)");

  std::string family;
  std::vector<double> grid, match_grid;
  auto* sweep = app.add_subcommand("sweep", "Regularization parameter sweep");
  add_common(sweep, sweep_args);
  sweep->add_option("--family", family, "l2, l1l2 or both");
  sweep->add_option("--grid", grid, "Regularization values");
  sweep->add_option("--match-grid", match_grid, "l1l2 grid used with --family both");
  sweep->add_option("--design", sweep_args.design, "Precomputed design.json");

  std::optional<int> train, test;
  auto* bitrate = app.add_subcommand("bitrate", "Train codecs and measure packet bit-rates");
  add_common(bitrate, rate_args);
  bitrate->add_option("--train-trials", train, "Training trials");
  bitrate->add_option("--test-trials", test, "Test trials");
  bitrate->add_option("--design", rate_args.design, "Precomputed design.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*design) return cmd_design(design_args);
    if (*simulate) return cmd_simulate(sim_args);
    if (*sweep) return cmd_sweep(sweep_args, family, grid, match_grid);
    if (*bitrate) return cmd_bitrate(rate_args, train, test);
  } catch (const sppc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const sppc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
