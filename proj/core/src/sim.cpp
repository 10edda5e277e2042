#include "sppc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "sppc/error.hpp"
#include "sppc/rng.hpp"

namespace sppc {

namespace {

// Seed streams hanging off each trial seed.
constexpr std::uint64_t kTraceStream = 1;
constexpr std::uint64_t kInitialStateStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

// Master seeds of the two bit-rate phases.
constexpr std::uint64_t kTrainPhase = 0x7261696eULL;
constexpr std::uint64_t kTestPhase = 0x74657374ULL;

[[noreturn]] void rethrow_with_context(std::int64_t k) {
  const std::string where = "k = " + std::to_string(k) + ": ";
  try {
    throw;
  } catch (const FeasibilityError& e) {
    throw FeasibilityError(where + e.what(), e.residual(), e.budget());
  } catch (const SolverError& e) {
    throw SolverError(where + e.what(), e.residual());
  } catch (const ProtocolError& e) {
    throw ProtocolError(where + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  } catch (const std::exception& e) {
    throw Error(where + e.what());
  }
}

int worker_count(int requested, int jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, jobs));
}

}  // namespace

Matrix SimConfig::resolved_Q() const {
  if (Q.size() == 0) return Matrix::Identity(plant.n(), plant.n());
  return Q;
}

void validate(const SimConfig& cfg) {
  validate(cfg.plant);
  if (cfg.N < 1) throw ValidationError("N must be >= 1");
  if (cfg.T < 1) throw ValidationError("steps T must be >= 1");
  if (cfg.trials < 1) throw ValidationError("trials must be >= 1");
  if (!(cfg.noise_sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
  if (!(cfg.delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (cfg.Q.size() != 0 && (cfg.Q.rows() != cfg.plant.n() || cfg.Q.cols() != cfg.plant.n()))
    throw ValidationError("Q must be n x n");
  if (cfg.x0_kind == InitialStateKind::Explicit && cfg.x0.size() != cfg.plant.n())
    throw ValidationError("explicit x0 must have n entries");
  if (!(cfg.quant_delta > 0.0)) throw ValidationError("quantizer step must be positive");
  if (cfg.train_trials < 1 || cfg.test_trials < 1)
    throw ValidationError("bit-rate train/test trial counts must be >= 1");
  if (!(cfg.l2_nu > 0.0)) throw ValidationError("l2_nu must be positive");
  const auto& c = cfg.controller;
  if ((c.kind == ControllerKind::L1L2 || c.kind == ControllerKind::L2) && !(c.nu > 0.0))
    throw ValidationError("controller regularization parameter must be positive");
  for (double nu : cfg.sweep_grid)
    if (!(nu > 0.0)) throw ValidationError("sweep grid values must be positive");
  DropoutModel dm = cfg.dropout;
  dm.N = cfg.N;
  validate(dm);
  if (dm.kind == DropoutKind::Scripted && static_cast<int>(dm.script.size()) < cfg.T)
    throw ValidationError("scripted trace is shorter than T");
}

ClosedLoopSetup make_setup(const SimConfig& cfg) {
  validate(cfg);
  ClosedLoopSetup s;
  s.plant = cfg.plant;
  s.design = build_design(cfg.plant, cfg.resolved_Q(), cfg.N, cfg.eta, cfg.delta);
  s.horizon = build_horizon(s.plant, s.design.Q, s.design.P, s.design.N);
  return s;
}

ClosedLoopSetup make_setup(const PlantModel& plant, const CostDesign& design) {
  ClosedLoopSetup s;
  s.plant = plant;
  s.design = design;
  s.horizon = build_horizon(plant, design.Q, design.P, design.N);
  return s;
}

TrialInputs make_trial_inputs(const SimConfig& cfg, std::uint64_t master_seed,
                              int trial) {
  const std::uint64_t trial_seed = derive_seed(master_seed, static_cast<std::uint64_t>(trial));
  TrialInputs in;
  DropoutModel dm = cfg.dropout;
  dm.N = cfg.N;
  dm.seed = derive_seed(trial_seed, kTraceStream);
  in.trace = generate_trace(dm, cfg.T);

  if (cfg.x0_kind == InitialStateKind::Explicit) {
    in.x0 = cfg.x0;
  } else {
    std::mt19937_64 rng(derive_seed(trial_seed, kInitialStateStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    in.x0.resize(cfg.plant.n());
    for (Eigen::Index i = 0; i < in.x0.size(); ++i) in.x0(i) = normal(rng);
  }
  in.noise_seed = derive_seed(trial_seed, kNoiseStream);
  return in;
}

double TrialResult::trajectory_norm() const {
  double s = 0.0;
  for (double v : norm) s += v * v;
  return std::sqrt(s);
}

TrialResult run_trial(const ClosedLoopSetup& setup, const PacketSolver& solver,
                      const TrialInputs& inputs, const TrialOptions& opts) {
  const PlantModel& m = setup.plant;
  const Matrix& P = setup.design.P;
  const auto T = static_cast<std::int64_t>(inputs.trace.size());
  if (inputs.x0.size() != m.n()) throw ValidationError("x0 dimension mismatch");
  if (!(opts.noise_sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");

  TrialResult r;
  r.overrides = inputs.trace.overrides;
  r.d = inputs.trace.d;
  for (auto* v : {&r.norm, &r.V, &r.u, &r.solve_seconds}) v->reserve(static_cast<std::size_t>(T));
  r.sparsity.reserve(static_cast<std::size_t>(T));

  std::mt19937_64 noise_rng(inputs.noise_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector x = inputs.x0;
  Vector v = Vector::Zero(m.n());
  BufferState buffer;
  for (std::int64_t k = 0; k < T; ++k) {
    r.norm.push_back(x.norm());
    r.V.push_back(x.dot(P * x));
    try {
      ControlPacket packet = solver.solve(x);
      r.sparsity.push_back(packet.sparsity);
      r.solve_seconds.push_back(packet.solve_seconds);
      if (opts.keep_packets)
        r.packets.emplace_back(packet.u.data(), packet.u.data() + packet.u.size());
      if (opts.quantizer)
        for (Eigen::Index i = 0; i < packet.u.size(); ++i)
          packet.u(i) = opts.quantizer->quantize(packet.u(i)).value;

      const int d_k = inputs.trace.d[static_cast<std::size_t>(k)];
      Actuation act = actuate(buffer, d_k, d_k == 0 ? std::optional<Vector>(packet.u) : std::nullopt);
      buffer = std::move(act.buffer);
      r.u.push_back(act.u);

      if (opts.noise_sigma > 0.0)
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = opts.noise_sigma * normal(noise_rng);
      x = m.A * x + m.B * act.u + v;
    } catch (...) {
      rethrow_with_context(k);
    }
  }
  return r;
}

LyapunovAudit lyapunov_audit(const TrialResult& result) {
  LyapunovAudit a;
  const auto T = result.V.size();
  std::vector<std::size_t> deliveries;
  for (std::size_t k = 0; k < T && k < result.d.size(); ++k)
    if (result.d[k] == 0) deliveries.push_back(k);

  for (std::size_t i = 0; i < deliveries.size(); ++i) {
    const std::size_t ki = deliveries[i];
    if (!(result.norm[ki] > kAuditNormFloor)) continue;
    const double Vi = result.V[ki];
    const std::size_t end = i + 1 < deliveries.size() ? deliveries[i + 1] : T;
    for (std::size_t k = ki + 1; k < end; ++k) {
      ++a.burst_steps_checked;
      if (result.V[k] >= Vi) ++a.burst_violations;
    }
    if (i + 1 < deliveries.size()) {
      ++a.delivery_pairs_checked;
      if (result.V[deliveries[i + 1]] >= Vi) ++a.delivery_violations;
    }
  }
  return a;
}

MonteCarloReport monte_carlo(const ClosedLoopSetup& setup, const SimConfig& cfg,
                             const ControllerSpec& controller,
                             const TrialOptions& opts) {
  if (cfg.trials < 1) throw ValidationError("trials must be >= 1");
  const PacketSolver solver(setup.horizon, setup.design.W, controller);

  MonteCarloReport rep;
  rep.controller = controller;
  rep.trials.resize(static_cast<std::size_t>(cfg.trials));
  std::vector<std::string> errors(static_cast<std::size_t>(cfg.trials));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < cfg.trials; i = next++) {
      try {
        const TrialInputs in = make_trial_inputs(cfg, cfg.seed, i);
        rep.trials[static_cast<std::size_t>(i)] = run_trial(setup, solver, in, opts);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
        if (errors[static_cast<std::size_t>(i)].empty()) errors[static_cast<std::size_t>(i)] = "unknown error";
      }
    }
  };
  const int nthreads = worker_count(cfg.threads, cfg.trials);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  for (int i = 0; i < cfg.trials; ++i)
    if (!errors[static_cast<std::size_t>(i)].empty())
      rep.failures.push_back({i, "trial " + std::to_string(i) + ": " + errors[static_cast<std::size_t>(i)]});

  const auto T = static_cast<std::size_t>(cfg.T);
  rep.mean_norm.assign(T, 0.0);
  rep.median_norm.assign(T, 0.0);
  rep.max_norm.assign(T, 0.0);
  rep.mean_sparsity.assign(T, 0.0);
  std::vector<const TrialResult*> ok;
  for (std::size_t i = 0; i < rep.trials.size(); ++i)
    if (errors[i].empty()) ok.push_back(&rep.trials[i]);
  if (ok.empty()) return rep;

  std::vector<double> column(ok.size());
  double sparsity_total = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    double sum = 0.0, sp = 0.0, mx = 0.0;
    for (std::size_t t = 0; t < ok.size(); ++t) {
      column[t] = ok[t]->norm[k];
      sum += column[t];
      mx = std::max(mx, column[t]);
      sp += ok[t]->sparsity[k];
    }
    rep.mean_norm[k] = sum / static_cast<double>(ok.size());
    rep.max_norm[k] = mx;
    rep.mean_sparsity[k] = sp / static_cast<double>(ok.size());
    sparsity_total += sp;
    std::sort(column.begin(), column.end());
    const std::size_t mid = column.size() / 2;
    rep.median_norm[k] = column.size() % 2 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
  }
  double perf = 0.0;
  for (const auto* t : ok) perf += t->trajectory_norm();
  rep.mean_trajectory_norm = perf / static_cast<double>(ok.size());
  rep.mean_sparsity_overall = sparsity_total / static_cast<double>(ok.size() * T);
  return rep;
}

SweepCurve sweep_regularization(const ClosedLoopSetup& setup, const SimConfig& cfg,
                                ControllerKind family, const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  if (family != ControllerKind::L1L2 && family != ControllerKind::L2)
    throw ValidationError("sweep family must be l1l2 or l2");
  SweepCurve curve;
  curve.family = family;
  TrialOptions opts;
  opts.noise_sigma = cfg.noise_sigma;
  for (double nu : grid) {
    if (!(nu > 0.0)) throw ValidationError("sweep grid values must be positive");
    const MonteCarloReport mc = monte_carlo(setup, cfg, ControllerSpec{family, nu}, opts);
    if (!mc.failures.empty()) throw SolverError(mc.failures.front().message);
    curve.points.push_back({nu, mc.mean_trajectory_norm});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    if (curve.points[i].performance < curve.points[curve.argmin].performance) curve.argmin = i;
  return curve;
}

double match_performance(const SweepCurve& curve, double target) {
  if (curve.points.empty()) throw ValidationError("empty sweep curve");
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i].performance - target;
    const double b = pts[i + 1].performance - target;
    if (a == 0.0) return pts[i].nu;
    if (a * b < 0.0) {
      const double w = a / (a - b);
      return std::exp((1.0 - w) * std::log(pts[i].nu) + w * std::log(pts[i + 1].nu));
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (std::abs(pts[i].performance - target) < std::abs(pts[best].performance - target)) best = i;
  return pts[best].nu;
}

namespace {

struct PhaseData {
  std::vector<QuantizedPacket> packets;
  std::vector<std::vector<double>> raw;
  std::vector<std::pair<int, int>> where;  // (trial, k)
};

PhaseData collect_phase(const ClosedLoopSetup& setup, SimConfig cfg,
                        const ControllerSpec& controller, std::uint64_t master,
                        int trials, const Quantizer& q) {
  cfg.seed = master;
  cfg.trials = trials;
  TrialOptions opts;
  opts.noise_sigma = cfg.noise_sigma;
  opts.quantizer = q;
  opts.keep_packets = true;
  const MonteCarloReport mc = monte_carlo(setup, cfg, controller, opts);
  if (!mc.failures.empty()) throw SolverError(mc.failures.front().message);

  PhaseData data;
  for (std::size_t t = 0; t < mc.trials.size(); ++t) {
    const auto& tr = mc.trials[t];
    for (std::size_t k = 0; k < tr.packets.size(); ++k) {
      QuantizedPacket qp;
      qp.index.reserve(tr.packets[k].size());
      for (double v : tr.packets[k]) qp.index.push_back(q.quantize(v).index);
      data.packets.push_back(std::move(qp));
      data.raw.push_back(tr.packets[k]);
      data.where.emplace_back(static_cast<int>(t), static_cast<int>(k));
    }
  }
  return data;
}

}  // namespace

BitrateExperiment bitrate_experiment(const ClosedLoopSetup& setup, const SimConfig& cfg) {
  validate(cfg);
  if (cfg.N % 2 != 0) throw ValidationError("bit-rate experiment needs an even horizon N");
  const Quantizer q{cfg.quant_delta};
  const std::uint64_t train_master = derive_seed(cfg.seed, kTrainPhase);
  const std::uint64_t test_master = derive_seed(cfg.seed, kTestPhase);

  BitrateExperiment exp;
  struct Arm {
    ControllerSpec controller;
    CodingScheme scheme;
    const char* label;
    double* mean;
    std::optional<PacketCodec>* codec;
  };
  const Arm arms[] = {
      {{ControllerKind::Omp, 0.0}, CodingScheme::Sparse, "omp-sparse", &exp.omp_mean_bits, &exp.omp_codec},
      {{ControllerKind::L2, cfg.l2_nu}, CodingScheme::Dense, "l2-dense", &exp.l2_mean_bits, &exp.l2_codec},
  };

  for (const Arm& arm : arms) {
    const PhaseData train = collect_phase(setup, cfg, arm.controller, train_master, cfg.train_trials, q);
    PacketCodec codec = train_codec(train.packets, cfg.N, q, arm.scheme);

    const PhaseData test = collect_phase(setup, cfg, arm.controller, test_master, cfg.test_trials, q);
    double total = 0.0;
    for (std::size_t i = 0; i < test.packets.size(); ++i) {
      const EncodedPacket enc = codec.encode(test.packets[i]);
      bool ok = false;
      try {
        ok = codec.decode(enc) == test.packets[i];
      } catch (const DecodeError&) {
        ok = false;
      }
      if (!ok) ++exp.roundtrip_failures;
      for (std::size_t j = 0; j < test.raw[i].size(); ++j)
        exp.max_quantization_error =
            std::max(exp.max_quantization_error,
                     std::abs(test.raw[i][j] - q.reconstruct(test.packets[i].index[j])));
      total += static_cast<double>(enc.bit_count);
      exp.records.push_back({test.where[i].first, test.where[i].second, arm.label, enc.bit_count});
    }
    exp.test_packets += test.packets.size();
    *arm.mean = total / static_cast<double>(test.packets.size());
    *arm.codec = std::move(codec);
  }
  exp.reduction_percent = 100.0 * (1.0 - exp.omp_mean_bits / exp.l2_mean_bits);
  return exp;
}

}  // namespace sppc
