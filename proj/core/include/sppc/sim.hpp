#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sppc/channel.hpp"
#include "sppc/codec.hpp"
#include "sppc/controllers.hpp"
#include "sppc/design.hpp"
#include "sppc/horizon.hpp"
#include "sppc/plant.hpp"

namespace sppc {

enum class InitialStateKind { StandardNormal, Explicit };

struct SimConfig {
  std::string plant_source = "cessna500";
  PlantModel plant = cessna500();
  int N = 10;
  Matrix Q;  ///< empty means identity
  double eta = 2.0 / 3.0;
  double delta = 0.0;

  ControllerSpec controller;
  DropoutModel dropout;  ///< N and seed are filled per trial
  int T = 100;
  int trials = 500;
  double noise_sigma = 0.0;  ///< 0 = noise-free
  InitialStateKind x0_kind = InitialStateKind::StandardNormal;
  Vector x0;
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = hardware concurrency

  // bit-rate experiment
  double quant_delta = 0.001;
  int train_trials = 200;
  int test_trials = 200;
  double l2_nu = 3.1e2;

  // regularization sweep
  ControllerKind sweep_family = ControllerKind::L2;
  std::vector<double> sweep_grid;

  Matrix resolved_Q() const;
};

/// Throws ValidationError on inconsistent settings.
void validate(const SimConfig& cfg);

/// Everything shared read-only by the trials of one run.
struct ClosedLoopSetup {
  PlantModel plant;
  CostDesign design;
  HorizonMatrices horizon;
};

ClosedLoopSetup make_setup(const SimConfig& cfg);
ClosedLoopSetup make_setup(const PlantModel& plant, const CostDesign& design);

/// Per-trial randomness, a function of (master seed, trial index) only, so
/// every controller family sees the same traces, initial states and noise.
struct TrialInputs {
  ChannelTrace trace;
  Vector x0;
  std::uint64_t noise_seed = 0;
};

TrialInputs make_trial_inputs(const SimConfig& cfg, std::uint64_t master_seed,
                              int trial);

struct TrialOptions {
  double noise_sigma = 0.0;
  /// When set, transmitted packets are quantized before reaching the buffer.
  std::optional<Quantizer> quantizer;
  bool keep_packets = false;
};

struct TrialResult {
  std::vector<double> norm;  ///< ||x(k)||_2
  std::vector<double> V;     ///< x(k)' P x(k)
  std::vector<std::uint8_t> d;
  std::vector<double> u;     ///< applied input
  std::vector<int> sparsity; ///< of the packet computed at k
  std::vector<double> solve_seconds;
  std::vector<std::vector<double>> packets;  ///< only with keep_packets
  std::int64_t overrides = 0;

  double final_norm() const { return norm.empty() ? 0.0 : norm.back(); }
  /// sqrt(sum_k ||x(k)||^2).
  double trajectory_norm() const;
};

/// The controller computes a packet every step; only delivered packets reach
/// the buffer.
TrialResult run_trial(const ClosedLoopSetup& setup, const PacketSolver& solver,
                      const TrialInputs& inputs, const TrialOptions& opts = {});

struct LyapunovAudit {
  int delivery_pairs_checked = 0;
  int delivery_violations = 0;
  int burst_steps_checked = 0;
  int burst_violations = 0;

  int violations() const { return delivery_violations + burst_violations; }
};

inline constexpr double kAuditNormFloor = 1e-9;

/// V must strictly decrease between consecutive deliveries with a nonzero
/// state, and stay below V(x(k_i)) during the burst after k_i.
LyapunovAudit lyapunov_audit(const TrialResult& result);

struct TrialFailure {
  int trial = 0;
  std::string message;
};

struct MonteCarloReport {
  ControllerSpec controller;
  std::vector<TrialResult> trials;  ///< indexed by trial; failed ones empty
  std::vector<TrialFailure> failures;
  std::vector<double> mean_norm, median_norm, max_norm, mean_sparsity;
  double mean_trajectory_norm = 0.0;
  double mean_sparsity_overall = 0.0;
};

/// cfg.trials independent paired trials on a worker pool.
MonteCarloReport monte_carlo(const ClosedLoopSetup& setup,
                             const SimConfig& cfg,
                             const ControllerSpec& controller,
                             const TrialOptions& opts = {});

struct SweepPoint {
  double nu = 0.0;
  double performance = 0.0;  ///< Monte Carlo mean of the trajectory norm
};

struct SweepCurve {
  ControllerKind family = ControllerKind::L2;
  std::vector<SweepPoint> points;
  std::size_t argmin = 0;
};

SweepCurve sweep_regularization(const ClosedLoopSetup& setup,
                                const SimConfig& cfg, ControllerKind family,
                                const std::vector<double>& grid);

/// Parameter whose performance is closest to `target`, interpolated in
/// log(nu) between the bracketing grid points when a crossing exists.
double match_performance(const SweepCurve& curve, double target);

struct RateRecord {
  int trial = 0;
  int k = 0;
  std::string scheme;
  std::size_t bits = 0;
};

struct BitrateExperiment {
  double omp_mean_bits = 0.0;
  double l2_mean_bits = 0.0;
  double reduction_percent = 0.0;
  std::size_t test_packets = 0;
  std::size_t roundtrip_failures = 0;
  double max_quantization_error = 0.0;
  std::vector<RateRecord> records;
  std::optional<PacketCodec> omp_codec;
  std::optional<PacketCodec> l2_codec;
};

/// Trains per-position coders on one seed family, measures rates on another.
BitrateExperiment bitrate_experiment(const ClosedLoopSetup& setup,
                                     const SimConfig& cfg);

}  // namespace sppc
