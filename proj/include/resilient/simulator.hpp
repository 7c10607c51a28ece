#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "resilient/linalg.hpp"
#include "resilient/model.hpp"
#include "resilient/settings.hpp"

namespace resilient {

struct SimConfig {
  int steps = 100;
  int runs = 1000;
  std::uint64_t seed = 42;
  std::vector<double> x0;
  std::vector<double> xhat0;
  /// Worker threads for Monte Carlo; 0 means RESILIENT_LMI_THREADS or all cores.
  unsigned threads = 0;
};

/// Throws std::invalid_argument when the config does not fit the plant.
void check_sim_config(const PlantModel& plant, const SimConfig& cfg);

/// Number of workers used when SimConfig::threads == 0.
unsigned default_thread_count();

// Counter-based random stream: every draw is a pure function of its key, so
// results do not depend on execution order or thread count.
enum class DrawKind : std::uint32_t {
  sensor_bernoulli = 0,
  sensor_injection = 1,
  actuator_bernoulli = 2,
  actuator_injection = 3,
};

struct DrawKey {
  std::uint64_t seed;
  std::uint64_t run;
  std::uint64_t step;
  DrawKind kind;
  std::uint32_t channel;
  std::uint32_t draw;
};

/// Uniform in [0, 1) with 53 random bits.
double counter_uniform(const DrawKey& key);

struct ChannelDraw {
  int indicator = 1;       ///< 1 = link works normally
  double injection = 0.0;  ///< injected factor (β or δ)
  double gain() const { return indicator == 1 ? 1.0 : injection; }
};

/// Samples the attack variables of one channel at (run, step).
ChannelDraw sample_channel(const AttackChannel& ch, std::uint64_t seed, std::uint64_t run,
                           std::uint64_t step, bool sensor, std::uint32_t channel);

struct StepRecord {
  std::vector<double> x;
  std::vector<double> xhat;
  std::vector<double> u;
  std::vector<double> ytilde;
  std::vector<int> alpha;
  std::vector<int> gamma;
  std::vector<double> beta;
  std::vector<double> delta;
};

struct TrajectoryRecord {
  int run = 0;
  std::vector<StepRecord> steps;  ///< k = 0..steps, truncated if the run diverged
  bool diverged = false;
};

/// One run of plant + observer + attacked controller:
///   ỹ = Δ₁·C·x,  u = Δ₂·K·x̂,
///   x̂⁺ = A·x̂ + B·u + L·(ỹ − Δ̄₁·C·x̂),  x⁺ = A·x + B·u.
/// A run whose ‖x‖ or ‖x̂‖ exceeds the divergence threshold stops and is flagged.
TrajectoryRecord simulate_run(const AttackedSystem& sys, const Gains& gains, const SimConfig& cfg,
                              int run_index, const NumericSettings& settings = {});

struct MsEstimate {
  std::vector<double> mean_square;  ///< m(k) = mean of ‖ζ(k)‖² over runs alive at k
  std::vector<int> alive;           ///< runs contributing to m(k)
  std::optional<double> decay_slope;
  int fit_begin = 0;
  int fit_end = 0;  ///< inclusive
  int diverged_runs = 0;
  bool usable = false;  ///< at least one run never diverged
  bool empirically_stable = false;
};

struct MonteCarloResult {
  MsEstimate estimate;
  std::vector<TrajectoryRecord> records;  ///< filled when retained, in run order
};

MonteCarloResult monte_carlo(const AttackedSystem& sys, const Gains& gains, const SimConfig& cfg,
                             bool retain_records = false, const NumericSettings& settings = {});

/// Empirical E[ζ(k)ζ(k)ᵀ], ζ = (x, x − x̂), for k = 0..steps over runs alive at k.
std::vector<Matrix> empirical_second_moments(const AttackedSystem& sys, const Gains& gains,
                                             const SimConfig& cfg,
                                             const NumericSettings& settings = {});

/// Least-squares slope of log m(k) over [steps/4, last k with m(k) > 1e-12],
/// widened back to at least five points when the decay is fast.
MsEstimate fit_decay(std::vector<double> mean_square, std::vector<int> alive, int steps,
                     int diverged_runs, int runs);

}  // namespace resilient
