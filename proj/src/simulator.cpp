#include "resilient/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "resilient/moments.hpp"

namespace resilient {

namespace {

constexpr int kRunsPerChunk = 64;
constexpr double kNegligibleMeanSquare = 1e-12;
constexpr int kMinFitPoints = 5;

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double sample_injection(const AttackChannel& ch, DrawKey key) {
  switch (ch.injection_distribution) {
    case InjectionDistribution::constant:
      return ch.injection_mean;
    case InjectionDistribution::uniform: {
      const double half_width = std::sqrt(3.0 * ch.injection_variance);
      return ch.injection_mean + half_width * (2.0 * counter_uniform(key) - 1.0);
    }
    case InjectionDistribution::gaussian: {
      const double u1 = 1.0 - counter_uniform(key);  // (0, 1]
      key.draw = 1;
      const double u2 = counter_uniform(key);
      const double normal = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      return ch.injection_mean + std::sqrt(ch.injection_variance) * normal;
    }
  }
  return ch.injection_mean;
}

struct Draws {
  std::vector<ChannelDraw> sensors;
  std::vector<ChannelDraw> actuators;
};

// Shared state for one (system, gains, config) simulation.
class Simulation {
 public:
  Simulation(const AttackedSystem& sys, const Gains& gains, const SimConfig& cfg,
             const NumericSettings& settings)
      : sys_(sys), gains_(gains), cfg_(cfg), threshold_(settings.divergence_threshold) {
    check_gain_dimensions(sys.plant, gains);
    check_sim_config(sys.plant, cfg);
    sensor_mean_ = delta_matrices(sys.sensor_channels, settings).mean_diag.eigen().diagonal();
  }

  const SimConfig& config() const { return cfg_; }

  // Calls visit(k, x, xhat, u, ytilde, draws) for k = 0..steps; returns true
  // if the run diverged.
  template <class Visitor>
  bool run(int run_index, Visitor&& visit) const {
    const auto& A = sys_.plant.A.eigen();
    const auto& B = sys_.plant.B.eigen();
    const auto& C = sys_.plant.C.eigen();
    const auto& K = gains_.K.eigen();
    const auto& L = gains_.L.eigen();
    const auto p = sys_.sensor_channels.size();
    const auto m = sys_.actuator_channels.size();
    const auto run = static_cast<std::uint64_t>(run_index);

    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(cfg_.x0.data(), A.rows());
    Eigen::VectorXd xhat = Eigen::Map<const Eigen::VectorXd>(cfg_.xhat0.data(), A.rows());
    Eigen::VectorXd y(static_cast<Index>(p)), u(static_cast<Index>(m));
    Draws draws{std::vector<ChannelDraw>(p), std::vector<ChannelDraw>(m)};

    for (int k = 0;; ++k) {
      const auto step = static_cast<std::uint64_t>(k);
      const Eigen::VectorXd cx = C * x;
      for (std::size_t i = 0; i < p; ++i) {
        draws.sensors[i] = sample_channel(sys_.sensor_channels[i], cfg_.seed, run, step, true,
                                          static_cast<std::uint32_t>(i));
        y(static_cast<Index>(i)) = draws.sensors[i].indicator == 1
                                       ? cx(static_cast<Index>(i))
                                       : draws.sensors[i].injection * cx(static_cast<Index>(i));
      }
      const Eigen::VectorXd kxhat = K * xhat;
      for (std::size_t j = 0; j < m; ++j) {
        draws.actuators[j] = sample_channel(sys_.actuator_channels[j], cfg_.seed, run, step, false,
                                            static_cast<std::uint32_t>(j));
        u(static_cast<Index>(j)) = draws.actuators[j].indicator == 1
                                       ? kxhat(static_cast<Index>(j))
                                       : draws.actuators[j].injection * kxhat(static_cast<Index>(j));
      }
      visit(k, x, xhat, u, y, draws);
      if (k == cfg_.steps) return false;

      const Eigen::VectorXd innovation = y - sensor_mean_.cwiseProduct(C * xhat);
      xhat = A * xhat + B * u + L * innovation;
      x = A * x + B * u;
      if (!x.allFinite() || !xhat.allFinite() || x.norm() > threshold_ || xhat.norm() > threshold_)
        return true;
    }
  }

 private:
  const AttackedSystem& sys_;
  const Gains& gains_;
  const SimConfig& cfg_;
  double threshold_;
  Eigen::VectorXd sensor_mean_;
};

unsigned resolve_threads(unsigned requested) {
  return requested > 0 ? requested : default_thread_count();
}

// Runs `work(chunk_index)` for every chunk of kRunsPerChunk runs.
template <class Work>
void for_each_chunk(int runs, unsigned threads, Work&& work) {
  const int chunks = (runs + kRunsPerChunk - 1) / kRunsPerChunk;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    for (int c = 0; c < chunks; ++c) work(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int c = next++; c < chunks; c = next++) work(c);
    });
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void check_sim_config(const PlantModel& plant, const SimConfig& cfg) {
  const auto n = static_cast<std::size_t>(plant.states());
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (cfg.x0.size() != n)
    throw std::invalid_argument("x0 has " + std::to_string(cfg.x0.size()) + " entries, expected " +
                                std::to_string(n));
  if (cfg.xhat0.size() != n)
    throw std::invalid_argument("xhat0 has " + std::to_string(cfg.xhat0.size()) +
                                " entries, expected " + std::to_string(n));
  for (double v : cfg.x0)
    if (!std::isfinite(v)) throw std::invalid_argument("x0 is not finite");
  for (double v : cfg.xhat0)
    if (!std::isfinite(v)) throw std::invalid_argument("xhat0 is not finite");
}

unsigned default_thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RESILIENT_LMI_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) return std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

double counter_uniform(const DrawKey& key) {
  std::uint64_t h = splitmix(key.seed);
  h = splitmix(h ^ key.run);
  h = splitmix(h ^ key.step);
  h = splitmix(h ^ ((static_cast<std::uint64_t>(key.kind) << 32) | key.channel));
  h = splitmix(h ^ key.draw);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

ChannelDraw sample_channel(const AttackChannel& ch, std::uint64_t seed, std::uint64_t run,
                           std::uint64_t step, bool sensor, std::uint32_t channel) {
  const DrawKind bern = sensor ? DrawKind::sensor_bernoulli : DrawKind::actuator_bernoulli;
  const DrawKind inj = sensor ? DrawKind::sensor_injection : DrawKind::actuator_injection;
  ChannelDraw d;
  d.indicator = counter_uniform({seed, run, step, bern, channel, 0}) < ch.bernoulli_mean ? 1 : 0;
  d.injection = sample_injection(ch, {seed, run, step, inj, channel, 0});
  return d;
}

TrajectoryRecord simulate_run(const AttackedSystem& sys, const Gains& gains, const SimConfig& cfg,
                              int run_index, const NumericSettings& settings) {
  const Simulation sim(sys, gains, cfg, settings);
  TrajectoryRecord rec;
  rec.run = run_index;
  rec.steps.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  rec.diverged = sim.run(run_index, [&](int, const Eigen::VectorXd& x, const Eigen::VectorXd& xhat,
                                        const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                                        const Draws& draws) {
    StepRecord s{to_vector(x), to_vector(xhat), to_vector(u), to_vector(y), {}, {}, {}, {}};
    for (const auto& d : draws.sensors) {
      s.alpha.push_back(d.indicator);
      s.beta.push_back(d.injection);
    }
    for (const auto& d : draws.actuators) {
      s.gamma.push_back(d.indicator);
      s.delta.push_back(d.injection);
    }
    rec.steps.push_back(std::move(s));
  });
  return rec;
}

MsEstimate fit_decay(std::vector<double> mean_square, std::vector<int> alive, int steps,
                     int diverged_runs, int runs) {
  MsEstimate est;
  est.mean_square = std::move(mean_square);
  est.alive = std::move(alive);
  est.diverged_runs = diverged_runs;
  est.usable = diverged_runs < runs;
  if (est.mean_square.empty()) return est;

  int last = -1;
  for (int k = 0; k < static_cast<int>(est.mean_square.size()); ++k)
    if (est.mean_square[static_cast<std::size_t>(k)] > kNegligibleMeanSquare) last = k;
  if (last < 0) {
    // Equilibrium: nothing to decay.
    est.empirically_stable = est.usable && diverged_runs == 0;
    return est;
  }
  int begin = std::min(steps / 4, last);
  if (last - begin + 1 < kMinFitPoints) begin = std::max(0, last - kMinFitPoints + 1);
  est.fit_begin = begin;
  est.fit_end = last;
  if (last == begin) return est;

  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  int count = 0;
  for (int k = begin; k <= last; ++k) {
    const double m = est.mean_square[static_cast<std::size_t>(k)];
    if (!(m > 0.0)) continue;
    const double y = std::log(m);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
    ++count;
  }
  if (count < 2) return est;
  const double denom = count * skk - sk * sk;
  est.decay_slope = (count * sky - sk * sy) / denom;
  est.empirically_stable = est.usable && diverged_runs == 0 && *est.decay_slope < 0.0;
  return est;
}

MonteCarloResult monte_carlo(const AttackedSystem& sys, const Gains& gains, const SimConfig& cfg,
                             bool retain_records, const NumericSettings& settings) {
  const Simulation sim(sys, gains, cfg, settings);
  const auto len = static_cast<std::size_t>(cfg.steps) + 1;
  const int chunks = (cfg.runs + kRunsPerChunk - 1) / kRunsPerChunk;

  struct Partial {
    std::vector<double> sum_sq;
    std::vector<int> alive;
    int diverged = 0;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(chunks));
  MonteCarloResult out;
  if (retain_records) out.records.resize(static_cast<std::size_t>(cfg.runs));

  for_each_chunk(cfg.runs, resolve_threads(cfg.threads), [&](int c) {
    Partial& part = partials[static_cast<std::size_t>(c)];
    part.sum_sq.assign(len, 0.0);
    part.alive.assign(len, 0);
    const int end = std::min(cfg.runs, (c + 1) * kRunsPerChunk);
    for (int r = c * kRunsPerChunk; r < end; ++r) {
      if (retain_records) {
        auto rec = simulate_run(sys, gains, cfg, r, settings);
        for (std::size_t k = 0; k < rec.steps.size(); ++k) {
          double s = 0.0;
          for (std::size_t i = 0; i < rec.steps[k].x.size(); ++i) {
            const double x = rec.steps[k].x[i];
            const double e = x - rec.steps[k].xhat[i];
            s += x * x + e * e;
          }
          part.sum_sq[k] += s;
          ++part.alive[k];
        }
        part.diverged += rec.diverged ? 1 : 0;
        out.records[static_cast<std::size_t>(r)] = std::move(rec);
      } else {
        const bool diverged = sim.run(r, [&](int k, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& xhat, const Eigen::VectorXd&,
                                             const Eigen::VectorXd&, const Draws&) {
          part.sum_sq[static_cast<std::size_t>(k)] += x.squaredNorm() + (x - xhat).squaredNorm();
          ++part.alive[static_cast<std::size_t>(k)];
        });
        part.diverged += diverged ? 1 : 0;
      }
    }
  });

  std::vector<double> total(len, 0.0);
  std::vector<int> alive(len, 0);
  int diverged = 0;
  for (const auto& part : partials) {
    for (std::size_t k = 0; k < len; ++k) {
      total[k] += part.sum_sq[k];
      alive[k] += part.alive[k];
    }
    diverged += part.diverged;
  }
  std::vector<double> mean_square;
  std::vector<int> alive_used;
  for (std::size_t k = 0; k < len && alive[k] > 0; ++k) {
    mean_square.push_back(total[k] / alive[k]);
    alive_used.push_back(alive[k]);
  }
  out.estimate = fit_decay(std::move(mean_square), std::move(alive_used), cfg.steps, diverged,
                           cfg.runs);
  return out;
}

std::vector<Matrix> empirical_second_moments(const AttackedSystem& sys, const Gains& gains,
                                             const SimConfig& cfg,
                                             const NumericSettings& settings) {
  const Simulation sim(sys, gains, cfg, settings);
  const auto len = static_cast<std::size_t>(cfg.steps) + 1;
  const Index dim = 2 * sys.plant.states();
  const int chunks = (cfg.runs + kRunsPerChunk - 1) / kRunsPerChunk;

  struct Partial {
    std::vector<Eigen::MatrixXd> sum;
    std::vector<int> alive;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(chunks));
  for_each_chunk(cfg.runs, resolve_threads(cfg.threads), [&](int c) {
    Partial& part = partials[static_cast<std::size_t>(c)];
    part.sum.assign(len, Eigen::MatrixXd::Zero(dim, dim));
    part.alive.assign(len, 0);
    const int end = std::min(cfg.runs, (c + 1) * kRunsPerChunk);
    Eigen::VectorXd zeta(dim);
    for (int r = c * kRunsPerChunk; r < end; ++r)
      sim.run(r, [&](int k, const Eigen::VectorXd& x, const Eigen::VectorXd& xhat,
                     const Eigen::VectorXd&, const Eigen::VectorXd&, const Draws&) {
        zeta << x, x - xhat;
        part.sum[static_cast<std::size_t>(k)].noalias() += zeta * zeta.transpose();
        ++part.alive[static_cast<std::size_t>(k)];
      });
  });

  std::vector<Matrix> out;
  for (std::size_t k = 0; k < len; ++k) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
    int alive = 0;
    for (const auto& part : partials) {
      total += part.sum[k];
      alive += part.alive[k];
    }
    if (alive == 0) break;
    out.emplace_back(Eigen::MatrixXd(total / alive));
  }
  return out;
}

}  // namespace resilient
