#include "resilient/simulator.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "resilient/closed_loop.hpp"
#include "resilient/moments.hpp"
#include "test_support.hpp"

namespace resilient {
namespace {

SimConfig example_config(int runs, int steps) {
  SimConfig cfg;
  cfg.runs = runs;
  cfg.steps = steps;
  cfg.x0 = testing::example_x0();
  cfg.xhat0 = {0.0, 0.0, 0.0};
  return cfg;
}

TEST(CounterUniform, RangeAndKeySensitivity) {
  DrawKey key{42, 0, 0, DrawKind::sensor_bernoulli, 0, 0};
  const double base = counter_uniform(key);
  EXPECT_EQ(counter_uniform(key), base);
  for (int i = 0; i < 1000; ++i) {
    key.step = static_cast<std::uint64_t>(i);
    const double u = counter_uniform(key);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  key.step = 0;
  DrawKey other = key;
  other.kind = DrawKind::actuator_bernoulli;
  EXPECT_NE(counter_uniform(other), base);
  other = key;
  other.channel = 1;
  EXPECT_NE(counter_uniform(other), base);
  other = key;
  other.seed = 43;
  EXPECT_NE(counter_uniform(other), base);
}

TEST(SampleChannel, AttackFrequency) {
  const AttackChannel ch{0.7, 1.3, 0.0};
  int attacked = 0;
  const int steps = 10'000;
  for (int k = 0; k < steps; ++k) {
    const auto d = sample_channel(ch, 42, 0, static_cast<std::uint64_t>(k), true, 0);
    ASSERT_TRUE(d.indicator == 0 || d.indicator == 1);
    EXPECT_EQ(d.injection, 1.3);
    if (d.indicator == 0) {
      ++attacked;
      EXPECT_EQ(d.gain(), 1.3);
    } else {
      EXPECT_EQ(d.gain(), 1.0);
    }
  }
  EXPECT_NEAR(static_cast<double>(attacked) / steps, 0.3, 0.015);
}

TEST(SampleChannel, MomentsMatchClosedForm) {
  for (auto dist : {InjectionDistribution::uniform, InjectionDistribution::gaussian}) {
    const AttackChannel ch{0.6, 0.9, 0.4, dist};
    const int n = 400'000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double g = sample_channel(ch, 7, static_cast<std::uint64_t>(k), 3, false, 1).gain();
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / n, var = sum_sq / n - mean * mean;
    const auto closed = channel_moments(ch);
    EXPECT_NEAR(mean, closed.mean, 4.0 * std::sqrt(closed.variance / n));
    EXPECT_NEAR(var, closed.variance, 0.02 * closed.variance);
  }
}

TEST(SimulateRun, RecordInvariants) {
  const auto sys = testing::example_system();
  const auto gains = testing::reference_gains();
  const auto cfg = example_config(1, 30);
  const auto rec = simulate_run(sys, gains, cfg, 5);
  ASSERT_EQ(rec.steps.size(), 31u);
  EXPECT_FALSE(rec.diverged);
  EXPECT_EQ(rec.steps[0].x, cfg.x0);
  const auto& A = sys.plant.A;
  const auto& B = sys.plant.B;
  for (std::size_t k = 0; k < rec.steps.size(); ++k) {
    const auto& s = rec.steps[k];
    for (std::size_t i = 0; i < 2; ++i) {
      ASSERT_TRUE(s.alpha[i] == 0 || s.alpha[i] == 1);
      ASSERT_TRUE(s.gamma[i] == 0 || s.gamma[i] == 1);
      // The injected factor only matters when the link is attacked.
      double cx = 0.0, kxhat = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        cx += sys.plant.C(static_cast<Index>(i), static_cast<Index>(j)) * s.x[j];
        kxhat += gains.K(static_cast<Index>(i), static_cast<Index>(j)) * s.xhat[j];
      }
      EXPECT_NEAR(s.ytilde[i], (s.alpha[i] ? 1.0 : s.beta[i]) * cx, 1e-12 * (1 + std::abs(cx)));
      EXPECT_NEAR(s.u[i], (s.gamma[i] ? 1.0 : s.delta[i]) * kxhat, 1e-12 * (1 + std::abs(kxhat)));
    }
    if (k + 1 < rec.steps.size()) {
      const auto& next = rec.steps[k + 1];
      for (Index r = 0; r < 3; ++r) {
        double expected = 0.0;
        for (Index c = 0; c < 3; ++c) expected += A(r, c) * s.x[static_cast<std::size_t>(c)];
        for (Index c = 0; c < 2; ++c) expected += B(r, c) * s.u[static_cast<std::size_t>(c)];
        EXPECT_NEAR(next.x[static_cast<std::size_t>(r)], expected, 1e-12 * (1 + std::abs(expected)));
      }
    }
  }
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const auto sys = testing::example_system();
  const auto gains = testing::reference_gains();
  auto cfg = example_config(300, 40);
  cfg.threads = 1;
  const auto a = monte_carlo(sys, gains, cfg);
  cfg.threads = 4;
  const auto b = monte_carlo(sys, gains, cfg);
  EXPECT_EQ(a.estimate.mean_square, b.estimate.mean_square);
  EXPECT_EQ(a.estimate.decay_slope, b.estimate.decay_slope);
  const auto c = monte_carlo(sys, gains, cfg, true);
  ASSERT_EQ(c.records.size(), 300u);
  EXPECT_EQ(c.records[17].steps[10].x, simulate_run(sys, gains, cfg, 17).steps[10].x);
  cfg.seed = 43;
  EXPECT_NE(monte_carlo(sys, gains, cfg).estimate.mean_square, a.estimate.mean_square);
}

TEST(MonteCarlo, DecayTracksOperatorRho) {
  const auto sys = testing::example_system();
  const auto gains = testing::reference_gains();
  const auto mc = monte_carlo(sys, gains, example_config(1000, 100));
  ASSERT_TRUE(mc.estimate.decay_slope.has_value());
  EXPECT_TRUE(mc.estimate.empirically_stable);
  EXPECT_EQ(mc.estimate.diverged_runs, 0);
  const double rho = is_ms_stable(second_moment_operator(build_closed_loop(sys, gains))).rho;
  EXPECT_NEAR(std::exp(*mc.estimate.decay_slope), rho, 0.05);
}

TEST(MonteCarlo, ZeroInitialStateStaysAtRest) {
  const auto sys = testing::example_system();
  auto cfg = example_config(50, 20);
  cfg.x0 = {0.0, 0.0, 0.0};
  const auto mc = monte_carlo(sys, testing::reference_gains(), cfg);
  for (double m : mc.estimate.mean_square) EXPECT_EQ(m, 0.0);
  EXPECT_FALSE(mc.estimate.decay_slope.has_value());
  EXPECT_TRUE(mc.estimate.empirically_stable);
}

TEST(MonteCarlo, ZeroGainsGrow) {
  const auto sys = testing::example_system();
  const auto mc = monte_carlo(sys, {Matrix::zeros(2, 3), Matrix::zeros(3, 2)}, example_config(20, 60));
  ASSERT_TRUE(mc.estimate.decay_slope.has_value());
  EXPECT_GT(*mc.estimate.decay_slope, 0.0);
  EXPECT_FALSE(mc.estimate.empirically_stable);
}

TEST(MonteCarlo, DivergentRunsAreFlagged) {
  const auto sys = testing::example_system();
  const auto mc = monte_carlo(sys, {Matrix::zeros(2, 3), Matrix::zeros(3, 2)}, example_config(10, 200));
  EXPECT_EQ(mc.estimate.diverged_runs, 10);
  EXPECT_FALSE(mc.estimate.usable);
  EXPECT_FALSE(mc.estimate.empirically_stable);
  EXPECT_LT(mc.estimate.mean_square.size(), 201u);
}

TEST(MonteCarlo, UnattackedEstimationErrorVanishes) {
  const auto sys = testing::unattacked(testing::example_plant());
  const auto gains = testing::reference_gains();
  const auto cl = build_closed_loop(sys, gains);
  ASSERT_LT(spectral_radius(cl.gamma1_mean), 1.0);
  const auto rec = simulate_run(sys, gains, example_config(1, 100), 0);
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err += std::abs(rec.steps.back().x[i] - rec.steps.back().xhat[i]);
  EXPECT_LT(err, 1e-6);
}

TEST(EmpiricalMoments, MatchOperatorOnExampleSystem) {
  const auto sys = testing::example_system();
  const auto gains = testing::reference_gains();
  const auto cl = build_closed_loop(sys, gains);
  const auto emp = empirical_second_moments(sys, gains, example_config(20'000, 5));
  ASSERT_EQ(emp.size(), 6u);
  Matrix M = emp[0];
  for (std::size_t k = 1; k < emp.size(); ++k) {
    M = propagate_second_moment(cl, M);
    EXPECT_LT(testing::rel_error(emp[k], M), 0.05) << "k = " << k;
  }
}

TEST(FitDecay, Rules) {
  std::vector<double> geometric;
  for (int k = 0; k <= 40; ++k) geometric.push_back(std::pow(0.5, k));
  const auto est = fit_decay(geometric, std::vector<int>(41, 10), 40, 0, 10);
  ASSERT_TRUE(est.decay_slope.has_value());
  EXPECT_NEAR(std::exp(*est.decay_slope), 0.5, 1e-12);
  EXPECT_EQ(est.fit_begin, 10);
  EXPECT_EQ(est.fit_end, 39);  // 0.5^40 < 1e-12 is dropped

  // Fast decay keeps five points.
  std::vector<double> fast{1.0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-13, 1e-15};
  const auto f = fit_decay(fast, std::vector<int>(8, 1), 7, 0, 1);
  EXPECT_EQ(f.fit_begin, 1);
  EXPECT_EQ(f.fit_end, 5);
  EXPECT_NEAR(std::exp(*f.decay_slope), 1e-2, 1e-9);
}

TEST(SimConfig, Rejected) {
  const auto sys = testing::example_system();
  auto cfg = example_config(10, 10);
  cfg.x0 = {1.0, 2.0};
  EXPECT_THROW(monte_carlo(sys, testing::reference_gains(), cfg), std::invalid_argument);
  cfg = example_config(0, 10);
  EXPECT_THROW(check_sim_config(sys.plant, cfg), std::invalid_argument);
  cfg = example_config(10, 0);
  EXPECT_THROW(check_sim_config(sys.plant, cfg), std::invalid_argument);
}

}  // namespace
}  // namespace resilient
