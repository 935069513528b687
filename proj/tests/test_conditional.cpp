#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "blockage/conditional.hpp"
#include "blockage/simulator.hpp"
#include "oracles.hpp"

using namespace blockage;

namespace {

const renewal::RenewalModel& baseline() {
  static const renewal::RenewalModel m = renewal::build_model(ScenarioConfig{});
  return m;
}

const ConditionalEngine& baseline_engine() {
  static const ConditionalEngine e(baseline(), 10.0);
  return e;
}

DistributionTable exponential_on(double rate, double step, double top) {
  const auto n = static_cast<std::size_t>(std::ceil(top / step)) + 1;
  std::vector<double> g(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = step * static_cast<double>(i);
    c[i] = -std::expm1(-rate * g[i]);
  }
  c.back() = 1.0;
  return {std::move(g), std::move(c)};
}

}  // namespace

TEST(Convolve, PointMasses) {
  const auto a = resample_uniform(DistributionTable::point_mass(0.3), 0.1, 5);
  const auto b = resample_uniform(DistributionTable::point_mass(0.5), 0.1, 7);
  const auto s = convolve(a, b);
  ASSERT_EQ(s.atoms().size(), 1u);
  EXPECT_NEAR(s.atoms()[0].location, 0.8, 1e-12);
  EXPECT_NEAR(s.atoms()[0].mass, 1.0, 1e-12);
  EXPECT_NEAR(s.left_limit(0.8), 0.0, 1e-12);
  EXPECT_NEAR(s(0.8), 1.0, 1e-12);
}

TEST(Convolve, TwoExponentialsGiveErlang) {
  const auto e = exponential_on(1.0, 0.002, 25.0);
  const auto s = convolve(e, e);
  double worst = 0.0;
  for (double x = 0.0; x < 20.0; x += 0.01) worst = std::max(worst, std::abs(s(x) - (1.0 - std::exp(-x) * (1.0 + x))));
  EXPECT_LT(worst, 1e-3);
}

TEST(Convolve, BlockedPlusNonblockedMatchesSumSampling) {
  const auto& m = baseline();
  const double step = 0.002;
  const auto n = static_cast<std::size_t>(std::ceil(m.blocked.support_max() / step)) + 2;
  const auto eta = resample_uniform(m.blocked, step, n);
  const auto sum = convolve(eta, exponential_on(m.rate, step, 80.0));
  // busy periods from a queue simulation of oracle chords, plus exponential gaps
  auto zone = geometry::build_zone(ScenarioConfig{}.link);
  const auto pool = oracle::sidewalk_chords(zone, 5.0, false, 0.0, 500'000, 3);
  auto service = [&](std::mt19937_64& rng) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  auto samples = oracle::busy_periods(m.rate, service, 1'000'000, 4);
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> gap(m.rate);
  for (auto& v : samples) v += gap(rng);
  std::sort(samples.begin(), samples.end());
  EXPECT_LT(ks_statistic(samples, sum), 0.01);
}

TEST(Convolve, GridMismatchIsAnError) {
  EXPECT_THROW(convolve(exponential_on(1.0, 0.01, 5.0), exponential_on(1.0, 0.02, 5.0)), DomainError);
}

TEST(Conditional, ZeroLag) {
  const auto p = baseline_engine().at(0.0);
  EXPECT_DOUBLE_EQ(p.p00, 1.0);
  EXPECT_DOUBLE_EQ(p.p01, 0.0);
  EXPECT_DOUBLE_EQ(p.p11, 1.0);
  EXPECT_DOUBLE_EQ(p.p10, 0.0);
}

TEST(Conditional, FarLagIsUnconditional) {
  const auto& m = baseline();
  const double eps = 1e-4;
  const auto a = conditional_from_los(m, 20.0 * m.cycle_mean, eps);
  const auto b = conditional_from_nlos(m, 20.0 * m.cycle_mean, eps);
  EXPECT_NEAR(a.same, m.frac_los, 2 * eps);
  EXPECT_NEAR(b.other, m.frac_los, 2 * eps);
}

TEST(Conditional, TermCountOverSeconds) {
  std::size_t most = 0;
  for (double dt = 0.05; dt <= 5.0 + 1e-9; dt += 0.05) most = std::max(most, baseline_engine().at(dt).terms_used());
  EXPECT_GE(most, 6u);
  EXPECT_LE(most, 9u);
}

TEST(Conditional, RowsSumToOneAndDetailedBalanceHolds) {
  const auto& m = baseline();
  for (double dt = 0.0; dt <= 10.0; dt += 0.1) {
    const auto p = baseline_engine().at(dt);
    EXPECT_NEAR(p.p00 + p.p01, 1.0, 1e-4) << dt;
    EXPECT_NEAR(p.p10 + p.p11, 1.0, 1e-4) << dt;
    for (double v : {p.p00, p.p01, p.p10, p.p11}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_NEAR(m.frac_los * p.p01, m.frac_nlos * p.p10, 2e-3) << dt;
  }
}

TEST(Conditional, RecoveryAgainstSimulatorOverSubSecondLags) {
  const std::vector<double> lags{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  const auto traces = sim::simulate_replications(ScenarioConfig{}, 5e4, 11, 4);
  const auto s = sim::summarize(traces, lags);
  double prev = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const auto p = baseline_engine().at(lags[i]);
    EXPECT_GT(p.p10, prev);
    prev = p.p10;
    EXPECT_NEAR(p.p10, s.conditional_estimates[i].p10, 0.02) << lags[i];
    EXPECT_NEAR(p.p01, s.conditional_estimates[i].p01, 0.02) << lags[i];
    EXPECT_LT(p.p01, p.p10);
  }
}

TEST(Conditional, RandomTriplesWithinThreeStandardErrors) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    ScenarioConfig cfg;
    cfg.kind = static_cast<Scenario>(k % 3);
    cfg.initial_rate = 0.5 + 2.5 * u(rng);
    const double dt = 0.05 + 2.95 * u(rng);
    const auto model = renewal::build_model(cfg);
    const ConditionalEngine engine(model, dt);
    const auto p = engine.at(dt);
    const std::vector<double> lag{dt};
    const auto traces = sim::simulate_replications(cfg, 2e4, 100 + static_cast<std::uint64_t>(k), 2);
    const auto e = sim::summarize(traces, lag).conditional_estimates.front();
    EXPECT_LE(std::abs(p.p01 - e.p01), 3.0 * e.se01 + 1e-9)
        << to_string(cfg.kind) << " lambda_I=" << cfg.initial_rate << " dt=" << dt;
    EXPECT_LE(std::abs(p.p10 - e.p10), 3.0 * e.se10 + 1e-9)
        << to_string(cfg.kind) << " lambda_I=" << cfg.initial_rate << " dt=" << dt;
  }
}

TEST(Conditional, CurveIndependentOfThreadCount) {
  std::vector<double> lags;
  for (double dt = 0.1; dt <= 3.0; dt += 0.1) lags.push_back(dt);
  const ConditionalEngine one(baseline(), 3.0), many(baseline(), 3.0);
  const auto a = conditional_curve(one, lags, 1);
  const auto b = conditional_curve(many, lags, 8);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    EXPECT_EQ(a.points[i].p00, b.points[i].p00);
    EXPECT_EQ(a.points[i].p10, b.points[i].p10);
    EXPECT_EQ(a.points[i].terms_used(), b.points[i].terms_used());
  }
}

TEST(Conditional, Errors) {
  ConditionalOptions opt;
  opt.max_terms = 2;
  const ConditionalEngine capped(baseline(), 5.0, opt);
  EXPECT_THROW(capped.at(5.0), NumericalFailure);
  EXPECT_THROW(baseline_engine().at(11.0), DomainError);
  EXPECT_THROW(baseline_engine().at(-1.0), DomainError);
  opt.epsilon = 0.0;
  EXPECT_THROW(ConditionalEngine(baseline(), 1.0, opt), DomainError);
}

TEST(Conditional, NeverBlockedStaysInLos) {
  ScenarioConfig cfg;
  cfg.initial_rate = 0.0;
  const ConditionalEngine e(renewal::build_model(cfg), 5.0);
  const auto p = e.at(2.0);
  EXPECT_EQ(p.p00, 1.0);
  EXPECT_EQ(p.p01, 0.0);
}
