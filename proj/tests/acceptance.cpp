// Acceptance report: one PASS/FAIL line per criterion, tolerances fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blockage/blockage.hpp"

using namespace blockage;

namespace {

// criterion 1
constexpr double kMeanRelTol = 0.01;
// criterion 2
constexpr double kExpectedMeanBlocked = 0.5, kExpectedMeanRelTol = 0.15;
constexpr double kExpectedResidualAt = 0.5, kExpectedResidual = 0.9, kExpectedResidualTol = 0.05;
// criterion 3
constexpr double kBlockedLow = 0.4, kBlockedHigh = 1.0;
// criterion 4
constexpr double kFracRelTol = 0.05, kKsMax = 0.02;
constexpr std::size_t kMinBusyPeriods = 100'000;
// criterion 5
constexpr double kEpsilon = 1e-4;
constexpr std::size_t kTermsLow = 6, kTermsHigh = 9;
constexpr double kStandardErrors = 3.0;
// criterion 6
constexpr double kHeightRadiusRatio = 6.0, kHeightDensityRatio = 1.7, kHeightTol = 0.25;
constexpr double kEdgeRatio30 = 1.7, kEdgeRatio100 = 30.0, kEdgeTol = 0.30;
constexpr double kAverageRatio30 = 1.05, kAverageRatio100 = 1.3, kAverageTolAbs = 0.1;
// criterion 7
constexpr double kFlatPValue = 0.05, kLinearR2 = 0.9;
// criterion 8
constexpr double kRefinementRelTol = 2e-3, kDegeneracyTol = 1e-6;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok) { pass = pass && ok; }
};

ScenarioConfig scenario(Scenario kind, double initial_rate = 1.0) {
  ScenarioConfig cfg;
  cfg.kind = kind;
  cfg.initial_rate = initial_rate;
  return cfg;
}

DistributionTable residence_of(const ScenarioConfig& cfg, std::size_t points = residence::kDefaultPoints) {
  const auto z = geometry::build_zone(cfg.link);
  return residence::residence_time_cdf(residence::distance_cdf(cfg, z, points), cfg.speed);
}

void busy_period_consistency(Outcome& o) {
  double worst = 0.0;
  for (auto kind : {Scenario::s1, Scenario::s2, Scenario::s3}) {
    const auto ft = residence_of(scenario(kind));
    const double et = mean_of(ft);
    for (double rate : {0.05, 0.1, 0.28, 0.5, 1.0}) {
      const double want = renewal::mean_blocked(rate, et);
      const double got = mean_of(renewal::blocked_cdf(ft, rate));
      worst = std::max(worst, std::abs(got - want) / want);
    }
  }
  o.check(worst <= kMeanRelTol);
  o.detail << "worst relative error of the numeric mean " << worst << " (limit " << kMeanRelTol << ")";
}

void baseline_blocked_interval(Outcome& o) {
  const auto m = renewal::build_model(scenario(Scenario::s1));
  const double res = m.residual_blocked(kExpectedResidualAt);
  const bool mean_ok = std::abs(m.mean_blocked_numeric - kExpectedMeanBlocked) <= kExpectedMeanRelTol * kExpectedMeanBlocked;
  const bool res_ok = std::abs(res - kExpectedResidual) <= kExpectedResidualTol;
  o.check(mean_ok && res_ok);
  o.detail << "lambda=" << m.rate << " E[eta]=" << m.mean_blocked_numeric << (mean_ok ? " ok" : " out of band")
           << ", F_t_eta(0.5)=" << res << (res_ok ? " ok" : " out of band [0.85, 0.95]");
  // diagnostic: the same quantity with the zone length taken without the d_m/2 extension
  const auto link = scenario(Scenario::s1).link;
  auto zone = geometry::build_zone(link);
  zone.length -= 0.5 * link.blocker_diameter;
  zone.effective_width = zone.width * std::sin(zone.alpha) + zone.length * std::cos(zone.alpha);
  const double rate = zone.effective_width / link.sidewalk_width;
  const auto ft = residence::distance_cdf_s1(zone);
  const auto alt = renewal::build_model(rate, ft);
  o.detail << "; diagnostic without the d_m/2 term: lambda=" << alt.rate << " E[eta]=" << alt.mean_blocked_numeric
           << " F_t_eta(0.5)=" << alt.residual_blocked(kExpectedResidualAt);
}

void blocked_magnitude(Outcome& o) {
  struct Case {
    Scenario kind;
    double rate;
  };
  const std::vector<Case> cases{{Scenario::s1, 1.0}, {Scenario::s1, 3.0}, {Scenario::s2, 1.0},
                                {Scenario::s2, 3.0}, {Scenario::s3, 0.24}, {Scenario::s3, 0.71}};
  for (const auto& c : cases) {
    const auto m = renewal::build_model(scenario(c.kind, c.rate));
    const bool ok = m.mean_blocked_numeric >= kBlockedLow && m.mean_blocked_numeric <= kBlockedHigh;
    o.check(ok);
    o.detail << to_string(c.kind) << "@" << c.rate << ": " << m.mean_blocked_numeric << (ok ? "" : " (out)") << "  ";
  }
}

void simulation_agreement(Outcome& o) {
  struct Panel {
    const char* name;
    double r0, alpha_deg, initial_rate;
    bool fraction;
  };
  const std::vector<Panel> panels{{"a", 4.6, 30.0, 1.0, true}, {"a", 4.6, 30.0, 3.0, true}, {"b", 7.9, 18.4, 3.0, false}};
  std::uint64_t seed = 500;
  for (const auto& p : panels) {
    ScenarioConfig cfg = scenario(Scenario::s1, p.initial_rate);
    cfg.link.sidewalk_width = 10.0;
    cfg.link.distance = p.r0;
    cfg.link.alpha = p.alpha_deg * std::numbers::pi / 180.0;
    const auto m = renewal::build_model(cfg);
    const std::size_t reps = 4;
    const double duration = 1.25 * static_cast<double>(kMinBusyPeriods) * m.cycle_mean / reps;
    const auto s = sim::summarize(sim::simulate_replications(cfg, duration, ++seed, reps));
    const double ks = ks_statistic(s.blocked_samples, m.blocked);
    const double rel = std::abs(s.frac_nlos - m.frac_nlos) / m.frac_nlos;
    const bool ok = s.n_busy_periods >= kMinBusyPeriods && ks < kKsMax && (!p.fraction || rel <= kFracRelTol);
    o.check(ok);
    o.detail << "panel " << p.name << " lambda_I=" << p.initial_rate << ": busy=" << s.n_busy_periods
             << " KS=" << ks;
    if (p.fraction) o.detail << " frac_nlos " << s.frac_nlos << " vs " << m.frac_nlos;
    o.detail << "  ";
  }
}

void conditional_convergence(Outcome& o) {
  const auto m = renewal::build_model(scenario(Scenario::s1));
  ConditionalOptions opt;
  opt.epsilon = kEpsilon;
  const ConditionalEngine engine(m, 5.0, opt);
  std::size_t most = 0;
  for (int i = 1; i <= 100; ++i) most = std::max(most, engine.at(0.05 * i).terms_used());
  const bool terms_ok = most >= kTermsLow && most <= kTermsHigh;
  const double far = 20.0 * m.cycle_mean;
  const auto p = conditional_from_los(m, far, kEpsilon);
  const bool far_ok = std::abs(p.same - m.frac_los) <= 2.0 * kEpsilon;
  o.check(terms_ok && far_ok);
  o.detail << "max terms " << most << ", p00(" << far << ")-frac_los=" << p.same - m.frac_los;
  const std::vector<double> lags{0.1, 0.5, 1.0, 2.0};
  const auto s = sim::summarize(sim::simulate_replications(scenario(Scenario::s1), 1e5, 77, 4), lags);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const auto a = engine.at(lags[i]);
    const auto& e = s.conditional_estimates[i];
    const double z01 = std::abs(a.p01 - e.p01) / e.se01, z10 = std::abs(a.p10 - e.p10) / e.se10;
    o.check(z01 <= kStandardErrors && z10 <= kStandardErrors);
    o.detail << "; dt=" << lags[i] << " |z01|=" << z01 << " |z10|=" << z10;
  }
}

void planning_ratios(Outcome& o) {
  geometry::LinkGeometry link;
  apps::CellConfig cell;
  auto height = [&](double x, double ls) {
    apps::CellConfig c = cell;
    c.x_c = x;
    c.lambda_S = ls;
    return apps::optimal_ap_height(c, link).height;
  };
  auto in_band = [](double v, double target, double rel) { return std::abs(v - target) <= rel * target; };
  const double hr = height(70.0, 0.1) / height(10.0, 0.1);
  const double hd = height(30.0, 1.0) / height(30.0, 0.1);
  o.check(in_band(hr, kHeightRadiusRatio, kHeightTol) && in_band(hd, kHeightDensityRatio, kHeightTol));
  o.detail << "height x7 radius " << hr << ", x10 lambda_S " << hd;

  const apps::RadioConfig radio;
  geometry::LinkGeometry mast = link;
  mast.tx_height = 10.0;
  auto ratio = [&](double x, double base, bool average) {
    apps::CellConfig a = cell, b = cell;
    a.x_c = b.x_c = x;
    a.lambda_S = base;
    b.lambda_S = 10.0 * base;
    if (average) return apps::cell_average_rate(a, radio, mast) / apps::cell_average_rate(b, radio, mast);
    return apps::cell_edge_mean_rate(a, radio, mast) / apps::cell_edge_mean_rate(b, radio, mast);
  };
  const double e30 = ratio(30.0, 0.1, false), e100 = ratio(100.0, 0.1, false);
  o.check(in_band(e30, kEdgeRatio30, kEdgeTol) && in_band(e100, kEdgeRatio100, kEdgeTol));
  o.detail << "; edge rate x10 lambda_S at 30 m " << e30 << ", at 100 m " << e100;
  const double a30 = ratio(30.0, 0.1, true), a100 = ratio(100.0, 0.1, true);
  const bool avg_ok = std::abs(a30 - kAverageRatio30) <= kAverageTolAbs && std::abs(a100 - kAverageRatio100) <= kAverageTolAbs;
  o.check(avg_ok);
  o.detail << "; cell average x10 lambda_S at 30 m " << a30 << ", at 100 m " << a100 << (avg_ok ? "" : " (out)");
  o.detail << "; diagnostic with lambda_S 0.01 to 0.1: cell average " << ratio(30.0, 0.01, true) << " / "
           << ratio(100.0, 0.01, true) << ", edge " << ratio(30.0, 0.01, false) << " / " << ratio(100.0, 0.01, false);
}

void complexity_scaling(Outcome& o) {
  const std::vector<double> tu{0.002, 0.004, 0.006, 0.008, 0.01};
  const std::vector<double> li{0.5, 1.0, 2.0, 4.0, 8.0};
  sim::BenchOptions opt;
  opt.repeats = 5;
  const auto r = sim::run_complexity_benchmark(scenario(Scenario::s1), 200.0, tu, li, opt);
  const bool flat = r.model_vs_intensity.p_value > kFlatPValue;
  const bool direct = r.direct_vs_intensity.r2 > kLinearR2 && r.direct_vs_intensity.slope > 0.0;
  const bool rate = r.model_vs_rate.r2 > kLinearR2 && r.direct_vs_rate.r2 > kLinearR2;
  o.check(flat && direct && rate);
  o.detail << "model vs lambda_I slope p=" << r.model_vs_intensity.p_value << ", direct vs lambda_I R2="
           << r.direct_vs_intensity.r2 << ", vs 1/T_U R2 model=" << r.model_vs_rate.r2
           << " direct=" << r.direct_vs_rate.r2;
}

void property_suites(Outcome& o) {
  // randomized table invariants
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t bad = 0, drawn = 0;
  for (int k = 0; k < 200; ++k) {
    ScenarioConfig cfg;
    cfg.kind = static_cast<Scenario>(k % 3);
    cfg.link.alpha = 1.5 * u(rng);
    cfg.link.distance = 0.3 + 3.0 * u(rng);
    cfg.link.sidewalk_width = 12.0;
    cfg.speed = 0.5 + u(rng);
    if (cfg.kind == Scenario::s2) cfg.mode = 0.5 + 11.0 * u(rng);
    const auto z = geometry::build_zone(cfg.link);
    if (z.y_low() < 0.0 || z.y_high() > cfg.link.sidewalk_width) continue;
    ++drawn;
    try {
      residence_of(cfg, 500).validate();
    } catch (const Error&) {
      ++bad;
    }
  }
  o.check(bad == 0);
  o.detail << "invalid tables " << bad << "/" << drawn;

  // S2 reduces to S1 when the zone lies on one side of the mode
  const auto zone = geometry::build_zone(geometry::LinkGeometry{});
  const auto s1 = residence::distance_cdf_s1(zone);
  const auto s2 = residence::distance_cdf_s2(zone, 5.0, 4.0);
  double gap = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) gap = std::max(gap, std::abs(s1.cdf()[i] - s2.cdf()[i]));
  o.check(gap <= kDegeneracyTol);
  o.detail << "; S2 to S1 gap " << gap;

  // F_eta <= F_T
  double excess = 0.0;
  for (auto kind : {Scenario::s1, Scenario::s2, Scenario::s3}) {
    const auto ft = residence_of(scenario(kind));
    const auto fe = renewal::blocked_cdf(ft, 1.0);
    for (double x : fe.grid()) excess = std::max(excess, fe(x) - ft(x));
  }
  o.check(excess <= 1e-9);
  o.detail << "; max F_eta - F_T " << excess;

  // grid refinement
  const auto ft = residence_of(scenario(Scenario::s1));
  renewal::BusyPeriodOptions fine;
  fine.intervals_per_support *= 2;
  const double a = mean_of(renewal::blocked_cdf(ft, 0.28)), b = mean_of(renewal::blocked_cdf(ft, 0.28, fine));
  o.check(std::abs(a - b) / b < kRefinementRelTol);
  o.detail << "; refinement change " << std::abs(a - b) / b;

  // determinism
  const auto t1 = sim::simulate(scenario(Scenario::s2), 5000.0, 3, sim::Mode::exact);
  const auto t2 = sim::simulate(scenario(Scenario::s2), 5000.0, 3, sim::Mode::exact);
  bool same = t1.intervals.size() == t2.intervals.size();
  for (std::size_t i = 0; same && i < t1.intervals.size(); ++i) {
    same = t1.intervals[i].start == t2.intervals[i].start && t1.intervals[i].end == t2.intervals[i].end;
  }
  o.check(same);
  o.detail << "; simulate deterministic " << (same ? "yes" : "no");
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
      {1, busy_period_consistency}, {2, baseline_blocked_interval}, {3, blocked_magnitude},
      {4, simulation_agreement},    {5, conditional_convergence}, {6, planning_ratios},
      {7, complexity_scaling},      {8, property_suites},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s (%.1f s): %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
