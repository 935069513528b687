#pragma once

// Event-driven Monte Carlo of blockers crossing the link, and the timing
// harness comparing direct geometric simulation with model-based sampling.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "blockage/distribution.hpp"
#include "blockage/errors.hpp"
#include "blockage/geometry.hpp"
#include "blockage/renewal.hpp"
#include "blockage/residence.hpp"

namespace blockage::sim {

enum class Mode { rectangle, exact };
enum class LinkState { los, nlos };

inline const char* to_string(Mode m) { return m == Mode::rectangle ? "rectangle" : "exact"; }
inline const char* to_string(LinkState s) { return s == LinkState::los ? "LOS" : "NLOS"; }

struct Interval {
  LinkState state = LinkState::los;
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

struct StateTrace {
  std::vector<Interval> intervals;
  double duration = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t blockers = 0;  // spawned over the whole run, warm-up included
  double simulated = 0.0;    // run length including warm-up

  LinkState state_at(double t) const {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                               [](double x, const Interval& iv) { return x < iv.end; });
    if (it == intervals.end()) return intervals.back().state;
    return it->state;
  }
};

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

using geometry::Point2;

struct Span {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool empty() const { return !(lo < hi); }
  void join(Span o) {
    if (o.empty()) return;
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

/// s-range where p + s dir (zone-local coordinates) stays in the box
/// |u| <= half_width, v in [v0, v1].
inline Span clip_box(Point2 p, Point2 dir, double half_width, double v0, double v1) {
  Span s{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  auto slab = [&](double pos, double d, double lo, double hi) {
    if (std::abs(d) < 1e-15) {
      if (pos < lo || pos > hi) s = Span{};
      return;
    }
    double a = (lo - pos) / d, b = (hi - pos) / d;
    if (a > b) std::swap(a, b);
    s.lo = std::max(s.lo, a);
    s.hi = std::min(s.hi, b);
  };
  slab(p.x, dir.x, -half_width, half_width);
  slab(p.y, dir.y, v0, v1);
  return s;
}

inline Span clip_disk(Point2 p, Point2 dir, Point2 centre, double radius) {
  const Point2 w = p - centre;
  const double b = geometry::dot(dir, w);
  const double c = geometry::dot(w, w) - radius * radius;
  const double disc = b * b - c;
  if (disc <= 0.0) return {};
  const double root = std::sqrt(disc);
  return {-b - root, -b + root};
}

/// Blocking region in zone-local coordinates: u across (A to B), v along
/// the zone axis from the Rx towards the Tx.
struct Region {
  Mode mode = Mode::rectangle;
  double half_width = 0.0;
  double length = 0.0;  // r
  double spine = 0.0;   // capsule spine length (exact mode)
  Point2 origin;        // Rx, world
  Point2 e_u, e_v;      // local axes, world

  Point2 to_local(Point2 world) const {
    const Point2 d = world - origin;
    return {geometry::dot(d, e_u), geometry::dot(d, e_v)};
  }
  Point2 dir_local(Point2 dir) const { return {geometry::dot(dir, e_u), geometry::dot(dir, e_v)}; }

  /// Arc-length interval of the (unit speed, local) line inside the region.
  Span crossing(Point2 p, Point2 dir) const {
    if (mode == Mode::rectangle) return clip_box(p, dir, half_width, 0.0, length);
    Span s = clip_box(p, dir, half_width, 0.0, spine);
    s.join(clip_disk(p, dir, {0.0, 0.0}, half_width));
    s.join(clip_disk(p, dir, {0.0, spine}, half_width));
    return s;
  }

  bool contains(Point2 local) const {
    if (mode == Mode::rectangle) {
      return std::abs(local.x) <= half_width && local.y >= 0.0 && local.y <= length;
    }
    const double v = std::clamp(local.y, 0.0, spine);
    return std::hypot(local.x, local.y - v) <= half_width;
  }
};

inline Region make_region(const geometry::LinkGeometry& link, Mode mode) {
  const auto zone = geometry::build_zone(link);
  Region g;
  g.mode = mode;
  g.half_width = 0.5 * link.blocker_diameter;
  g.length = zone.length;
  g.spine = geometry::shadow_length(link);
  g.origin = zone.rx;
  g.e_u = {std::cos(link.alpha), std::sin(link.alpha)};
  g.e_v = zone.axis();
  return g;
}

inline double sample_triangular(std::mt19937_64& rng, double w, double c) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < c / w) return std::sqrt(u * w * c);
  return w - std::sqrt((1.0 - u) * w * (w - c));
}

/// S3 chord in local coordinates: entry side proportional to length among
/// the two long sides and the far short side, exit side proportional to
/// length among the other two, positions uniform.
inline std::pair<Point2, Point2> sample_s3_chord(std::mt19937_64& rng, double width, double length) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double hw = 0.5 * width;
  // sides: 0 = u = -hw, 1 = u = +hw (long), 2 = v = r (short)
  const std::array<double, 3> side_len{length, length, width};
  auto point_on = [&](int side) -> Point2 {
    const double t = unit(rng);
    if (side == 0) return {-hw, t * length};
    if (side == 1) return {hw, t * length};
    return {-hw + t * width, length};
  };
  auto pick = [&](std::initializer_list<int> sides) {
    double total = 0.0;
    for (int s : sides) total += side_len[static_cast<std::size_t>(s)];
    double u = unit(rng) * total;
    for (int s : sides) {
      u -= side_len[static_cast<std::size_t>(s)];
      if (u <= 0.0) return s;
    }
    return *(sides.end() - 1);
  };
  const int in = pick({0, 1, 2});
  int out = 0;
  if (in == 0) out = pick({1, 2});
  else if (in == 1) out = pick({0, 2});
  else out = pick({0, 1});
  return {point_on(in), point_on(out)};
}

/// Union of occupancy intervals, restricted to [lo, hi].
inline std::vector<std::pair<double, double>> merge_busy(std::vector<std::pair<double, double>> occ, double lo,
                                                         double hi) {
  std::sort(occ.begin(), occ.end());
  std::vector<std::pair<double, double>> busy;
  for (const auto& [a, b] : occ) {
    if (!busy.empty() && a <= busy.back().second) busy.back().second = std::max(busy.back().second, b);
    else busy.emplace_back(a, b);
  }
  std::vector<std::pair<double, double>> out;
  for (auto [a, b] : busy) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (a < b) out.emplace_back(a, b);
  }
  return out;
}

inline StateTrace assemble(const std::vector<std::pair<double, double>>& busy, double lo, double hi) {
  StateTrace tr;
  tr.duration = hi - lo;
  double t = lo;
  for (const auto& [a, b] : busy) {
    if (a > t) tr.intervals.push_back({LinkState::los, t - lo, a - lo});
    tr.intervals.push_back({LinkState::nlos, a - lo, b - lo});
    t = b;
  }
  if (t < hi) tr.intervals.push_back({LinkState::los, t - lo, hi - lo});
  return tr;
}

}  // namespace detail

/// Discarded start of every run: max(10 E[xi], 10 s).
inline double warm_up(const ScenarioConfig& cfg) {
  const auto zone = geometry::build_zone(cfg.link);
  const double rate = residence::entry_intensity(cfg, zone);
  if (rate <= 0.0) return 10.0;
  const double mean_t = mean_of(residence::distance_cdf(cfg, zone, 1000)) / cfg.speed;
  return std::max(10.0, 10.0 * renewal::renewal_cycle_mean(rate, mean_t));
}

/// One replication. Deterministic in (cfg, duration, seed, mode, stream).
inline StateTrace simulate(const ScenarioConfig& cfg, double duration, std::uint64_t seed, Mode mode = Mode::rectangle,
                           std::uint64_t stream = 0) {
  if (!(duration > 0.0)) throw DomainError("duration must be positive");
  cfg.validate();
  const auto region = detail::make_region(cfg.link, mode);
  const double warm = warm_up(cfg);
  const double end = warm + duration;
  auto rng = make_rng(seed, stream);
  std::vector<std::pair<double, double>> occ;
  std::size_t spawned = 0;

  if (cfg.initial_rate > 0.0) {
    std::exponential_distribution<double> gap(cfg.initial_rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (cfg.kind == Scenario::s3) {
      for (double t = gap(rng); t < end; t += gap(rng)) {
        ++spawned;
        const auto [in, out] = detail::sample_s3_chord(rng, cfg.link.blocker_diameter, region.length);
        const geometry::Point2 d = out - in;
        const double len = geometry::norm(d);
        if (!(len > 0.0)) continue;
        const detail::Span s = mode == Mode::rectangle ? detail::Span{0.0, len}
                                                       : region.crossing(in, (1.0 / len) * d);
        if (!s.empty()) occ.emplace_back(t + s.lo / cfg.speed, t + s.hi / cfg.speed);
      }
    } else {
      // blockers enter at x_start walking +x; the strip extends r_0 + 10 d_m
      // beyond the zone on each side
      const auto zone = geometry::build_zone(cfg.link);
      double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
      for (const auto& v : zone.vertices()) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
      }
      const double margin = cfg.link.distance + 10.0 * cfg.link.blocker_diameter;
      const double x_start = min_x - margin;
      const double transit = (max_x + margin - x_start) / cfg.speed;
      const geometry::Point2 dir = region.dir_local({1.0, 0.0});
      const double w = cfg.link.sidewalk_width;
      const double c = cfg.triangular_mode();
      for (double t = -transit + gap(rng); t < end; t += gap(rng)) {
        ++spawned;
        const double y = cfg.kind == Scenario::s1 ? w * unit(rng) : detail::sample_triangular(rng, w, c);
        const detail::Span s = region.crossing(region.to_local({x_start, y}), dir);
        if (!s.empty()) occ.emplace_back(t + s.lo / cfg.speed, t + s.hi / cfg.speed);
      }
    }
  }
  StateTrace tr = detail::assemble(detail::merge_busy(std::move(occ), warm, end), warm, end);
  tr.seed = seed;
  tr.stream = stream;
  tr.blockers = spawned;
  tr.simulated = end;
  return tr;
}

/// Independent replications (streams 0..n-1) run in parallel.
inline std::vector<StateTrace> simulate_replications(const ScenarioConfig& cfg, double duration, std::uint64_t seed,
                                                     std::size_t replications, Mode mode = Mode::rectangle,
                                                     unsigned threads = 0) {
  std::vector<StateTrace> out(replications);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, replications)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < replications; i += threads) out[i] = simulate(cfg, duration, seed, mode, i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct ConditionalEstimate {
  double lag = 0.0;
  double p01 = 0.0, p10 = 0.0;
  double se01 = 0.0, se10 = 0.0;  // batch-means standard errors
  std::size_t from_los = 0, from_nlos = 0;
};

struct SimulationSummary {
  double frac_nlos = 0.0;
  double duration = 0.0;
  DistributionTable blocked_interval_ecdf;
  DistributionTable nonblocked_interval_ecdf;
  std::vector<double> blocked_samples;     // sorted
  std::vector<double> nonblocked_samples;  // sorted
  std::size_t n_busy_periods = 0;
  std::vector<ConditionalEstimate> conditional_estimates;
};

struct SummaryOptions {
  double sample_step = 0.01;  // two-point sampling grid, s
  std::size_t batches = 50;
  std::size_t ecdf_points = 2000;
};

/// Two-point estimate of p01/p10 at one lag over a set of traces.
inline ConditionalEstimate estimate_conditional(std::span<const StateTrace> traces, double lag,
                                                const SummaryOptions& opt = {}) {
  ConditionalEstimate est;
  est.lag = lag;
  struct Counts {
    double n0 = 0, n01 = 0, n1 = 0, n10 = 0;
  };
  std::vector<Counts> batch(opt.batches);
  double total_span = 0.0;
  for (const auto& tr : traces) total_span += std::max(0.0, tr.duration - lag);
  if (!(total_span > 0.0)) return est;
  const double per_batch = total_span / static_cast<double>(opt.batches);
  double offset = 0.0;
  for (const auto& tr : traces) {
    const double span = tr.duration - lag;
    if (span <= 0.0) continue;
    std::size_t i = 0, j = 0;  // interval cursors for t and t + lag
    const auto& iv = tr.intervals;
    const auto steps = static_cast<std::size_t>(span / opt.sample_step);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = opt.sample_step * static_cast<double>(k);
      while (i + 1 < iv.size() && t >= iv[i].end) ++i;
      while (j + 1 < iv.size() && t + lag >= iv[j].end) ++j;
      const auto b = std::min(opt.batches - 1, static_cast<std::size_t>((offset + t) / per_batch));
      if (iv[i].state == LinkState::los) {
        batch[b].n0 += 1;
        if (iv[j].state == LinkState::nlos) batch[b].n01 += 1;
      } else {
        batch[b].n1 += 1;
        if (iv[j].state == LinkState::los) batch[b].n10 += 1;
      }
    }
    offset += span;
  }
  Counts all;
  for (const auto& c : batch) {
    all.n0 += c.n0;
    all.n01 += c.n01;
    all.n1 += c.n1;
    all.n10 += c.n10;
  }
  est.from_los = static_cast<std::size_t>(all.n0);
  est.from_nlos = static_cast<std::size_t>(all.n1);
  est.p01 = all.n0 > 0 ? all.n01 / all.n0 : 0.0;
  est.p10 = all.n1 > 0 ? all.n10 / all.n1 : 0.0;
  // batch means of the ratio estimators
  auto se = [&](auto num, auto den, double mean) {
    double ss = 0.0;
    std::size_t used = 0;
    for (const auto& c : batch) {
      if (c.*den <= 0.0) continue;
      const double v = c.*num / c.*den - mean;
      ss += v * v;
      ++used;
    }
    if (used < 2) return 0.0;
    return std::sqrt(ss / static_cast<double>(used - 1) / static_cast<double>(used));
  };
  est.se01 = se(&Counts::n01, &Counts::n0, est.p01);
  est.se10 = se(&Counts::n10, &Counts::n1, est.p10);
  return est;
}

/// Empirical statistics of one or more traces. The first and last interval
/// of every trace are truncated by the window and left out of the ECDFs.
inline SimulationSummary summarize(std::span<const StateTrace> traces, std::span<const double> conditional_lags = {},
                                   const SummaryOptions& opt = {}) {
  SimulationSummary s;
  double nlos = 0.0;
  for (const auto& tr : traces) {
    s.duration += tr.duration;
    for (std::size_t i = 0; i < tr.intervals.size(); ++i) {
      const auto& iv = tr.intervals[i];
      if (iv.state == LinkState::nlos) nlos += iv.length();
      if (i == 0 || i + 1 == tr.intervals.size()) continue;
      (iv.state == LinkState::nlos ? s.blocked_samples : s.nonblocked_samples).push_back(iv.length());
    }
  }
  s.frac_nlos = s.duration > 0.0 ? nlos / s.duration : 0.0;
  std::sort(s.blocked_samples.begin(), s.blocked_samples.end());
  std::sort(s.nonblocked_samples.begin(), s.nonblocked_samples.end());
  s.n_busy_periods = s.blocked_samples.size();
  s.blocked_interval_ecdf = empirical_table(s.blocked_samples, opt.ecdf_points);
  s.nonblocked_interval_ecdf = empirical_table(s.nonblocked_samples, opt.ecdf_points);
  for (double lag : conditional_lags) s.conditional_estimates.push_back(estimate_conditional(traces, lag, opt));
  return s;
}

inline SimulationSummary summarize(const StateTrace& trace, std::span<const double> conditional_lags = {},
                                   const SummaryOptions& opt = {}) {
  return summarize(std::span<const StateTrace>(&trace, 1), conditional_lags, opt);
}

/// Inverse-CDF sampler with O(1) draws from a precomputed quantile table.
class QuantileSampler {
 public:
  QuantileSampler(const DistributionTable& table, std::size_t resolution = 1 << 14) : q_(resolution + 1) {
    for (std::size_t i = 0; i <= resolution; ++i) {
      q_[i] = table.quantile(static_cast<double>(i) / static_cast<double>(resolution));
    }
  }
  double operator()(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * static_cast<double>(q_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(u), q_.size() - 2);
    const double t = u - static_cast<double>(i);
    return q_[i] + t * (q_[i + 1] - q_[i]);
  }

 private:
  std::vector<double> q_;
};

/// Trace drawn from the renewal model itself, starting in the stationary state.
inline StateTrace sample_model_trace(const renewal::RenewalModel& model, double duration, std::uint64_t seed,
                                     std::uint64_t stream = 0) {
  StateTrace tr;
  tr.duration = duration;
  tr.seed = seed;
  tr.stream = stream;
  if (model.never_blocked) {
    tr.intervals.push_back({LinkState::los, 0.0, duration});
    return tr;
  }
  auto rng = make_rng(seed, stream);
  const QuantileSampler eta(model.blocked), eta_res(model.residual_blocked);
  std::exponential_distribution<double> omega(model.rate);
  bool blocked = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < model.frac_nlos;
  double t = 0.0;
  double len = blocked ? eta_res(rng) : omega(rng);
  while (t < duration) {
    const double e = std::min(duration, t + len);
    tr.intervals.push_back({blocked ? LinkState::nlos : LinkState::los, t, e});
    t = e;
    blocked = !blocked;
    len = blocked ? eta(rng) : omega(rng);
  }
  return tr;
}

// ---------------------------------------------------------------- benchmark

struct BenchRow {
  double update_interval = 0.0;  // T_U, s
  double intensity = 0.0;        // lambda_I
  std::string method;            // "direct" or "model"
  double mean_time = 0.0;        // s
  double stdev = 0.0;            // s
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  double t_stat = 0.0;   // slope / slope_se
  double p_value = 1.0;  // two-sided, H0: slope = 0
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit f;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = std::sqrt(sse / (n - 2.0) / sxx);
  if (f.slope_se > 0.0) {
    f.t_stat = f.slope / f.slope_se;
    boost::math::students_t dist(n - 2.0);
    f.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(f.t_stat)));
  } else {
    f.p_value = f.slope == 0.0 ? 1.0 : 0.0;
  }
  return f;
}

struct BenchResult {
  std::vector<BenchRow> rows;
  LinearFit model_vs_intensity;   // at the smallest T_U
  LinearFit direct_vs_intensity;  // at the smallest T_U
  LinearFit model_vs_rate;        // cost vs 1/T_U at the largest intensity
  LinearFit direct_vs_rate;
};

struct BenchOptions {
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
};

namespace detail {

/// Time-stepped geometric simulation: every T_U all active blockers move and
/// are tested against the zone. Returns the number of blocked steps so the
/// work cannot be optimised away.
inline std::size_t direct_stepping(const ScenarioConfig& cfg, double duration, double update, std::uint64_t seed) {
  auto rng = make_rng(seed, 0);
  const auto region = make_region(cfg.link, Mode::rectangle);
  struct Walker {
    Point2 pos;  // local
    Point2 dir;  // local
    double left; // remaining path, m
  };
  std::vector<Walker> active;
  const double margin = cfg.link.distance + 10.0 * cfg.link.blocker_diameter;
  const auto zone = geometry::build_zone(cfg.link);
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  for (const auto& v : zone.vertices()) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
  }
  const double path = max_x - min_x + 2.0 * margin;
  const double w = cfg.kind == Scenario::s3 ? 0.0 : cfg.link.sidewalk_width;
  std::exponential_distribution<double> gap(cfg.initial_rate > 0.0 ? cfg.initial_rate : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double next = cfg.initial_rate > 0.0 ? gap(rng) : std::numeric_limits<double>::infinity();
  std::size_t blocked_steps = 0;
  const double step_len = cfg.speed * update;
  for (double t = 0.0; t < duration; t += update) {
    while (next <= t) {
      if (cfg.kind == Scenario::s3) {
        const auto [in, out] = sample_s3_chord(rng, cfg.link.blocker_diameter, region.length);
        const Point2 d = out - in;
        const double len = norm(d);
        if (len > 0.0) active.push_back({in, (1.0 / len) * d, len});
      } else {
        const double y = cfg.kind == Scenario::s1 ? w * unit(rng) : sample_triangular(rng, w, cfg.triangular_mode());
        active.push_back({region.to_local({min_x - margin, y}), region.dir_local({1.0, 0.0}), path});
      }
      next += gap(rng);
    }
    bool blocked = false;
    for (auto& b : active) {
      b.pos = b.pos + step_len * b.dir;
      b.left -= step_len;
      blocked = region.contains(b.pos) || blocked;
    }
    std::erase_if(active, [](const Walker& b) { return b.left < 0.0; });
    blocked_steps += blocked ? 1 : 0;
  }
  return blocked_steps;
}

/// Model-based stepping: the state is read off pre-drawn interval lengths.
inline std::size_t model_stepping(const renewal::RenewalModel& model, const QuantileSampler& eta, double duration,
                                  double update, std::uint64_t seed) {
  auto rng = make_rng(seed, 1);
  std::size_t blocked_steps = 0;
  if (model.never_blocked) return 0;
  std::exponential_distribution<double> omega(model.rate);
  bool blocked = false;
  double until = omega(rng);
  for (double t = 0.0; t < duration; t += update) {
    while (t >= until) {
      blocked = !blocked;
      until += blocked ? eta(rng) : omega(rng);
    }
    blocked_steps += blocked ? 1 : 0;
  }
  return blocked_steps;
}

inline std::pair<double, double> mean_stdev(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace detail

/// Wall time of direct geometric simulation against model-based state
/// sampling over a grid of update intervals and intensities.
inline BenchResult run_complexity_benchmark(const ScenarioConfig& base, double duration,
                                            std::span<const double> update_intervals,
                                            std::span<const double> intensities, const BenchOptions& opt = {}) {
  if (update_intervals.empty() || intensities.empty()) throw DomainError("benchmark needs T_U and lambda_I values");
  BenchResult res;
  volatile std::size_t sink = 0;
  using clock = std::chrono::steady_clock;

  struct Cell {
    double tu, li;
    ScenarioConfig cfg;
    renewal::RenewalModel model;
    std::optional<QuantileSampler> eta;
    std::vector<double> direct, sampled;
  };
  std::vector<Cell> cells;
  for (double tu : update_intervals) {
    for (double li : intensities) {
      Cell c{tu, li, base, {}, std::nullopt, {}, {}};
      c.cfg.initial_rate = li;
      c.model = renewal::build_model(c.cfg);
      c.eta.emplace(c.model.never_blocked ? DistributionTable::point_mass(0.0) : c.model.blocked);
      cells.push_back(std::move(c));
    }
  }
  // Each method gets its own pass so one never runs on caches the other
  // left behind, and every repeat visits the cells in a fresh shuffled
  // order so slow drift of the machine is not aligned with lambda_I or T_U.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto shuffler = make_rng(opt.seed, 7);
  for (int method = 0; method < 2; ++method) {
    const auto& warm = cells.front();
    sink = sink + (method == 0 ? detail::model_stepping(warm.model, *warm.eta, duration, warm.tu, opt.seed)
                               : detail::direct_stepping(warm.cfg, duration, warm.tu, opt.seed));
    for (std::size_t k = 0; k < opt.repeats; ++k) {
      std::shuffle(order.begin(), order.end(), shuffler);
      for (std::size_t i : order) {
        auto& c = cells[i];
        const auto t0 = clock::now();
        if (method == 0) {
          sink = sink + detail::model_stepping(c.model, *c.eta, duration, c.tu, opt.seed + k);
          c.sampled.push_back(std::chrono::duration<double>(clock::now() - t0).count());
        } else {
          sink = sink + detail::direct_stepping(c.cfg, duration, c.tu, opt.seed + k);
          c.direct.push_back(std::chrono::duration<double>(clock::now() - t0).count());
        }
      }
    }
  }
  for (const auto& c : cells) {
    const auto [dm, ds] = detail::mean_stdev(c.direct);
    const auto [mm, ms] = detail::mean_stdev(c.sampled);
    res.rows.push_back({c.tu, c.li, "direct", dm, ds});
    res.rows.push_back({c.tu, c.li, "model", mm, ms});
  }
  const double tu_min = *std::min_element(update_intervals.begin(), update_intervals.end());
  const double li_max = *std::max_element(intensities.begin(), intensities.end());
  auto collect = [&](const std::string& method, bool by_intensity) {
    std::vector<double> x, y;
    for (const auto& r : res.rows) {
      if (r.method != method) continue;
      if (by_intensity && r.update_interval == tu_min) {
        x.push_back(r.intensity);
        y.push_back(r.mean_time);
      } else if (!by_intensity && r.intensity == li_max) {
        x.push_back(1.0 / r.update_interval);
        y.push_back(r.mean_time);
      }
    }
    return fit_line(x, y);
  };
  res.model_vs_intensity = collect("model", true);
  res.direct_vs_intensity = collect("direct", true);
  res.model_vs_rate = collect("model", false);
  res.direct_vs_rate = collect("direct", false);
  return res;
}

}  // namespace blockage::sim
