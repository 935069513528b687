#pragma once

// Alternating renewal description of one link: exponential non-blocked
// intervals, M/GI/inf busy periods as blocked intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "blockage/detail/fft_convolution.hpp"
#include "blockage/distribution.hpp"
#include "blockage/errors.hpp"
#include "blockage/residence.hpp"

namespace blockage::renewal {

/// Upper tail left untabulated; keeps cdf[last] within 1e-9 of one.
inline constexpr double kTail = 1e-9;
/// Dense enough that linear interpolation stays within 1e-6 of the exponential.
inline constexpr std::size_t kExponentialPoints = 20001;

/// F_omega(x) = 1 - exp(-lambda x), on a uniform grid up to the 1 - tail quantile.
inline DistributionTable nonblocked_cdf(double rate, std::size_t points = kExponentialPoints,
                                        double tail = kTail) {
  if (!(rate > 0.0)) throw DomainError("non-blocked law needs lambda > 0");
  const double top = -std::log(tail) / rate;
  std::vector<double> grid = DistributionTable::uniform_grid(top, points);
  std::vector<double> cdf(points);
  for (std::size_t i = 0; i < points; ++i) cdf[i] = -std::expm1(-rate * grid[i]);
  cdf.back() = 1.0;
  return DistributionTable(std::move(grid), std::move(cdf));
}

/// Exponential memorylessness: the residual non-blocked time has the same law.
inline DistributionTable residual_nonblocked_cdf(double rate, std::size_t points = kExponentialPoints) {
  return nonblocked_cdf(rate, points);
}

/// E[eta] = (exp(lambda E[T]) - 1) / lambda.
inline double mean_blocked(double rate, double mean_residence) {
  if (!(rate > 0.0)) throw DomainError("lambda must be positive");
  return std::expm1(rate * mean_residence) / rate;
}

/// E[xi] = exp(lambda E[T]) / lambda = E[omega] + E[eta].
inline double renewal_cycle_mean(double rate, double mean_residence) {
  if (!(rate > 0.0)) throw DomainError("lambda must be positive");
  return 1.0 / rate + mean_blocked(rate, mean_residence);
}

struct TimeFractions {
  double los = 1.0;
  double nlos = 0.0;
};

inline TimeFractions time_fractions(double mean_nonblocked, double mean_blocked_time) {
  if (!(mean_nonblocked > 0.0) || mean_blocked_time < 0.0) throw DomainError("interval means must be positive");
  const double los = mean_nonblocked / (mean_nonblocked + mean_blocked_time);
  return {los, 1.0 - los};
}

struct BusyPeriodOptions {
  std::size_t intervals_per_support = 4000;  // grid cells across the residence-time support
  double tolerance = 1e-6;                   // sup-norm change that stops the iteration
  std::size_t max_iterations = 500;
  double tail = 1e-5;                        // extend the grid until 1 - F_eta(end) < tail
  std::size_t max_nodes = std::size_t{1} << 23;
};

struct BusyPeriodSolution {
  DistributionTable table;
  std::size_t iterations = 0;
  double last_change = 0.0;
};

namespace detail {

/// Integral of 1 - F_T from 0 to each node of a uniform grid with step h,
/// plus the same integral at arbitrary points by interpolation.
struct SurvivalIntegral {
  std::vector<double> nodes;  // at i h, i <= support nodes
  double step = 0.0;
  double total = 0.0;

  double at(double x) const {
    if (x <= 0.0) return 0.0;
    const double pos = x / step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= nodes.size()) return total;
    const double t = pos - static_cast<double>(i);
    return nodes[i] + t * (nodes[i + 1] - nodes[i]);
  }
};

inline SurvivalIntegral survival_on_grid(const DistributionTable& residence, double step) {
  const auto n = static_cast<std::size_t>(std::llround(residence.support_max() / step));
  SurvivalIntegral s;
  s.step = step;
  s.nodes.resize(n + 1);
  double acc = 0.0;
  s.nodes[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = step * static_cast<double>(i);
    // jumps sit on nodes, so each cell sees a continuous survival function
    const double lo = 1.0 - residence(x - step);
    const double hi = 1.0 - residence.left_limit(x);
    acc += 0.5 * (lo + hi) * step;
    s.nodes[i] = acc;
  }
  s.total = mean_of(residence);
  // keep the grid sum and the exact mean consistent at the support end
  const double drift = s.total - s.nodes.back();
  for (std::size_t i = 1; i <= n; ++i) s.nodes[i] += drift * static_cast<double>(i) / static_cast<double>(n);
  return s;
}

}  // namespace detail

/// Blocked-interval (busy period) CDF.
///
/// With p0(t) = exp(-lambda int_0^t (1 - F_T)) the probability that no
/// arrival in a window of length t is still in service at its end, and
/// K = 1 - p0, the busy period solves
///     F_eta(x) = F_T(x) p0(x) + int_0^x F_eta(x - z) dK(z).
/// F_eta inherits an atom m p0(tau) at every atom (tau, m) of F_T; the
/// continuous remainder C is found by successive substitution from F_T with
/// a product-trapezoid rule for the Stieltjes integral.
inline BusyPeriodSolution solve_blocked(const DistributionTable& residence, double rate,
                                        const BusyPeriodOptions& opt = {}) {
  if (!(rate > 0.0)) throw DomainError("busy period needs lambda > 0");
  if (opt.intervals_per_support < 2) throw DomainError("grid needs at least two intervals");
  residence.validate();
  const double support = residence.support_max();
  const double h = support / static_cast<double>(opt.intervals_per_support);
  const std::size_t ns = opt.intervals_per_support;  // support end sits on node ns
  const auto m = detail::survival_on_grid(residence, h);
  const double mean_t = m.total;

  // dK on the cells [jh, (j+1)h]; zero past the support where F_T = 1
  std::vector<double> dk(ns);
  for (std::size_t j = 0; j < ns; ++j) dk[j] = std::exp(-rate * m.nodes[j]) - std::exp(-rate * m.nodes[j + 1]);

  std::vector<Atom> atoms;
  for (const auto& a : residence.atoms()) atoms.push_back({a.location, a.mass * std::exp(-rate * m.at(a.location))});
  double atom_total = 0.0;
  for (const auto& a : atoms) atom_total += a.mass;

  const double mean_eta = mean_blocked(rate, mean_t);
  std::size_t n = std::max<std::size_t>(ns + 1, static_cast<std::size_t>(std::ceil((support + 20.0 * mean_eta) / h)) + 1);
  std::vector<double> c;  // continuous part at nodes
  std::size_t iterations = 0;
  double change = 0.0;

  for (;;) {
    if (n > opt.max_nodes) {
      std::ostringstream msg;
      msg << "busy-period grid exceeded " << opt.max_nodes << " nodes (lambda=" << rate << ", E[T]=" << mean_t << ")";
      throw NumericalFailure(msg.str());
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = h * static_cast<double>(i);
      const double p0 = std::exp(-rate * m.at(x));
      double v = residence(x) * p0;
      for (const auto& a : atoms) {
        if (a.location <= x + DistributionTable::node_tolerance(x)) v += a.mass * (-std::exp(-rate * m.at(x - a.location)));
      }
      g[i] = v;
    }
    // warm start: previous solution, flat past its end; F_T on the first pass
    std::vector<double> cur(n);
    if (c.empty()) {
      for (std::size_t i = 0; i < n; ++i) cur[i] = residence.continuous_at(h * static_cast<double>(i));
    } else {
      for (std::size_t i = 0; i < n; ++i) cur[i] = i < c.size() ? c[i] : c.back();
    }
    const blockage::detail::FixedKernelConvolver conv(dk, n);
    bool converged = false;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      const std::vector<double> p = conv.apply(cur);
      change = 0.0;
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        // sum_{j<i} C_{i-j} dK_j and sum_{j<i} C_{i-1-j} dK_j
        const double s1 = p[i] - (i < ns ? cur[0] * dk[i] : 0.0);
        const double s2 = i > 0 ? p[i - 1] : 0.0;
        next[i] = g[i] + 0.5 * (s1 + s2);
        change = std::max(change, std::abs(next[i] - cur[i]));
      }
      cur.swap(next);
      ++iterations;
      if (change < opt.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "busy-period iteration did not converge: " << opt.max_iterations << " iterations, last sup-norm change "
          << change << " (lambda=" << rate << ", E[T]=" << mean_t << ")";
      throw NumericalFailure(msg.str());
    }
    c = std::move(cur);
    if (1.0 - (c.back() + atom_total) < opt.tail) break;
    n = 2 * n - 1;
  }

  // enforce a proper CDF: monotone continuous part, the untabulated tail
  // (below opt.tail) folded into the last node
  for (std::size_t i = 1; i < c.size(); ++i) c[i] = std::max(c[i], c[i - 1]);
  c.back() = 1.0 - atom_total;
  for (auto& v : c) v = std::clamp(v, 0.0, 1.0 - atom_total);
  std::vector<double> grid(c.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = h * static_cast<double>(i);
  return {DistributionTable::from_continuous(std::move(grid), c, std::move(atoms)), iterations, change};
}

inline DistributionTable blocked_cdf(const DistributionTable& residence, double rate, const BusyPeriodOptions& opt = {}) {
  return solve_blocked(residence, rate, opt).table;
}

/// F_{t_eta}(t) = int_0^t (1 - F_eta) / E[eta], normalised by the numeric
/// integral so the table ends at exactly one.
inline DistributionTable residual_blocked_cdf(const DistributionTable& blocked) {
  std::vector<double> cum = blocked.cumulative_survival();
  const double total = cum.back();
  if (!(total > 0.0)) throw DomainError("blocked-interval law has zero mean");
  for (auto& v : cum) v /= total;
  cum.back() = 1.0;
  return DistributionTable(blocked.grid(), std::move(cum));
}

struct DensityTable {
  std::vector<double> x;
  std::vector<double> value;
};

/// Renewal density f(x) = lambda F_T(x) exp(-lambda int_0^x (1 - F_T)).
inline double renewal_density_at(double rate, const DistributionTable& residence, double x) {
  if (x <= 0.0) return 0.0;
  return rate * residence(x) * std::exp(-rate * residence.survival_integral(x));
}

inline DensityTable renewal_density(double rate, const DistributionTable& residence, double horizon,
                                    std::size_t points = 1000) {
  DensityTable out;
  out.x = DistributionTable::uniform_grid(horizon, points);
  out.value.reserve(points);
  for (double x : out.x) out.value.push_back(renewal_density_at(rate, residence, x));
  return out;
}

struct RenewalModel {
  double rate = 0.0;                  // lambda
  DistributionTable residence;        // F_T
  double mean_residence = 0.0;        // E[T]
  DistributionTable blocked;          // F_eta (point mass at 0 when never blocked)
  double mean_blocked = 0.0;          // E[eta], closed form
  double mean_blocked_numeric = 0.0;  // mean of the tabulated F_eta
  double mean_nonblocked = 0.0;       // E[omega]; infinite when never blocked
  double cycle_mean = 0.0;            // E[xi]
  double frac_los = 1.0;
  double frac_nlos = 0.0;
  DistributionTable residual_blocked;
  double step = 0.0;                  // shared grid step
  std::size_t iterations = 0;
  bool never_blocked = false;         // lambda = 0
};

inline RenewalModel build_model(double rate, const DistributionTable& residence, const BusyPeriodOptions& opt = {}) {
  if (!(rate >= 0.0)) throw DomainError("lambda must be non-negative");
  RenewalModel model;
  model.rate = rate;
  model.residence = residence;
  model.mean_residence = mean_of(residence);
  model.step = residence.support_max() / static_cast<double>(opt.intervals_per_support);
  if (rate == 0.0) {
    model.never_blocked = true;
    model.blocked = DistributionTable::point_mass(0.0);
    model.residual_blocked = model.blocked;
    model.mean_nonblocked = std::numeric_limits<double>::infinity();
    model.cycle_mean = std::numeric_limits<double>::infinity();
    return model;
  }
  auto sol = solve_blocked(residence, rate, opt);
  model.blocked = std::move(sol.table);
  model.iterations = sol.iterations;
  model.mean_blocked = mean_blocked(rate, model.mean_residence);
  model.mean_blocked_numeric = mean_of(model.blocked);
  model.mean_nonblocked = 1.0 / rate;
  model.cycle_mean = renewal_cycle_mean(rate, model.mean_residence);
  const auto f = time_fractions(model.mean_nonblocked, model.mean_blocked);
  model.frac_los = f.los;
  model.frac_nlos = f.nlos;
  model.residual_blocked = residual_blocked_cdf(model.blocked);
  return model;
}

inline RenewalModel build_model(const ScenarioConfig& cfg, const BusyPeriodOptions& opt = {},
                                std::size_t residence_points = residence::kDefaultPoints) {
  cfg.validate();
  const auto zone = geometry::build_zone(cfg.link);
  const auto distance = residence::distance_cdf(cfg, zone, residence_points);
  return build_model(residence::entry_intensity(cfg, zone), residence::residence_time_cdf(distance, cfg.speed), opt);
}

}  // namespace blockage::renewal
