#pragma once

// Dimensioning with the blockage model: average path loss, AP height,
// cell-edge and cell-average rates, maximum cell radius. All of it uses the
// park/square scenario with zone-entry rate lambda = lambda_S r d_m.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "blockage/errors.hpp"
#include "blockage/geometry.hpp"
#include "blockage/residence.hpp"

namespace blockage::apps {

struct RadioConfig {
  double carrier_ghz = 28.0;
  double bandwidth = 1e9;    // B, Hz
  double tx_power = 30.0;    // dBm
  double noise = -84.0;      // dBm
  double mcs_constant = 1.0; // c
  bool log2_rate = true;     // rate in bits/s; natural log otherwise

  void validate() const {
    if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
    if (!(mcs_constant > 0.0)) throw DomainError("MCS constant must be positive");
  }
};

struct CellConfig {
  double lambda_S = 0.1;   // blockers crossing a unit area per second
  double lambda_N = 0.01;  // users per m^2
  double x_c = 30.0;       // cell radius, m
  double h_min = 2.0;      // AP height search range, m
  double h_max = 50.0;
  double speed = 1.0;      // blocker speed V, m/s

  void validate() const {
    if (!(lambda_S >= 0.0)) throw DomainError("lambda_S must be non-negative");
    if (!(lambda_N >= 0.0)) throw DomainError("lambda_N must be non-negative");
    if (!(x_c > 0.0)) throw DomainError("x_c must be positive");
    if (!(h_max > h_min)) throw DomainError("height search range is empty");
    if (!(speed > 0.0)) throw DomainError("V must be positive");
  }
};

struct PathLoss {
  double los = 0.0;   // dB
  double nlos = 0.0;  // dB
};

inline PathLoss path_loss_states(double d3) {
  if (!(d3 > 0.0)) throw DomainError("3-D distance must be positive");
  const double l = std::log10(d3);
  return {61.4 + 20.0 * l, 72.0 + 29.2 * l};
}

inline double distance_3d(const geometry::LinkGeometry& link) {
  return std::hypot(link.tx_height - link.rx_height, link.distance);
}

/// Mean chord length of the park/square zone, from a 2000-node table.
inline double mean_s3_chord(double width, double length) {
  return mean_of(residence::distance_cdf_s3(width, length, 2000));
}

/// Zone-entry rate lambda_S r d_m.
inline double entry_rate_from_area(const geometry::LinkGeometry& link, double lambda_S) {
  return lambda_S * geometry::zone_length(link) * link.blocker_diameter;
}

/// Fraction of time in LoS, exp(-lambda E[T]).
inline double los_fraction(const geometry::LinkGeometry& link, double rate, double speed = 1.0) {
  if (rate <= 0.0) return 1.0;
  const double mean_t = mean_s3_chord(link.blocker_diameter, geometry::zone_length(link)) / speed;
  return std::exp(-rate * mean_t);
}

inline double los_fraction_area(const geometry::LinkGeometry& link, double lambda_S, double speed = 1.0) {
  return los_fraction(link, entry_rate_from_area(link, lambda_S), speed);
}

/// L_e = p L_LoS + (1 - p) L_nLoS with p the LoS time fraction.
inline double average_path_loss(const geometry::LinkGeometry& link, double rate, double speed = 1.0) {
  const auto pl = path_loss_states(distance_3d(link));
  const double p = los_fraction(link, rate, speed);
  return p * pl.los + (1.0 - p) * pl.nlos;
}

inline double average_path_loss_area(const geometry::LinkGeometry& link, double lambda_S, double speed = 1.0) {
  return average_path_loss(link, entry_rate_from_area(link, lambda_S), speed);
}

struct HeightResult {
  double height = 0.0;
  double loss = 0.0;     // dB at the optimum
  bool boundary = false; // minimiser at an end of the search range
};

/// AP height minimising the average path loss at the cell edge: grid scan
/// with step `scan_step`, lowest height wins ties, then Brent refinement
/// inside the neighbouring cells.
inline HeightResult optimal_ap_height(const CellConfig& cell, geometry::LinkGeometry link, double scan_step = 0.05) {
  cell.validate();
  if (!(cell.h_min > link.blocker_height)) throw DomainError("height range must lie above h_B");
  link.distance = cell.x_c;
  auto loss = [&](double h) {
    geometry::LinkGeometry l = link;
    l.tx_height = h;
    return average_path_loss_area(l, cell.lambda_S, cell.speed);
  };
  const auto steps = static_cast<std::size_t>(std::floor((cell.h_max - cell.h_min) / scan_step + 1e-9));
  double best_h = cell.h_min, best = loss(cell.h_min);
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= steps + 1; ++i) {
    const double h = std::min(cell.h_min + scan_step * static_cast<double>(i), cell.h_max);
    const double v = loss(h);
    if (v < best) {
      best = v;
      best_h = h;
      best_i = i;
    }
    if (h >= cell.h_max) break;
  }
  const double lo = std::max(cell.h_min, best_h - scan_step);
  const double hi = std::min(cell.h_max, best_h + scan_step);
  HeightResult res{best_h, best, false};
  if (hi > lo) {
    std::uintmax_t iters = 100;
    const auto [h, v] = boost::math::tools::brent_find_minima(loss, lo, hi, 40, iters);
    if (v < best) res = {h, v, false};
  }
  const double edge_tol = 0.5 * scan_step;
  res.boundary = best_i == 0 || res.height <= cell.h_min + edge_tol || res.height >= cell.h_max - edge_tol;
  return res;
}

enum class LinkState { los, nlos };

inline double snr_db(double d3, const RadioConfig& radio, LinkState state) {
  const auto pl = path_loss_states(d3);
  return radio.tx_power - (state == LinkState::los ? pl.los : pl.nlos) - radio.noise;
}

inline double spectral_log(double snr_linear, const RadioConfig& radio) {
  return radio.log2_rate ? std::log2(1.0 + snr_linear) : std::log1p(snr_linear);
}

/// Rate of a single user at 2-D distance x from the AP with the whole band.
inline double single_user_rate(const geometry::LinkGeometry& link, double lambda_S, double speed,
                               const RadioConfig& radio) {
  const double d3 = distance_3d(link);
  const double p = los_fraction_area(link, lambda_S, speed);
  const double s0 = std::pow(10.0, snr_db(d3, radio, LinkState::los) / 10.0);
  const double s1 = std::pow(10.0, snr_db(d3, radio, LinkState::nlos) / 10.0);
  return radio.mcs_constant * radio.bandwidth * (p * spectral_log(s0, radio) + (1.0 - p) * spectral_log(s1, radio));
}

/// E[1/N | N >= 1] for N ~ Poisson(mean): the tagged user shares the band
/// with the others. Truncated once the upper tail is below `tail`; a zero
/// mean is the single-user case, which the conditioning reaches continuously.
inline double poisson_share(double mean, double tail = 1e-9) {
  if (mean < 0.0) throw DomainError("Poisson mean must be non-negative");
  if (mean == 0.0) return 1.0;
  const boost::math::poisson_distribution<double> dist(mean);
  double sum = 0.0;
  for (std::size_t n = 1;; ++n) {
    const double k = static_cast<double>(n);
    sum += std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0)) / k;
    if (k > mean && boost::math::cdf(boost::math::complement(dist, k)) < tail) break;
  }
  return sum / -std::expm1(-mean);
}

/// Mean rate of a user at the cell edge under equal band sharing.
inline double cell_edge_mean_rate(const CellConfig& cell, const RadioConfig& radio, geometry::LinkGeometry link,
                                  double tail = 1e-9) {
  cell.validate();
  radio.validate();
  link.distance = cell.x_c;
  const double users = cell.lambda_N * std::numbers::pi * cell.x_c * cell.x_c;
  return poisson_share(users, tail) * single_user_rate(link, cell.lambda_S, cell.speed, radio);
}

/// Mean rate of a user placed uniformly in the disc of radius x_c.
inline double cell_average_rate(const CellConfig& cell, const RadioConfig& radio, geometry::LinkGeometry link,
                                double tail = 1e-9, double rel_tol = 1e-4) {
  cell.validate();
  radio.validate();
  auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    geometry::LinkGeometry l = link;
    l.distance = x;
    return single_user_rate(l, cell.lambda_S, cell.speed, radio) * 2.0 * x / (cell.x_c * cell.x_c);
  };
  const double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, cell.x_c, 15, rel_tol);
  const double users = cell.lambda_N * std::numbers::pi * cell.x_c * cell.x_c;
  return poisson_share(users, tail) * inner;
}

struct RadiusResult {
  double radius = 0.0;
  double rate = 0.0;          // cell-edge mean rate at `radius`
  bool range_limited = false; // target met over the whole range
};

/// Largest cell radius whose edge rate still meets `target`, by bisection.
inline RadiusResult max_cell_radius(double target, CellConfig cell, const RadioConfig& radio,
                                    const geometry::LinkGeometry& link, double x_min = 1.0, double x_max = 500.0,
                                    double tol = 0.1) {
  if (!(x_max > x_min && x_min > 0.0)) throw DomainError("radius range is empty");
  auto rate = [&](double x) {
    cell.x_c = x;
    return cell_edge_mean_rate(cell, radio, link);
  };
  const double r_hi = rate(x_max);
  if (r_hi >= target) return {x_max, r_hi, true};
  const double r_lo = rate(x_min);
  if (r_lo < target) throw Infeasible("target rate not reachable even at the minimum radius");
  double lo = x_min, hi = x_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) >= target ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return {x, rate(x), false};
}

}  // namespace blockage::apps
