#pragma once

// Distance L walked by one blocker inside the blockage zone, residence time
// T = L / V and the rate at which blockers enter the zone, for the two
// sidewalk scenarios and the park/square scenario.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "blockage/distribution.hpp"
#include "blockage/errors.hpp"
#include "blockage/geometry.hpp"

namespace blockage {

enum class Scenario { s1, s2, s3 };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::s1: return "S1";
    case Scenario::s2: return "S2";
    case Scenario::s3: return "S3";
  }
  return "?";
}

struct ScenarioConfig {
  Scenario kind = Scenario::s1;
  geometry::LinkGeometry link;
  double speed = 1.0;         // V, m/s
  double initial_rate = 1.0;  // lambda_I, blockers/s
  std::optional<double> mode; // c, triangular mode (S2); defaults to w_S / 2

  double triangular_mode() const { return mode.value_or(0.5 * link.sidewalk_width); }

  void validate() const {
    link.validate(kind != Scenario::s3);
    if (!(speed > 0.0)) throw DomainError("V must be positive");
    if (!(initial_rate >= 0.0)) throw DomainError("lambda_I must be non-negative");
    if (kind == Scenario::s2) {
      const double c = triangular_mode();
      if (!(c > 0.0 && c < link.sidewalk_width)) throw DomainError("triangular mode c must lie in (0, w_S)");
    }
  }
};

namespace residence {

/// Default number of nodes over the support of a distance/time table.
inline constexpr std::size_t kDefaultPoints = 4000;

/// Chord length of a line crossing both long sides (d_m / cos a) or both
/// short sides (r / sin a), whichever is shorter.
inline double full_crossing_length(const geometry::BlockageZone& zone) {
  const double c = std::cos(zone.alpha), s = std::sin(zone.alpha);
  const double across = c > 0.0 ? zone.width / c : std::numeric_limits<double>::infinity();
  const double along = s > 0.0 ? zone.length / s : std::numeric_limits<double>::infinity();
  return std::min(across, along);
}

inline void require_inside_sidewalk(const geometry::BlockageZone& zone, double sidewalk_width) {
  const double tol = 1e-12 * (1.0 + sidewalk_width);
  if (zone.y_low() < -tol || zone.y_high() > sidewalk_width + tol) {
    throw DomainError("blockage zone extends outside the sidewalk [0, w_S]");
  }
}

/// Shared shape of the sidewalk tables: continuous part given by `cont` on
/// (0, x_min), remaining mass as an atom at x_min.
template <class ContinuousCdf>
DistributionTable sidewalk_table(double x_min, std::size_t points, ContinuousCdf&& cont) {
  std::vector<double> grid = DistributionTable::uniform_grid(x_min, points);
  std::vector<double> values(points);
  for (std::size_t i = 0; i < points; ++i) values[i] = std::clamp(cont(grid[i]), 0.0, 1.0);
  const double atom = 1.0 - values.back();
  std::vector<Atom> atoms;
  if (atom > 1e-15) atoms.push_back({x_min, atom});
  else values.back() = 1.0;
  return DistributionTable::from_continuous(std::move(grid), values, std::move(atoms));
}

/// Sidewalk 1: uniform crossing ordinate. F_L(x) = x sin(2a) / (y_C - y_A)
/// below x_min, atom at x_min. At a = 0 every blocker crosses the full width.
inline DistributionTable distance_cdf_s1(const geometry::BlockageZone& zone,
                                         std::size_t points = kDefaultPoints) {
  if (!(zone.alpha >= 0.0 && zone.alpha < std::numbers::pi / 2.0)) throw DomainError("alpha outside [0, pi/2)");
  const double x_min = full_crossing_length(zone);
  const double slope = std::sin(2.0 * zone.alpha) / zone.effective_width;
  return sidewalk_table(x_min, points, [&](double x) { return slope * x; });
}

/// CDF of the symmetric-or-skewed triangular law on (0, w) with mode c.
inline double triangular_cdf(double y, double w, double c) {
  if (y <= 0.0) return 0.0;
  if (y <= c) return y * y / (w * c);
  if (y <= w) return 1.0 - (w - y) * (w - y) / (w * (w - c));
  return 1.0;
}

/// Position of the triangular mode relative to the zone, one case per
/// closed form of the S2 distance CDF.
enum class S2Case {
  zone_below_mode = 1,  // y_C <= c
  mode_near_top = 2,    // y_C - y_min <= c < y_C
  mode_inside = 3,      // y_A + y_min <= c < y_C - y_min
  mode_near_bottom = 4, // y_A <= c < y_A + y_min
  zone_above_mode = 5,  // c < y_A
};

inline S2Case s2_case(const geometry::BlockageZone& zone, double mode) {
  const double y_a = zone.y_low(), y_c = zone.y_high();
  const double y_min = full_crossing_length(zone) * std::cos(zone.alpha) * std::sin(zone.alpha);
  if (y_c <= mode) return S2Case::zone_below_mode;
  if (y_c - y_min <= mode) return S2Case::mode_near_top;
  if (y_a + y_min <= mode) return S2Case::mode_inside;
  if (y_a <= mode) return S2Case::mode_near_bottom;
  return S2Case::zone_above_mode;
}

/// Sidewalk 2: triangular crossing ordinate with mode c, truncated to the
/// zone's Y extent [y_A, y_C]. Below x_min,
///   F_L(x) = [F_Y(y_A + u) - F_Y(y_A) + F_Y(y_C) - F_Y(y_C - u)] / Z,
/// u = x sin(a) cos(a), Z = F_Y(y_C) - F_Y(y_A); the branch of F_Y hit by
/// y_A + u and y_C - u is what distinguishes the five cases.
inline DistributionTable distance_cdf_s2(const geometry::BlockageZone& zone, double sidewalk_width, double mode,
                                         std::size_t points = kDefaultPoints) {
  if (!(mode > 0.0 && mode < sidewalk_width)) throw DomainError("triangular mode c must lie in (0, w_S)");
  require_inside_sidewalk(zone, sidewalk_width);
  const double x_min = full_crossing_length(zone);
  const double y_a = zone.y_low(), y_c = zone.y_high();
  const double mass = triangular_cdf(y_c, sidewalk_width, mode) - triangular_cdf(y_a, sidewalk_width, mode);
  if (!(mass > 0.0)) throw DomainError("zone receives no blockers under the triangular law");
  const double k = std::sin(zone.alpha) * std::cos(zone.alpha);
  return sidewalk_table(x_min, points, [&](double x) {
    const double u = x * k;
    const double low = triangular_cdf(y_a + u, sidewalk_width, mode) - triangular_cdf(y_a, sidewalk_width, mode);
    const double high = triangular_cdf(y_c, sidewalk_width, mode) - triangular_cdf(y_c - u, sidewalk_width, mode);
    return (low + high) / mass;
  });
}

struct S3Weights {
  double adjacent = 0.0;  // one short side involved: corner chords
  double opposite = 0.0;  // entry and exit on the two long sides
};

/// Entry side chosen proportionally to length among the two long sides and
/// the far short side, exit side proportionally to length among the other two.
inline S3Weights s3_weights(double width, double length) {
  const double den = width * width + 3.0 * width * length + 2.0 * length * length;
  return {(width * width + 3.0 * width * length) / den, 2.0 * length * length / den};
}

/// Chord between two perpendicular sides meeting at a corner (sides d_m, r).
inline double s3_adjacent_cdf(double x, double width, double length) {
  const double r = length, d = width;
  const double lo = std::min(r, d), hi = std::max(r, d);
  const double diag = std::hypot(r, d);
  if (x <= 0.0) return 0.0;
  if (x >= diag) return 1.0;
  const double norm = 2.0 * r * d;
  if (x <= lo) return std::numbers::pi * x * x / (4.0 * r * d);
  if (x <= hi) return (lo * std::sqrt(x * x - lo * lo) + x * x * std::asin(lo / x)) / norm;
  const double v = lo * std::sqrt(hi * hi - lo * lo) +
                   d * (std::sqrt(x * x - d * d) - std::sqrt(hi * hi - d * d)) +
                   r * (std::sqrt(x * x - r * r) - std::sqrt(hi * hi - r * r)) +
                   hi * hi * (std::acos(r / hi) + std::asin(lo / hi) - std::asin(d / hi)) +
                   x * x * (std::asin(d / x) - std::acos(r / x));
  return std::clamp(v / norm, 0.0, 1.0);
}

/// Chord between the two long sides, distance d_m apart.
inline double s3_opposite_cdf(double x, double width, double length) {
  const double r = length, d = width;
  if (x <= d) return 0.0;
  if (x >= std::hypot(r, d)) return 1.0;
  return std::clamp((d * d - x * x + 2.0 * r * std::sqrt(x * x - d * d)) / (r * r), 0.0, 1.0);
}

/// Park/square: mixture of corner chords and long-side-to-long-side chords,
/// supported on [0, sqrt(d_m^2 + r^2)], no atom.
inline DistributionTable distance_cdf_s3(double width, double length, std::size_t points = kDefaultPoints) {
  if (!(width > 0.0 && length > 0.0)) throw DomainError("zone sides must be positive");
  const S3Weights w = s3_weights(width, length);
  std::vector<double> grid = DistributionTable::uniform_grid(std::hypot(width, length), points);
  std::vector<double> cdf(points);
  for (std::size_t i = 0; i < points; ++i) {
    cdf[i] = w.adjacent * s3_adjacent_cdf(grid[i], width, length) + w.opposite * s3_opposite_cdf(grid[i], width, length);
  }
  cdf.back() = 1.0;
  return DistributionTable(std::move(grid), std::move(cdf));
}

/// Scenario dispatch for the distance table.
inline DistributionTable distance_cdf(const ScenarioConfig& cfg, const geometry::BlockageZone& zone,
                                      std::size_t points = kDefaultPoints) {
  switch (cfg.kind) {
    case Scenario::s1:
      require_inside_sidewalk(zone, cfg.link.sidewalk_width);
      return distance_cdf_s1(zone, points);
    case Scenario::s2: return distance_cdf_s2(zone, cfg.link.sidewalk_width, cfg.triangular_mode(), points);
    case Scenario::s3: return distance_cdf_s3(zone.width, zone.length, points);
  }
  throw DomainError("unknown scenario");
}

/// F_T(x) = F_L(x V).
inline DistributionTable residence_time_cdf(const DistributionTable& distance, double speed) {
  return scale_abscissa(distance, speed);
}

/// Rate of blockers entering the zone.
inline double entry_intensity(const ScenarioConfig& cfg, const geometry::BlockageZone& zone) {
  if (!(cfg.initial_rate >= 0.0)) throw DomainError("lambda_I must be non-negative");
  const double w = cfg.link.sidewalk_width;
  switch (cfg.kind) {
    case Scenario::s1:
      require_inside_sidewalk(zone, w);
      return cfg.initial_rate * zone.effective_width / w;
    case Scenario::s2: {
      require_inside_sidewalk(zone, w);
      const double c = cfg.triangular_mode();
      return cfg.initial_rate * (triangular_cdf(zone.y_high(), w, c) - triangular_cdf(zone.y_low(), w, c));
    }
    case Scenario::s3: return cfg.initial_rate;
  }
  throw DomainError("unknown scenario");
}

}  // namespace residence
}  // namespace blockage
