#pragma once

// LoS blockage zone of a Tx-Rx link.
//
// Coordinates: Tx at P = (0, w_S) on the building wall, Rx at
// O = (r_0 sin a, w_S - r_0 cos a); blockers walk parallel to the X axis.
// The zone ABCD is a d_m x r rectangle whose short side AB is centred on the
// Rx and whose long sides point towards the Tx.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "blockage/errors.hpp"

namespace blockage::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Link and blocker parameters; defaults are the baseline deployment.
struct LinkGeometry {
  double tx_height = 3.0;         // h_T, m
  double rx_height = 1.3;         // h_R, m
  double blocker_height = 1.7;    // h_B, m
  double blocker_diameter = 0.5;  // d_m, m
  double distance = 4.6;          // r_0, 2-D Tx-Rx distance, m
  double sidewalk_width = 5.0;    // w_S, m
  double alpha = std::numbers::pi / 6.0;  // angle between Y axis and Tx-Rx segment, rad

  /// Full invariant check. `with_sidewalk` adds w_S > 0.
  void validate(bool with_sidewalk = true) const {
    if (!(rx_height > 0.0)) throw DomainError("h_R must be positive");
    if (!(tx_height > blocker_height && blocker_height > rx_height)) {
      throw DomainError("heights must satisfy h_T > h_B > h_R > 0");
    }
    if (!(blocker_diameter > 0.0)) throw DomainError("d_m must be positive");
    if (!(distance > 0.0)) throw DomainError("r_0 must be positive");
    if (!(alpha >= 0.0 && alpha < std::numbers::pi / 2.0)) throw DomainError("alpha must lie in [0, pi/2)");
    if (with_sidewalk && !(sidewalk_width > 0.0)) throw DomainError("w_S must be positive");
  }
};

struct BlockageZone {
  double length = 0.0;  // r
  double width = 0.0;   // d_m
  double alpha = 0.0;
  Point2 a, b, c, d;
  Point2 tx, rx;
  double effective_width = 0.0;  // w_E, projection on the Y axis

  std::array<Point2, 4> vertices() const { return {a, b, c, d}; }
  double y_low() const { return std::min({a.y, b.y, c.y, d.y}); }
  double y_high() const { return std::max({a.y, b.y, c.y, d.y}); }

  /// Unit vector along the long sides, from the Rx end towards the Tx.
  Point2 axis() const { return {-std::sin(alpha), std::cos(alpha)}; }
};

/// Zone length r = r_0 (h_B - h_R) / (h_T - h_R) + d_m / 2.
inline double zone_length(const LinkGeometry& link) {
  const double gap = link.tx_height - link.rx_height;
  if (!(gap > 0.0)) throw DegenerateGeometry("h_T must exceed h_R");
  return link.distance * (link.blocker_height - link.rx_height) / gap + 0.5 * link.blocker_diameter;
}

inline BlockageZone build_zone(const LinkGeometry& link) {
  BlockageZone z;
  z.length = zone_length(link);
  z.width = link.blocker_diameter;
  z.alpha = link.alpha;
  const double s = std::sin(link.alpha), c = std::cos(link.alpha);
  const double half = 0.5 * link.blocker_diameter;
  z.tx = {0.0, link.sidewalk_width};
  z.rx = {link.distance * s, link.sidewalk_width - link.distance * c};
  z.a = {z.rx.x - half * c, z.rx.y - half * s};
  z.b = {z.rx.x + half * c, z.rx.y + half * s};
  // cos(pi/2 - a) = sin a, sin(pi/2 - a) = cos a
  z.c = {z.b.x - z.length * s, z.b.y + z.length * c};
  z.d = {z.a.x - z.length * s, z.a.y + z.length * c};
  z.effective_width = z.y_high() - z.y_low();
  return z;
}

/// Length of the part of the 2-D Tx-Rx segment below the blocker top,
/// measured from the Rx: the spine of the exact (capsule-shaped) region.
inline double shadow_length(const LinkGeometry& link) {
  const double gap = link.tx_height - link.rx_height;
  if (!(gap > 0.0)) throw DegenerateGeometry("h_T must exceed h_R");
  return link.distance * (link.blocker_height - link.rx_height) / gap;
}

}  // namespace blockage::geometry
