#pragma once

// One-dimensional distributions tabulated on a grid, with explicit atoms.
//
// A table stores the full right-continuous CDF F(x) at every grid node and a
// list of point masses. Between nodes the absolutely continuous part
// F_c = F - (atoms <= x) is interpolated linearly, so a table is exact for
// piecewise-linear CDFs with jumps anywhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "blockage/errors.hpp"

namespace blockage {

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

class DistributionTable {
 public:
  DistributionTable() = default;

  /// `cdf` holds F at each grid node, atoms included.
  DistributionTable(std::vector<double> grid, std::vector<double> cdf, std::vector<Atom> atoms = {})
      : grid_(std::move(grid)), cdf_(std::move(cdf)), atoms_(std::move(atoms)) {
    if (grid_.size() < 2 || grid_.size() != cdf_.size()) {
      throw DomainError("distribution table needs >= 2 nodes and one cdf value per node");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    continuous_.resize(grid_.size());
    std::size_t k = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      while (k < atoms_.size() && atoms_[k].location <= grid_[i] + node_tolerance(grid_[i])) {
        acc += atoms_[k++].mass;
      }
      continuous_[i] = cdf_[i] - acc;
    }
    uniform_ = check_uniform();
  }

  /// Builds a table from the continuous part at the nodes plus atoms.
  static DistributionTable from_continuous(std::vector<double> grid, const std::vector<double>& continuous,
                                           std::vector<Atom> atoms = {}) {
    std::vector<double> cdf(continuous);
    std::vector<Atom> sorted = atoms;
    std::sort(sorted.begin(), sorted.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::size_t k = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size() && i < cdf.size(); ++i) {
      while (k < sorted.size() && sorted[k].location <= grid[i] + node_tolerance(grid[i])) {
        acc += sorted[k++].mass;
      }
      cdf[i] += acc;
    }
    return DistributionTable(std::move(grid), std::move(cdf), std::move(atoms));
  }

  static DistributionTable point_mass(double location) {
    if (!(location >= 0.0)) throw DomainError("point mass location must be >= 0");
    const double top = location > 0.0 ? location : 1.0;
    return DistributionTable({0.0, top}, {location > 0.0 ? 0.0 : 1.0, 1.0}, {{location, 1.0}});
  }

  /// Uniform grid 0, h, ..., (n-1)h with the last node pinned to `top` exactly.
  static std::vector<double> uniform_grid(double top, std::size_t n) {
    if (n < 2 || !(top > 0.0)) throw DomainError("uniform grid needs n >= 2 and top > 0");
    std::vector<double> g(n);
    const double h = top / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = h * static_cast<double>(i);
    g.back() = top;
    return g;
  }

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& cdf() const noexcept { return cdf_; }
  const std::vector<double>& continuous() const noexcept { return continuous_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double support_max() const { return grid_.back(); }
  bool is_uniform() const noexcept { return uniform_; }
  double step() const { return grid_[1] - grid_[0]; }

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.mass;
    return s;
  }

  /// F(x), right-continuous.
  double operator()(double x) const { return continuous_at(x) + atoms_upto(x, true); }

  /// F(x-).
  double left_limit(double x) const { return continuous_at(x) + atoms_upto(x, false); }

  double continuous_at(double x) const {
    if (x < grid_.front()) return 0.0;
    if (x >= grid_.back()) return continuous_.back();
    const std::size_t i = segment(x);
    const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return continuous_[i] + t * (continuous_[i + 1] - continuous_[i]);
  }

  /// Integral of the survival function 1 - F over [0, x].
  double survival_integral(double x) const {
    if (x <= 0.0) return 0.0;
    double cont = 0.0;  // integral of F_c over [0, x]
    if (x > grid_.front()) {
      const double upto = std::min(x, grid_.back());
      const std::size_t last = upto >= grid_.back() ? grid_.size() - 1 : segment(upto);
      for (std::size_t i = 0; i < last; ++i) {
        cont += 0.5 * (continuous_[i] + continuous_[i + 1]) * (grid_[i + 1] - grid_[i]);
      }
      if (upto < grid_.back()) {
        const double v = continuous_at(upto);
        cont += 0.5 * (continuous_[last] + v) * (upto - grid_[last]);
      }
      if (x > grid_.back()) cont += continuous_.back() * (x - grid_.back());
    }
    double jumps = 0.0;
    for (const auto& a : atoms_) {
      if (a.location <= x) jumps += a.mass * (x - a.location);
    }
    return x - cont - jumps;
  }

  /// survival_integral evaluated at every node, in one pass.
  std::vector<double> cumulative_survival() const {
    std::vector<double> out(grid_.size());
    double cont = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (i > 0) cont += 0.5 * (continuous_[i - 1] + continuous_[i]) * (grid_[i] - grid_[i - 1]);
      const double x = grid_[i];
      double jumps = 0.0;
      for (const auto& a : atoms_) {
        if (a.location <= x) jumps += a.mass * (x - a.location);
      }
      out[i] = x - cont - jumps;
    }
    return out;
  }

  /// Smallest x with F(x) >= u, by bisection on [0, support_max].
  double quantile(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= cdf_.back()) return grid_.back();
    double lo = 0.0, hi = grid_.back();
    for (int it = 0; it < 100 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((*this)(mid) >= u) hi = mid; else lo = mid;
    }
    return hi;
  }

  /// Throws DomainError when a table invariant is broken.
  void validate(double tol = 1e-9) const {
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      if (!(grid_[i] > grid_[i - 1])) throw DomainError("grid not strictly increasing");
      if (cdf_[i] < cdf_[i - 1] - tol) throw DomainError("cdf decreasing at node " + std::to_string(i));
      if (continuous_[i] < continuous_[i - 1] - tol) {
        throw DomainError("continuous part decreasing at node " + std::to_string(i));
      }
    }
    if (grid_.front() < 0.0) throw DomainError("negative abscissa");
    if (cdf_.front() < -tol) throw DomainError("cdf[0] < 0");
    if (std::abs(cdf_.back() - 1.0) > tol) {
      std::ostringstream os;
      os << std::setprecision(12) << "cdf does not reach 1 (last value " << cdf_.back() << ")";
      throw DomainError(os.str());
    }
    double total = 0.0;
    for (const auto& a : atoms_) {
      if (!(a.mass > 0.0) || a.mass > 1.0 + tol) throw DomainError("atom mass outside (0,1]");
      if (a.location < grid_.front() - node_tolerance(a.location) ||
          a.location > grid_.back() + node_tolerance(a.location)) {
        throw DomainError("atom outside the grid");
      }
      total += a.mass;
    }
    if (total > 1.0 + tol) throw DomainError("atom masses sum above 1");
  }

  static double node_tolerance(double x) { return 1e-9 * (std::abs(x) + 1e-12); }

 private:
  double atoms_upto(double x, bool inclusive) const {
    double s = 0.0;
    for (const auto& a : atoms_) {
      const bool in = inclusive ? a.location <= x + node_tolerance(x) : a.location < x - node_tolerance(x);
      if (!in) break;
      s += a.mass;
    }
    return s;
  }

  std::size_t segment(double x) const {
    if (uniform_) {
      const double h = grid_[1] - grid_[0];
      auto i = static_cast<std::size_t>((x - grid_.front()) / h);
      i = std::min(i, grid_.size() - 2);
      while (i > 0 && grid_[i] > x) --i;
      while (i + 2 < grid_.size() && grid_[i + 1] <= x) ++i;
      return i;
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const auto idx = static_cast<std::size_t>(std::distance(grid_.begin(), it));
    return std::min(idx == 0 ? 0 : idx - 1, grid_.size() - 2);
  }

  bool check_uniform() const {
    const double h = grid_[1] - grid_[0];
    if (!(h > 0.0)) return false;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      if (std::abs((grid_[i] - grid_[i - 1]) - h) > 1e-6 * h) return false;
    }
    return true;
  }

  std::vector<double> grid_;
  std::vector<double> cdf_;
  std::vector<double> continuous_;
  std::vector<Atom> atoms_;
  bool uniform_ = false;
};

/// E[X] as the integral of the survival function, atoms included.
inline double mean_of(const DistributionTable& table) { return table.survival_integral(table.support_max()); }

/// Distribution of X / divisor: abscissae and atom locations divided, masses kept.
inline DistributionTable scale_abscissa(const DistributionTable& table, double divisor) {
  if (!(divisor > 0.0)) throw DomainError("scale divisor must be positive");
  std::vector<double> grid(table.grid());
  for (auto& x : grid) x /= divisor;
  std::vector<Atom> atoms(table.atoms());
  for (auto& a : atoms) a.location /= divisor;
  return DistributionTable(std::move(grid), table.cdf(), std::move(atoms));
}

/// Re-tabulates on the uniform grid 0, h, ..., (n-1)h. Atoms are carried over
/// unchanged; beyond the source support the CDF is held at its last value.
inline DistributionTable resample_uniform(const DistributionTable& table, double step, std::size_t n) {
  if (!(step > 0.0) || n < 2) throw DomainError("resample needs step > 0 and n >= 2");
  std::vector<double> grid(n), cont(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = step * static_cast<double>(i);
    cont[i] = table.continuous_at(grid[i]);
  }
  return DistributionTable::from_continuous(std::move(grid), cont, table.atoms());
}

/// Piecewise-linear table of the empirical CDF of `samples` on `points` nodes.
inline DistributionTable empirical_table(std::vector<double> samples, std::size_t points = 1000) {
  if (samples.empty()) return DistributionTable::point_mass(0.0);
  std::sort(samples.begin(), samples.end());
  const double top = samples.back() > 0.0 ? samples.back() : 1.0;
  std::vector<double> grid = DistributionTable::uniform_grid(top, points);
  std::vector<double> cdf(points);
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < points; ++i) {
    const auto it = std::upper_bound(samples.begin(), samples.end(), grid[i]);
    cdf[i] = static_cast<double>(std::distance(samples.begin(), it)) / n;
  }
  cdf.back() = 1.0;
  return DistributionTable(std::move(grid), std::move(cdf));
}

/// One-sample Kolmogorov-Smirnov statistic of sorted samples against a table,
/// using F(x-) so that atoms are handled exactly. Samples closer than the
/// node tolerance count as ties, which absorbs round-off in simulated
/// lengths that sit on an atom.
inline double ks_statistic(std::span<const double> sorted, const DistributionTable& model) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    const double tie = sorted[i] + 2.0 * DistributionTable::node_tolerance(sorted[i]);
    while (j < sorted.size() && sorted[j] <= tie) ++j;
    const double below = static_cast<double>(i) / n;
    const double upto = static_cast<double>(j) / n;
    d = std::max({d, std::abs(model(sorted[i]) - upto), std::abs(model.left_limit(sorted[i]) - below)});
    i = j;
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic; both inputs must be sorted.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// CSV with columns x,cdf. Atoms go in a leading comment line.
/// `stride` > 1 keeps every stride-th row (the last row is always kept).
inline void write_csv(std::ostream& os, const DistributionTable& table, std::size_t stride = 1) {
  os << std::setprecision(10);
  os << "# atoms:";
  for (const auto& a : table.atoms()) os << ' ' << a.location << ':' << a.mass;
  os << '\n' << "x,cdf\n";
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i % stride == 0 || i + 1 == table.size()) os << table.grid()[i] << ',' << table.cdf()[i] << '\n';
  }
}

}  // namespace blockage
