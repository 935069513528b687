#pragma once

// Conditional state probabilities p00, p01, p10, p11 after a lag dt, by the
// truncated series over alternating interval sums.
//
// From LoS at time 0 the state at dt is LoS iff dt < G_0 or H_i <= dt < G_i
// for some i, where G_0 = t_omega, H_i = G_{i-1} + eta, G_i = H_i + omega.
// The blocked start mirrors this with t_eta and the roles of eta and omega
// swapped. The series stops at the first n with F_{G_n}(dt) < eps, which is
// exactly the probability left unsummed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

#include "blockage/detail/fft_convolution.hpp"
#include "blockage/distribution.hpp"
#include "blockage/errors.hpp"
#include "blockage/renewal.hpp"

namespace blockage {

namespace detail {

/// Continuous part of a table on a uniform grid as cell masses, plus its
/// atoms as fractional cell offsets.
struct CellForm {
  std::vector<double> cells;
  std::vector<std::pair<double, double>> atoms;  // (offset in cells, mass)
};

inline CellForm cell_form(const DistributionTable& t, double step, std::size_t cells) {
  CellForm f;
  f.cells.resize(cells);
  double prev = t.continuous_at(0.0);
  for (std::size_t n = 0; n < cells; ++n) {
    const double next = t.continuous_at(step * static_cast<double>(n + 1));
    f.cells[n] = std::max(0.0, next - prev);
    prev = next;
  }
  // continuous mass at 0 (a table starting above zero) acts as an atom at 0
  const double at_zero = t.continuous_at(0.0);
  if (at_zero > 0.0) f.atoms.emplace_back(0.0, at_zero);
  for (const auto& a : t.atoms()) f.atoms.emplace_back(a.location / step, a.mass);
  return f;
}

/// Kernel acting on piecewise-uniform cell masses: continuous cells split
/// half/half between the two cells their sum can land in, atoms shift.
inline std::vector<double> cell_kernel(const CellForm& f, std::size_t cells) {
  std::vector<double> k(cells, 0.0);
  for (std::size_t n = 0; n < cells && n < f.cells.size(); ++n) {
    k[n] += 0.5 * f.cells[n];
    if (n + 1 < cells) k[n + 1] += 0.5 * f.cells[n];
  }
  for (const auto& [pos, mass] : f.atoms) {
    const double whole = std::floor(pos + 1e-9);
    const double frac = std::max(0.0, pos - whole);
    const auto i = static_cast<std::size_t>(whole);
    if (i < cells) k[i] += mass * (1.0 - frac);
    if (frac > 0.0 && i + 1 < cells) k[i + 1] += mass * frac;
  }
  return k;
}

inline bool same_uniform_grid(const DistributionTable& a, const DistributionTable& b) {
  if (!a.is_uniform() || !b.is_uniform()) return false;
  if (a.grid().front() != 0.0 || b.grid().front() != 0.0) return false;
  return std::abs(a.step() - b.step()) <= 1e-9 * std::max(a.step(), b.step());
}

}  // namespace detail

/// CDF of the independent sum of two tables on a shared uniform grid.
/// Atom pairs give atoms; an atom shifts the other continuous part.
inline DistributionTable convolve(const DistributionTable& a, const DistributionTable& b) {
  if (!detail::same_uniform_grid(a, b)) throw DomainError("convolve needs both tables on one uniform grid from 0");
  const double h = a.step();
  const std::size_t ca = a.size() - 1, cb = b.size() - 1;
  const std::size_t cells = ca + cb;
  const auto fa = detail::cell_form(a, h, ca);
  const auto fb = detail::cell_form(b, h, cb);

  // continuous x continuous through the half-split kernel
  std::vector<double> half(cb + 1, 0.0);
  for (std::size_t n = 0; n < cb; ++n) {
    half[n] += 0.5 * fb.cells[n];
    half[n + 1] += 0.5 * fb.cells[n];
  }
  std::vector<double> out = blockage::detail::convolve_truncated(fa.cells, half, cells);
  auto shift_add = [&](const std::vector<double>& src, double pos, double mass) {
    const double whole = std::floor(pos + 1e-9);
    const double frac = std::max(0.0, pos - whole);
    const auto s = static_cast<std::size_t>(whole);
    for (std::size_t n = 0; n < src.size(); ++n) {
      if (n + s < cells) out[n + s] += mass * (1.0 - frac) * src[n];
      if (frac > 0.0 && n + s + 1 < cells) out[n + s + 1] += mass * frac * src[n];
    }
  };
  for (const auto& [pos, mass] : fb.atoms) shift_add(fa.cells, pos, mass);
  for (const auto& [pos, mass] : fa.atoms) shift_add(fb.cells, pos, mass);

  std::vector<Atom> atoms;
  for (const auto& x : a.atoms()) {
    for (const auto& y : b.atoms()) {
      const double loc = x.location + y.location;
      auto it = std::find_if(atoms.begin(), atoms.end(), [&](const Atom& z) {
        return std::abs(z.location - loc) <= DistributionTable::node_tolerance(loc) + 1e-12;
      });
      if (it != atoms.end()) it->mass += x.mass * y.mass;
      else atoms.push_back({loc, x.mass * y.mass});
    }
  }
  double atom_total = 0.0;
  for (const auto& z : atoms) atom_total += z.mass;

  std::vector<double> grid(cells + 1), cont(cells + 1, 0.0);
  for (std::size_t i = 0; i <= cells; ++i) grid[i] = h * static_cast<double>(i);
  grid.back() = a.support_max() + b.support_max();
  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    acc += out[i];
    cont[i + 1] = std::min(acc, 1.0 - atom_total);
  }
  cont.back() = 1.0 - atom_total;
  return DistributionTable::from_continuous(std::move(grid), cont, std::move(atoms));
}

struct ConditionalOptions {
  double epsilon = 1e-4;
  std::size_t max_terms = 64;
  std::size_t max_cells = std::size_t{1} << 15;  // coarse grid size over the horizon
};

struct TransitionPair {
  double same = 1.0;   // p00 from LoS, p11 from nLoS
  double other = 0.0;  // p01 from LoS, p10 from nLoS
  std::size_t terms = 0;
};

struct ConditionalPoint {
  double delta_t = 0.0;
  double p00 = 1.0, p01 = 0.0, p10 = 0.0, p11 = 1.0;
  std::size_t terms_los = 0, terms_nlos = 0;
  std::size_t terms_used() const { return std::max(terms_los, terms_nlos); }
};

struct ConditionalCurve {
  std::vector<ConditionalPoint> points;
  double epsilon = 1e-4;
};

/// Caches the interval sums G_i, H_i of both series on one coarse grid
/// covering [0, horizon]. Queries are thread-safe; results do not depend on
/// query order because every cached term is a deterministic function of the
/// previous one.
class ConditionalEngine {
 public:
  ConditionalEngine(const renewal::RenewalModel& model, double horizon, ConditionalOptions opt = {})
      : opt_(opt), horizon_(horizon), never_blocked_(model.never_blocked) {
    if (!(opt.epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (never_blocked_) return;
    const double fine = model.blocked.step();
    const auto needed = static_cast<std::size_t>(std::ceil(horizon / fine));
    std::size_t k = std::max<std::size_t>(1, (needed + opt.max_cells - 1) / opt.max_cells);
    // prefer a coarsening factor that keeps the blocked-interval atoms on nodes
    if (!model.blocked.atoms().empty()) {
      const double idx = model.blocked.atoms().front().location / fine;
      const auto atom_index = static_cast<std::size_t>(std::llround(idx));
      if (std::abs(idx - static_cast<double>(atom_index)) < 1e-6) {
        for (std::size_t c = k; c <= 2 * k; ++c) {
          if (atom_index % c == 0) {
            k = c;
            break;
          }
        }
      }
    }
    step_ = fine * static_cast<double>(k);
    cells_ = static_cast<std::size_t>(std::ceil(horizon / step_)) + 1;

    const auto eta = detail::cell_form(model.blocked, step_, cells_);
    const auto eta_res = detail::cell_form(model.residual_blocked, step_, cells_);
    detail::CellForm omega;
    omega.cells.resize(cells_);
    for (std::size_t n = 0; n < cells_; ++n) {
      const double x0 = step_ * static_cast<double>(n);
      omega.cells[n] = std::exp(-model.rate * x0) * -std::expm1(-model.rate * step_);
    }
    eta_ = blockage::detail::FixedKernelConvolver(detail::cell_kernel(eta, cells_), cells_);
    omega_ = blockage::detail::FixedKernelConvolver(detail::cell_kernel(omega, cells_), cells_);
    // a residual law has no atoms; anything the coarse grid put at 0 goes in cell 0
    std::vector<double> start_nlos = eta_res.cells;
    for (const auto& [pos, mass] : eta_res.atoms) start_nlos[std::min<std::size_t>(static_cast<std::size_t>(pos), cells_ - 1)] += mass;
    los_.g.push_back(cumulative(omega.cells));
    los_.g_cells = omega.cells;
    nlos_.g.push_back(cumulative(start_nlos));
    nlos_.g_cells = std::move(start_nlos);
  }

  double step() const noexcept { return step_; }
  double horizon() const noexcept { return horizon_; }
  const ConditionalOptions& options() const noexcept { return opt_; }

  /// (p00, p01).
  TransitionPair from_los(double dt) const {
    if (never_blocked_) return {1.0, 0.0, 0};
    return evaluate(los_, eta_, omega_, dt);
  }

  /// (p11, p10).
  TransitionPair from_nlos(double dt) const {
    if (never_blocked_) return {dt <= 0.0 ? 1.0 : 0.0, dt <= 0.0 ? 0.0 : 1.0, 0};
    return evaluate(nlos_, omega_, eta_, dt);
  }

  ConditionalPoint at(double dt) const {
    const auto a = from_los(dt);
    const auto b = from_nlos(dt);
    return {dt, a.same, a.other, b.other, b.same, a.terms, b.terms};
  }

 private:
  struct Series {
    std::vector<std::vector<double>> g;  // F_{G_i} at nodes
    std::vector<std::vector<double>> h;  // F_{H_i} at nodes, h[i-1] is H_i
    std::vector<double> g_cells;         // cell masses of the newest G
  };

  static std::vector<double> cumulative(std::span<const double> cells) {
    std::vector<double> f(cells.size() + 1, 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) f[i + 1] = f[i] + cells[i];
    return f;
  }

  double value(const std::vector<double>& f, double dt) const {
    const double pos = dt / step_;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= f.size()) return f.back();
    const double t = pos - static_cast<double>(i);
    return f[i] + t * (f[i + 1] - f[i]);
  }

  void extend(Series& s, const blockage::detail::FixedKernelConvolver& first,
              const blockage::detail::FixedKernelConvolver& second) const {
    std::vector<double> h_cells = first.apply(s.g_cells);
    s.h.push_back(cumulative(h_cells));
    s.g_cells = second.apply(h_cells);
    s.g.push_back(cumulative(s.g_cells));
  }

  TransitionPair evaluate(Series& s, const blockage::detail::FixedKernelConvolver& first,
                          const blockage::detail::FixedKernelConvolver& second, double dt) const {
    if (dt < 0.0) throw DomainError("delta_t must be non-negative");
    if (dt > horizon_ * (1.0 + 1e-12)) throw DomainError("delta_t beyond the engine horizon");
    std::lock_guard lock(mutex_);
    double same = 1.0 - value(s.g[0], dt);
    double other = 0.0;
    for (std::size_t i = 1; i <= opt_.max_terms; ++i) {
      while (s.g.size() <= i) extend(s, first, second);
      const double fh = value(s.h[i - 1], dt);
      const double fg = value(s.g[i], dt);
      same += fh - fg;
      other += value(s.g[i - 1], dt) - fh;
      if (fg < opt_.epsilon) {
        return {std::clamp(same, 0.0, 1.0), std::clamp(other, 0.0, 1.0), i};
      }
    }
    std::ostringstream msg;
    msg << "conditional series needs more than " << opt_.max_terms << " terms at delta_t=" << dt
        << " (epsilon=" << opt_.epsilon << ")";
    throw NumericalFailure(msg.str());
  }

  ConditionalOptions opt_;
  double horizon_ = 0.0;
  bool never_blocked_ = false;
  double step_ = 0.0;
  std::size_t cells_ = 0;
  blockage::detail::FixedKernelConvolver eta_, omega_;
  mutable Series los_, nlos_;
  mutable std::mutex mutex_;
};

inline TransitionPair conditional_from_los(const renewal::RenewalModel& model, double dt, double epsilon = 1e-4) {
  ConditionalOptions opt;
  opt.epsilon = epsilon;
  return ConditionalEngine(model, std::max(dt, 1e-3), opt).from_los(dt);
}

inline TransitionPair conditional_from_nlos(const renewal::RenewalModel& model, double dt, double epsilon = 1e-4) {
  ConditionalOptions opt;
  opt.epsilon = epsilon;
  return ConditionalEngine(model, std::max(dt, 1e-3), opt).from_nlos(dt);
}

/// Evaluates a lag grid. The largest lag is computed first so the cache is
/// complete before the remaining points are spread over `threads` workers.
inline ConditionalCurve conditional_curve(const ConditionalEngine& engine, std::span<const double> deltas,
                                          unsigned threads = 0) {
  ConditionalCurve curve;
  curve.epsilon = engine.options().epsilon;
  curve.points.resize(deltas.size());
  if (deltas.empty()) return curve;
  const auto top = std::max_element(deltas.begin(), deltas.end());
  curve.points[static_cast<std::size_t>(top - deltas.begin())] = engine.at(*top);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(deltas.size()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < deltas.size(); i += threads) curve.points[i] = engine.at(deltas[i]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return curve;
}

}  // namespace blockage
