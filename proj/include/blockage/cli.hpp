#pragma once

// Subcommand dispatch for the command-line front end. Needs nlohmann/json
// on the include path.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blockage/applications.hpp"
#include "blockage/conditional.hpp"
#include "blockage/config.hpp"
#include "blockage/renewal.hpp"
#include "blockage/simulator.hpp"

namespace blockage::cli {

enum ExitCode : int { ok = 0, numerical_failure = 1, config_error = 2, threshold_exceeded = 3 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"metrics",  "cdf",          "conditional", "simulate",
                                              "validate", "optimize-height", "cell-range", "bench"};
  return names;
}

namespace detail {

using nlohmann::json;

inline renewal::BusyPeriodOptions busy_options(const RunConfig& cfg) {
  renewal::BusyPeriodOptions o;
  o.intervals_per_support = cfg.numeric.intervals;
  o.tolerance = cfg.numeric.tolerance;
  o.max_iterations = cfg.numeric.max_iterations;
  return o;
}

inline renewal::RenewalModel model_of(const RunConfig& cfg) {
  return renewal::build_model(cfg.scenario, busy_options(cfg), cfg.numeric.points);
}

inline sim::Mode mode_of(const RunConfig& cfg) {
  return cfg.numeric.mode == "exact" ? sim::Mode::exact : sim::Mode::rectangle;
}

inline bool as_json(const RunConfig& cfg) { return cfg.output.format == "json"; }

/// Writes key/value pairs as a two-column CSV or a flat JSON object.
inline void emit_record(std::ostream& out, const RunConfig& cfg, const json& record) {
  if (as_json(cfg)) {
    out << record.dump(2) << '\n';
    return;
  }
  out << "metric,value\n";
  for (const auto& [k, v] : record.items()) {
    out << k << ',';
    if (v.is_string()) out << v.get<std::string>();
    else out << v.dump();
    out << '\n';
  }
}

inline json model_record(const RunConfig& cfg, const renewal::RenewalModel& m) {
  json j;
  j["scenario"] = to_string(cfg.scenario.kind);
  j["lambda_I"] = cfg.scenario.initial_rate;
  j["lambda"] = m.rate;
  j["E_T"] = m.mean_residence;
  j["never_blocked"] = m.never_blocked;
  if (!m.never_blocked) {
    j["E_eta"] = m.mean_blocked;
    j["E_eta_numeric"] = m.mean_blocked_numeric;
    j["E_omega"] = m.mean_nonblocked;
    j["E_xi"] = m.cycle_mean;
    j["iterations"] = m.iterations;
  }
  j["frac_los"] = m.frac_los;
  j["frac_nlos"] = m.frac_nlos;
  return j;
}

inline int metrics(const RunConfig& cfg, std::ostream& out) {
  emit_record(out, cfg, model_record(cfg, model_of(cfg)));
  return ok;
}

inline int cdf(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  const double top = m.never_blocked ? m.residence.support_max()
                                     : std::max(m.blocked.quantile(1.0 - 1e-4), m.residence.support_max());
  const std::size_t rows = 501;
  const auto grid = DistributionTable::uniform_grid(top, rows);
  auto omega = [&](double x) { return m.never_blocked ? 0.0 : -std::expm1(-m.rate * x); };
  if (as_json(cfg)) {
    json j;
    j["x"] = grid;
    std::vector<double> ft, fe, fo, fre;
    for (double x : grid) {
      ft.push_back(m.residence(x));
      fe.push_back(m.blocked(x));
      fo.push_back(omega(x));
      fre.push_back(m.residual_blocked(x));
    }
    j["F_T"] = ft;
    j["F_eta"] = fe;
    j["F_omega"] = fo;
    j["F_t_eta"] = fre;
    j["F_t_omega"] = fo;
    auto atoms = [](const DistributionTable& t) {
      json a = json::array();
      for (const auto& x : t.atoms()) a.push_back({{"location", x.location}, {"mass", x.mass}});
      return a;
    };
    j["atoms"] = {{"F_T", atoms(m.residence)}, {"F_eta", atoms(m.blocked)}};
    out << j.dump(2) << '\n';
    return ok;
  }
  out << std::setprecision(10);
  out << "# atoms F_T:";
  for (const auto& a : m.residence.atoms()) out << ' ' << a.location << ':' << a.mass;
  out << "\n# atoms F_eta:";
  for (const auto& a : m.blocked.atoms()) out << ' ' << a.location << ':' << a.mass;
  out << "\nx,F_T,F_eta,F_omega,F_t_eta,F_t_omega\n";
  for (double x : grid) {
    out << x << ',' << m.residence(x) << ',' << m.blocked(x) << ',' << omega(x) << ',' << m.residual_blocked(x)
        << ',' << omega(x) << '\n';
  }
  return ok;
}

inline std::vector<double> lag_grid(const RunConfig& cfg) {
  std::vector<double> lags;
  const auto n = static_cast<std::size_t>(std::floor(cfg.numeric.dt_max / cfg.numeric.dt_step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) lags.push_back(cfg.numeric.dt_step * static_cast<double>(i));
  return lags;
}

inline int conditional(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  ConditionalOptions o;
  o.epsilon = cfg.numeric.epsilon;
  o.max_terms = cfg.numeric.max_terms;
  const ConditionalEngine engine(m, cfg.numeric.dt_max, o);
  const auto lags = lag_grid(cfg);
  const auto curve = conditional_curve(engine, lags);
  if (as_json(cfg)) {
    json j = json::array();
    for (const auto& p : curve.points) {
      j.push_back({{"delta_t", p.delta_t}, {"p00", p.p00}, {"p01", p.p01}, {"p10", p.p10}, {"p11", p.p11},
                   {"terms_used", p.terms_used()}});
    }
    out << json{{"epsilon", curve.epsilon}, {"points", j}}.dump(2) << '\n';
    return ok;
  }
  out << std::setprecision(10) << "delta_t,p00,p01,p10,p11,terms_used\n";
  for (const auto& p : curve.points) {
    out << p.delta_t << ',' << p.p00 << ',' << p.p01 << ',' << p.p10 << ',' << p.p11 << ',' << p.terms_used()
        << '\n';
  }
  return ok;
}

inline std::vector<sim::StateTrace> run_simulation(const RunConfig& cfg) {
  return sim::simulate_replications(cfg.scenario, cfg.numeric.duration, cfg.numeric.seed, cfg.numeric.replications,
                                    mode_of(cfg));
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline int simulate(const RunConfig& cfg, std::ostream& out) {
  const auto traces = run_simulation(cfg);
  const std::vector<double> lags{0.1, 0.5, 1.0, 2.0};
  const auto s = sim::summarize(traces, lags);
  json j;
  j["scenario"] = to_string(cfg.scenario.kind);
  j["mode"] = cfg.numeric.mode;
  j["seed"] = cfg.numeric.seed;
  j["replications"] = cfg.numeric.replications;
  j["duration"] = s.duration;
  j["frac_nlos"] = s.frac_nlos;
  j["n_busy_periods"] = s.n_busy_periods;
  j["mean_blocked"] = mean(s.blocked_samples);
  j["mean_nonblocked"] = mean(s.nonblocked_samples);
  for (const auto& c : s.conditional_estimates) {
    std::ostringstream k;
    k << c.lag;
    j["p01@" + k.str()] = c.p01;
    j["p10@" + k.str()] = c.p10;
  }
  emit_record(out, cfg, j);
  return ok;
}

inline int validate(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  const auto traces = run_simulation(cfg);
  const auto s = sim::summarize(traces);
  json j;
  j["scenario"] = to_string(cfg.scenario.kind);
  j["mode"] = cfg.numeric.mode;
  j["seed"] = cfg.numeric.seed;
  j["frac_nlos_analysis"] = m.frac_nlos;
  j["frac_nlos_simulation"] = s.frac_nlos;
  j["n_busy_periods"] = s.n_busy_periods;
  bool pass = true;
  if (m.never_blocked) {
    pass = s.n_busy_periods == 0 && s.frac_nlos == 0.0;
    j["ks_blocked"] = 0.0;
    j["ks_nonblocked"] = 0.0;
  } else {
    const double ks_b = s.blocked_samples.empty() ? 1.0 : ks_statistic(s.blocked_samples, m.blocked);
    const auto omega = renewal::nonblocked_cdf(m.rate);
    const double ks_o = s.nonblocked_samples.empty() ? 1.0 : ks_statistic(s.nonblocked_samples, omega);
    j["ks_blocked"] = ks_b;
    j["ks_nonblocked"] = ks_o;
    pass = ks_b <= cfg.numeric.ks_threshold && ks_o <= cfg.numeric.ks_threshold;
  }
  j["ks_threshold"] = cfg.numeric.ks_threshold;
  j["pass"] = pass;
  emit_record(out, cfg, j);
  return pass ? ok : threshold_exceeded;
}

inline geometry::LinkGeometry app_link(const RunConfig& cfg) {
  geometry::LinkGeometry l = cfg.scenario.link;
  return l;
}

inline int optimize_height(const RunConfig& cfg, std::ostream& out) {
  const auto res = apps::optimal_ap_height(cfg.cell, app_link(cfg));
  std::vector<std::pair<double, double>> sweep;
  auto link = app_link(cfg);
  link.distance = cfg.cell.x_c;
  for (double h = cfg.cell.h_min; h <= cfg.cell.h_max + 1e-9; h += 0.5) {
    link.tx_height = h;
    sweep.emplace_back(h, apps::average_path_loss_area(link, cfg.cell.lambda_S, cfg.cell.speed));
  }
  if (as_json(cfg)) {
    json s = json::array();
    for (const auto& [h, v] : sweep) s.push_back({{"h_T", h}, {"avg_path_loss", v}});
    out << json{{"optimum", {{"h_T", res.height}, {"avg_path_loss", res.loss}, {"boundary", res.boundary}}},
                {"x_c", cfg.cell.x_c},
                {"lambda_S", cfg.cell.lambda_S},
                {"sweep", s}}
               .dump(2)
        << '\n';
    return ok;
  }
  out << std::setprecision(10) << "# optimum h_T=" << res.height << " avg_path_loss=" << res.loss
      << " boundary=" << (res.boundary ? "true" : "false") << '\n'
      << "h_T,avg_path_loss\n";
  for (const auto& [h, v] : sweep) out << h << ',' << v << '\n';
  return ok;
}

inline int cell_range(const RunConfig& cfg, std::ostream& out) {
  const auto link = app_link(cfg);
  json opt;
  try {
    const auto r = apps::max_cell_radius(cfg.target_rate, cfg.cell, cfg.radio, link);
    opt = {{"x_c", r.radius}, {"rate", r.rate}, {"range_limited", r.range_limited}, {"feasible", true}};
  } catch (const Infeasible&) {
    opt = {{"feasible", false}};
  }
  std::vector<std::pair<double, double>> sweep;
  apps::CellConfig cell = cfg.cell;
  for (double x = 5.0; x <= 200.0 + 1e-9; x += 5.0) {
    cell.x_c = x;
    sweep.emplace_back(x, apps::cell_edge_mean_rate(cell, cfg.radio, link));
  }
  if (as_json(cfg)) {
    json s = json::array();
    for (const auto& [x, v] : sweep) s.push_back({{"x_c", x}, {"edge_rate", v}});
    out << json{{"target_rate", cfg.target_rate}, {"result", opt}, {"sweep", s}}.dump(2) << '\n';
    return opt["feasible"].get<bool>() ? ok : numerical_failure;
  }
  out << std::setprecision(10) << "# target_rate=" << cfg.target_rate;
  if (opt["feasible"].get<bool>()) {
    out << " x_c=" << opt["x_c"].get<double>() << " range_limited=" << (opt["range_limited"].get<bool>() ? "true" : "false");
  } else {
    out << " infeasible";
  }
  out << "\nx_c,edge_rate\n";
  for (const auto& [x, v] : sweep) out << x << ',' << v << '\n';
  return opt["feasible"].get<bool>() ? ok : numerical_failure;
}

inline int bench(const RunConfig& cfg, std::ostream& out) {
  sim::BenchOptions o;
  o.repeats = cfg.numeric.bench_repeats;
  o.seed = cfg.numeric.seed;
  const auto res = sim::run_complexity_benchmark(cfg.scenario, cfg.numeric.bench_duration, cfg.numeric.update_intervals,
                                                 cfg.numeric.intensities, o);
  if (as_json(cfg)) {
    json rows = json::array();
    for (const auto& r : res.rows) {
      rows.push_back({{"T_U", r.update_interval}, {"lambda_I", r.intensity}, {"method", r.method},
                      {"mean_time", r.mean_time}, {"stdev", r.stdev}});
    }
    auto fit = [](const sim::LinearFit& f) {
      return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"p_value", f.p_value}};
    };
    out << json{{"seed", cfg.numeric.seed},
                {"rows", rows},
                {"fits",
                 {{"model_vs_lambda_I", fit(res.model_vs_intensity)},
                  {"direct_vs_lambda_I", fit(res.direct_vs_intensity)},
                  {"model_vs_update_rate", fit(res.model_vs_rate)},
                  {"direct_vs_update_rate", fit(res.direct_vs_rate)}}}}
               .dump(2)
        << '\n';
    return ok;
  }
  out << std::setprecision(8) << "T_U,lambda_I,method,mean_time,stdev\n";
  for (const auto& r : res.rows) {
    out << r.update_interval << ',' << r.intensity << ',' << r.method << ',' << r.mean_time << ',' << r.stdev << '\n';
  }
  return ok;
}

}  // namespace detail

/// Runs one subcommand. Library errors map to exit codes; messages go to `err`.
inline int dispatch(const std::string& sub, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (sub == "metrics") return detail::metrics(cfg, out);
    if (sub == "cdf") return detail::cdf(cfg, out);
    if (sub == "conditional") return detail::conditional(cfg, out);
    if (sub == "simulate") return detail::simulate(cfg, out);
    if (sub == "validate") return detail::validate(cfg, out);
    if (sub == "optimize-height") return detail::optimize_height(cfg, out);
    if (sub == "cell-range") return detail::cell_range(cfg, out);
    if (sub == "bench") return detail::bench(cfg, out);
    err << "unknown subcommand '" << sub << "'\n";
    return config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return config_error;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  }
}

}  // namespace blockage::cli
