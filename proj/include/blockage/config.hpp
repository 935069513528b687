#pragma once

// Run configuration: one INI file with [scenario], [link], [radio], [cell],
// [numeric] and [output] sections. Omitted keys take the baseline values.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "blockage/applications.hpp"
#include "blockage/errors.hpp"
#include "blockage/residence.hpp"

namespace blockage {

struct NumericConfig {
  std::size_t points = residence::kDefaultPoints;  // nodes of distance/time tables
  std::size_t intervals = 4000;                    // busy-period grid cells over the support
  double tolerance = 1e-6;
  std::size_t max_iterations = 500;
  double epsilon = 1e-4;
  std::size_t max_terms = 64;
  double dt_max = 5.0;    // conditional lag grid
  double dt_step = 0.05;
  std::uint64_t seed = 1;
  double duration = 1e5;  // simulated seconds after warm-up
  std::string mode = "rectangle";
  std::size_t replications = 1;
  double ks_threshold = 0.02;
  std::vector<double> update_intervals{0.002, 0.004, 0.006, 0.008, 0.01};
  std::vector<double> intensities{0.5, 1.0, 2.0, 4.0, 8.0};
  double bench_duration = 200.0;
  std::size_t bench_repeats = 5;

  bool operator==(const NumericConfig&) const = default;
};

struct OutputConfig {
  std::string path;  // empty: standard output
  std::string format = "csv";

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ScenarioConfig scenario;
  apps::RadioConfig radio;
  apps::CellConfig cell;
  double target_rate = 1e8;  // bits/s, for cell-range
  NumericConfig numeric;
  OutputConfig output;
};

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  const auto& l = a.link;
  const auto& m = b.link;
  return a.kind == b.kind && a.speed == b.speed && a.initial_rate == b.initial_rate && a.mode == b.mode &&
         l.tx_height == m.tx_height && l.rx_height == m.rx_height && l.blocker_height == m.blocker_height &&
         l.blocker_diameter == m.blocker_diameter && l.distance == m.distance &&
         l.sidewalk_width == m.sidewalk_width && l.alpha == m.alpha;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& r = a.radio;
  const auto& s = b.radio;
  const auto& c = a.cell;
  const auto& d = b.cell;
  return a.scenario == b.scenario && r.carrier_ghz == s.carrier_ghz && r.bandwidth == s.bandwidth &&
         r.tx_power == s.tx_power && r.noise == s.noise && r.mcs_constant == s.mcs_constant &&
         r.log2_rate == s.log2_rate && c.lambda_S == d.lambda_S && c.lambda_N == d.lambda_N && c.x_c == d.x_c &&
         c.h_min == d.h_min && c.h_max == d.h_max && c.speed == d.speed && a.target_rate == b.target_rate &&
         a.numeric == b.numeric && a.output == b.output;
}

namespace config_detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"scenario", {"kind", "V", "lambda_I", "c"}},
      {"link", {"h_T", "h_R", "h_B", "d_m", "r_0", "w_S", "alpha", "alpha_deg"}},
      {"radio", {"carrier_GHz", "B", "tx_power", "noise", "c", "log_base"}},
      {"cell", {"lambda_S", "lambda_N", "x_c", "h_min", "h_max", "target_rate"}},
      {"numeric",
       {"points", "intervals", "tolerance", "max_iterations", "epsilon", "max_terms", "dt_max", "dt_step", "seed",
        "duration", "mode", "replications", "ks_threshold", "update_intervals", "intensities", "bench_duration",
        "bench_repeats"}},
      {"output", {"path", "format"}},
  };
  return s;
}

inline double to_double(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
}

inline std::uint64_t to_unsigned(const std::string& field, const std::string& text) {
  try {
    if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
  }
}

inline std::vector<double> to_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(field, "empty list element");
    out.push_back(to_double(field, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError(field, "list is empty");
  return out;
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = to_double(section + "." + key, *v);
  }
  template <class U>
  void count(const std::string& section, const std::string& key, U& out) const {
    if (auto v = raw(section, key)) out = static_cast<U>(to_unsigned(section + "." + key, *v));
  }
  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }
  void list(const std::string& section, const std::string& key, std::vector<double>& out) const {
    if (auto v = raw(section, key)) out = to_list(section + "." + key, *v);
  }

 private:
  const ptree& tree_;
};

inline void check_schema(const ptree& tree) {
  const auto& s = schema();
  for (const auto& [section, body] : tree) {
    const auto it = s.find(section);
    if (it == s.end()) {
      if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace config_detail

/// Range and consistency checks, reported with the dotted key of the field.
inline void validate(const RunConfig& cfg) {
  using config_detail::require;
  const auto& s = cfg.scenario;
  const auto& l = s.link;
  require(s.speed > 0.0, "scenario.V", "must be positive");
  require(s.initial_rate >= 0.0, "scenario.lambda_I", "must be non-negative");
  require(l.rx_height > 0.0, "link.h_R", "must be positive");
  require(l.blocker_height > l.rx_height, "link.h_B", "must exceed h_R");
  require(l.tx_height > l.blocker_height, "link.h_T", "must exceed h_B");
  require(l.blocker_diameter > 0.0, "link.d_m", "must be positive");
  require(l.distance > 0.0, "link.r_0", "must be positive");
  require(l.alpha >= 0.0 && l.alpha < std::numbers::pi / 2.0, "link.alpha", "must lie in [0, 90) degrees");
  if (s.kind != Scenario::s3) require(l.sidewalk_width > 0.0, "link.w_S", "must be positive");
  if (s.kind == Scenario::s2) {
    const double c = s.triangular_mode();
    require(c > 0.0 && c < l.sidewalk_width, "scenario.c", "must lie in (0, w_S)");
  }
  require(cfg.radio.bandwidth > 0.0, "radio.B", "must be positive");
  require(cfg.radio.mcs_constant > 0.0, "radio.c", "must be positive");
  require(cfg.cell.lambda_S >= 0.0, "cell.lambda_S", "must be non-negative");
  require(cfg.cell.lambda_N >= 0.0, "cell.lambda_N", "must be non-negative");
  require(cfg.cell.x_c > 0.0, "cell.x_c", "must be positive");
  require(cfg.cell.h_max > cfg.cell.h_min, "cell.h_max", "must exceed cell.h_min");
  require(cfg.cell.h_min > l.blocker_height, "cell.h_min", "must exceed h_B");
  require(cfg.target_rate >= 0.0, "cell.target_rate", "must be non-negative");
  const auto& n = cfg.numeric;
  require(n.points >= 2, "numeric.points", "must be at least 2");
  require(n.intervals >= 2, "numeric.intervals", "must be at least 2");
  require(n.tolerance > 0.0, "numeric.tolerance", "must be positive");
  require(n.max_iterations > 0, "numeric.max_iterations", "must be positive");
  require(n.epsilon > 0.0, "numeric.epsilon", "must be positive");
  require(n.max_terms > 0, "numeric.max_terms", "must be positive");
  require(n.dt_max > 0.0, "numeric.dt_max", "must be positive");
  require(n.dt_step > 0.0, "numeric.dt_step", "must be positive");
  require(n.duration > 0.0, "numeric.duration", "must be positive");
  require(n.mode == "rectangle" || n.mode == "exact", "numeric.mode", "must be rectangle or exact");
  require(n.replications > 0, "numeric.replications", "must be positive");
  require(n.ks_threshold > 0.0, "numeric.ks_threshold", "must be positive");
  for (double v : n.update_intervals) require(v > 0.0, "numeric.update_intervals", "values must be positive");
  for (double v : n.intensities) require(v >= 0.0, "numeric.intensities", "values must be non-negative");
  require(n.bench_duration > 0.0, "numeric.bench_duration", "must be positive");
  require(n.bench_repeats >= 2, "numeric.bench_repeats", "must be at least 2");
  require(cfg.output.format == "csv" || cfg.output.format == "json", "output.format", "must be csv or json");
}

inline Scenario parse_scenario_kind(const std::string& text) {
  if (text == "S1" || text == "s1") return Scenario::s1;
  if (text == "S2" || text == "s2") return Scenario::s2;
  if (text == "S3" || text == "s3") return Scenario::s3;
  throw ConfigError("scenario.kind", "expected S1, S2 or S3, got '" + text + "'");
}

inline RunConfig parse_config_stream(std::istream& in) {
  config_detail::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    std::ostringstream where;
    where << "line " << e.line();
    throw ConfigError(where.str(), e.message());
  }
  config_detail::check_schema(tree);
  const config_detail::Reader r(tree);
  RunConfig cfg;
  auto& s = cfg.scenario;
  if (auto k = r.raw("scenario", "kind")) s.kind = parse_scenario_kind(*k);
  r.number("scenario", "V", s.speed);
  r.number("scenario", "lambda_I", s.initial_rate);
  if (auto c = r.raw("scenario", "c")) s.mode = config_detail::to_double("scenario.c", *c);

  auto& l = s.link;
  r.number("link", "h_T", l.tx_height);
  r.number("link", "h_R", l.rx_height);
  r.number("link", "h_B", l.blocker_height);
  r.number("link", "d_m", l.blocker_diameter);
  r.number("link", "r_0", l.distance);
  r.number("link", "w_S", l.sidewalk_width);
  const auto rad = r.raw("link", "alpha");
  const auto deg = r.raw("link", "alpha_deg");
  if (rad && deg) throw ConfigError("link.alpha", "give either alpha (radians) or alpha_deg, not both");
  if (rad) l.alpha = config_detail::to_double("link.alpha", *rad);
  if (deg) l.alpha = config_detail::to_double("link.alpha_deg", *deg) * std::numbers::pi / 180.0;

  auto& radio = cfg.radio;
  r.number("radio", "carrier_GHz", radio.carrier_ghz);
  r.number("radio", "B", radio.bandwidth);
  r.number("radio", "tx_power", radio.tx_power);
  r.number("radio", "noise", radio.noise);
  r.number("radio", "c", radio.mcs_constant);
  if (auto b = r.raw("radio", "log_base")) {
    if (*b == "2") radio.log2_rate = true;
    else if (*b == "e") radio.log2_rate = false;
    else throw ConfigError("radio.log_base", "expected 2 or e");
  }

  auto& cell = cfg.cell;
  r.number("cell", "lambda_S", cell.lambda_S);
  r.number("cell", "lambda_N", cell.lambda_N);
  r.number("cell", "x_c", cell.x_c);
  r.number("cell", "h_min", cell.h_min);
  r.number("cell", "h_max", cell.h_max);
  r.number("cell", "target_rate", cfg.target_rate);
  cell.speed = s.speed;

  auto& n = cfg.numeric;
  r.count("numeric", "points", n.points);
  r.count("numeric", "intervals", n.intervals);
  r.number("numeric", "tolerance", n.tolerance);
  r.count("numeric", "max_iterations", n.max_iterations);
  r.number("numeric", "epsilon", n.epsilon);
  r.count("numeric", "max_terms", n.max_terms);
  r.number("numeric", "dt_max", n.dt_max);
  r.number("numeric", "dt_step", n.dt_step);
  r.count("numeric", "seed", n.seed);
  r.number("numeric", "duration", n.duration);
  r.text("numeric", "mode", n.mode);
  r.count("numeric", "replications", n.replications);
  r.number("numeric", "ks_threshold", n.ks_threshold);
  r.list("numeric", "update_intervals", n.update_intervals);
  r.list("numeric", "intensities", n.intensities);
  r.number("numeric", "bench_duration", n.bench_duration);
  r.count("numeric", "bench_repeats", n.bench_repeats);

  r.text("output", "path", cfg.output.path);
  r.text("output", "format", cfg.output.format);
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  return parse_config_stream(in);
}

/// Fully resolved config; parsing the result gives back an equal RunConfig.
inline void write_config(std::ostream& os, const RunConfig& cfg) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto list = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '\n';
  };
  const auto& s = cfg.scenario;
  os << "[scenario]\n"
     << "kind=" << to_string(s.kind) << '\n'
     << "V=" << s.speed << '\n'
     << "lambda_I=" << s.initial_rate << '\n';
  if (s.mode) os << "c=" << *s.mode << '\n';
  const auto& l = s.link;
  os << "\n[link]\n"
     << "h_T=" << l.tx_height << '\n'
     << "h_R=" << l.rx_height << '\n'
     << "h_B=" << l.blocker_height << '\n'
     << "d_m=" << l.blocker_diameter << '\n'
     << "r_0=" << l.distance << '\n'
     << "w_S=" << l.sidewalk_width << '\n'
     << "alpha=" << l.alpha << '\n';
  const auto& r = cfg.radio;
  os << "\n[radio]\n"
     << "carrier_GHz=" << r.carrier_ghz << '\n'
     << "B=" << r.bandwidth << '\n'
     << "tx_power=" << r.tx_power << '\n'
     << "noise=" << r.noise << '\n'
     << "c=" << r.mcs_constant << '\n'
     << "log_base=" << (r.log2_rate ? "2" : "e") << '\n';
  const auto& c = cfg.cell;
  os << "\n[cell]\n"
     << "lambda_S=" << c.lambda_S << '\n'
     << "lambda_N=" << c.lambda_N << '\n'
     << "x_c=" << c.x_c << '\n'
     << "h_min=" << c.h_min << '\n'
     << "h_max=" << c.h_max << '\n'
     << "target_rate=" << cfg.target_rate << '\n';
  const auto& n = cfg.numeric;
  os << "\n[numeric]\n"
     << "points=" << n.points << '\n'
     << "intervals=" << n.intervals << '\n'
     << "tolerance=" << n.tolerance << '\n'
     << "max_iterations=" << n.max_iterations << '\n'
     << "epsilon=" << n.epsilon << '\n'
     << "max_terms=" << n.max_terms << '\n'
     << "dt_max=" << n.dt_max << '\n'
     << "dt_step=" << n.dt_step << '\n'
     << "seed=" << n.seed << '\n'
     << "duration=" << n.duration << '\n'
     << "mode=" << n.mode << '\n'
     << "replications=" << n.replications << '\n'
     << "ks_threshold=" << n.ks_threshold << '\n'
     << "update_intervals=";
  list(n.update_intervals);
  os << "intensities=";
  list(n.intensities);
  os << "bench_duration=" << n.bench_duration << '\n' << "bench_repeats=" << n.bench_repeats << '\n';
  os << "\n[output]\n";
  if (!cfg.output.path.empty()) os << "path=" << cfg.output.path << '\n';
  os << "format=" << cfg.output.format << '\n';
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace blockage
