// blockage: command-line front end.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "blockage/cli.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string mode;
  std::optional<double> epsilon;
  bool print_config = false;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "INI run configuration (baseline defaults when omitted)");
  app.add_option("--out", o.out, "output file (standard output when omitted)");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", o.seed, "simulation seed");
  app.add_option("--duration", o.duration, "simulated seconds after warm-up");
  app.add_option("--mode", o.mode, "rectangle or exact blocking region")->check(CLI::IsMember({"rectangle", "exact"}));
  app.add_option("--epsilon", o.epsilon, "truncation tolerance of the conditional series");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace blockage;
  CLI::App app{"Temporal statistics of human-body LoS blockage for mmWave links"};
  app.require_subcommand(1);
  Overrides o;
  add_common(app, o);
  app.add_flag("--print-config", o.print_config, "write the resolved config to stderr before running");
  app.fallthrough();
  const std::map<std::string, std::string> about{
      {"metrics", "mean durations and LoS/nLoS fractions"},
      {"cdf", "tabulated CDFs of T, eta, t_eta and the non-blocked interval"},
      {"conditional", "conditional state probabilities over a range of lags"},
      {"simulate", "event-driven simulation summary"},
      {"validate", "KS distance between model and simulated busy periods"},
      {"optimize-height", "AP height maximizing the edge rate"},
      {"cell-range", "largest radius meeting the target edge rate"},
      {"bench", "timing of model-driven vs direct stepping"},
  };
  for (const auto& name : cli::subcommands()) app.add_subcommand(name, about.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::config_error;
  }

  RunConfig cfg;
  try {
    if (!o.config.empty()) cfg = parse_config(o.config);
    if (!o.out.empty()) cfg.output.path = o.out;
    if (!o.format.empty()) cfg.output.format = o.format;
    if (o.seed) cfg.numeric.seed = *o.seed;
    if (o.duration) cfg.numeric.duration = *o.duration;
    if (!o.mode.empty()) cfg.numeric.mode = o.mode;
    if (o.epsilon) cfg.numeric.epsilon = *o.epsilon;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::config_error;
  }
  if (o.print_config) write_config(std::cerr, cfg);

  const std::string sub = app.get_subcommands().front()->get_name();
  if (cfg.output.path.empty()) return cli::dispatch(sub, cfg, std::cout, std::cerr);
  std::ofstream file(cfg.output.path);
  if (!file) {
    std::cerr << "config error: output.path: cannot open '" << cfg.output.path << "'\n";
    return cli::config_error;
  }
  return cli::dispatch(sub, cfg, file, std::cerr);
}
