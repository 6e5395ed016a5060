#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "droplab/errors.hpp"
#include "droplab/harness.hpp"

using namespace droplab;

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for percolation droplets"};
  std::string mode, config_file;
  bool dump = false, calibrate = false;
  app.add_option("mode", mode,
                 "droplet-scan | tau-calibrate | renewal-stats | bridge-scan | skeleton-audit (may come from --config)");

  // Flag name -> raw value; applied on top of the config file.
  std::map<std::string, std::string> given;
  const std::pair<const char*, const char*> flags[] = {
      {"p", "bond density"},
      {"box", "box half widths, comma separated"},
      {"replicas", "replicas per box (droplets for skeleton-audit, samples per cell for renewal-stats)"},
      {"seed", "master seed"},
      {"theta", "confinement parameter"},
      {"lambda", "slope tolerance for slab directions"},
      {"epsilon", "renewal epsilon"},
      {"delta", "regeneration density threshold"},
      {"gamma", "large-increment density threshold"},
      {"min-l", "smallest l_eff kept"},
      {"out", "output directory"},
      {"tau", "tau calibration JSON"},
      {"tau-samples", "samples for tau calibration"},
      {"q-max", "largest denominator of the tau direction grid"},
      {"scales", "bridge scales l, comma separated"},
      {"lengths", "renewal slab lengths, comma separated"},
      {"bin-ratio", "ratio of consecutive l_eff bin edges"},
      {"min-bin-count", "rows needed for a bin to enter the fit"},
      {"bootstrap", "bootstrap resamples per bin"},
      {"exchange-length", "slab length for the exchangeability test"},
      {"exchange-sweeps", "sweeps between exchangeability samples"},
      {"exchange-samples", "exchangeability samples"},
      {"threads", "worker threads"},
  };
  for (const auto& [name, help] : flags)
    app.add_option_function<std::string>(
        std::string("--") + name, [&given, key = std::string(name)](const std::string& v) { given[key] = v; },
        help);
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");
  app.add_flag("--calibrate", calibrate, "skeleton-audit: report calibrated constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw IoError("cannot open config file " + config_file);
      std::stringstream text;
      text << in.rdbuf();
      if (mode.empty() && !std::regex_search(text.str(), std::regex(R"((^|\n)\s*mode\s*=)")))
        throw UsageError("no mode given on the command line or in " + config_file);
      cfg = read_config(text, cfg);
    } else if (mode.empty()) {
      throw UsageError("mode is required");
    }
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    for (const auto& [k, v] : given) set_config_value(cfg, k, v);
    if (calibrate) cfg.calibrate = true;
    validate(cfg);
    if (dump) {
      write_config(std::cout, cfg);
      return 0;
    }
    const RunResult r = run(cfg, std::cerr);
    for (const auto& f : r.files) std::cout << f << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "droplet-lab: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
