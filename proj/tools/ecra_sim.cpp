// Command-line front end: frame-level Monte-Carlo runs of CRA, ECRA and CRDSA.
//
// Settings are layered: built-in defaults, then --config FILE (key = value),
// then ECRA_* environment variables, then command-line flags.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ecra/ecra.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ecra_sim: CRA / ECRA / CRDSA random access simulator"};

  std::string config_file;
  std::string per_curve_file;
  bool print_config = false;
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  app.add_option("--per-curve", per_curve_file,
                 "also write the RCB/SB PER-vs-SNIR curve for the configured rate to this CSV");

  const std::map<std::string, std::string> help{
      {"protocol", "comma list of CRA, ECRA, CRDSA"},
      {"model", "comma list of SB (Shannon bound), RCB (random coding bound)"},
      {"rate", "bits per symbol R"},
      {"snr-db", "nominal SNR in dB"},
      {"frame-ms", "frame duration in ms"},
      {"symbol-us", "symbol duration in us"},
      {"packet-bits", "packet length in bits"},
      {"degree", "replicas per user (>= 2)"},
      {"imax", "SIC iteration budget"},
      {"g-min", "first load of the sweep grid"},
      {"g-max", "last load of the sweep grid"},
      {"g-step", "sweep grid step"},
      {"g-list", "explicit comma list of loads (overrides the grid)"},
      {"g", "load for histogram and trace modes"},
      {"frames", "frames per load point"},
      {"seed", "master seed"},
      {"out", "output file"},
      {"mode", "sweep, histogram or trace"},
      {"jobs", "worker threads (0 = all cores)"},
      {"histogram-sampling", "settled or initial"},
      {"fixture", "trace fixture: cra-loop, crdsa-loop, sic-chain"},
      {"frame-s", "frame duration in s"},
      {"symbol-s", "symbol duration in s"},
  };
  std::map<std::string, std::string> flag_values;
  for (const auto& key : ecra::config_keys())
    app.add_option("--" + key, flag_values[key], help.at(key));

  CLI11_PARSE(app, argc, argv);

  ecra::ExperimentConfig cfg;
  try {
    if (!config_file.empty()) ecra::apply_config_file(cfg, config_file);
    ecra::apply_environment(cfg);
    for (const auto& key : ecra::config_keys())
      if (app.count("--" + key) > 0) ecra::apply_setting(cfg, key, flag_values[key]);
    ecra::validate(cfg);
  } catch (const ecra::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  if (print_config) {
    std::cout << ecra::serialize(cfg);
    return 0;
  }

  if (!per_curve_file.empty()) {
    const auto n = ecra::derive_geometry(cfg.params).packet_symbols;
    std::string error;
    if (!ecra::write_atomically(
            per_curve_file,
            [&](std::ostream& os) { ecra::write_per_curve_csv(os, cfg.params.rate, n, -5.0, 15.0, 0.05); },
            &error)) {
      std::cerr << "error: " << error << '\n';
      return 1;
    }
  }

  return ecra::run(cfg, std::cout, std::cerr);
}
