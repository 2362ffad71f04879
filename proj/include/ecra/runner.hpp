#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "ecra/config.hpp"
#include "ecra/fixtures.hpp"
#include "ecra/harness.hpp"
#include "ecra/sic_engine.hpp"

namespace ecra {

/// Writes `path` through a sibling temp file and a rename, so readers never
/// see a partial file. Returns false (and leaves no temp file) on failure.
inline bool write_atomically(const std::string& path, const std::function<void(std::ostream&)>& fill,
                             std::string* error = nullptr) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) {
      if (error) *error = "cannot open '" + tmp.string() + "' for writing";
      return false;
    }
    fill(os);
    os.flush();
    if (!os) {
      if (error) *error = "write to '" + tmp.string() + "' failed";
      std::error_code ec;
      fs::remove(tmp, ec);
      return false;
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    if (error) *error = "cannot rename to '" + path + "': " + ec.message();
    fs::remove(tmp, ec);
    return false;
  }
  return true;
}

namespace detail {

inline int run_sweep(const ExperimentConfig& cfg, std::ostream& console, std::ostream& err) {
  const auto loads = cfg.loads();
  std::vector<SweepStats> rows;
  for (const auto model : cfg.models)
    for (const auto protocol : cfg.protocols) {
      // Same master seed for every protocol: CRA and ECRA see identical frames.
      auto curve = sweep(cfg.params_for(protocol, model), loads, cfg.frames, cfg.seed,
                         cfg.effective_jobs());
      rows.insert(rows.end(), curve.begin(), curve.end());
    }

  console << std::left << std::setw(7) << "proto" << std::setw(5) << "model" << std::setw(9) << "G"
          << std::setw(11) << "T" << "PER\n";
  for (const auto& s : rows)
    console << std::setw(7) << to_string(s.params.protocol) << std::setw(5)
            << to_string(s.params.decode_model) << std::setw(9) << s.load_effective
            << std::setw(11) << std::setprecision(5) << s.throughput << format_per(s) << '\n';
  console << std::right << std::setprecision(6);

  std::string error;
  if (!write_atomically(cfg.out,
                        [&](std::ostream& os) {
                          write_sweep_csv_header(os);
                          for (const auto& s : rows) write_sweep_csv_row(os, s);
                        },
                        &error)) {
    err << "error: " << error << '\n';
    return 1;
  }
  return 0;
}

inline int run_histogram(const ExperimentConfig& cfg, std::ostream& console, std::ostream& err) {
  const auto h = snir_histogram(cfg.params_for(Protocol::CRA, cfg.models.front()), cfg.g,
                                cfg.frames, cfg.seed, cfg.effective_jobs(), cfg.histogram_sampling);
  std::size_t peak_cra = 0, peak_ecra = 0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    if (h.cra_counts[b] > h.cra_counts[peak_cra]) peak_cra = b;
    if (h.ecra_counts[b] > h.ecra_counts[peak_ecra]) peak_ecra = b;
  }
  if (h.bins()) {
    console << "SNIR density at G=" << cfg.g << " (" << to_string(cfg.histogram_sampling) << ")\n"
            << "  CRA  peak bin [" << h.bin_lo(peak_cra) << ", " << h.bin_hi(peak_cra) << ") dB\n"
            << "  ECRA peak bin [" << h.bin_lo(peak_ecra) << ", " << h.bin_hi(peak_ecra) << ") dB\n";
  }
  std::string error;
  if (!write_atomically(cfg.out, [&](std::ostream& os) { write_histogram_csv(os, h); }, &error)) {
    err << "error: " << error << '\n';
    return 1;
  }
  return 0;
}

inline int run_trace(const ExperimentConfig& cfg, std::ostream& console, std::ostream& err) {
  std::ostringstream text;
  for (const auto model : cfg.models)
    for (const auto protocol : cfg.protocols) {
      const auto params = cfg.params_for(protocol, model);
      FrameInstance frame;
      if (!cfg.fixture.empty()) {
        if ((cfg.fixture == "crdsa-loop") != (protocol == Protocol::CRDSA)) continue;
        frame = *fixtures::by_name(cfg.fixture, params);
        frame.params.protocol = protocol;
      } else {
        frame = place_frame(params, users_for_load(params, cfg.g), derive_frame_seed(cfg.seed, 0, 0));
      }
      const auto table = decision_table_for(params);
      text << "== " << to_string(protocol) << ' ' << to_string(model) << " frame"
           << (cfg.fixture.empty() ? "" : " " + cfg.fixture) << ": " << frame.users()
           << " users, F=" << frame.geometry.frame_symbols
           << ", t_s=" << frame.geometry.packet_symbols << '\n';
      write_placement_trace(text, frame);
      const auto state = run_protocol(frame, table, &text);
      text << "result: " << state.decoded_count() << " of " << frame.users() << " decoded after "
           << state.iteration << " passes\n\n";
    }
  console << text.str();
  std::string error;
  if (!write_atomically(cfg.out, [&](std::ostream& os) { os << text.str(); }, &error)) {
    err << "error: " << error << '\n';
    return 1;
  }
  return 0;
}

}  // namespace detail

/// Runs one validated configuration. Returns 0 iff every output was written.
inline int run(const ExperimentConfig& cfg, std::ostream& console, std::ostream& err) {
  try {
    validate(cfg);
    switch (cfg.mode) {
      case RunMode::Sweep: return detail::run_sweep(cfg, console, err);
      case RunMode::Histogram: return detail::run_histogram(cfg, console, err);
      case RunMode::Trace: return detail::run_trace(cfg, console, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ecra
