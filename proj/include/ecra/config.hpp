#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ecra/fixtures.hpp"
#include "ecra/frame_model.hpp"
#include "ecra/harness.hpp"

namespace ecra {

/// Bad configuration key or value. key() names the offending setting.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& reason)
      : std::runtime_error(key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

enum class RunMode { Sweep, Histogram, Trace };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Sweep: return "sweep";
    case RunMode::Histogram: return "histogram";
    case RunMode::Trace: return "trace";
  }
  return "?";
}

inline std::string_view to_string(SnirSampling s) {
  return s == SnirSampling::Settled ? "settled" : "initial";
}

/// Everything one CLI invocation needs. Defaults reproduce the R = 2, 10 dB
/// Shannon-bound campaign for all three protocols.
struct ExperimentConfig {
  SystemParams params;
  std::vector<Protocol> protocols{Protocol::CRA, Protocol::ECRA, Protocol::CRDSA};
  std::vector<DecodeModelKind> models{DecodeModelKind::ShannonBound};
  double g_min = 0.05;
  double g_max = 1.0;
  double g_step = 0.05;
  std::vector<double> g_list;  // overrides min/max/step when non-empty
  double g = 1.0;              // single load for histogram and trace modes
  std::int64_t frames = 1000;
  std::uint64_t seed = 1;
  std::string out = "ecra_results.csv";
  RunMode mode = RunMode::Sweep;
  unsigned jobs = 0;  // 0 = all hardware threads
  SnirSampling histogram_sampling = SnirSampling::Settled;
  std::string fixture;  // trace mode: cra-loop, crdsa-loop, sic-chain, or empty for a random frame

  std::vector<double> loads() const {
    if (!g_list.empty()) return g_list;
    std::vector<double> out;
    const auto n = static_cast<std::int64_t>(std::floor((g_max - g_min) / g_step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i)
      out.push_back(std::round((g_min + static_cast<double>(i) * g_step) * 1e9) / 1e9);
    return out;
  }

  /// Parameters for one (protocol, model) pair of this run.
  SystemParams params_for(Protocol p, DecodeModelKind m) const {
    auto sp = params;
    sp.protocol = p;
    sp.decode_model = m;
    return sp;
  }

  unsigned effective_jobs() const { return jobs ? jobs : default_jobs(); }

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  const auto v = trim(text);
  T value{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, value);
  if (ec != std::errc{} || ptr != end || v.empty())
    throw ConfigError(key, "not a valid number: '" + v + "'");
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Names accepted by apply_setting, in serialization order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "protocol", "model",  "rate",   "snr-db", "frame-ms", "frame-s", "symbol-us", "symbol-s", "packet-bits",
      "degree",   "imax",   "g-min",  "g-max",  "g-step",   "g-list",    "g",
      "frames",   "seed",   "out",    "mode",   "jobs",     "histogram-sampling", "fixture"};
  return keys;
}

/// Applies one key=value setting. Values are checked syntactically here;
/// cross-field invariants are checked by validate().
inline void apply_setting(ExperimentConfig& c, const std::string& key, std::string_view value) {
  using detail::parse_number;
  if (key == "protocol") {
    c.protocols.clear();
    for (const auto& item : detail::split_list(value)) {
      const auto p = parse_protocol(item);
      if (!p) throw ConfigError(key, "unknown protocol '" + item + "' (CRA, ECRA, CRDSA)");
      c.protocols.push_back(*p);
    }
    if (c.protocols.empty()) throw ConfigError(key, "at least one protocol required");
  } else if (key == "model") {
    c.models.clear();
    for (const auto& item : detail::split_list(value)) {
      const auto m = parse_decode_model(item);
      if (!m) throw ConfigError(key, "unknown decoding model '" + item + "' (SB, RCB)");
      c.models.push_back(*m);
    }
    if (c.models.empty()) throw ConfigError(key, "at least one model required");
  } else if (key == "rate") {
    c.params.rate = parse_number<double>(key, value);
  } else if (key == "snr-db") {
    c.params.snr_db = parse_number<double>(key, value);
  } else if (key == "frame-ms") {
    c.params.frame_duration_s = parse_number<double>(key, value) * 1e-3;
  } else if (key == "symbol-us") {
    c.params.symbol_duration_s = parse_number<double>(key, value) * 1e-6;
  } else if (key == "frame-s") {
    c.params.frame_duration_s = parse_number<double>(key, value);
  } else if (key == "symbol-s") {
    c.params.symbol_duration_s = parse_number<double>(key, value);
  } else if (key == "packet-bits") {
    c.params.packet_bits = parse_number<std::int64_t>(key, value);
  } else if (key == "degree") {
    c.params.degree = parse_number<int>(key, value);
  } else if (key == "imax") {
    c.params.max_sic_iterations = parse_number<int>(key, value);
  } else if (key == "g-min") {
    c.g_min = parse_number<double>(key, value);
  } else if (key == "g-max") {
    c.g_max = parse_number<double>(key, value);
  } else if (key == "g-step") {
    c.g_step = parse_number<double>(key, value);
  } else if (key == "g-list") {
    c.g_list.clear();
    for (const auto& item : detail::split_list(value))
      c.g_list.push_back(parse_number<double>(key, item));
  } else if (key == "g") {
    c.g = parse_number<double>(key, value);
  } else if (key == "frames") {
    c.frames = parse_number<std::int64_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out") {
    c.out = detail::trim(value);
  } else if (key == "mode") {
    const auto v = detail::trim(value);
    if (v == "sweep") c.mode = RunMode::Sweep;
    else if (v == "histogram") c.mode = RunMode::Histogram;
    else if (v == "trace") c.mode = RunMode::Trace;
    else throw ConfigError(key, "unknown mode '" + v + "' (sweep, histogram, trace)");
  } else if (key == "jobs") {
    c.jobs = parse_number<unsigned>(key, value);
  } else if (key == "histogram-sampling") {
    const auto v = detail::trim(value);
    if (v == "settled") c.histogram_sampling = SnirSampling::Settled;
    else if (v == "initial") c.histogram_sampling = SnirSampling::Initial;
    else throw ConfigError(key, "unknown sampling '" + v + "' (settled, initial)");
  } else if (key == "fixture") {
    c.fixture = detail::trim(value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

/// Checks every invariant; throws ConfigError naming the first bad key.
inline void validate(const ExperimentConfig& c) {
  if (c.params.degree < 2) throw ConfigError("degree", "must be >= 2");
  if (c.params.max_sic_iterations < 1) throw ConfigError("imax", "must be >= 1");
  if (!(c.params.rate > 0.0)) throw ConfigError("rate", "must be > 0");
  if (!(c.g_step > 0.0)) throw ConfigError("g-step", "must be > 0");
  if (!(c.g_min >= 0.0)) throw ConfigError("g-min", "must be >= 0");
  if (!(c.g_max >= c.g_min)) throw ConfigError("g-max", "must be >= g-min");
  for (const auto g : c.g_list)
    if (!(g >= 0.0)) throw ConfigError("g-list", "loads must be >= 0");
  if (!(c.g >= 0.0)) throw ConfigError("g", "must be >= 0");
  if (c.frames < 1) throw ConfigError("frames", "must be >= 1");
  if (c.out.empty()) throw ConfigError("out", "output path required");
  for (const auto p : c.protocols) {
    try {
      derive_geometry(c.params_for(p, c.models.front()));
    } catch (const InvalidParams& e) {
      throw ConfigError("packet-bits", e.what());
    }
  }
  if (!c.fixture.empty()) {
    try {
      if (!fixtures::by_name(c.fixture, c.params).has_value())
        throw ConfigError("fixture",
                          "unknown fixture '" + c.fixture + "' (cra-loop, crdsa-loop, sic-chain)");
    } catch (const InvalidParams& e) {
      throw ConfigError("fixture", std::string("does not fit this frame: ") + e.what());
    }
  }
}

/// key=value text, one setting per line; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& c, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    apply_setting(c, detail::trim(std::string_view(t).substr(0, eq)),
                  std::string_view(t).substr(eq + 1));
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(c, buf.str());
}

/// Environment name for a key: "snr-db" -> "<prefix>SNR_DB".
inline std::string env_name(const std::string& prefix, const std::string& key) {
  std::string name = prefix;
  for (const char ch : key)
    name.push_back(ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return name;
}

inline void apply_environment(ExperimentConfig& c, const std::string& prefix = "ECRA_") {
  for (const auto& key : config_keys())
    if (const char* v = std::getenv(env_name(prefix, key).c_str())) apply_setting(c, key, v);
}

inline std::string serialize(const ExperimentConfig& c) {
  using detail::format_double;
  auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& it : items) {
      if (!s.empty()) s += ',';
      s += fmt(it);
    }
    return s;
  };
  std::ostringstream os;
  os << "protocol = " << join(c.protocols, [](Protocol p) { return std::string(to_string(p)); }) << '\n'
     << "model = " << join(c.models, [](DecodeModelKind m) { return std::string(to_string(m)); }) << '\n'
     << "rate = " << format_double(c.params.rate) << '\n'
     << "snr-db = " << format_double(c.params.snr_db) << '\n'
     << "frame-s = " << format_double(c.params.frame_duration_s) << '\n'
     << "symbol-s = " << format_double(c.params.symbol_duration_s) << '\n'
     << "packet-bits = " << c.params.packet_bits << '\n'
     << "degree = " << c.params.degree << '\n'
     << "imax = " << c.params.max_sic_iterations << '\n'
     << "g-min = " << format_double(c.g_min) << '\n'
     << "g-max = " << format_double(c.g_max) << '\n'
     << "g-step = " << format_double(c.g_step) << '\n'
     << "g-list = " << join(c.g_list, [](double g) { return format_double(g); }) << '\n'
     << "g = " << format_double(c.g) << '\n'
     << "frames = " << c.frames << '\n'
     << "seed = " << c.seed << '\n'
     << "out = " << c.out << '\n'
     << "mode = " << to_string(c.mode) << '\n'
     << "jobs = " << c.jobs << '\n'
     << "histogram-sampling = " << to_string(c.histogram_sampling) << '\n'
     << "fixture = " << c.fixture << '\n';
  return os.str();
}

}  // namespace ecra
