#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecra {

/// Raised for any parameter combination that cannot describe a valid frame.
class InvalidParams : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Protocol { CRA, ECRA, CRDSA };
enum class DecodeModelKind { ShannonBound, RandomCodingBound };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::CRA: return "CRA";
    case Protocol::ECRA: return "ECRA";
    case Protocol::CRDSA: return "CRDSA";
  }
  return "?";
}

inline std::string_view to_string(DecodeModelKind k) {
  return k == DecodeModelKind::ShannonBound ? "SB" : "RCB";
}

inline std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "CRA" || s == "cra") return Protocol::CRA;
  if (s == "ECRA" || s == "ecra") return Protocol::ECRA;
  if (s == "CRDSA" || s == "crdsa") return Protocol::CRDSA;
  return std::nullopt;
}

inline std::optional<DecodeModelKind> parse_decode_model(std::string_view s) {
  if (s == "SB" || s == "sb" || s == "shannon") return DecodeModelKind::ShannonBound;
  if (s == "RCB" || s == "rcb" || s == "random-coding") return DecodeModelKind::RandomCodingBound;
  return std::nullopt;
}

/// Full experiment configuration for one protocol and one decoding model.
/// Defaults are the R = 2, 10 dB reference campaign.
struct SystemParams {
  double rate = 2.0;                 // bits per symbol, R = Rc * log2(M)
  double snr_db = 10.0;              // nominal per-user SNR
  double frame_duration_s = 100e-3;  // Tf
  double symbol_duration_s = 1e-6;   // Ts
  std::int64_t packet_bits = 1000;   // Lp
  int degree = 2;                    // replicas per user per frame
  int max_sic_iterations = 10;       // Imax
  Protocol protocol = Protocol::ECRA;
  DecodeModelKind decode_model = DecodeModelKind::ShannonBound;

  bool operator==(const SystemParams&) const = default;
};

/// Equal-power channel: every user arrives with P = 1.
struct ChannelModel {
  double signal_power = 1.0;
  double noise_power = 0.1;

  static ChannelModel from_snr_db(double snr_db) {
    return ChannelModel{1.0, 1.0 / std::pow(10.0, snr_db / 10.0)};
  }
  double snr_linear() const { return signal_power / noise_power; }
};

struct FrameGeometry {
  std::int64_t frame_symbols = 0;   // F
  std::int64_t packet_symbols = 0;  // t_s
  std::int64_t n_slots = 0;         // floor(F / t_s)

  bool operator==(const FrameGeometry&) const = default;
};

inline FrameGeometry derive_geometry(const SystemParams& p) {
  if (!(p.rate > 0.0) || !std::isfinite(p.rate)) throw InvalidParams("rate must be > 0");
  if (!(p.frame_duration_s > 0.0)) throw InvalidParams("frame duration must be > 0");
  if (!(p.symbol_duration_s > 0.0)) throw InvalidParams("symbol duration must be > 0");
  if (p.packet_bits <= 0) throw InvalidParams("packet bits must be > 0");
  if (p.degree < 2) throw InvalidParams("degree must be >= 2");
  if (p.max_sic_iterations < 1) throw InvalidParams("max SIC iterations must be >= 1");
  if (!std::isfinite(p.snr_db)) throw InvalidParams("snr_db must be finite");

  const double symbols = static_cast<double>(p.packet_bits) / p.rate;
  const double rounded = std::round(symbols);
  if (rounded < 1.0 || std::abs(symbols - rounded) > 1e-9 * std::max(1.0, symbols))
    throw InvalidParams("packet length Lp / R = " + std::to_string(symbols) +
                        " is not a positive integer number of symbols");

  FrameGeometry g;
  g.packet_symbols = static_cast<std::int64_t>(rounded);
  g.frame_symbols = std::llround(p.frame_duration_s / p.symbol_duration_s);
  if (g.frame_symbols < p.degree * g.packet_symbols)
    throw InvalidParams("frame of " + std::to_string(g.frame_symbols) +
                        " symbols cannot hold " + std::to_string(p.degree) +
                        " replicas of " + std::to_string(g.packet_symbols) + " symbols");
  g.n_slots = g.frame_symbols / g.packet_symbols;
  return g;
}

/// Offered load G = Nu * Lp * Ts / (Tf * R) for an integer user count.
inline double load_for_users(const SystemParams& p, std::int64_t users) {
  return static_cast<double>(users) * static_cast<double>(p.packet_bits) * p.symbol_duration_s /
         (p.frame_duration_s * p.rate);
}

/// Nearest-integer user count for a normalized load; G < 0 is rejected.
inline std::int64_t users_for_load(const SystemParams& p, double load) {
  if (!(load >= 0.0)) throw InvalidParams("load G must be >= 0");
  return std::llround(load * p.frame_duration_s * p.rate /
                      (static_cast<double>(p.packet_bits) * p.symbol_duration_s));
}

}  // namespace ecra
