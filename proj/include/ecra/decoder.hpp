#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ecra/frame_model.hpp"
#include "ecra/interference.hpp"

namespace ecra {

/// SNIR at which log2(1 + SNIR) equals the rate.
inline double shannon_threshold(double rate) { return std::exp2(rate) - 1.0; }

/// Gallager E0 for Gaussian inputs on the complex AWGN channel, in bits/symbol.
inline double gaussian_e0(double rho, double snir) {
  return rho * std::log2(1.0 + snir / (1.0 + rho));
}

/// Random-coding exponent Er(R) = max over rho in [0,1] of E0(rho) - rho R.
/// E0 is concave in rho, so golden-section search finds the maximum.
inline double random_coding_exponent(double snir, double rate) {
  if (std::log2(1.0 + snir) <= rate) return 0.0;
  auto f = [&](double rho) { return gaussian_e0(rho, snir) - rho * rate; };
  constexpr double inv_phi = 0.6180339887498949;
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 80; ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    }
  }
  return std::max({0.0, f(0.5 * (a + b)), f(1.0)});
}

/// Upper bound on block error probability for a length-n random code.
inline double rcb_per(double snir, double rate, std::int64_t block_symbols) {
  if (!(snir > 0.0)) return 1.0;
  const double exponent = random_coding_exponent(snir, rate);
  return std::min(1.0, std::exp2(-static_cast<double>(block_symbols) * exponent));
}

struct DecodeModel {
  DecodeModelKind kind = DecodeModelKind::ShannonBound;
  double rate = 2.0;
  std::int64_t block_symbols = 500;

  static DecodeModel from_params(const SystemParams& p) {
    return DecodeModel{p.decode_model, p.rate, derive_geometry(p).packet_symbols};
  }
};

enum class Decision { Success, Failure };

/// `user_draw` is the per-user uniform fixed at frame creation, so for a given
/// user the outcome is monotone in SNIR.
inline Decision decide(const DecodeModel& model, double snir, double user_draw) {
  if (model.kind == DecodeModelKind::ShannonBound) {
    // Relative slack absorbs rounding at exact threshold hits (inclusive boundary).
    return snir >= shannon_threshold(model.rate) * (1.0 - 1e-12) ? Decision::Success
                                                                  : Decision::Failure;
  }
  return user_draw >= rcb_per(snir, model.rate, model.block_symbols) ? Decision::Success
                                                                      : Decision::Failure;
}

/// Memoized decide() for one (model, channel, packet length). Under equal power
/// the SNIR depends only on the integer interference total over the packet, so
/// PER is tabulated per total up to the first total where decoding is hopeless.
class DecisionTable {
public:
  DecisionTable(const DecodeModel& model, const ChannelModel& channel, std::int64_t packet_symbols)
      : model_(model), channel_(channel), packet_symbols_(packet_symbols) {
    const std::int64_t cap = 256 * packet_symbols_;
    for (std::int64_t k = 0;; ++k) {
      if (k == cap) {
        capped_ = true;
        break;
      }
      const double snir = snir_for_total(k);
      double per = 1.0;
      if (model_.kind == DecodeModelKind::ShannonBound)
        per = decide(model_, snir, 0.0) == Decision::Success ? 0.0 : 1.0;
      else
        per = rcb_per(snir, model_.rate, model_.block_symbols);
      if (per >= 1.0) break;
      per_.push_back(per);
    }
  }

  double snir_for_total(std::int64_t total) const {
    return snir_from_ratio(static_cast<double>(total) / static_cast<double>(packet_symbols_),
                           channel_)
        .snir_linear;
  }

  double per_for_total(std::int64_t total) const {
    if (total < static_cast<std::int64_t>(per_.size())) return per_[static_cast<std::size_t>(total)];
    if (!capped_) return 1.0;
    if (model_.kind == DecodeModelKind::ShannonBound)
      return decide(model_, snir_for_total(total), 0.0) == Decision::Success ? 0.0 : 1.0;
    return rcb_per(snir_for_total(total), model_.rate, model_.block_symbols);
  }

  Decision decide_total(std::int64_t total, double user_draw) const {
    if (total >= static_cast<std::int64_t>(per_.size()))
      return capped_ ? decide(model_, snir_for_total(total), user_draw) : Decision::Failure;
    if (model_.kind == DecodeModelKind::ShannonBound) return Decision::Success;
    return user_draw >= per_[static_cast<std::size_t>(total)] ? Decision::Success
                                                              : Decision::Failure;
  }

  const DecodeModel& model() const { return model_; }
  const ChannelModel& channel() const { return channel_; }
  std::int64_t packet_symbols() const { return packet_symbols_; }

private:
  DecodeModel model_;
  ChannelModel channel_;
  std::int64_t packet_symbols_;
  std::vector<double> per_;
  bool capped_ = false;
};

/// PER-vs-SNIR curve as CSV: snir_db,per_rcb,per_sb.
inline void write_per_curve_csv(std::ostream& os, double rate, std::int64_t block_symbols,
                                double db_lo, double db_hi, double db_step) {
  os << "snir_db,per_rcb,per_sb\n";
  const double sb = shannon_threshold(rate);
  for (double db = db_lo; db <= db_hi + 1e-9; db += db_step) {
    const double s = std::pow(10.0, db / 10.0);
    os << db << ',' << rcb_per(s, rate, block_symbols) << ',' << (s >= sb ? 0.0 : 1.0) << '\n';
  }
}

}  // namespace ecra
