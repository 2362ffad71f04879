#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ecra/frame_model.hpp"
#include "ecra/placement.hpp"

namespace ecra {

/// occupancy[k] = number of live replica symbols covering frame symbol k.
using Occupancy = std::vector<std::int32_t>;

/// Per-symbol count of foreign replica symbols overlapping one packet.
struct InterferenceProfile {
  std::vector<std::int32_t> counts;

  std::int64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }
  /// Mean interfering replicas per symbol (the interference ratio x).
  double ratio() const {
    return counts.empty() ? 0.0 : static_cast<double>(total()) / static_cast<double>(counts.size());
  }
  bool operator==(const InterferenceProfile&) const = default;
};

struct SnirReport {
  double x = 0.0;
  double snir_linear = 0.0;
  double snir_db = 0.0;
};

/// Occupancy over the users flagged in `active` (empty span means all users).
inline Occupancy build_occupancy(const FrameInstance& frame, std::span<const bool> active = {}) {
  const auto frame_len = static_cast<std::size_t>(frame.geometry.frame_symbols);
  const auto t = frame.geometry.packet_symbols;
  std::vector<std::int32_t> marks(frame_len + 1, 0);
  for (std::size_t u = 0; u < frame.users(); ++u) {
    if (!active.empty() && !active[u]) continue;
    for (std::size_t r = 0; r < frame.placements[u].starts.size(); ++r) {
      const auto s = frame.symbol_start(u, r);
      ++marks[static_cast<std::size_t>(s)];
      --marks[static_cast<std::size_t>(s + t)];
    }
  }
  Occupancy occ(frame_len);
  std::int32_t run = 0;
  for (std::size_t k = 0; k < frame_len; ++k) occ[k] = run += marks[k];
  return occ;
}

/// Sum of foreign interference over a live packet starting at `start`.
inline std::int64_t interference_sum(const Occupancy& occ, std::int64_t start, std::int64_t t) {
  const auto* p = occ.data() + start;
  std::int64_t sum = 0;
  for (std::int64_t s = 0; s < t; ++s) sum += p[s];
  return sum - t;
}

/// Length of the intersection of two packets of `t` symbols.
inline std::int64_t overlap(std::int64_t a, std::int64_t b, std::int64_t t) {
  return std::max<std::int64_t>(0, t - std::abs(a - b));
}

inline InterferenceProfile replica_profile(const FrameInstance& frame, const Occupancy& occ,
                                           std::size_t user, std::size_t replica) {
  const auto t = frame.geometry.packet_symbols;
  const auto start = frame.symbol_start(user, replica);
  InterferenceProfile prof;
  prof.counts.resize(static_cast<std::size_t>(t));
  for (std::int64_t s = 0; s < t; ++s)
    prof.counts[static_cast<std::size_t>(s)] = occ[static_cast<std::size_t>(start + s)] - 1;
  return prof;
}

/// Elementwise minimum across the replicas of one user.
inline InterferenceProfile combined_profile(std::span<const InterferenceProfile> profiles) {
  InterferenceProfile out;
  if (profiles.empty()) return out;
  out = profiles.front();
  for (const auto& p : profiles.subspan(1))
    for (std::size_t s = 0; s < out.counts.size(); ++s)
      out.counts[s] = std::min(out.counts[s], p.counts[s]);
  return out;
}

/// Which replica supplies each symbol of the combined packet; ties go to the
/// lowest replica index.
inline std::vector<std::size_t> combined_source(std::span<const InterferenceProfile> profiles) {
  std::vector<std::size_t> src(profiles.empty() ? 0 : profiles.front().counts.size(), 0);
  for (std::size_t s = 0; s < src.size(); ++s)
    for (std::size_t r = 1; r < profiles.size(); ++r)
      if (profiles[r].counts[s] < profiles[src[s]].counts[s]) src[s] = r;
  return src;
}

/// Total interference of user u's combined packet, read straight from occupancy.
inline std::int64_t combined_interference_sum(const FrameInstance& frame, const Occupancy& occ,
                                              std::size_t user) {
  const auto t = frame.geometry.packet_symbols;
  const auto d = frame.placements[user].starts.size();
  std::int64_t sum = 0;
  for (std::int64_t s = 0; s < t; ++s) {
    std::int32_t best = occ[static_cast<std::size_t>(frame.symbol_start(user, 0) + s)];
    for (std::size_t r = 1; r < d && best > 1; ++r)
      best = std::min(best, occ[static_cast<std::size_t>(frame.symbol_start(user, r) + s)]);
    sum += best - 1;
  }
  return sum;
}

inline SnirReport snir_from_ratio(double x, const ChannelModel& ch) {
  SnirReport rep;
  rep.x = x;
  rep.snir_linear = ch.signal_power / (x * ch.signal_power + ch.noise_power);
  rep.snir_db = 10.0 * std::log10(rep.snir_linear);
  return rep;
}

inline SnirReport snir_of(const InterferenceProfile& profile, const ChannelModel& ch) {
  return snir_from_ratio(profile.ratio(), ch);
}

}  // namespace ecra
