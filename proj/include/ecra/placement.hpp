#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ecra/frame_model.hpp"

namespace ecra {

using Rng = std::mt19937_64;

struct ReplicaPlacement {
  std::int64_t user_id = 0;
  /// Symbol offsets (CRA/ECRA) or slot indices (CRDSA), in replica order.
  std::vector<std::int64_t> starts;

  bool operator==(const ReplicaPlacement&) const = default;
};

struct FrameInstance {
  SystemParams params;
  FrameGeometry geometry;
  std::vector<ReplicaPlacement> placements;
  /// One uniform [0,1) draw per user, fixed for the lifetime of the frame.
  std::vector<double> decode_draws;
  std::uint64_t rng_seed = 0;

  std::size_t users() const { return placements.size(); }
  bool slotted() const { return params.protocol == Protocol::CRDSA; }

  /// First symbol of replica r of user u, whatever the placement granularity.
  std::int64_t symbol_start(std::size_t user, std::size_t replica) const {
    const auto s = placements[user].starts[replica];
    return slotted() ? s * geometry.packet_symbols : s;
  }

  bool operator==(const FrameInstance&) const = default;
};

// splitmix64 finalizer; the building block for counter-based seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for frame `frame_index` of load point `load_index`. Independent of the
/// order frames are executed in.
inline std::uint64_t derive_frame_seed(std::uint64_t master_seed, std::uint64_t load_index,
                                       std::uint64_t frame_index) {
  return mix64(mix64(mix64(master_seed) ^ load_index) ^ (frame_index * 0xd1b54a32d192ed03ULL));
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

namespace detail {

// Floyd's algorithm: k distinct values from [0, n), returned in random order.
inline std::vector<std::int64_t> sample_distinct(Rng& rng, std::int64_t n, int k) {
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int64_t j = n - k; j < n; ++j) {
    const auto t = uniform_int(rng, 0, j);
    if (std::find(out.begin(), out.end(), t) == out.end())
      out.push_back(t);
    else
      out.push_back(j);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// d packet starts on [0, F - t] with pairwise distance >= t, uniform over all
// such configurations. Sorted starts s_i map one-to-one onto strictly increasing
// y_i = s_i - i (t - 1), so drawing d distinct y values and mapping back is
// exactly rejection sampling without the rejections.
inline std::vector<std::int64_t> sample_separated(Rng& rng, std::int64_t frame, std::int64_t t,
                                                  int d) {
  const std::int64_t span = frame - t - (d - 1) * (t - 1) + 1;
  auto ys = sample_distinct(rng, span, d);
  std::vector<std::int64_t> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::int64_t> starts(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto rank = std::lower_bound(sorted.begin(), sorted.end(), ys[i]) - sorted.begin();
    starts[i] = ys[i] + rank * (t - 1);
  }
  return starts;
}

inline void draw_decode_luck(FrameInstance& frame, Rng& rng) {
  frame.decode_draws.resize(frame.placements.size());
  for (auto& u : frame.decode_draws) u = uniform01(rng);
}

inline FrameInstance empty_frame(const SystemParams& params, std::uint64_t seed) {
  FrameInstance f;
  f.params = params;
  f.geometry = derive_geometry(params);
  f.rng_seed = seed;
  return f;
}

}  // namespace detail

/// Unslotted placement: every user gets `degree` starts anywhere in the frame,
/// with its own replicas never overlapping and no packet crossing the frame end.
inline FrameInstance place_cra(const SystemParams& params, std::int64_t users, std::uint64_t seed) {
  auto frame = detail::empty_frame(params, seed);
  if (frame.slotted()) throw InvalidParams("place_cra called for a slotted protocol");
  Rng rng(seed);
  const auto& g = frame.geometry;
  frame.placements.reserve(static_cast<std::size_t>(users));
  for (std::int64_t u = 0; u < users; ++u)
    frame.placements.push_back(
        {u, detail::sample_separated(rng, g.frame_symbols, g.packet_symbols, params.degree)});
  detail::draw_decode_luck(frame, rng);
  return frame;
}

/// Slotted placement: `degree` distinct slots per user, uniform without replacement.
inline FrameInstance place_crdsa(const SystemParams& params, std::int64_t users,
                                 std::uint64_t seed) {
  auto frame = detail::empty_frame(params, seed);
  if (!frame.slotted()) throw InvalidParams("place_crdsa called for an unslotted protocol");
  const auto& g = frame.geometry;
  if (g.n_slots < params.degree)
    throw InvalidParams("frame has " + std::to_string(g.n_slots) + " slots, fewer than degree " +
                        std::to_string(params.degree));
  Rng rng(seed);
  frame.placements.reserve(static_cast<std::size_t>(users));
  for (std::int64_t u = 0; u < users; ++u)
    frame.placements.push_back({u, detail::sample_distinct(rng, g.n_slots, params.degree)});
  detail::draw_decode_luck(frame, rng);
  return frame;
}

inline FrameInstance place_frame(const SystemParams& params, std::int64_t users,
                                 std::uint64_t seed) {
  return params.protocol == Protocol::CRDSA ? place_crdsa(params, users, seed)
                                            : place_cra(params, users, seed);
}

/// Hand-built frame from explicit starts (symbols, or slots for CRDSA).
inline FrameInstance make_frame(const SystemParams& params,
                                const std::vector<std::vector<std::int64_t>>& starts,
                                std::vector<double> draws = {}) {
  auto frame = detail::empty_frame(params, 0);
  const auto& g = frame.geometry;
  for (std::size_t u = 0; u < starts.size(); ++u) {
    if (starts[u].size() != static_cast<std::size_t>(params.degree))
      throw InvalidParams("user " + std::to_string(u) + " does not have degree replicas");
    const auto limit = frame.slotted() ? g.n_slots - 1 : g.frame_symbols - g.packet_symbols;
    const auto min_gap = frame.slotted() ? 1 : g.packet_symbols;
    for (std::size_t a = 0; a < starts[u].size(); ++a) {
      if (starts[u][a] < 0 || starts[u][a] > limit)
        throw InvalidParams("replica start out of frame for user " + std::to_string(u));
      for (std::size_t b = a + 1; b < starts[u].size(); ++b)
        if (std::abs(starts[u][a] - starts[u][b]) < min_gap)
          throw InvalidParams("replicas of user " + std::to_string(u) + " overlap");
    }
    frame.placements.push_back({static_cast<std::int64_t>(u), starts[u]});
  }
  if (draws.empty()) draws.assign(starts.size(), 0.5);
  if (draws.size() != starts.size()) throw InvalidParams("one decode draw per user required");
  frame.decode_draws = std::move(draws);
  return frame;
}

/// Debug dump: one line per replica, "user replica start".
inline void write_placement_trace(std::ostream& os, const FrameInstance& frame) {
  os << "# user replica start" << (frame.slotted() ? "_slot" : "_symbol") << '\n';
  for (const auto& p : frame.placements)
    for (std::size_t r = 0; r < p.starts.size(); ++r)
      os << p.user_id << ' ' << r << ' ' << p.starts[r] << '\n';
}

}  // namespace ecra
