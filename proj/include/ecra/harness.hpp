#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ecra/decoder.hpp"
#include "ecra/frame_model.hpp"
#include "ecra/interference.hpp"
#include "ecra/placement.hpp"
#include "ecra/sic_engine.hpp"

namespace ecra {

struct FrameOutcome {
  std::int64_t users = 0;
  std::int64_t decoded = 0;
};

inline FrameOutcome simulate_frame(const SystemParams& params, std::int64_t users,
                                   std::uint64_t frame_seed, const DecisionTable& table) {
  if (users == 0) return {};
  const auto frame = place_frame(params, users, frame_seed);
  const auto state = run_protocol(frame, table);
  return {users, static_cast<std::int64_t>(state.decoded_count())};
}

inline FrameOutcome simulate_frame(const SystemParams& params, double load,
                                   std::uint64_t frame_seed) {
  return simulate_frame(params, users_for_load(params, load), frame_seed,
                        decision_table_for(params));
}

struct SweepStats {
  SystemParams params;
  double load_nominal = 0.0;
  double load_effective = 0.0;
  std::int64_t users = 0;
  std::int64_t frames = 0;
  std::int64_t lost = 0;             // P_err
  std::int64_t lost_squares = 0;     // sum over frames of lost^2, for the CI
  double per = 0.0;
  double per_ci95 = 0.0;
  double throughput = 0.0;

  double per_floor() const {
    return users * frames > 0 ? 1.0 / static_cast<double>(users * frames) : 1.0;
  }
  bool operator==(const SweepStats&) const = default;
};

namespace detail {

/// Runs body(frame_index, worker) for every frame on up to `jobs` threads.
template <class Body>
void parallel_frames(std::int64_t frames, unsigned jobs, Body&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::int64_t>(1, frames))));
  if (jobs == 1) {
    for (std::int64_t i = 0; i < frames; ++i) body(i, 0u);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (std::int64_t i; (i = next.fetch_add(1)) < frames;) body(i, w);
    });
  for (auto& t : pool) t.join();
}

inline void finalize(SweepStats& s) {
  const double packets = static_cast<double>(s.users) * static_cast<double>(s.frames);
  if (packets == 0.0) {
    s.per = 0.0;
    s.per_ci95 = 0.0;
    s.throughput = 0.0;
    return;
  }
  s.per = static_cast<double>(s.lost) / packets;
  // Normal approximation over per-frame PER samples.
  const double n = static_cast<double>(s.frames);
  const double u = static_cast<double>(s.users);
  const double mean = static_cast<double>(s.lost) / (n * u);
  const double mean_sq = static_cast<double>(s.lost_squares) / (n * u * u);
  const double var = n > 1 ? std::max(0.0, (mean_sq - mean * mean) * n / (n - 1)) : 0.0;
  s.per_ci95 = 1.96 * std::sqrt(var / n);
  s.throughput = (1.0 - s.per) * s.load_effective;
}

}  // namespace detail

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// One load point: `frames` independent frames seeded from (master, load index, frame index).
inline SweepStats simulate_load(const SystemParams& params, double load, std::size_t load_index,
                                std::int64_t frames, std::uint64_t master_seed,
                                unsigned jobs = default_jobs()) {
  if (frames < 1) throw InvalidParams("number of frames must be >= 1");
  SweepStats s;
  s.params = params;
  s.load_nominal = load;
  s.users = users_for_load(params, load);
  s.load_effective = load_for_users(params, s.users);
  s.frames = frames;
  const auto table = decision_table_for(params);
  std::vector<std::int64_t> lost(jobs, 0), lost_sq(jobs, 0);
  detail::parallel_frames(frames, jobs, [&](std::int64_t f, unsigned w) {
    const auto seed = derive_frame_seed(master_seed, load_index, static_cast<std::uint64_t>(f));
    const auto out = simulate_frame(params, s.users, seed, table);
    const auto l = out.users - out.decoded;
    lost[w] += l;
    lost_sq[w] += l * l;
  });
  for (unsigned w = 0; w < lost.size(); ++w) {
    s.lost += lost[w];
    s.lost_squares += lost_sq[w];
  }
  detail::finalize(s);
  return s;
}

inline std::vector<SweepStats> sweep(const SystemParams& params, const std::vector<double>& loads,
                                     std::int64_t frames, std::uint64_t master_seed,
                                     unsigned jobs = default_jobs()) {
  std::vector<SweepStats> out;
  out.reserve(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i)
    out.push_back(simulate_load(params, loads[i], i, frames, master_seed, jobs));
  return out;
}

/// Peak of a throughput curve.
inline const SweepStats& peak_throughput(const std::vector<SweepStats>& curve) {
  if (curve.empty()) throw InvalidParams("empty sweep");
  return *std::max_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
    return a.throughput < b.throughput;
  });
}

/// Which SNIR each histogram sample records.
enum class SnirSampling {
  /// When the receiver settles the user: just before its cancellation, or at
  /// the end of the run if it is never decoded. CRA samples come from the CRA
  /// receiver, ECRA samples from the ECRA receiver, on the same placement.
  Settled,
  /// On the full frame before any cancellation.
  Initial,
};

/// SNIR densities of individual replicas (CRA view) and of combined packets
/// (ECRA view).
struct SnirHistogram {
  double nominal_db = 0.0;
  double bin_width_db = 0.25;
  std::vector<std::int64_t> cra_counts;   // bin 0 is centred on nominal_db, bins descend
  std::vector<std::int64_t> ecra_counts;

  std::size_t bins() const { return std::max(cra_counts.size(), ecra_counts.size()); }
  double bin_hi(std::size_t b) const {
    return nominal_db + 0.5 * bin_width_db - static_cast<double>(b) * bin_width_db;
  }
  double bin_lo(std::size_t b) const { return bin_hi(b) - bin_width_db; }

  static double density(const std::vector<std::int64_t>& c, std::size_t b, double width) {
    std::int64_t total = 0;
    for (auto v : c) total += v;
    return (b < c.size() && total) ? static_cast<double>(c[b]) / (static_cast<double>(total) * width)
                                   : 0.0;
  }
  double density_cra(std::size_t b) const { return density(cra_counts, b, bin_width_db); }
  double density_ecra(std::size_t b) const { return density(ecra_counts, b, bin_width_db); }

  /// Empirical CDF at the lower edge of bin b: fraction of samples below bin_lo(b).
  static double cdf_below(const std::vector<std::int64_t>& c, std::size_t b) {
    std::int64_t total = 0, above = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      total += c[i];
      if (i <= b) above += c[i];
    }
    return total ? 1.0 - static_cast<double>(above) / static_cast<double>(total) : 0.0;
  }
};

inline std::size_t snir_bin(double snir_db, double nominal_db, double width) {
  const double b = std::floor((nominal_db + 0.5 * width - snir_db) / width);
  return b < 0 ? 0 : static_cast<std::size_t>(b);
}

inline SnirHistogram snir_histogram(SystemParams params, double load, std::int64_t frames,
                                    std::uint64_t master_seed, unsigned jobs = default_jobs(),
                                    SnirSampling sampling = SnirSampling::Settled,
                                    double bin_width_db = 0.25) {
  if (frames < 1) throw InvalidParams("number of frames must be >= 1");
  params.protocol = Protocol::CRA;
  const auto users = users_for_load(params, load);
  const auto channel = ChannelModel::from_snr_db(params.snr_db);
  const auto t = derive_geometry(params).packet_symbols;
  const auto table = decision_table_for(params);
  SnirHistogram h;
  h.nominal_db = params.snr_db;
  h.bin_width_db = bin_width_db;

  std::vector<SnirHistogram> parts(jobs);
  auto bump = [&](std::vector<std::int64_t>& c, std::int64_t total) {
    const auto db =
        snir_from_ratio(static_cast<double>(total) / static_cast<double>(t), channel).snir_db;
    const auto b = snir_bin(db, h.nominal_db, bin_width_db);
    if (b >= c.size()) c.resize(b + 1, 0);
    ++c[b];
  };
  detail::parallel_frames(frames, jobs, [&](std::int64_t f, unsigned w) {
    const auto frame =
        place_frame(params, users, derive_frame_seed(master_seed, 0, static_cast<std::uint64_t>(f)));
    if (sampling == SnirSampling::Initial) {
      const auto occ = build_occupancy(frame);
      for (std::size_t u = 0; u < frame.users(); ++u) {
        for (std::size_t r = 0; r < frame.placements[u].starts.size(); ++r)
          bump(parts[w].cra_counts, interference_sum(occ, frame.symbol_start(u, r), t));
        bump(parts[w].ecra_counts, combined_interference_sum(frame, occ, u));
      }
      return;
    }
    SettleSnapshot cra, ecra;
    SicEngine cra_rx(frame, table);
    cra_rx.record_settle(&cra);
    cra_rx.run_sic(params.max_sic_iterations);
    cra_rx.settle_remaining();
    SicEngine ecra_rx(frame, table);
    ecra_rx.record_settle(&ecra);
    ecra_rx.run_ecra(params.max_sic_iterations);
    ecra_rx.settle_remaining();
    for (const auto v : cra.replica_totals) bump(parts[w].cra_counts, v);
    for (const auto v : ecra.combined_totals) bump(parts[w].ecra_counts, v);
  });

  auto merge = [](std::vector<std::int64_t>& into, const std::vector<std::int64_t>& from) {
    if (from.size() > into.size()) into.resize(from.size(), 0);
    for (std::size_t b = 0; b < from.size(); ++b) into[b] += from[b];
  };
  for (const auto& p : parts) {
    merge(h.cra_counts, p.cra_counts);
    merge(h.ecra_counts, p.ecra_counts);
  }
  const auto n = h.bins();
  h.cra_counts.resize(n, 0);
  h.ecra_counts.resize(n, 0);
  return h;
}

/// "<floor" when no packet was lost, so a zero is never read as an exact PER.
inline std::string format_per(const SweepStats& s) {
  std::ostringstream os;
  if (s.lost == 0)
    os << '<' << std::setprecision(6) << s.per_floor();
  else
    os << std::setprecision(6) << s.per;
  return os.str();
}

inline void write_sweep_csv_header(std::ostream& os) {
  os << "protocol,model,R,snr_db,G_nominal,G_effective,N_u,N_f,P_err,per,per_ci95,throughput\n";
}

inline void write_sweep_csv_row(std::ostream& os, const SweepStats& s) {
  os << to_string(s.params.protocol) << ',' << to_string(s.params.decode_model) << ','
     << s.params.rate << ',' << s.params.snr_db << ',' << s.load_nominal << ',' << s.load_effective
     << ',' << s.users << ',' << s.frames << ',' << s.lost << ',' << format_per(s) << ','
     << s.per_ci95 << ',' << s.throughput << '\n';
}

inline void write_histogram_csv(std::ostream& os, const SnirHistogram& h) {
  os << "bin_lo_db,bin_hi_db,density_cra,density_ecra\n";
  for (std::size_t b = h.bins(); b-- > 0;)
    os << h.bin_lo(b) << ',' << h.bin_hi(b) << ',' << h.density_cra(b) << ',' << h.density_ecra(b)
       << '\n';
}

}  // namespace ecra
