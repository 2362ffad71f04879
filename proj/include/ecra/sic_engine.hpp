#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <vector>

#include "ecra/decoder.hpp"
#include "ecra/interference.hpp"
#include "ecra/placement.hpp"

namespace ecra {

struct DecodingState {
  FrameInstance frame;
  std::vector<bool> decoded;
  /// Live occupancy: decoded users no longer contribute.
  Occupancy occupancy;
  /// Passes executed so far, step-1 and step-2 sweeps alike.
  int iteration = 0;
  int combine_passes = 0;

  std::size_t decoded_count() const {
    return static_cast<std::size_t>(std::count(decoded.begin(), decoded.end(), true));
  }
  bool all_decoded() const { return decoded_count() == decoded.size(); }
};

/// Interference totals seen by each user when the receiver settles it: just
/// before its cancellation, or at the end of the run if it is never decoded.
struct SettleSnapshot {
  std::vector<std::int64_t> replica_totals;  // user * degree + replica
  std::vector<std::int64_t> combined_totals;  // per user
};

/// Iterative SIC receiver with ideal cancellation, plus the ECRA combining
/// stage. Sequential by construction: every cancellation changes the SNIR seen
/// by the replicas visited after it.
class SicEngine {
public:
  SicEngine(FrameInstance frame, const DecisionTable& table, std::ostream* trace = nullptr)
      : table_(&table), trace_(trace) {
    state_.frame = std::move(frame);
    const auto& f = state_.frame;
    state_.decoded.assign(f.users(), false);
    state_.occupancy = build_occupancy(f);
    t_ = f.geometry.packet_symbols;
    d_ = f.users() ? f.placements.front().starts.size() : 0;

    order_.reserve(f.users() * d_);
    for (std::size_t u = 0; u < f.users(); ++u)
      for (std::size_t r = 0; r < d_; ++r) order_.push_back({f.symbol_start(u, r), u, r});
    std::sort(order_.begin(), order_.end(), [](const Ref& a, const Ref& b) {
      if (a.start != b.start) return a.start < b.start;
      if (a.user != b.user) return a.user < b.user;
      return a.replica < b.replica;
    });
    slot_of_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
      slot_of_[order_[i].user * d_ + order_[i].replica] = i;

    totals_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
      totals_[i] = interference_sum(state_.occupancy, order_[i].start, t_);
  }

  void record_settle(SettleSnapshot* snapshot) {
    settle_ = snapshot;
    if (settle_) {
      settle_->replica_totals.assign(order_.size(), 0);
      settle_->combined_totals.assign(state_.frame.users(), 0);
    }
  }

  /// Snapshot the users still undecoded; call once the run is over.
  void settle_remaining() {
    if (!settle_) return;
    for (std::size_t u = 0; u < state_.frame.users(); ++u)
      if (!state_.decoded[u]) snapshot(u);
  }

  const DecodingState& state() const { return state_; }
  DecodingState release() { return std::move(state_); }

  /// Live interference total over replica r of user u (incrementally maintained).
  std::int64_t replica_interference(std::size_t user, std::size_t replica) const {
    return totals_[slot_of_[user * d_ + replica]];
  }

  /// Step 1: scan replicas in start order, decode, cancel immediately.
  bool sic_pass() {
    ++state_.iteration;
    bool progressed = false;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const auto& ref = order_[i];
      if (state_.decoded[ref.user]) continue;
      const auto total = totals_[i];
      const auto outcome = table_->decide_total(total, state_.frame.decode_draws[ref.user]);
      if (trace_) trace_attempt("sic", ref.user, static_cast<int>(ref.replica), total, outcome);
      if (outcome == Decision::Success) {
        cancel(ref.user);
        progressed = true;
      }
    }
    return progressed;
  }

  /// Step 2: per remaining user, decode the least-interfered-symbol combination
  /// of its replicas.
  bool combine_pass() {
    ++state_.iteration;
    ++state_.combine_passes;
    bool progressed = false;
    for (const auto user : users_by_first_replica()) {
      if (state_.decoded[user]) continue;
      const auto total = combined_interference_sum(state_.frame, state_.occupancy, user);
      const auto outcome = table_->decide_total(total, state_.frame.decode_draws[user]);
      if (trace_) trace_attempt("combine", user, -1, total, outcome);
      if (outcome == Decision::Success) {
        cancel(user);
        progressed = true;
      }
    }
    return progressed;
  }

  /// Repeats step 1 until everyone is decoded, a pass stalls, or `max_passes`
  /// passes have run in this call.
  void run_sic(int max_passes) {
    for (int pass = 0; pass < max_passes && !state_.all_decoded(); ++pass)
      if (!sic_pass()) break;
  }

  /// Step 1 to a fixpoint, then alternate step 2 and step 1 while step 2 makes
  /// progress. Each step has its own budget: a step-1 run stops after
  /// `max_passes` passes, and at most `max_passes` step-2 sweeps run in total.
  void run_ecra(int max_passes) {
    while (true) {
      run_sic(max_passes);
      if (state_.all_decoded() || state_.combine_passes >= max_passes) return;
      if (!combine_pass()) return;
    }
  }

private:
  struct Ref {
    std::int64_t start;
    std::size_t user;
    std::size_t replica;
  };

  void snapshot(std::size_t user) {
    for (std::size_t r = 0; r < d_; ++r)
      settle_->replica_totals[user * d_ + r] = replica_interference(user, r);
    settle_->combined_totals[user] = combined_interference_sum(state_.frame, state_.occupancy, user);
  }

  void cancel(std::size_t user) {
    if (settle_) snapshot(user);
    state_.decoded[user] = true;
    for (std::size_t r = 0; r < d_; ++r) {
      const auto i = slot_of_[user * d_ + r];
      const auto start = order_[i].start;
      auto* occ = state_.occupancy.data() + start;
      for (std::int64_t s = 0; s < t_; ++s) --occ[s];
      for (auto j = i; j-- > 0 && start - order_[j].start < t_;)
        totals_[j] -= overlap(start, order_[j].start, t_);
      for (auto j = i + 1; j < order_.size() && order_[j].start - start < t_; ++j)
        totals_[j] -= overlap(start, order_[j].start, t_);
    }
    if (trace_) {
      *trace_ << "  cancel user " << user << " at";
      for (std::size_t r = 0; r < d_; ++r) *trace_ << ' ' << state_.frame.symbol_start(user, r);
      *trace_ << '\n';
    }
  }

  std::vector<std::size_t> users_by_first_replica() const {
    std::vector<std::size_t> users;
    std::vector<bool> seen(state_.frame.users(), false);
    for (const auto& ref : order_)
      if (!seen[ref.user]) {
        seen[ref.user] = true;
        users.push_back(ref.user);
      }
    return users;
  }

  void trace_attempt(const char* step, std::size_t user, int replica, std::int64_t total,
                     Decision outcome) const {
    const auto rep = snir_from_ratio(static_cast<double>(total) / static_cast<double>(t_),
                                     table_->channel());
    *trace_ << "pass " << state_.iteration << ' ' << step << " user " << user;
    if (replica >= 0)
      *trace_ << " replica " << replica << " start "
              << state_.frame.symbol_start(user, static_cast<std::size_t>(replica));
    else
      *trace_ << " combined";
    *trace_ << std::fixed << std::setprecision(4) << " x=" << rep.x << std::setprecision(2)
            << " snir_db=" << rep.snir_db << " -> "
            << (outcome == Decision::Success ? "decoded" : "failed") << '\n'
            << std::defaultfloat;
  }

  DecodingState state_;
  const DecisionTable* table_;
  std::ostream* trace_;
  SettleSnapshot* settle_ = nullptr;
  std::int64_t t_ = 0;
  std::size_t d_ = 0;
  std::vector<Ref> order_;
  std::vector<std::size_t> slot_of_;
  std::vector<std::int64_t> totals_;
};

inline DecisionTable decision_table_for(const SystemParams& params) {
  return DecisionTable(DecodeModel::from_params(params), ChannelModel::from_snr_db(params.snr_db),
                       derive_geometry(params).packet_symbols);
}

inline DecodingState run_sic(const FrameInstance& frame, const DecisionTable& table, int max_passes,
                             std::ostream* trace = nullptr) {
  SicEngine engine(frame, table, trace);
  engine.run_sic(max_passes);
  return engine.release();
}

inline DecodingState run_ecra(const FrameInstance& frame, const DecisionTable& table,
                              int max_passes, std::ostream* trace = nullptr) {
  SicEngine engine(frame, table, trace);
  engine.run_ecra(max_passes);
  return engine.release();
}

/// Dispatch on the frame's protocol; CRA and CRDSA share the plain SIC receiver.
inline DecodingState run_protocol(const FrameInstance& frame, const DecisionTable& table,
                                  std::ostream* trace = nullptr) {
  const int imax = frame.params.max_sic_iterations;
  return frame.params.protocol == Protocol::ECRA ? run_ecra(frame, table, imax, trace)
                                                 : run_sic(frame, table, imax, trace);
}

}  // namespace ecra
