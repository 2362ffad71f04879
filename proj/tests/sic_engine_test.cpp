#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ecra/fixtures.hpp"
#include "ecra/sic_engine.hpp"

using namespace ecra;

namespace {

SystemParams small_params(std::int64_t frame_symbols, std::int64_t packet_symbols, double rate,
                          Protocol protocol, DecodeModelKind model) {
  SystemParams p;
  p.rate = rate;
  p.packet_bits = static_cast<std::int64_t>(static_cast<double>(packet_symbols) * rate);
  p.frame_duration_s = static_cast<double>(frame_symbols) * 1e-6;
  p.protocol = protocol;
  p.decode_model = model;
  return p;
}

// Whole-frame receiver written from scratch: every decode attempt rebuilds
// the interference by scanning all live replicas symbol by symbol.
struct OracleReceiver {
  const FrameInstance& f;
  DecodeModel model;
  ChannelModel channel;
  std::vector<bool> decoded;
  int combine_passes = 0;

  OracleReceiver(const FrameInstance& frame)
      : f(frame),
        model(DecodeModel::from_params(frame.params)),
        channel(ChannelModel::from_snr_db(frame.params.snr_db)),
        decoded(frame.users(), false) {}

  std::int64_t t() const { return f.geometry.packet_symbols; }

  int cover(std::int64_t k) const {
    int c = 0;
    for (std::size_t u = 0; u < f.users(); ++u)
      if (!decoded[u])
        for (std::size_t r = 0; r < f.placements[u].starts.size(); ++r) {
          const auto s = f.symbol_start(u, r);
          c += k >= s && k < s + t();
        }
    return c;
  }

  bool attempt(std::size_t u, std::int64_t total) {
    const double snir = snir_from_ratio(static_cast<double>(total) / static_cast<double>(t()), channel).snir_linear;
    if (decide(model, snir, f.decode_draws[u]) != Decision::Success) return false;
    decoded[u] = true;
    return true;
  }

  std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> scan_order() const {
    std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> order;
    for (std::size_t u = 0; u < f.users(); ++u)
      for (std::size_t r = 0; r < f.placements[u].starts.size(); ++r) order.emplace_back(f.symbol_start(u, r), u, r);
    std::sort(order.begin(), order.end());
    return order;
  }

  bool sic_pass() {
    bool progress = false;
    for (auto [s, u, r] : scan_order()) {
      if (decoded[u]) continue;
      std::int64_t total = 0;
      for (std::int64_t k = s; k < s + t(); ++k) total += cover(k) - 1;
      progress |= attempt(u, total);
    }
    return progress;
  }

  bool combine_pass() {
    ++combine_passes;
    std::vector<std::size_t> users;
    for (auto [s, u, r] : scan_order())
      if (std::find(users.begin(), users.end(), u) == users.end()) users.push_back(u);
    bool progress = false;
    for (auto u : users) {
      if (decoded[u]) continue;
      std::int64_t total = 0;
      for (std::int64_t k = 0; k < t(); ++k) {
        int best = 1 << 30;
        for (std::size_t r = 0; r < f.placements[u].starts.size(); ++r)
          best = std::min(best, cover(f.symbol_start(u, r) + k) - 1);
        total += best;
      }
      progress |= attempt(u, total);
    }
    return progress;
  }

  bool all() const { return std::all_of(decoded.begin(), decoded.end(), [](bool b) { return b; }); }

  void run_sic(int budget) {
    for (int i = 0; i < budget && !all(); ++i)
      if (!sic_pass()) break;
  }

  void run_ecra(int budget) {
    for (;;) {
      run_sic(budget);
      if (all() || combine_passes >= budget || !combine_pass()) return;
    }
  }
};

FrameInstance random_small_frame(std::mt19937_64& rng, Protocol protocol, DecodeModelKind model) {
  const std::int64_t t = 4 + static_cast<std::int64_t>(rng() % 12);
  const std::int64_t frame = 2 * t + static_cast<std::int64_t>(rng() % 200);
  auto p = small_params(frame, t, (rng() % 2) ? 1.0 : 2.0, protocol, model);
  p.snr_db = (rng() % 2) ? 10.0 : 2.0;
  p.max_sic_iterations = 1 + static_cast<int>(rng() % 10);
  const auto users = static_cast<std::int64_t>(rng() % (frame / t + 4));
  return place_frame(p, users, rng());
}

std::vector<bool> decoded_by(const FrameInstance& f) {
  return run_protocol(f, decision_table_for(f.params)).decoded;
}

}  // namespace

TEST(Sic, SingleUserDecodesInFirstPass) {
  const auto f = make_frame(SystemParams{}, {{1000, 40000}});
  const auto table = decision_table_for(f.params);
  SicEngine engine(f, table);
  EXPECT_TRUE(engine.sic_pass());
  EXPECT_TRUE(engine.state().all_decoded());
  EXPECT_EQ(engine.state().iteration, 1);
}

TEST(Sic, EmptyFrameTerminatesImmediately) {
  const auto f = make_frame(SystemParams{}, {});
  const auto state = run_sic(f, decision_table_for(f.params), 10);
  EXPECT_EQ(state.decoded_count(), 0u);
  EXPECT_EQ(state.iteration, 0);
}

TEST(Sic, SlottedLoopIsStuck) {
  const auto f = fixtures::crdsa_loop(SystemParams{});
  const auto table = decision_table_for(f.params);
  SicEngine engine(f, table);
  EXPECT_FALSE(engine.sic_pass());
  EXPECT_EQ(engine.state().decoded_count(), 0u);
  EXPECT_EQ(run_protocol(f, table).decoded_count(), 0u);
}

TEST(Sic, UnslottedLoopDefeatsPlainSic) {
  auto p = SystemParams{};
  p.protocol = Protocol::CRA;
  const auto f = fixtures::cra_loop(p);
  EXPECT_EQ(run_sic(f, decision_table_for(p), 10).decoded_count(), 0u);
}

TEST(Sic, ChainUnwindsOneUserPerPass) {
  auto p = SystemParams{};
  p.protocol = Protocol::CRA;
  const auto f = fixtures::sic_chain(p);
  const auto table = decision_table_for(p);
  SicEngine engine(f, table);
  for (std::size_t pass = 0; pass < 3; ++pass) {
    ASSERT_TRUE(engine.sic_pass());
    EXPECT_EQ(engine.state().decoded_count(), pass + 1);
    EXPECT_TRUE(engine.state().decoded[pass]);
  }

  OracleReceiver oracle(f);
  oracle.run_sic(10);
  EXPECT_EQ(oracle.decoded, std::vector<bool>({true, true, true}));
  EXPECT_EQ(run_sic(f, table, 10).decoded, oracle.decoded);
}

TEST(Sic, ChainWithSinglePassFreesOnlyTheCleanUser) {
  auto p = SystemParams{};
  p.protocol = Protocol::CRA;
  const auto f = fixtures::sic_chain(p);
  OracleReceiver oracle(f);
  oracle.run_sic(1);
  ASSERT_EQ(oracle.decoded, std::vector<bool>({true, false, false}));
  EXPECT_EQ(run_sic(f, decision_table_for(p), 1).decoded, oracle.decoded);
}

TEST(Ecra, UnslottedLoopIsResolvedByCombining) {
  auto p = SystemParams{};
  p.protocol = Protocol::ECRA;
  const auto f = fixtures::cra_loop(p);
  const auto state = run_protocol(f, decision_table_for(p));
  EXPECT_EQ(state.decoded_count(), 2u);
  EXPECT_EQ(state.combine_passes, 1);
}

TEST(Ecra, IdenticalOverlapsStayUndecoded) {
  auto p = SystemParams{};
  p.protocol = Protocol::ECRA;
  const auto f = make_frame(p, {{0, 3000}, {0, 3000}});
  const auto occ = build_occupancy(f);
  EXPECT_EQ(combined_interference_sum(f, occ, 0), interference_sum(occ, 0, 500));
  EXPECT_EQ(run_protocol(f, decision_table_for(p)).decoded_count(), 0u);
}

TEST(Ecra, CleanFrameSkipsCombining) {
  auto p = SystemParams{};
  p.protocol = Protocol::ECRA;
  const auto f = make_frame(p, {{0, 3000}, {600, 5000}, {10000, 20000}});
  const auto state = run_protocol(f, decision_table_for(p));
  EXPECT_TRUE(state.all_decoded());
  EXPECT_EQ(state.combine_passes, 0);
  EXPECT_EQ(state.iteration, 1);
}

TEST(Ecra, CombiningRescuesChainWithinOnePassBudget) {
  auto p = SystemParams{};
  p.protocol = Protocol::ECRA;
  p.max_sic_iterations = 1;
  const auto f = fixtures::sic_chain(p);
  OracleReceiver oracle(f);
  oracle.run_ecra(1);
  EXPECT_EQ(run_protocol(f, decision_table_for(p)).decoded, oracle.decoded);
}

TEST(Engine, MatchesOracleOnRandomSmallFrames) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto protocol = std::array{Protocol::CRA, Protocol::ECRA, Protocol::CRDSA}[trial % 3];
    const auto model = trial % 2 ? DecodeModelKind::ShannonBound : DecodeModelKind::RandomCodingBound;
    const auto f = random_small_frame(rng, protocol, model);
    OracleReceiver oracle(f);
    if (protocol == Protocol::ECRA)
      oracle.run_ecra(f.params.max_sic_iterations);
    else
      oracle.run_sic(f.params.max_sic_iterations);
    ASSERT_EQ(decoded_by(f), oracle.decoded) << "trial " << trial;
  }
}

TEST(Engine, MatchesOracleWhenBudgetBinds) {
  std::mt19937_64 rng(22);
  int budget_hits = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const std::int64_t t = 4 + static_cast<std::int64_t>(rng() % 8);
    const std::int64_t frame = 20 * t;
    auto p = small_params(frame, t, 1.0, trial % 4 ? Protocol::ECRA : Protocol::CRA,
                          trial % 2 ? DecodeModelKind::ShannonBound : DecodeModelKind::RandomCodingBound);
    p.max_sic_iterations = 1 + trial % 2;
    const auto f = place_frame(p, 8 + static_cast<std::int64_t>(rng() % 16), rng());
    OracleReceiver oracle(f);
    if (p.protocol == Protocol::ECRA)
      oracle.run_ecra(p.max_sic_iterations);
    else
      oracle.run_sic(p.max_sic_iterations);
    budget_hits += oracle.combine_passes == p.max_sic_iterations && !oracle.all();
    ASSERT_EQ(decoded_by(f), oracle.decoded) << "trial " << trial;
  }
  EXPECT_GT(budget_hits, 20);
}

TEST(Engine, EcraDecodesSupersetOfCra) {
  std::mt19937_64 rng(23);
  for (auto model : {DecodeModelKind::ShannonBound, DecodeModelKind::RandomCodingBound})
    for (double rate : {1.0, 2.0})
      for (int trial = 0; trial < 15; ++trial) {
        SystemParams p;
        p.rate = rate;
        p.decode_model = model;
        p.protocol = Protocol::CRA;
        const double load = 0.3 + 0.1 * trial / (rate == 1.0 ? 1.0 : 2.0);
        const auto f = place_frame(p, users_for_load(p, load), rng());
        const auto table = decision_table_for(p);
        const auto cra = run_sic(f, table, p.max_sic_iterations);
        const auto ecra = run_ecra(f, table, p.max_sic_iterations);
        for (std::size_t u = 0; u < f.users(); ++u)
          if (cra.decoded[u]) {
            ASSERT_TRUE(ecra.decoded[u]);
          }
        ASSERT_GE(ecra.decoded_count(), cra.decoded_count());
      }
}

TEST(Engine, LiveStateMatchesRecomputation) {
  std::mt19937_64 rng(25);
  for (auto protocol : {Protocol::CRA, Protocol::ECRA, Protocol::CRDSA})
    for (int trial = 0; trial < 10; ++trial) {
      SystemParams p;
      p.rate = 1.0;
      p.protocol = protocol;
      const auto f = place_frame(p, users_for_load(p, 0.6 + 0.08 * trial), rng());
      const auto table = decision_table_for(p);
      SicEngine engine(f, table);
      if (protocol == Protocol::ECRA)
        engine.run_ecra(p.max_sic_iterations);
      else
        engine.run_sic(p.max_sic_iterations);
      const auto& st = engine.state();
      std::unique_ptr<bool[]> active(new bool[f.users() + 1]);
      for (std::size_t u = 0; u < f.users(); ++u) active[u] = !st.decoded[u];
      const auto fresh = build_occupancy(f, std::span<const bool>(active.get(), f.users()));
      ASSERT_EQ(st.occupancy, fresh);
      for (std::size_t u = 0; u < f.users(); ++u)
        for (std::size_t r = 0; r < 2; ++r)
          if (!st.decoded[u]) {
            ASSERT_EQ(engine.replica_interference(u, r),
                      interference_sum(st.occupancy, f.symbol_start(u, r), f.geometry.packet_symbols));
          }
    }
}

TEST(Engine, FinishedStateIsAFixpoint) {
  SystemParams p;
  p.protocol = Protocol::ECRA;
  const auto f = place_frame(p, users_for_load(p, 0.3), 77);
  const auto table = decision_table_for(p);
  SicEngine engine(f, table);
  engine.run_ecra(p.max_sic_iterations);
  ASSERT_TRUE(engine.state().all_decoded());
  const auto before = engine.state().decoded;
  const auto occ = engine.state().occupancy;
  EXPECT_FALSE(engine.sic_pass());
  EXPECT_FALSE(engine.combine_pass());
  EXPECT_EQ(engine.state().decoded, before);
  EXPECT_EQ(engine.state().occupancy, occ);
}

TEST(Engine, Deterministic) {
  for (auto protocol : {Protocol::CRA, Protocol::ECRA, Protocol::CRDSA}) {
    SystemParams p;
    p.protocol = protocol;
    p.decode_model = DecodeModelKind::RandomCodingBound;
    const auto a = place_frame(p, 110, 5);
    const auto b = place_frame(p, 110, 5);
    EXPECT_EQ(decoded_by(a), decoded_by(b));
  }
}

TEST(Trace, ReportsAttemptsAndCancellations) {
  auto p = SystemParams{};
  p.protocol = Protocol::ECRA;
  const auto f = fixtures::cra_loop(p);
  std::ostringstream os;
  run_protocol(f, decision_table_for(p), &os);
  const auto text = os.str();
  EXPECT_NE(text.find("pass 1 sic user 0 replica 0 start 0 x=0.5000 snir_db=2.22 -> failed"), std::string::npos);
  EXPECT_NE(text.find("pass 2 combine user 0 combined x=0.0000 snir_db=10.00 -> decoded"), std::string::npos);
  EXPECT_NE(text.find("  cancel user 1 at 250 1750"), std::string::npos);
}
