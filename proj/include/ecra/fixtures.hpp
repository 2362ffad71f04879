#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "ecra/placement.hpp"

// Hand-built frames for the canonical SIC loop scenarios.
namespace ecra::fixtures {

/// Two users sharing the same two slots: every replica fully collides.
inline FrameInstance crdsa_loop(SystemParams params) {
  params.protocol = Protocol::CRDSA;
  return make_frame(params, {{0, 1}, {1, 0}});
}

/// Two users whose replicas overlap by half, on opposite halves: user 0's
/// first replica is hit on its second half, its second replica on its first
/// half, and the same for user 1 mirrored. Plain SIC sees x = 0.5 everywhere;
/// the combined packets are interference-free.
inline FrameInstance cra_loop(SystemParams params) {
  if (params.protocol == Protocol::CRDSA) params.protocol = Protocol::CRA;
  const auto t = derive_geometry(params).packet_symbols;
  const auto half = t / 2;
  return make_frame(params, {{0, 4 * t}, {half, 4 * t - half}});
}

/// Three users in a chain that plain SIC unwinds back to front, one user per
/// pass. User 0 has a clean replica at the end of the frame and its other
/// replica fully on top of user 1's. User 1's other replica is half-covered by
/// each of user 2's replicas, which sit on opposite halves of it.
inline FrameInstance sic_chain(SystemParams params) {
  if (params.protocol == Protocol::CRDSA) params.protocol = Protocol::CRA;
  const auto t = derive_geometry(params).packet_symbols;
  const auto half = t / 2;
  return make_frame(params, {{10 * t, 5 * t}, {5 * t, t}, {t - half, 2 * t - half}});
}

inline std::optional<FrameInstance> by_name(std::string_view name, const SystemParams& params) {
  if (name == "crdsa-loop") return crdsa_loop(params);
  if (name == "cra-loop") return cra_loop(params);
  if (name == "sic-chain") return sic_chain(params);
  return std::nullopt;
}

}  // namespace ecra::fixtures
