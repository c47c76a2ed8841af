#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "casim/spectrum.hpp"

namespace casim {

enum class PolicyKind { Ibs, Rbs, IbsQ, RbsQ };

/// True for the +Q variants that may buffer instead of blocking.
inline bool policy_has_queue(PolicyKind p) {
  return p == PolicyKind::IbsQ || p == PolicyKind::RbsQ;
}

/// True for the readjustment family with elastic demand in [min, max].
inline bool policy_is_elastic(PolicyKind p) {
  return p == PolicyKind::Rbs || p == PolicyKind::RbsQ;
}

const char* to_string(PolicyKind p);
std::optional<PolicyKind> policy_from_string(std::string_view s);

// One secondary-user service demand. The fixed-demand family uses `demand`;
// the elastic family uses [demand_min, demand_max]. All three are populated
// from the scenario's class/SNR demand map.
struct SuRequest {
  std::uint64_t su_id = 0;
  int su_class = 0;
  SnrClass snr = SnrClass::Good;
  int demand = 1;
  int demand_min = 1;
  int demand_max = 1;
  double arrival_time = 0.0;
  bool counted = true;  // false for arrivals inside the warm-up window
};

/// Slots a queued request needs before it can be served under `policy`.
inline int queued_demand(const SuRequest& r, PolicyKind policy) {
  return policy_is_elastic(policy) ? r.demand_min : r.demand;
}

}  // namespace casim
