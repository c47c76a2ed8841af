#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "casim/policy.hpp"
#include "casim/request.hpp"
#include "casim/spectrum.hpp"

namespace casim {

// Slot demand of one (class, SNR-class) cell: `theta` for the fixed-demand
// family, [theta_min, theta_max] for the elastic family.
struct DemandRule {
  int theta = 1;
  int theta_min = 1;
  int theta_max = 1;
};

struct SpectrumConfig {
  int channels = 1;
  FrameConfig frame;
  std::vector<AmcMode> amc_table{{1, 1.0, 0.0, 1e9}};
  std::vector<double> pu_off_to_on;  // optional per-channel A_i (epoch chain)
  std::vector<double> pu_on_to_off;  // optional per-channel C_i

  /// Slots per channel, derived from the frame arithmetic.
  int slots() const { return compute_frame_slots(frame, amc_table.front()); }
};

struct TrafficConfig {
  double pu_arrival_rate = 0.0;  // lambda_p; 0 disables the PU process
  double pu_service_rate = 1.0;  // mu_p
  std::vector<double> su_arrival_rate = {1.0};
  std::vector<double> su_service_rate = {1.0};
  std::vector<std::array<DemandRule, 3>> demand{
      {DemandRule{}, DemandRule{}, DemandRule{}}};  // [class][snr]
  SnrMatrix snr_matrix{{{0.9, 0.1, 0.0}, {0.05, 0.9, 0.05}, {0.0, 0.1, 0.9}}};
  std::array<double, 3> snr_initial{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double snr_rate = 0.0;  // per-SU SNR transition rate; 0 = static

  int num_classes() const { return static_cast<int>(su_arrival_rate.size()); }
};

struct PolicySettings {
  PolicyKind policy = PolicyKind::Ibs;
  int queue1_capacity = 0;
  int queue2_capacity = 0;
  double deadline = std::numeric_limits<double>::infinity();
  bool strict_hol = false;
  bool exp_deadline = false;
  bool contiguous = false;
};

struct SimConfig {
  double horizon = 1000.0;
  double warmup = 0.0;
  int replications = 1;
  std::uint64_t seed = 1;
};

struct Scenario {
  SpectrumConfig spectrum;
  TrafficConfig traffic;
  PolicySettings policy;
  SimConfig sim;

  const DemandRule& demand_for(int su_class, SnrClass snr) const {
    return traffic.demand[su_class][static_cast<int>(snr)];
  }
  PolicyParams policy_params(PolicyKind kind) const {
    return {kind, policy.deadline, policy.exp_deadline, policy.strict_hol,
            policy.contiguous};
  }
};

// All field-level problems found in one pass, each tagged with its source
// location (a line number for text input, a json pointer for JSON input).
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Parses the key=value block format; a leading '{' switches to the JSON
// equivalent. Throws ScenarioError listing every problem found.
Scenario parse_scenario(const std::string& text);

Scenario load_scenario_file(const std::string& path);

/// Cross-field constraint checks; throws ScenarioError.
void validate_scenario(const Scenario& sc);

// Sweep support: assigns `value` to the scenario field named by `path`
// (e.g. "traffic.pu_arrival_rate", "policy.queue_capacity"). Unknown paths
// throw with the supported list.
void apply_param(Scenario& sc, const std::string& path, double value);

const std::vector<std::string>& sweepable_params();

}  // namespace casim
