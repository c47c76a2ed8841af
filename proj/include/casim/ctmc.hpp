#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "casim/scenario.hpp"

namespace casim {

// Exact steady-state oracle for a restricted scenario family, used to
// validate the simulator on small instances. The generator is built from
// state counts, independently of the slot-grid simulation path.
//
// Supported family: one SU class with a single degenerate demand value
// (theta == theta_min == theta_max, identical across SNR classes), static
// SNR, scattered placement, deadlines disabled or exponentially
// approximated, and a PU process that is either absent, confined to a single
// channel system, or displacing whole-channel SUs (theta == S).

struct CtmcState {
  int pu_on = 0;    // channels held by PUs
  int serving = 0;  // SUs in service
  int queued = 0;   // SUs buffered

  friend bool operator==(const CtmcState&, const CtmcState&) = default;
};

class UnsupportedScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CtmcModel {
  std::vector<CtmcState> states;            // reachable from empty, BFS order
  Eigen::SparseMatrix<double> generator;    // row sums 0 within 1e-9
  Eigen::VectorXd block_indicator;          // arrival would be blocked
  Eigen::VectorXd admit_rate;               // arrival flow entering the system
  Eigen::VectorXd drop_rate;                // preemption + deadline drop flow
  Eigen::VectorXd completion_rate;          // serving * theta * mu
  Eigen::VectorXd queue_len;

  int index_of(const CtmcState& s) const;   // -1 when unreachable
};

/// Empty when the oracle supports the scenario; otherwise the refusal reason.
std::string oracle_unsupported_reason(const Scenario& sc, PolicyKind policy);

/// Throws UnsupportedScenario with the refusal reason when out of family.
CtmcModel build_generator(const Scenario& sc, PolicyKind policy);

// Solves pi Q = 0, sum(pi) = 1, pi >= 0 with residual ||pi Q||_inf <= 1e-10.
// Dense factorization below 2000 states, uniformized power iteration above.
Eigen::VectorXd solve_steady_state(const Eigen::SparseMatrix<double>& generator);

struct OracleMetrics {
  double p_block = 0.0;
  double p_forced = 0.0;
  double capacity = 0.0;
  double mean_queue_len = 0.0;
};

OracleMetrics oracle_metrics(const Eigen::VectorXd& pi, const CtmcModel& model,
                             const Scenario& sc);

}  // namespace casim
