#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "casim/ctmc.hpp"
#include "casim/scenario.hpp"
#include "casim/simulation.hpp"

namespace casim {

// One emitted CSV row: a (policy, swept value, replication) cell. Plain runs
// carry no swept value.
struct ResultRow {
  PolicyKind policy = PolicyKind::Ibs;
  std::optional<double> swept_value;
  int replication = 0;
  RunResult result;
};

// Replication k uses seed base_seed + k: the same k-th substreams recur in
// every (value, policy) cell, which is what makes cross-policy and
// cross-value comparisons common-random-number pairs.
std::vector<ResultRow> run_replications(const Scenario& sc, PolicyKind policy,
                                        std::uint64_t base_seed, int replications,
                                        int threads = 0, SimOptions opts = {});

// Every (value, policy, replication) cell of a sweep, sorted by
// (policy order given, value, replication).
std::vector<ResultRow> run_sweep(const Scenario& base, const std::string& param,
                                 const std::vector<double>& values,
                                 const std::vector<PolicyKind>& policies,
                                 std::uint64_t base_seed, int replications,
                                 int threads = 0, SimOptions opts = {});

// Fixed raw schema:
//   policy,swept_value,replication,P_b,P_f,P_a,capacity,mean_queue_len,
//   arrivals,blocked,admitted,dropped,completed,in_system
// UTF-8, LF line endings, full-precision floats.
void write_raw_csv(std::ostream& os, const std::vector<ResultRow>& rows);

// Per-(policy, value, metric) summary rows:
//   policy,swept_value,metric,mean,stddev,ci95_half,replications
// CI columns are empty for a single replication.
void write_summary_csv(std::ostream& os, const std::vector<ResultRow>& rows);

struct ValidateRow {
  std::string metric;
  double simulated = 0.0;
  double ci95_half = 0.0;
  double exact = 0.0;
  double abs_diff = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidateRow> rows;
  int states = 0;
  bool all_pass = false;
};

// Runs the scenario and compares P_b, P_f, capacity and mean queue length
// against the exact chain. A row passes when the exact value falls inside
// the 95% CI or the difference is below an absolute floor (0.01 for
// probabilities, max(0.01, 5% of exact) for the others). Throws
// UnsupportedScenario outside the oracle family.
ValidationReport validate_against_oracle(const Scenario& sc, PolicyKind policy,
                                         std::uint64_t base_seed, int replications,
                                         int threads = 0);

}  // namespace casim
