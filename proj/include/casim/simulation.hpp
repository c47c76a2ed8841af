#pragma once

#include <cstdint>
#include <vector>

#include "casim/policy.hpp"
#include "casim/scenario.hpp"

namespace casim {

struct SimOptions {
  bool record_decisions = false;  // keep the full decision record, not just hashes
  bool audit_every_event = false; // slot-conservation check after each event
};

struct RunResult {
  CounterSet counters;
  QueueAudit queue_audit;
  std::uint64_t trace_hash = 0;     // hash of the dispatched event trace
  std::uint64_t decision_hash = 0;  // hash of every policy decision
  std::vector<DecisionRecord> decisions;
  std::uint64_t residual_queued = 0;   // buffered at the horizon
  std::uint64_t residual_serving = 0;  // in service at the horizon
  std::uint64_t residual_counted = 0;  // live SUs whose arrival was counted

  // Guarded estimators for row emission: zero denominators yield 0 and the
  // access/blocking identity is preserved exactly.
  double p_block() const;
  double p_forced() const;
  double p_access() const { return 1.0 - p_block(); }
  double capacity() const;
  double mean_queue_len() const;

  /// Counting-partition identities (arrivals and admissions split exactly).
  bool partition_ok() const;
};

// One replication: owns its state, event list and substreams; fully
// deterministic given (scenario, policy, seed).
class Simulator {
 public:
  Simulator(const Scenario& scenario, PolicyKind policy, std::uint64_t seed,
            SimOptions opts = {});

  /// Runs to the horizon and returns the accumulated result.
  RunResult run();

  const SystemState& state() const { return st_; }

 private:
  void dispatch(const EventRecord& ev);
  void on_pu_arrival(const EventRecord& ev);
  void on_su_arrival(const EventRecord& ev);
  void on_su_service_complete(const EventRecord& ev);
  void on_snr_transition(const EventRecord& ev);
  void schedule_next_su_arrival(int su_class);
  void schedule_next_snr_transition(std::uint64_t su_id);

  Scenario sc_;
  SimOptions opts_;
  SystemState st_;
  std::uint64_t next_su_id_ = 1;
  std::uint64_t trace_hash_;
};

}  // namespace casim
