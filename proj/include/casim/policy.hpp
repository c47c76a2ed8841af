#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "casim/event_list.hpp"
#include "casim/hashing.hpp"
#include "casim/metrics.hpp"
#include "casim/queueing.hpp"
#include "casim/request.hpp"
#include "casim/rng.hpp"
#include "casim/spectrum.hpp"

namespace casim {

// A live SU service: the originating request, its granted slot set and the
// sequence number of its currently valid completion event. Completion events
// whose seq no longer matches are stale and ignored at dispatch.
struct Allocation {
  SuRequest request;
  std::vector<SlotRef> slots;
  double service_start = 0.0;
  std::uint64_t completion_seq = 0;

  int granted() const { return static_cast<int>(slots.size()); }
};

enum class AdmissionOutcome : std::uint8_t { Admit, Enqueue, Block };

struct AdmissionDecision {
  AdmissionOutcome outcome = AdmissionOutcome::Block;
  std::uint64_t su_id = 0;
  int granted = 0;   // valid iff Admit
  int queue_id = 0;  // valid iff Enqueue
};

enum class DisplacementOutcome : std::uint8_t {
  Relocated,         // full grant re-placed elsewhere
  Shrunk,            // elastic grant reduced, service continues
  Requeued,          // feedback path: back into a buffer, fresh deadline
  ForcedTerminated,  // no relocation, no buffer room (or baseline policy)
};

struct DisplacedSu {
  std::uint64_t su_id = 0;
  DisplacementOutcome outcome = DisplacementOutcome::ForcedTerminated;
  int granted_after = 0;
};

// ---------------------------------------------------------------------------
// Decision trace
// ---------------------------------------------------------------------------

enum class DecisionTag : std::uint8_t {
  Admit,
  Enqueue,
  Block,
  DrainAdmit,
  Relocate,
  Shrink,
  Requeue,
  Terminate,
  DeadlineDrop,
  Complete,
  Expand,
};

struct DecisionRecord {
  double time = 0.0;
  std::uint64_t su_id = 0;
  DecisionTag tag = DecisionTag::Block;
  int value = 0;

  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

// Running hash (and optional full record) of every policy decision; two runs
// with equal hashes took the same actions in the same order.
class DecisionTrace {
 public:
  bool recording = false;

  void note(double time, std::uint64_t su_id, DecisionTag tag, int value) {
    hash_ = hash_mix(hash_, time);
    hash_ = hash_mix(hash_, su_id);
    hash_ = hash_mix(hash_, static_cast<std::uint64_t>(tag));
    hash_ = hash_mix(hash_, static_cast<std::uint64_t>(static_cast<std::int64_t>(value)));
    if (recording) records_.push_back({time, su_id, tag, value});
  }

  std::uint64_t hash() const { return hash_; }
  const std::vector<DecisionRecord>& records() const { return records_; }

 private:
  std::uint64_t hash_ = kFnvOffset;
  std::vector<DecisionRecord> records_;
};

// ---------------------------------------------------------------------------
// System state
// ---------------------------------------------------------------------------

struct PolicyParams {
  PolicyKind policy = PolicyKind::Ibs;
  double deadline = std::numeric_limits<double>::infinity();  // delta_max
  bool exp_deadline = false;  // exponential expiry at rate 1/deadline
  bool strict_hol = false;    // an unservable head blocks the scan
  bool contiguous = false;    // fresh grants must be one consecutive slot run
};

// Queue-side tallies for the end-of-run leak audit: every enqueued entry
// leaves as served, dropped, or still buffered at the horizon.
struct QueueAudit {
  std::uint64_t enqueued = 0;
  std::uint64_t served = 0;
  std::uint64_t dropped = 0;
};

// Everything one simulation run mutates. Owned by exactly one run; policy
// operations are plain functions over this state.
struct SystemState {
  PolicyParams params;
  std::vector<double> service_rate;  // per-class per-slot rate
  SpectrumPool pool;
  DualQueueController queues;
  EventList events;
  RngSet rng;
  std::map<std::uint64_t, Allocation> allocations;  // ordered: deterministic scans
  CounterSet counters;
  QueueAudit queue_audit;
  DecisionTrace trace;

  double warmup_end = 0.0;
  double occupancy_mark = 0.0;  // queue-occupancy integral frontier
  std::uint64_t next_entry_id = 1;

  SystemState(PolicyParams p, std::vector<double> service_rates, int num_channels,
              int slots_per_channel, int queue1_capacity, int queue2_capacity,
              double horizon, std::uint64_t seed);

  double now() const { return events.clock(); }
};

// ---------------------------------------------------------------------------
// Policy operations
// ---------------------------------------------------------------------------

/// Dispatches on st.params.policy. Counts the arrival and its outcome.
AdmissionDecision handle_su_arrival(SystemState& st, const SuRequest& req);

// Fixed-demand admission (IBS and IBS+Q): admit iff the full demand fits the
// free slots; +Q buffers when a queue has room; otherwise block.
AdmissionDecision ibs_handle_su_arrival(SystemState& st, const SuRequest& req);

// Elastic admission (RBS and RBS+Q): admit with min(demand_max, free) when
// demand_min fits; otherwise donate from the widest incumbents and admit
// with exactly demand_min; then buffer or block like the fixed family.
AdmissionDecision rbs_handle_su_arrival(SystemState& st, const SuRequest& req);

/// Total slots incumbents could donate (grant above minimum), excluding one SU.
int donation_slack(const SystemState& st, std::uint64_t exclude_su);

// Donation loop: removes one slot at a time from the incumbent with the
// widest grant strictly above its minimum (ties: lowest su_id) until `needed`
// slots are free or no donor remains. Returns the freed slots; shortfall is
// signaled by a smaller set. Donors' completions are rescheduled at their
// new rates.
std::vector<SlotRef> readjust_donate(SystemState& st, int needed,
                                     std::uint64_t exclude_su = UINT64_MAX);

// A PU seizes every slot of `channel`. Displaced SUs are processed in
// arrival order: re-placed on free slots where possible (elastic SUs may
// shrink to their minimum, borrowing via donation); otherwise fed back into
// a queue under +Q policies or force-terminated under the baselines.
std::vector<DisplacedSu> handle_pu_arrival(SystemState& st, int channel);

/// Frees a PU-held channel and rebalances.
std::vector<AdmissionDecision> handle_pu_departure(SystemState& st, int channel);

// Releases the allocation, counts the completion, then drains the queue
// FIFO-first and (elastic family) expands remaining grants toward their
// maxima, largest deficit first.
std::vector<AdmissionDecision> handle_su_departure(SystemState& st, std::uint64_t su_id);

/// Deadline expiry: drops the entry if it is still buffered; no-op if served.
bool check_queue_timeout(SystemState& st, std::uint64_t entry_id);

/// FIFO drain plus elastic expansion; run after any event that frees slots.
std::vector<AdmissionDecision> rebalance(SystemState& st);

// Occupancy-integral upkeep: integrate the buffered count up to `now` before
// any queue mutation, and once more at the end of the run.
void note_queue_change(SystemState& st);
void flush_occupancy(SystemState& st, double t);

/// Slot conservation: PU + SU + free slots equal M*S and match allocations.
bool audit_slots(const SystemState& st);

}  // namespace casim
