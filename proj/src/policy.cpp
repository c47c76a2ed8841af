#include "casim/policy.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>

namespace casim {

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Ibs: return "IBS";
    case PolicyKind::Rbs: return "RBS";
    case PolicyKind::IbsQ: return "IBS_Q";
    case PolicyKind::RbsQ: return "RBS_Q";
  }
  return "?";
}

std::optional<PolicyKind> policy_from_string(std::string_view s) {
  if (s == "IBS" || s == "ibs") return PolicyKind::Ibs;
  if (s == "RBS" || s == "rbs") return PolicyKind::Rbs;
  if (s == "IBS_Q" || s == "ibs_q" || s == "IBS+Q") return PolicyKind::IbsQ;
  if (s == "RBS_Q" || s == "rbs_q" || s == "RBS+Q") return PolicyKind::RbsQ;
  return std::nullopt;
}

SystemState::SystemState(PolicyParams p, std::vector<double> service_rates,
                         int num_channels, int slots_per_channel,
                         int queue1_capacity, int queue2_capacity, double horizon,
                         std::uint64_t seed)
    : params(p),
      service_rate(std::move(service_rates)),
      pool(num_channels, slots_per_channel),
      queues(queue1_capacity, queue2_capacity),
      events(horizon),
      rng(seed, static_cast<int>(service_rate.size())) {
  if (service_rate.empty())
    throw std::invalid_argument("need at least one SU class");
  for (double mu : service_rate)
    if (mu <= 0.0) throw std::invalid_argument("service rates must be > 0");
}

// ---------------------------------------------------------------------------
// Occupancy integral
// ---------------------------------------------------------------------------

void flush_occupancy(SystemState& st, double t) {
  double lo = std::max(st.occupancy_mark, st.warmup_end);
  double hi = std::max(t, lo);
  st.counters.queue_occupancy_integral += (hi - lo) * st.queues.total_size();
  st.occupancy_mark = std::max(t, st.occupancy_mark);
}

void note_queue_change(SystemState& st) { flush_occupancy(st, st.now()); }

// ---------------------------------------------------------------------------
// Internal helpers
// ---------------------------------------------------------------------------

namespace {

void reschedule_completion(SystemState& st, Allocation& alloc) {
  int theta = alloc.granted();
  assert(theta >= 1);
  double rate_per_slot = st.service_rate[alloc.request.su_class];
  double dur = su_service_duration(theta, rate_per_slot,
                                   st.rng.su_service[alloc.request.su_class]);
  alloc.completion_seq = st.events.schedule(
      {st.now() + dur, EventKind::SuServiceComplete, -1, -1, alloc.request.su_id, 0});
}

// Grants `count` slots to `req` and schedules its completion. The caller has
// already verified placement.
AdmissionDecision admit_with_grant(SystemState& st, const SuRequest& req, int count,
                                   bool honor_contiguous) {
  std::vector<SlotRef> slots =
      st.pool.take_free_slots(count, honor_contiguous && st.params.contiguous);
  if (static_cast<int>(slots.size()) != count)
    throw std::logic_error("admit_with_grant: placement failed after check");
  st.pool.assign(slots, req.su_id);
  Allocation alloc{req, std::move(slots), st.now(), 0};
  reschedule_completion(st, alloc);
  st.allocations.emplace(req.su_id, std::move(alloc));
  return {AdmissionOutcome::Admit, req.su_id, count, 0};
}

// Buffers `req` if a queue has room; schedules the deadline expiry. Returns
// the queue id, or nullopt when both buffers are full.
std::optional<int> enqueue_request(SystemState& st, const SuRequest& req,
                                   EntryOrigin origin) {
  double deadline = std::numeric_limits<double>::infinity();
  if (std::isfinite(st.params.deadline)) {
    double wait = st.params.exp_deadline
                      ? st.rng.queue.exponential(1.0 / st.params.deadline)
                      : st.params.deadline;
    deadline = st.now() + wait;
  }
  QueuedEntry entry{req, st.now(), deadline, origin, st.next_entry_id++};
  note_queue_change(st);
  std::optional<int> qid = st.queues.enqueue(entry);
  if (qid) {
    ++st.queue_audit.enqueued;
    if (std::isfinite(deadline))
      st.events.schedule({deadline, EventKind::QueueDeadline, -1, -1, entry.entry_id, 0});
  }
  return qid;
}

void count_forced_termination(SystemState& st, const SuRequest& req) {
  if (req.counted) ++st.counters.su_forced_terminated;
}

// For an elastic grant under the contiguous rule, the widest placeable run
// may be shorter than min(demand_max, free).
int elastic_grant(const SystemState& st, const SuRequest& req) {
  int grant = std::min(req.demand_max, st.pool.free_slots());
  if (st.params.contiguous) {
    while (grant > req.demand_min && !st.pool.can_allocate(grant, true)) --grant;
  }
  return grant;
}

std::vector<AdmissionDecision> drain_queue(SystemState& st) {
  std::vector<AdmissionDecision> admitted;
  for (;;) {
    int free = st.pool.free_slots();
    if (free <= 0) break;
    auto fits = [&](int need) { return st.pool.can_allocate(need, st.params.contiguous); };
    note_queue_change(st);
    std::optional<QueuedEntry> entry = st.queues.dequeue_first_servable(
        free, st.params.policy, st.params.strict_hol, fits);
    if (!entry) break;
    int grant = policy_is_elastic(st.params.policy) ? elastic_grant(st, entry->request)
                                                    : entry->request.demand;
    AdmissionDecision d = admit_with_grant(st, entry->request, grant, true);
    ++st.queue_audit.served;
    st.trace.note(st.now(), entry->request.su_id, DecisionTag::DrainAdmit, grant);
    admitted.push_back(d);
  }
  return admitted;
}

// Slot-wise growth toward demand_max, largest deficit first (ties: lowest
// su_id); completions of changed grants are rescheduled once at the end.
// Under the contiguous rule growth would scatter a granted run, so the
// elastic reshaping (like donation) stays off.
void expand_elastic(SystemState& st) {
  if (st.params.contiguous) return;
  std::set<std::uint64_t> touched;
  while (st.pool.free_slots() > 0) {
    Allocation* best = nullptr;
    int best_deficit = 0;
    for (auto& [id, alloc] : st.allocations) {
      int deficit = alloc.request.demand_max - alloc.granted();
      if (deficit > best_deficit) {
        best = &alloc;
        best_deficit = deficit;
      }
    }
    if (!best) break;
    std::vector<SlotRef> got = st.pool.take_free_slots(1, false);
    st.pool.assign(got, best->request.su_id);
    best->slots.push_back(got.front());
    touched.insert(best->request.su_id);
  }
  for (std::uint64_t id : touched) {
    Allocation& alloc = st.allocations.at(id);
    reschedule_completion(st, alloc);
    st.trace.note(st.now(), id, DecisionTag::Expand, alloc.granted());
  }
}

// Removes an SU from service and feeds it back into a buffer (+Q) or counts
// a forced termination (baselines / full buffers).
DisplacementOutcome requeue_or_terminate(SystemState& st, const SuRequest& req) {
  if (policy_has_queue(st.params.policy)) {
    if (enqueue_request(st, req, EntryOrigin::PreemptedFeedback)) {
      st.trace.note(st.now(), req.su_id, DecisionTag::Requeue, 0);
      return DisplacementOutcome::Requeued;
    }
  }
  count_forced_termination(st, req);
  st.trace.note(st.now(), req.su_id, DecisionTag::Terminate, 0);
  return DisplacementOutcome::ForcedTerminated;
}

}  // namespace

// ---------------------------------------------------------------------------
// Admission
// ---------------------------------------------------------------------------

AdmissionDecision handle_su_arrival(SystemState& st, const SuRequest& req) {
  return policy_is_elastic(st.params.policy) ? rbs_handle_su_arrival(st, req)
                                             : ibs_handle_su_arrival(st, req);
}

AdmissionDecision ibs_handle_su_arrival(SystemState& st, const SuRequest& req) {
  if (req.counted) ++st.counters.su_arrivals;
  if (st.pool.can_allocate(req.demand, st.params.contiguous)) {
    if (req.counted) ++st.counters.su_admitted;
    AdmissionDecision d = admit_with_grant(st, req, req.demand, true);
    st.trace.note(st.now(), req.su_id, DecisionTag::Admit, d.granted);
    return d;
  }
  if (policy_has_queue(st.params.policy)) {
    if (std::optional<int> qid = enqueue_request(st, req, EntryOrigin::FreshArrival)) {
      if (req.counted) ++st.counters.su_admitted;
      st.trace.note(st.now(), req.su_id, DecisionTag::Enqueue, *qid);
      return {AdmissionOutcome::Enqueue, req.su_id, 0, *qid};
    }
  }
  if (req.counted) ++st.counters.su_blocked;
  st.trace.note(st.now(), req.su_id, DecisionTag::Block, 0);
  return {AdmissionOutcome::Block, req.su_id, 0, 0};
}

AdmissionDecision rbs_handle_su_arrival(SystemState& st, const SuRequest& req) {
  if (req.counted) ++st.counters.su_arrivals;
  if (st.pool.can_allocate(req.demand_min, st.params.contiguous)) {
    int grant = elastic_grant(st, req);
    if (req.counted) ++st.counters.su_admitted;
    AdmissionDecision d = admit_with_grant(st, req, grant, true);
    st.trace.note(st.now(), req.su_id, DecisionTag::Admit, d.granted);
    return d;
  }
  // Donation runs only when it can actually reach demand_min; under the
  // contiguous rule donated slots need not form a run, so it is skipped.
  int need = req.demand_min - st.pool.free_slots();
  if (!st.params.contiguous && need > 0 &&
      donation_slack(st, req.su_id) >= need) {
    std::vector<SlotRef> freed = readjust_donate(st, need, req.su_id);
    assert(static_cast<int>(freed.size()) == need);
    if (req.counted) ++st.counters.su_admitted;
    AdmissionDecision d = admit_with_grant(st, req, req.demand_min, false);
    st.trace.note(st.now(), req.su_id, DecisionTag::Admit, d.granted);
    return d;
  }
  if (policy_has_queue(st.params.policy)) {
    if (std::optional<int> qid = enqueue_request(st, req, EntryOrigin::FreshArrival)) {
      if (req.counted) ++st.counters.su_admitted;
      st.trace.note(st.now(), req.su_id, DecisionTag::Enqueue, *qid);
      return {AdmissionOutcome::Enqueue, req.su_id, 0, *qid};
    }
  }
  if (req.counted) ++st.counters.su_blocked;
  st.trace.note(st.now(), req.su_id, DecisionTag::Block, 0);
  return {AdmissionOutcome::Block, req.su_id, 0, 0};
}

// ---------------------------------------------------------------------------
// Donation
// ---------------------------------------------------------------------------

int donation_slack(const SystemState& st, std::uint64_t exclude_su) {
  int slack = 0;
  for (const auto& [id, alloc] : st.allocations) {
    if (id == exclude_su) continue;
    slack += std::max(0, alloc.granted() - alloc.request.demand_min);
  }
  return slack;
}

std::vector<SlotRef> readjust_donate(SystemState& st, int needed,
                                     std::uint64_t exclude_su) {
  if (needed < 1) throw std::invalid_argument("readjust_donate needs needed >= 1");
  std::vector<SlotRef> freed;
  std::set<std::uint64_t> touched;
  while (static_cast<int>(freed.size()) < needed) {
    Allocation* donor = nullptr;
    for (auto& [id, alloc] : st.allocations) {
      if (id == exclude_su) continue;
      if (alloc.granted() <= alloc.request.demand_min) continue;
      if (!donor || alloc.granted() > donor->granted()) donor = &alloc;
    }
    if (!donor) break;
    // Give up the donor's highest-indexed slot.
    auto it = std::max_element(donor->slots.begin(), donor->slots.end());
    SlotRef slot = *it;
    donor->slots.erase(it);
    st.pool.release(std::span<const SlotRef>{&slot, 1}, donor->request.su_id);
    freed.push_back(slot);
    touched.insert(donor->request.su_id);
  }
  for (std::uint64_t id : touched) reschedule_completion(st, st.allocations.at(id));
  return freed;
}

// ---------------------------------------------------------------------------
// PU arrival / departure
// ---------------------------------------------------------------------------

std::vector<DisplacedSu> handle_pu_arrival(SystemState& st, int channel) {
  std::vector<std::uint64_t> hit = st.pool.seize_channel_for_pu(channel);

  // Strip the seized slots from every displaced allocation before touching
  // any of them: a later-processed SU must not look like a slot donor for an
  // earlier one on the strength of slots the PU just took.
  std::vector<std::pair<std::uint64_t, int>> lost_by_su;
  lost_by_su.reserve(hit.size());
  for (std::uint64_t su_id : hit) {
    Allocation& alloc = st.allocations.at(su_id);
    int before = alloc.granted();
    std::erase_if(alloc.slots, [&](const SlotRef& s) { return s.channel == channel; });
    lost_by_su.emplace_back(su_id, before - alloc.granted());
  }

  // Earliest arrival relocates first (FIFO priority among the displaced).
  std::sort(lost_by_su.begin(), lost_by_su.end(),
            [&](const auto& a, const auto& b) {
              const Allocation& aa = st.allocations.at(a.first);
              const Allocation& ab = st.allocations.at(b.first);
              if (aa.request.arrival_time != ab.request.arrival_time)
                return aa.request.arrival_time < ab.request.arrival_time;
              return a.first < b.first;
            });

  std::vector<DisplacedSu> outcomes;
  outcomes.reserve(lost_by_su.size());
  for (const auto& [su_id, lost] : lost_by_su) {
    Allocation& alloc = st.allocations.at(su_id);
    int before = alloc.granted() + lost;
    const SuRequest req = alloc.request;

    if (policy_is_elastic(st.params.policy)) {
      // Recover what the free slots allow, shrink down to demand_min if
      // necessary, borrowing from other incumbents as a last resort.
      int recover = std::min(lost, st.pool.free_slots());
      if (recover > 0) {
        std::vector<SlotRef> got = st.pool.take_free_slots(recover, false);
        st.pool.assign(got, su_id);
        alloc.slots.insert(alloc.slots.end(), got.begin(), got.end());
      }
      if (alloc.granted() < req.demand_min) {
        int need = req.demand_min - alloc.granted();
        if (donation_slack(st, su_id) >= need) {
          readjust_donate(st, need, su_id);
          std::vector<SlotRef> got = st.pool.take_free_slots(need, false);
          st.pool.assign(got, su_id);
          alloc.slots.insert(alloc.slots.end(), got.begin(), got.end());
        }
      }
      if (alloc.granted() >= req.demand_min) {
        bool whole = alloc.granted() == before;
        // a switch at an unchanged width leaves the running service alone;
        // only a changed rate needs a fresh memoryless draw
        if (!whole) reschedule_completion(st, alloc);
        st.trace.note(st.now(), su_id,
                      whole ? DecisionTag::Relocate : DecisionTag::Shrink,
                      alloc.granted());
        outcomes.push_back({su_id,
                            whole ? DisplacementOutcome::Relocated
                                  : DisplacementOutcome::Shrunk,
                            alloc.granted()});
        continue;
      }
    } else if (lost <= st.pool.free_slots()) {
      // Fixed demand must be restored in full; the switch is seamless and
      // the running service is untouched.
      std::vector<SlotRef> got = st.pool.take_free_slots(lost, false);
      st.pool.assign(got, su_id);
      alloc.slots.insert(alloc.slots.end(), got.begin(), got.end());
      st.trace.note(st.now(), su_id, DecisionTag::Relocate, alloc.granted());
      outcomes.push_back({su_id, DisplacementOutcome::Relocated, alloc.granted()});
      continue;
    }

    // No viable relocation: leave service entirely.
    if (!alloc.slots.empty()) st.pool.release(alloc.slots, su_id);
    st.allocations.erase(su_id);
    DisplacementOutcome out = requeue_or_terminate(st, req);
    outcomes.push_back({su_id, out, 0});
  }

  return outcomes;
}

std::vector<AdmissionDecision> handle_pu_departure(SystemState& st, int channel) {
  st.pool.release_pu_channel(channel);
  return rebalance(st);
}

// ---------------------------------------------------------------------------
// SU departure, queue timeout, rebalance
// ---------------------------------------------------------------------------

std::vector<AdmissionDecision> handle_su_departure(SystemState& st, std::uint64_t su_id) {
  auto it = st.allocations.find(su_id);
  if (it == st.allocations.end())
    throw std::invalid_argument("handle_su_departure: unknown allocation");
  if (it->second.request.counted) ++st.counters.su_completed;
  st.trace.note(st.now(), su_id, DecisionTag::Complete, it->second.granted());
  st.pool.release(it->second.slots, su_id);
  st.allocations.erase(it);
  return rebalance(st);
}

bool check_queue_timeout(SystemState& st, std::uint64_t entry_id) {
  if (!st.queues.contains(entry_id)) return false;  // already served; stale timer
  note_queue_change(st);
  std::optional<QueuedEntry> entry = st.queues.remove(entry_id);
  ++st.queue_audit.dropped;
  count_forced_termination(st, entry->request);
  st.trace.note(st.now(), entry->request.su_id, DecisionTag::DeadlineDrop, 0);
  return true;
}

std::vector<AdmissionDecision> rebalance(SystemState& st) {
  std::vector<AdmissionDecision> admitted = drain_queue(st);
  if (policy_is_elastic(st.params.policy)) expand_elastic(st);
  return admitted;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

bool audit_slots(const SystemState& st) {
  if (!st.pool.audit_consistent()) return false;
  int su_granted = 0;
  for (const auto& [id, alloc] : st.allocations) {
    su_granted += alloc.granted();
    const SuRequest& r = alloc.request;
    if (policy_is_elastic(st.params.policy)) {
      if (alloc.granted() < r.demand_min || alloc.granted() > r.demand_max) return false;
    } else if (alloc.granted() != r.demand) {
      return false;
    }
    for (const SlotRef& s : alloc.slots) {
      const SlotOwner& o = st.pool.owner(s.channel, s.slot);
      if (o.tag != SlotTag::Su || o.su_id != id) return false;
      if (st.pool.pu_holds(s.channel)) return false;
    }
  }
  return su_granted == st.pool.su_slots() &&
         st.pool.pu_slots() + st.pool.su_slots() + st.pool.free_slots() ==
             st.pool.total_slots();
}

}  // namespace casim
