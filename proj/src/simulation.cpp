#include "casim/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace casim {

double RunResult::p_block() const {
  if (counters.su_arrivals == 0) return 0.0;
  return static_cast<double>(counters.su_blocked) /
         static_cast<double>(counters.su_arrivals);
}

double RunResult::p_forced() const {
  if (counters.su_admitted == 0) return 0.0;
  return static_cast<double>(counters.su_forced_terminated) /
         static_cast<double>(counters.su_admitted);
}

double RunResult::capacity() const {
  if (counters.observation_time <= 0.0) return 0.0;
  return static_cast<double>(counters.su_completed) / counters.observation_time;
}

double RunResult::mean_queue_len() const {
  if (counters.observation_time <= 0.0) return 0.0;
  return counters.queue_occupancy_integral / counters.observation_time;
}

bool RunResult::partition_ok() const {
  const CounterSet& c = counters;
  if (c.su_arrivals != c.su_blocked + c.su_admitted) return false;
  if (c.su_admitted < c.su_completed + c.su_forced_terminated) return false;
  return true;
}

Simulator::Simulator(const Scenario& scenario, PolicyKind policy, std::uint64_t seed,
                     SimOptions opts)
    : sc_(scenario),
      opts_(opts),
      st_(sc_.policy_params(policy), sc_.traffic.su_service_rate,
          sc_.spectrum.channels, sc_.spectrum.slots(), sc_.policy.queue1_capacity,
          sc_.policy.queue2_capacity, sc_.sim.horizon, seed),
      trace_hash_(kFnvOffset) {
  st_.warmup_end = sc_.sim.warmup;
  st_.trace.recording = opts_.record_decisions;
}

void Simulator::schedule_next_su_arrival(int su_class) {
  double rate = sc_.traffic.su_arrival_rate[su_class];
  if (rate <= 0.0) return;
  double t = st_.now() + st_.rng.su_arrival[su_class].exponential(rate);
  st_.events.schedule({t, EventKind::SuArrival, -1, su_class, 0, 0});
}

void Simulator::schedule_next_snr_transition(std::uint64_t su_id) {
  double rate = sc_.traffic.snr_rate;
  if (rate <= 0.0) return;
  double t = st_.now() + st_.rng.snr.exponential(rate);
  st_.events.schedule({t, EventKind::SnrTransition, -1, -1, su_id, 0});
}

RunResult Simulator::run() {
  for (int k = 0; k < sc_.traffic.num_classes(); ++k) schedule_next_su_arrival(k);
  if (sc_.traffic.pu_arrival_rate > 0.0) {
    double t = st_.rng.pu.exponential(sc_.traffic.pu_arrival_rate);
    st_.events.schedule({t, EventKind::PuArrival, -1, -1, 0, 0});
  }
  if (sc_.sim.warmup > 0.0)
    st_.events.schedule({sc_.sim.warmup, EventKind::MeasureTick, -1, -1, 0, 0});

  while (auto ev = st_.events.pop_next()) {
    trace_hash_ = hash_mix(trace_hash_, ev->time);
    trace_hash_ = hash_mix(trace_hash_, static_cast<std::uint64_t>(ev->kind));
    trace_hash_ = hash_mix(trace_hash_, static_cast<std::uint64_t>(
                                            static_cast<std::int64_t>(ev->channel)));
    trace_hash_ = hash_mix(trace_hash_, static_cast<std::uint64_t>(
                                            static_cast<std::int64_t>(ev->su_class)));
    trace_hash_ = hash_mix(trace_hash_, ev->id);
    trace_hash_ = hash_mix(trace_hash_, ev->seq);
    try {
      dispatch(*ev);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("while handling ") + to_string(ev->kind) +
                               " (id " + std::to_string(ev->id) + ") at t=" +
                               std::to_string(ev->time) + ": " + e.what());
    }
    if (opts_.audit_every_event && !audit_slots(st_))
      throw std::logic_error(std::string("slot conservation violated after ") +
                             to_string(ev->kind) + " at t=" + std::to_string(ev->time));
  }

  flush_occupancy(st_, sc_.sim.horizon);
  st_.counters.observation_time = std::max(0.0, sc_.sim.horizon - sc_.sim.warmup);

  RunResult result;
  result.counters = st_.counters;
  result.queue_audit = st_.queue_audit;
  result.trace_hash = trace_hash_;
  result.decision_hash = st_.trace.hash();
  result.decisions = st_.trace.records();
  result.residual_queued = st_.queues.total_size();
  result.residual_serving = st_.allocations.size();
  for (const auto& [id, alloc] : st_.allocations)
    if (alloc.request.counted) ++result.residual_counted;
  for (const auto& e : st_.queues.queue1().entries())
    if (e.request.counted) ++result.residual_counted;
  for (const auto& e : st_.queues.queue2().entries())
    if (e.request.counted) ++result.residual_counted;
  return result;
}

void Simulator::dispatch(const EventRecord& ev) {
  switch (ev.kind) {
    case EventKind::PuArrival:
      on_pu_arrival(ev);
      break;
    case EventKind::PuDeparture:
      handle_pu_departure(st_, ev.channel);
      break;
    case EventKind::SuArrival:
      on_su_arrival(ev);
      break;
    case EventKind::SuServiceComplete:
      on_su_service_complete(ev);
      break;
    case EventKind::QueueDeadline:
      check_queue_timeout(st_, ev.id);
      break;
    case EventKind::SnrTransition:
      on_snr_transition(ev);
      break;
    case EventKind::MeasureTick:
      flush_occupancy(st_, st_.now());
      break;
  }
}

void Simulator::on_pu_arrival(const EventRecord&) {
  bool counted = st_.now() >= st_.warmup_end;
  if (counted) ++st_.counters.pu_arrivals;
  double t = st_.now() + st_.rng.pu.exponential(sc_.traffic.pu_arrival_rate);
  st_.events.schedule({t, EventKind::PuArrival, -1, -1, 0, 0});

  // Target a uniformly chosen non-PU channel; with every channel PU-held the
  // arrival is lost on the PU side.
  int idle = st_.pool.num_channels() - st_.pool.pu_channels_on();
  if (idle == 0) {
    if (counted) ++st_.counters.pu_blocked;
    return;
  }
  int pick = st_.rng.pu.uniform_int(idle);
  int channel = -1;
  for (int ch = 0; ch < st_.pool.num_channels(); ++ch) {
    if (!st_.pool.pu_holds(ch) && pick-- == 0) {
      channel = ch;
      break;
    }
  }
  double hold = st_.rng.pu.exponential(sc_.traffic.pu_service_rate);
  handle_pu_arrival(st_, channel);
  st_.events.schedule({st_.now() + hold, EventKind::PuDeparture, channel, -1, 0, 0});
}

void Simulator::on_su_arrival(const EventRecord& ev) {
  int k = ev.su_class;
  schedule_next_su_arrival(k);
  SnrClass snr = sample_snr_initial(sc_.traffic.snr_initial, st_.rng.su_arrival[k]);
  const DemandRule& rule = sc_.demand_for(k, snr);

  SuRequest req;
  req.su_id = next_su_id_++;
  req.su_class = k;
  req.snr = snr;
  req.demand = rule.theta;
  req.demand_min = rule.theta_min;
  req.demand_max = rule.theta_max;
  req.arrival_time = st_.now();
  req.counted = st_.now() >= st_.warmup_end;

  AdmissionDecision d = handle_su_arrival(st_, req);
  if (d.outcome != AdmissionOutcome::Block) schedule_next_snr_transition(req.su_id);
}

void Simulator::on_su_service_complete(const EventRecord& ev) {
  auto it = st_.allocations.find(ev.id);
  if (it == st_.allocations.end() || it->second.completion_seq != ev.seq)
    return;  // stale: the grant changed or the SU left service
  handle_su_departure(st_, ev.id);
}

void Simulator::on_snr_transition(const EventRecord& ev) {
  std::uint64_t su_id = ev.id;
  if (auto it = st_.allocations.find(su_id); it != st_.allocations.end()) {
    // In service: the link class drifts but the grant stays as admitted.
    SnrProcess proc{su_id, it->second.request.snr, sc_.traffic.snr_matrix};
    it->second.request.snr = sample_snr_transition(proc, st_.rng.snr);
    schedule_next_snr_transition(su_id);
    return;
  }
  if (QueuedEntry* entry = st_.queues.find_by_su(su_id)) {
    // Buffered: demand is re-derived for the new link class.
    SnrProcess proc{su_id, entry->request.snr, sc_.traffic.snr_matrix};
    entry->request.snr = sample_snr_transition(proc, st_.rng.snr);
    const DemandRule& rule = sc_.demand_for(entry->request.su_class, entry->request.snr);
    entry->request.demand = rule.theta;
    entry->request.demand_min = rule.theta_min;
    entry->request.demand_max = rule.theta_max;
    schedule_next_snr_transition(su_id);
    return;
  }
  // SU already left the system; the timer dies with it.
}

}  // namespace casim
