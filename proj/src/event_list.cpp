#include "casim/event_list.hpp"

#include <stdexcept>
#include <string>

namespace casim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::PuArrival: return "pu_arrival";
    case EventKind::PuDeparture: return "pu_departure";
    case EventKind::SuArrival: return "su_arrival";
    case EventKind::SuServiceComplete: return "su_service_complete";
    case EventKind::QueueDeadline: return "queue_deadline";
    case EventKind::SnrTransition: return "snr_transition";
    case EventKind::MeasureTick: return "measure_tick";
  }
  return "?";
}

EventList::EventList(double horizon) : horizon_(horizon) {
  if (horizon < 0.0) throw std::invalid_argument("horizon must be >= 0");
}

std::uint64_t EventList::schedule(EventRecord ev) {
  if (ev.time < clock_)
    throw std::invalid_argument("schedule: timestamp " + std::to_string(ev.time) +
                                " precedes clock " + std::to_string(clock_));
  ev.seq = next_seq_++;
  heap_.push(ev);
  return ev.seq;
}

std::optional<EventRecord> EventList::pop_next() {
  if (heap_.empty()) return std::nullopt;
  EventRecord ev = heap_.top();
  if (ev.time > horizon_) return std::nullopt;
  heap_.pop();
  clock_ = ev.time;
  return ev;
}

}  // namespace casim
