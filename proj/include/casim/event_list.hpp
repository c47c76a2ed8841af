#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace casim {

enum class EventKind : std::uint8_t {
  PuArrival,
  PuDeparture,
  SuArrival,
  SuServiceComplete,
  QueueDeadline,
  SnrTransition,
  MeasureTick,
};

const char* to_string(EventKind k);

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::MeasureTick;
  int channel = -1;       // PuDeparture
  int su_class = -1;      // SuArrival
  std::uint64_t id = 0;   // SU / allocation / queue-entry id
  std::uint64_t seq = 0;  // stamped at schedule(); breaks timestamp ties
};

// Future-event list: a min-heap ordered by (time, seq). The insertion
// sequence number makes simultaneous events pop in schedule order, so a run
// is fully reproducible.
class EventList {
 public:
  explicit EventList(double horizon = std::numeric_limits<double>::infinity());

  double clock() const { return clock_; }
  double horizon() const { return horizon_; }
  std::size_t pending() const { return heap_.size(); }

  /// Stamps and enqueues `ev`; rejects timestamps before the current clock.
  std::uint64_t schedule(EventRecord ev);

  // Pops the earliest event and advances the clock to it. Returns nullopt at
  // END: the list is empty or the next event lies beyond the horizon (the
  // clock then stays where it was).
  std::optional<EventRecord> pop_next();

 private:
  struct Later {
    bool operator()(const EventRecord& a, const EventRecord& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<EventRecord, std::vector<EventRecord>, Later> heap_;
  double clock_ = 0.0;
  double horizon_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace casim
