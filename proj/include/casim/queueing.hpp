#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "casim/request.hpp"

namespace casim {

enum class EntryOrigin : std::uint8_t { FreshArrival, PreemptedFeedback };

struct QueuedEntry {
  SuRequest request;
  double enqueue_time = 0.0;
  double deadline = 0.0;  // enqueue_time + delta_max; may be +inf
  EntryOrigin origin = EntryOrigin::FreshArrival;
  std::uint64_t entry_id = 0;  // global, also orders same-time entries
};

// Bounded FIFO buffer. Entries arrive in nondecreasing time, so a deque
// keeps them ordered by (enqueue_time, entry_id) without sorting.
class FifoQueue {
 public:
  explicit FifoQueue(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool full() const { return size() >= capacity_; }

  /// False (and no change) when full.
  bool push(QueuedEntry e);

  const std::deque<QueuedEntry>& entries() const { return entries_; }

  QueuedEntry* find(std::uint64_t entry_id);
  QueuedEntry* find_by_su(std::uint64_t su_id);

  std::optional<QueuedEntry> remove(std::uint64_t entry_id);

  /// Removes and returns every entry with deadline <= now, preserving order.
  std::vector<QueuedEntry> expire(double now);

 private:
  int capacity_;
  std::deque<QueuedEntry> entries_;
};

// The two synchronized buffers. Each class routes to its primary queue and
// overflows into the other; service scans both in global FIFO order.
class DualQueueController {
 public:
  DualQueueController(int queue1_capacity, int queue2_capacity);

  /// Queue id (1 or 2) the entry landed in, or nullopt when both are full.
  std::optional<int> enqueue(QueuedEntry e);

  // First entry, in global FIFO order across both queues, whose demand under
  // `policy` fits `free_slots` (or passes `fits` when given); removed and
  // returned. With strict_hol only the global head is considered.
  std::optional<QueuedEntry> dequeue_first_servable(
      int free_slots, PolicyKind policy, bool strict_hol = false,
      const std::function<bool(int)>& fits = {});

  /// Drops every entry past its deadline, merged in global FIFO order.
  std::vector<QueuedEntry> expire_deadlines(double now);

  std::optional<QueuedEntry> remove(std::uint64_t entry_id);
  bool contains(std::uint64_t entry_id) const;
  QueuedEntry* find(std::uint64_t entry_id);
  const QueuedEntry* find_by_su(std::uint64_t su_id) const;
  QueuedEntry* find_by_su(std::uint64_t su_id);

  int total_size() const { return q1_.size() + q2_.size(); }
  int total_capacity() const { return q1_.capacity() + q2_.capacity(); }
  const FifoQueue& queue1() const { return q1_; }
  const FifoQueue& queue2() const { return q2_; }

 private:
  FifoQueue q1_;
  FifoQueue q2_;
};

}  // namespace casim
