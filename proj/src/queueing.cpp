#include "casim/queueing.hpp"

#include <algorithm>
#include <stdexcept>

namespace casim {

FifoQueue::FifoQueue(int capacity) : capacity_(capacity) {
  if (capacity < 0) throw std::invalid_argument("queue capacity must be >= 0");
}

bool FifoQueue::push(QueuedEntry e) {
  if (full()) return false;
  if (!entries_.empty()) {
    const QueuedEntry& back = entries_.back();
    if (e.enqueue_time < back.enqueue_time ||
        (e.enqueue_time == back.enqueue_time && e.entry_id < back.entry_id))
      throw std::logic_error("queue entries must arrive in FIFO order");
  }
  entries_.push_back(std::move(e));
  return true;
}

QueuedEntry* FifoQueue::find(std::uint64_t entry_id) {
  for (auto& e : entries_)
    if (e.entry_id == entry_id) return &e;
  return nullptr;
}

QueuedEntry* FifoQueue::find_by_su(std::uint64_t su_id) {
  for (auto& e : entries_)
    if (e.request.su_id == su_id) return &e;
  return nullptr;
}

std::optional<QueuedEntry> FifoQueue::remove(std::uint64_t entry_id) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->entry_id == entry_id) {
      QueuedEntry out = *it;
      entries_.erase(it);
      return out;
    }
  }
  return std::nullopt;
}

std::vector<QueuedEntry> FifoQueue::expire(double now) {
  std::vector<QueuedEntry> dropped;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->deadline <= now) {
      dropped.push_back(*it);
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  return dropped;
}

DualQueueController::DualQueueController(int queue1_capacity, int queue2_capacity)
    : q1_(queue1_capacity), q2_(queue2_capacity) {}

std::optional<int> DualQueueController::enqueue(QueuedEntry e) {
  // Even classes home to queue 1, odd to queue 2; the other queue absorbs
  // overflow.
  FifoQueue* primary = (e.request.su_class % 2 == 0) ? &q1_ : &q2_;
  FifoQueue* other = (primary == &q1_) ? &q2_ : &q1_;
  if (primary->push(e)) return primary == &q1_ ? 1 : 2;
  if (other->push(std::move(e))) return other == &q1_ ? 1 : 2;
  return std::nullopt;
}

namespace {

bool fifo_before(const QueuedEntry& a, const QueuedEntry& b) {
  if (a.enqueue_time != b.enqueue_time) return a.enqueue_time < b.enqueue_time;
  return a.entry_id < b.entry_id;
}

}  // namespace

std::optional<QueuedEntry> DualQueueController::dequeue_first_servable(
    int free_slots, PolicyKind policy, bool strict_hol,
    const std::function<bool(int)>& fits) {
  if (free_slots <= 0) return std::nullopt;
  auto servable = [&](const QueuedEntry& e) {
    int need = queued_demand(e.request, policy);
    if (need > free_slots) return false;
    return fits ? fits(need) : true;
  };
  // Merge-scan both queues in (enqueue_time, entry_id) order.
  std::size_t i1 = 0, i2 = 0;
  const auto& e1 = q1_.entries();
  const auto& e2 = q2_.entries();
  while (i1 < e1.size() || i2 < e2.size()) {
    bool from_q1;
    if (i1 >= e1.size()) from_q1 = false;
    else if (i2 >= e2.size()) from_q1 = true;
    else from_q1 = fifo_before(e1[i1], e2[i2]);
    const QueuedEntry& cand = from_q1 ? e1[i1] : e2[i2];
    if (servable(cand)) {
      std::uint64_t id = cand.entry_id;
      return from_q1 ? q1_.remove(id) : q2_.remove(id);
    }
    if (strict_hol) return std::nullopt;  // head-of-line blocks the rest
    if (from_q1) ++i1; else ++i2;
  }
  return std::nullopt;
}

std::vector<QueuedEntry> DualQueueController::expire_deadlines(double now) {
  std::vector<QueuedEntry> all = q1_.expire(now);
  std::vector<QueuedEntry> d2 = q2_.expire(now);
  all.insert(all.end(), d2.begin(), d2.end());
  std::sort(all.begin(), all.end(),
            [](const QueuedEntry& a, const QueuedEntry& b) { return fifo_before(a, b); });
  return all;
}

std::optional<QueuedEntry> DualQueueController::remove(std::uint64_t entry_id) {
  if (auto e = q1_.remove(entry_id)) return e;
  return q2_.remove(entry_id);
}

bool DualQueueController::contains(std::uint64_t entry_id) const {
  for (const auto& e : q1_.entries())
    if (e.entry_id == entry_id) return true;
  for (const auto& e : q2_.entries())
    if (e.entry_id == entry_id) return true;
  return false;
}

QueuedEntry* DualQueueController::find(std::uint64_t entry_id) {
  if (QueuedEntry* e = q1_.find(entry_id)) return e;
  return q2_.find(entry_id);
}

const QueuedEntry* DualQueueController::find_by_su(std::uint64_t su_id) const {
  for (const auto& e : q1_.entries())
    if (e.request.su_id == su_id) return &e;
  for (const auto& e : q2_.entries())
    if (e.request.su_id == su_id) return &e;
  return nullptr;
}

QueuedEntry* DualQueueController::find_by_su(std::uint64_t su_id) {
  if (QueuedEntry* e = q1_.find_by_su(su_id)) return e;
  return q2_.find_by_su(su_id);
}

}  // namespace casim
