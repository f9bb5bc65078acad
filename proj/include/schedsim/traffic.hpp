#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "schedsim/rng.hpp"

namespace schedsim {

/// One downlink packet. Bits are integers so that conservation checks are
/// exact. Packets arriving in slot t become servable in slot t+1.
struct Packet {
  long long arrival_slot = 0;
  int seq_in_slot = 0;  // 1-based index within the slot's arrivals
  long long size_bits = 0;
  long long remaining_bits = 0;
  bool violated = false;
  long long id = 0;
};

/// A served packet together with its completion delay in slots.
struct Completion {
  Packet packet;
  long long delay = 0;
};

/// Per-user FIFO buffer with bit-level service. The per-user deadline makes
/// FIFO order coincide with earliest-deadline-first order.
class UserBuffer {
 public:
  UserBuffer() = default;
  UserBuffer(int user, long long packet_size_bits, long long deadline_slots,
             double arrival_rate, double violation_bound, bool drop_on_expiry)
      : user_(user),
        packet_size_bits_(packet_size_bits),
        deadline_slots_(deadline_slots),
        arrival_rate_(arrival_rate),
        violation_bound_(violation_bound),
        drop_on_expiry_(drop_on_expiry) {}

  int user() const { return user_; }
  long long packet_size_bits() const { return packet_size_bits_; }
  long long deadline_slots() const { return deadline_slots_; }
  double arrival_rate() const { return arrival_rate_; }
  double violation_bound() const { return violation_bound_; }

  /// Appends `count` packets stamped (slot, 1..count); servable from slot+1.
  void enqueue(long long slot, int count);

  /// Drains up to `budget_bits` in FIFO order from packets that are servable
  /// at `slot` (arrived earlier, not past their deadline). Returns the
  /// packets completed this slot with their delays.
  std::vector<Completion> serve(long long budget_bits, long long slot);

  /// Counts packets whose survival time reached deadline+1 at `slot`, each
  /// exactly once, and (by default) removes them. Returns this slot's count;
  /// the newly violated packets are appended to `expired` when given.
  int expire(long long slot, std::vector<Packet>* expired = nullptr);

  /// Total residual bits in the buffer (the queue-length recursion value).
  long long total_bits() const { return total_bits_; }

  /// Residual bits servable at `slot`.
  long long eligible_bits(long long slot) const;

  /// FIFO sequence of servable packet residuals at `slot`.
  std::vector<long long> eligible_packet_bits(long long slot) const;

  /// Arrival slot of the oldest servable packet, or -1 when none.
  long long head_of_line_arrival(long long slot) const;

  std::size_t size() const { return queue_.size(); }

  // bit-conservation counters over the buffer's lifetime
  long long arrived_bits() const { return arrived_bits_; }
  long long served_bits() const { return served_bits_; }
  long long expired_bits() const { return expired_bits_; }

 private:
  bool servable(const Packet& p, long long slot) const {
    if (p.arrival_slot >= slot) return false;
    if (drop_on_expiry_ && slot - p.arrival_slot > deadline_slots_)
      return false;  // counted by expire() in the same slot
    return true;
  }

  int user_ = 0;
  long long packet_size_bits_ = 0;
  long long deadline_slots_ = 0;
  double arrival_rate_ = 0.0;
  double violation_bound_ = 0.0;
  bool drop_on_expiry_ = true;
  std::deque<Packet> queue_;
  long long total_bits_ = 0;
  long long next_id_ = 0;
  long long arrived_bits_ = 0;
  long long served_bits_ = 0;
  long long expired_bits_ = 0;
};

/// Completion and violation statistics. Delay moments are tracked
/// incrementally per user; deadline-violated packets are excluded from the
/// delay set and counted separately.
struct DelayRecord {
  explicit DelayRecord(int users = 0)
      : completed(users, 0),
        delay_sum(users, 0),
        delay_sq_sum(users, 0),
        violations(users, 0),
        arrivals(users, 0) {}

  std::vector<long long> completed;
  std::vector<long long> delay_sum;
  std::vector<long long> delay_sq_sum;
  std::vector<long long> violations;
  std::vector<long long> arrivals;

  int users() const { return int(completed.size()); }
  void add_completion(int u, long long delay);
  void add_violations(int u, long long count) { violations[u] += count; }
  void add_arrivals(int u, long long count) { arrivals[u] += count; }

  /// Mean over users of the population standard deviation of completed
  /// delays; users with at most one completion contribute zero.
  double jitter_slots() const;

  /// Cumulative violations over cumulative arrivals; zero with no arrivals.
  double violation_ratio(int u) const;
  double mean_violation_ratio() const;

  double mean_delay_slots() const;
  long long total_completed() const;
  long long total_violations() const;
  long long total_arrivals() const;
};

/// Poisson arrival count for one slot.
int poisson_arrivals(double lambda, Rng& rng);

}  // namespace schedsim
