#include "schedsim/traffic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace schedsim {

void UserBuffer::enqueue(long long slot, int count) {
  for (int i = 1; i <= count; ++i) {
    Packet p;
    p.arrival_slot = slot;
    p.seq_in_slot = i;
    p.size_bits = packet_size_bits_;
    p.remaining_bits = packet_size_bits_;
    p.id = next_id_++;
    queue_.push_back(p);
    total_bits_ += packet_size_bits_;
    arrived_bits_ += packet_size_bits_;
  }
}

std::vector<Completion> UserBuffer::serve(long long budget_bits,
                                          long long slot) {
  std::vector<Completion> done;
  if (budget_bits <= 0) return done;
  long long budget = budget_bits;
  for (auto it = queue_.begin(); it != queue_.end() && budget > 0;) {
    if (it->arrival_slot >= slot) break;  // younger packets only follow
    if (!servable(*it, slot)) {
      ++it;
      continue;
    }
    const long long drained =
        it->remaining_bits <= budget ? it->remaining_bits : budget;
    it->remaining_bits -= drained;
    total_bits_ -= drained;
    served_bits_ += drained;
    budget -= drained;
    if (it->remaining_bits == 0) {
      done.push_back({*it, slot - it->arrival_slot});
      it = queue_.erase(it);
    } else {
      ++it;
    }
  }
  return done;
}

int UserBuffer::expire(long long slot, std::vector<Packet>* expired) {
  int count = 0;
  for (auto it = queue_.begin(); it != queue_.end();) {
    if (it->arrival_slot >= slot) break;
    if (slot - it->arrival_slot >= deadline_slots_ + 1 && !it->violated) {
      it->violated = true;
      ++count;
      if (expired) expired->push_back(*it);
      if (drop_on_expiry_) {
        total_bits_ -= it->remaining_bits;
        expired_bits_ += it->remaining_bits;
        it = queue_.erase(it);
        continue;
      }
    }
    ++it;
  }
  return count;
}

long long UserBuffer::eligible_bits(long long slot) const {
  long long bits = 0;
  for (const auto& p : queue_) {
    if (p.arrival_slot >= slot) break;
    if (servable(p, slot)) bits += p.remaining_bits;
  }
  return bits;
}

std::vector<long long> UserBuffer::eligible_packet_bits(long long slot) const {
  std::vector<long long> bits;
  for (const auto& p : queue_) {
    if (p.arrival_slot >= slot) break;
    if (servable(p, slot)) bits.push_back(p.remaining_bits);
  }
  return bits;
}

long long UserBuffer::head_of_line_arrival(long long slot) const {
  for (const auto& p : queue_) {
    if (p.arrival_slot >= slot) break;
    if (servable(p, slot)) return p.arrival_slot;
  }
  return -1;
}

void DelayRecord::add_completion(int u, long long delay) {
  assert(delay >= 1);
  completed[u] += 1;
  delay_sum[u] += delay;
  delay_sq_sum[u] += delay * delay;
}

double DelayRecord::jitter_slots() const {
  const int u_count = users();
  if (u_count == 0) return 0.0;
  double total = 0.0;
  for (int u = 0; u < u_count; ++u) {
    const long long n = completed[u];
    if (n <= 1) continue;
    const double mean = double(delay_sum[u]) / double(n);
    double var = double(delay_sq_sum[u]) / double(n) - mean * mean;
    if (var < 0.0) var = 0.0;  // rounding guard
    total += std::sqrt(var);
  }
  return total / double(u_count);
}

double DelayRecord::violation_ratio(int u) const {
  if (arrivals[u] <= 0) return 0.0;
  return double(violations[u]) / double(arrivals[u]);
}

double DelayRecord::mean_violation_ratio() const {
  const int u_count = users();
  if (u_count == 0) return 0.0;
  double total = 0.0;
  for (int u = 0; u < u_count; ++u) total += violation_ratio(u);
  return total / double(u_count);
}

double DelayRecord::mean_delay_slots() const {
  long long n = 0, s = 0;
  for (int u = 0; u < users(); ++u) {
    n += completed[u];
    s += delay_sum[u];
  }
  return n > 0 ? double(s) / double(n) : 0.0;
}

long long DelayRecord::total_completed() const {
  long long n = 0;
  for (auto c : completed) n += c;
  return n;
}

long long DelayRecord::total_violations() const {
  long long n = 0;
  for (auto v : violations) n += v;
  return n;
}

long long DelayRecord::total_arrivals() const {
  long long n = 0;
  for (auto a : arrivals) n += a;
  return n;
}

int poisson_arrivals(double lambda, Rng& rng) {
  if (lambda < 0.0) throw std::invalid_argument("negative arrival rate");
  return rng.poisson(lambda);
}

}  // namespace schedsim
