#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "schedsim/rng.hpp"

namespace schedsim {

/// One environment transition: joint observation, joint action, scalar
/// reward and the next joint observation.
struct Transition {
  std::vector<double> state;
  std::vector<int> actions;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

/// Fixed-capacity ring buffer with seeded uniform sampling (with
/// replacement). Pushing beyond capacity evicts the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay: zero capacity");
    slots_.reserve(capacity);
  }

  void push(Transition t) {
    if (slots_.size() < capacity_) {
      slots_.push_back(std::move(t));
    } else {
      slots_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return slots_[i]; }

  std::vector<const Transition*> sample(int batch, Rng& rng) const {
    if (batch <= 0 || std::size_t(batch) > slots_.size())
      throw std::runtime_error("replay: not enough transitions to sample");
    std::vector<const Transition*> out(batch);
    for (int i = 0; i < batch; ++i)
      out[i] = &slots_[rng.uniform_int(int(slots_.size()))];
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> slots_;
  std::size_t head_ = 0;
};

}  // namespace schedsim
