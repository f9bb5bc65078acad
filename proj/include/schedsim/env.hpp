#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "schedsim/config.hpp"

namespace schedsim {

enum class Policy { lgqp, qpips, rr_edf };

Policy policy_from_string(const std::string& name);
std::string policy_name(Policy p);
bool policy_is_learned(Policy p);

/// One packet's logged lifecycle; completion_slot < 0 marks a
/// deadline-violated packet.
struct PacketEvent {
  int user = 0;
  long long arrival_slot = 0;
  long long completion_slot = -1;
  long long delay_slots = -1;
};

/// Everything produced by one slot, enough to recompute the reward offline.
struct SlotTrace {
  long long slot = 0;
  double drift = 0.0;
  double running_jitter = 0.0;
  double reward = 0.0;
  std::vector<double> queue_bits_start;
  std::vector<double> vqueue_start;
  std::vector<double> rate_bits;       // channel offer, floored
  std::vector<long long> served_bits;  // actually drained
  std::vector<int> arrivals;
  std::vector<int> violations;
  // filled only when run.dump_allocations is on
  std::vector<std::vector<int>> granted_subcarriers;
  std::vector<double> planned_bits;
};

struct StepOutcome {
  Mat next_obs;  // one row per agent
  double reward = 0.0;
  SlotTrace trace;
};

struct EpisodeMetrics {
  std::vector<double> per_user_violation_ratio;
  std::vector<long long> violations;
  std::vector<long long> arrivals;
  double mean_violation_ratio = 0.0;
  double jitter_slots = 0.0;
  double mean_delay_slots = 0.0;
  double mean_reward = 0.0;
  long long served_packets = 0;
};

/// Slot-level downlink environment: per slot it allocates subcarriers,
/// realizes rates under the drawn channel, serves and expires packets,
/// draws the next arrivals, advances the virtual queues and computes the
/// drift-guided reward. Observations are one row per agent:
/// [backlog/packet size, virtual queue, per-subcarrier serving-BS channel
/// norms scaled by their max, slot phase].
class Environment {
 public:
  Environment(const ExperimentConfig& cfg, Policy policy);

  /// Places UEs, draws the first channel and clears all queues.
  /// Deterministic per seed.
  Mat reset(std::uint64_t seed);

  StepOutcome step(const std::vector<int>& joint_action);
  StepOutcome step_baseline();

  int obs_dim() const { return 3 + cfg_.topology.num_subcarriers; }
  int num_agents() const { return cfg_.topology.num_ues(); }
  int num_actions() const { return cfg_.scheduler.action_count(); }
  long long slot() const { return slot_; }
  UserDirective directive_from_action(int user, int action) const;

  const DelayRecord& records() const { return records_; }
  const std::vector<PacketEvent>& events() const { return events_; }
  const std::vector<SlotTrace>& traces() const { return traces_; }
  const TopologyConfig& topology() const { return topo_; }
  const std::vector<UserBuffer>& buffers() const { return buffers_; }
  const std::vector<double>& virtual_queues() const { return vqueue_; }
  long long validated_slots() const { return validated_slots_; }

  EpisodeMetrics metrics() const;

 private:
  StepOutcome run_slot(const Allocation& alloc);
  Mat observations() const;

  ExperimentConfig cfg_;
  Policy policy_;
  TopologyConfig topo_;  // includes the episode's UE distances
  std::vector<UserBuffer> buffers_;
  std::vector<double> vqueue_;
  ChannelRealization chan_;
  RoundRobinState rr_;
  DelayRecord records_;
  std::vector<PacketEvent> events_;
  std::vector<SlotTrace> traces_;
  Rng traffic_rng_{0};
  Rng channel_rng_{0};
  long long slot_ = 1;
  double reward_sum_ = 0.0;
  long long steps_ = 0;
  long long validated_slots_ = 0;
  std::vector<double> packet_size_, arrival_rate_, violation_bound_;
};

struct EpisodeResult {
  EpisodeMetrics metrics;
  std::vector<double> rewards;
  std::vector<double> losses;  // one entry per learner update
  std::vector<PacketEvent> events;
  std::vector<SlotTrace> traces;
};

/// Runs one episode. Learned policies act greedily on `model`; when
/// `learner` is given the episode also feeds its replay pool and trains it
/// on the configured cadence (exploration follows the learner's schedule).
EpisodeResult run_episode(const ExperimentConfig& cfg, Policy policy,
                          std::uint64_t seed, const QmixModel* model,
                          QmixLearner* learner, Exec ex = default_exec());

/// Pooled evaluation statistics over a batch of frozen-policy episodes.
struct EvalSummary {
  std::vector<long long> violations;
  std::vector<long long> arrivals;
  std::vector<double> per_user_violation_ratio;
  double mean_violation_ratio = 0.0;
  double pooled_violation_ratio = 0.0;
  double mean_jitter_slots = 0.0;
  double mean_delay_slots = 0.0;
  long long served_packets = 0;
  int episodes = 0;
};

/// Evaluates a frozen policy over `episodes` independent episodes with
/// seeds derived from `seed`. Episodes run in parallel; results do not
/// depend on the thread count. When `full_results` is given it receives
/// every episode's events and traces (for log export).
EvalSummary evaluate_policy(const ExperimentConfig& cfg, Policy policy,
                            const QmixModel* model, std::uint64_t seed,
                            int episodes, Exec ex = default_exec(),
                            std::vector<EpisodeResult>* full_results = nullptr);

}  // namespace schedsim
