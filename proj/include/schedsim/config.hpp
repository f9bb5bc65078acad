#pragma once

#include <string>
#include <vector>

#include "schedsim/channel.hpp"
#include "schedsim/lyapunov.hpp"
#include "schedsim/qmix/learner.hpp"
#include "schedsim/scheduler.hpp"

namespace schedsim {

/// Traffic model: common packet size per run, a sweep list of sizes, and
/// per-user deadlines.
struct TrafficConfig {
  long long packet_size_bits = 28;
  std::vector<long long> packet_size_sweep_bits = {28, 40, 52, 64, 76};
  double arrival_rate = 3.0;
  std::vector<long long> deadlines_slots = {5, 2, 5, 3, 2, 2};
  double violation_bound = 0.01;
  bool drop_on_expiry = true;

  void validate(int num_ues) const;
};

struct RunConfig {
  int eval_episodes = 100;
  bool dump_event_log = false;
  bool dump_slot_trace = false;
  bool dump_allocations = false;

  void validate() const;
};

/// Full experiment description; every field has the default used in the
/// reference scenario, so an empty config file is a valid experiment.
struct ExperimentConfig {
  TopologyConfig topology;
  TrafficConfig traffic;
  RewardConfig reward;
  TrainerConfig trainer;
  SchedulerConfig scheduler;
  RunConfig run;

  void validate() const;
};

/// Parses a JSON config file. An empty (or whitespace-only) file yields
/// the defaults. Unknown keys and invariant violations raise
/// std::invalid_argument with the offending key path. Values may be
/// overridden through environment variables named
/// SCHEDSIM_<SECTION>__<KEY> (uppercase), e.g. SCHEDSIM_TRAINER__BATCH_SIZE.
ExperimentConfig parse_config(const std::string& path);

/// Parses config text directly (same rules as parse_config).
ExperimentConfig parse_config_text(const std::string& text);

/// Serializes a config back to JSON text; re-parsing reproduces the same
/// configuration.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace schedsim
