#pragma once

#include <vector>

#include "schedsim/channel.hpp"
#include "schedsim/traffic.hpp"

namespace schedsim {

/// One user's scheduling request for a slot: a discrete priority level
/// (0 is highest) and the number of packets it wants transmitted.
struct UserDirective {
  int user = 0;
  int priority = 0;
  int requested_packets = 0;
};

/// Per-BS round-robin cursors; persists across slots within an episode.
struct RoundRobinState {
  explicit RoundRobinState(int num_bs = 0) : cursor(num_bs, 0) {}
  std::vector<int> cursor;
};

struct SchedulerConfig {
  int priority_levels = 4;
  int max_request_packets = 5;
  /// When true, a subcarrier granted in one cell is unavailable to the
  /// others for that slot, so cells never interfere on purpose (centrally
  /// coordinated allocation). When false each cell reuses the full band
  /// independently and cross-cell interference is borne by the realized
  /// rates.
  bool shared_subcarrier_pool = true;

  int action_count() const { return priority_levels * (max_request_packets + 1); }
  void validate() const;
};

/// Builds a constraint-feasible allocation from per-user directives.
/// Users are processed by ascending priority value (ties: older head-of-line
/// packet first, then lower user id); each user receives its serving BS's
/// free subcarriers in descending channel-norm order until the
/// interference-free rate estimate covers min(requested packets * packet
/// size, servable bits). Infeasible requests are truncated, never rejected.
Allocation allocate(const std::vector<UserDirective>& directives,
                    const ChannelRealization& ch,
                    const std::vector<UserBuffer>& buffers,
                    const TopologyConfig& topo, const SchedulerConfig& cfg,
                    long long slot);

/// Round-robin baseline with earliest-deadline-first service order: rounds
/// visit each cell's users starting at the cursor, granting per visit just
/// enough subcarriers to cover the user's oldest uncovered packet; rounds
/// repeat until subcarriers run out or every servable packet is covered.
/// Cursors rotate by one user per slot.
Allocation round_robin_edf(RoundRobinState& state,
                           const ChannelRealization& ch,
                           const std::vector<UserBuffer>& buffers,
                           const TopologyConfig& topo,
                           const SchedulerConfig& cfg, long long slot);

/// Planning estimate: achievable rate of `subcarriers` for `user` with a
/// noise-only denominator. Realized service uses the true cross-cell SINR.
double interference_free_rate(const std::vector<int>& subcarriers,
                              const ChannelRealization& ch, int user,
                              const TopologyConfig& topo);

}  // namespace schedsim
