#pragma once

#include <vector>

#include "schedsim/traffic.hpp"

namespace schedsim {

/// Reward shaping parameters: jitter penalty weight, scaling, bias, the
/// violation-penalty weight of the alternative reward, and the constant
/// term of the drift bound (action-independent, zero by default).
struct RewardConfig {
  double penalty_mu = 50.0;
  double scale_omega = 500.0;
  double bias = 1.0;
  double qpips_delta = 50.0;
  double drift_const = 0.0;

  void validate() const;
};

/// One step of the delay-violation virtual queue:
/// H <- [H - eta * arrivals]^+ + violations.
double update_virtual_queue(double h, int violations_this_slot, int arrivals,
                            double eta);

/// Packet-normalized drift of the actual and virtual queues for one slot.
/// `rate_bits` is the realized per-user service offer of the slot.
double normalized_drift(const std::vector<double>& queue_bits,
                        const std::vector<double>& vqueue,
                        const std::vector<double>& rate_bits,
                        const std::vector<int>& arrivals,
                        const std::vector<int>& violations,
                        const std::vector<double>& packet_size_bits,
                        const std::vector<double>& arrival_rate,
                        const std::vector<double>& violation_bound,
                        double drift_const);

/// Drift-plus-penalty reward: -((drift + mu * jitter) / omega - bias).
double lgqp_reward(double drift, double running_jitter,
                   const RewardConfig& cfg);

/// Violation-penalty reward of the alternative learned scheduler:
/// -(jitter + delta * cumulative violation ratio).
double qpips_reward(double running_jitter, long long cumulative_violations,
                    long long cumulative_arrivals, double delta);

/// Average delay jitter over completions recorded so far.
double running_jitter(const DelayRecord& records);

}  // namespace schedsim
