#include "schedsim/lyapunov.hpp"

#include <stdexcept>

namespace schedsim {

void RewardConfig::validate() const {
  if (!(scale_omega > 0.0))
    throw std::invalid_argument("reward: scale_omega must be > 0");
  if (penalty_mu < 0.0)
    throw std::invalid_argument("reward: penalty_mu must be >= 0");
  if (qpips_delta < 0.0)
    throw std::invalid_argument("reward: qpips_delta must be >= 0");
}

double update_virtual_queue(double h, int violations_this_slot, int arrivals,
                            double eta) {
  double next = h - eta * double(arrivals);
  if (next < 0.0) next = 0.0;
  return next + double(violations_this_slot);
}

double normalized_drift(const std::vector<double>& queue_bits,
                        const std::vector<double>& vqueue,
                        const std::vector<double>& rate_bits,
                        const std::vector<int>& arrivals,
                        const std::vector<int>& violations,
                        const std::vector<double>& packet_size_bits,
                        const std::vector<double>& arrival_rate,
                        const std::vector<double>& violation_bound,
                        double drift_const) {
  const std::size_t users = queue_bits.size();
  double drift = drift_const;
  for (std::size_t u = 0; u < users; ++u) {
    const double g = packet_size_bits[u];
    drift += (queue_bits[u] / g) * (arrival_rate[u] - rate_bits[u] / g);
    drift += vqueue[u] *
             (double(violations[u]) - violation_bound[u] * arrival_rate[u]);
  }
  (void)arrivals;  // arrivals enter through the virtual-queue update
  return drift;
}

double lgqp_reward(double drift, double running_jitter,
                   const RewardConfig& cfg) {
  return -((drift + cfg.penalty_mu * running_jitter) / cfg.scale_omega -
           cfg.bias);
}

double qpips_reward(double running_jitter, long long cumulative_violations,
                    long long cumulative_arrivals, double delta) {
  const double ratio =
      cumulative_arrivals > 0
          ? double(cumulative_violations) / double(cumulative_arrivals)
          : 0.0;
  return -(running_jitter + delta * ratio);
}

double running_jitter(const DelayRecord& records) {
  return records.jitter_slots();
}

}  // namespace schedsim
