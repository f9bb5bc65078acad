#include "schedsim/scheduler.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace schedsim {

void SchedulerConfig::validate() const {
  if (priority_levels < 1)
    throw std::invalid_argument("scheduler: priority_levels must be >= 1");
  if (max_request_packets < 0)
    throw std::invalid_argument("scheduler: max_request_packets must be >= 0");
}

namespace {

/// Tracks which subcarriers are still grantable, per cell or globally.
class SubcarrierPool {
 public:
  SubcarrierPool(int num_bs, int num_subcarriers, bool shared)
      : num_subcarriers_(num_subcarriers),
        shared_(shared),
        used_bs_(std::size_t(num_bs) * num_subcarriers, 0),
        used_any_(num_subcarriers, 0),
        free_count_bs_(num_bs, num_subcarriers),
        free_count_any_(num_subcarriers) {}

  bool free_for(int b, int f) const {
    if (used_bs_[std::size_t(b) * num_subcarriers_ + f]) return false;
    if (shared_ && used_any_[f]) return false;
    return true;
  }

  void take(int b, int f) {
    used_bs_[std::size_t(b) * num_subcarriers_ + f] = 1;
    --free_count_bs_[b];
    if (!used_any_[f]) {
      used_any_[f] = 1;
      --free_count_any_;
    }
  }

  bool exhausted_for(int b) const {
    if (shared_) return free_count_any_ == 0;
    return free_count_bs_[b] == 0;
  }

 private:
  int num_subcarriers_;
  bool shared_;
  std::vector<std::uint8_t> used_bs_;
  std::vector<std::uint8_t> used_any_;
  std::vector<int> free_count_bs_;
  int free_count_any_;
};

/// Per-user planning state: the user's subcarriers ranked by channel norm,
/// a monotone walk pointer, and the running rate estimate of its grants.
struct UserPlan {
  std::vector<std::pair<double, int>> ranked;  // (norm2, f) descending
  std::size_t next = 0;
  std::vector<double> gammas;
  double estimate = 0.0;
  double target_bits = 0.0;
};

UserPlan make_plan(const ChannelRealization& ch, const TopologyConfig& topo,
                   int u) {
  UserPlan plan;
  const int b = topo.serving_bs(u);
  plan.ranked.reserve(ch.F);
  for (int f = 0; f < ch.F; ++f) {
    const double n2 = ch.norm2(f, b, u);
    if (n2 > 0.0) plan.ranked.emplace_back(n2, f);
  }
  std::sort(plan.ranked.begin(), plan.ranked.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  return plan;
}

/// Grants subcarriers to `u` until the estimate covers its target or the
/// pool runs dry. Returns false when the pool was exhausted first.
bool grant_until_covered(int u, UserPlan& plan, SubcarrierPool& pool,
                         Allocation& alloc, const ChannelRealization& ch,
                         const TopologyConfig& topo) {
  const int b = topo.serving_bs(u);
  const double p_sub = topo.subcarrier_power();
  while (plan.estimate < plan.target_bits) {
    int granted_f = -1;
    while (plan.next < plan.ranked.size()) {
      const int f = plan.ranked[plan.next].second;
      if (pool.free_for(b, f)) {
        granted_f = f;
        break;
      }
      ++plan.next;
    }
    if (granted_f < 0) return false;
    ++plan.next;

    pool.take(b, granted_f);
    alloc.set_scheduled(u, granted_f);
    std::vector<cplx> h(topo.num_antennas);
    for (int m = 0; m < topo.num_antennas; ++m)
      h[m] = ch.at(granted_f, b, m, u);
    const auto w = mrt_beamformer(h.data(), topo.num_antennas, p_sub);
    std::copy(w.begin(), w.end(), alloc.beam_at(u, granted_f));

    plan.gammas.push_back(p_sub * ch.norm2(granted_f, b, u) /
                          topo.noise_power_w);
    plan.estimate =
        achievable_rate(plan.gammas.data(), int(plan.gammas.size()),
                        topo.block_error_rate);
  }
  return true;
}

}  // namespace

Allocation allocate(const std::vector<UserDirective>& directives,
                    const ChannelRealization& ch,
                    const std::vector<UserBuffer>& buffers,
                    const TopologyConfig& topo, const SchedulerConfig& cfg,
                    long long slot) {
  const int num_ues = topo.num_ues();
  if (int(directives.size()) != num_ues)
    throw std::invalid_argument("allocate: one directive per user required");

  Allocation alloc(num_ues, topo.num_subcarriers, topo.num_antennas);
  SubcarrierPool pool(topo.num_bs, topo.num_subcarriers,
                      cfg.shared_subcarrier_pool);

  // ascending priority value; ties: older head-of-line packet, then user id
  std::vector<int> order(num_ues);
  for (int i = 0; i < num_ues; ++i) order[i] = i;
  std::vector<long long> hol(num_ues);
  for (int u = 0; u < num_ues; ++u) {
    const long long a = buffers[u].head_of_line_arrival(slot);
    hol[u] = a < 0 ? LLONG_MAX : a;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int pa = directives[a].priority, pb = directives[b].priority;
    if (pa != pb) return pa < pb;
    if (hol[a] != hol[b]) return hol[a] < hol[b];
    return directives[a].user < directives[b].user;
  });

  for (int idx : order) {
    const UserDirective& d = directives[idx];
    const int u = d.user;
    if (d.requested_packets <= 0) continue;
    const long long requested =
        (long long)d.requested_packets * buffers[u].packet_size_bits();
    const long long servable = buffers[u].eligible_bits(slot);
    const long long target = requested < servable ? requested : servable;
    if (target <= 0) continue;

    UserPlan plan = make_plan(ch, topo, u);
    plan.target_bits = double(target);
    grant_until_covered(u, plan, pool, alloc, ch, topo);
  }
  return alloc;
}

Allocation round_robin_edf(RoundRobinState& state,
                           const ChannelRealization& ch,
                           const std::vector<UserBuffer>& buffers,
                           const TopologyConfig& topo,
                           const SchedulerConfig& cfg, long long slot) {
  const int num_ues = topo.num_ues();
  const int per_bs = topo.ues_per_bs;
  if (int(state.cursor.size()) != topo.num_bs)
    throw std::invalid_argument("round_robin_edf: cursor/topology mismatch");

  Allocation alloc(num_ues, topo.num_subcarriers, topo.num_antennas);
  SubcarrierPool pool(topo.num_bs, topo.num_subcarriers,
                      cfg.shared_subcarrier_pool);

  std::vector<UserPlan> plans(num_ues);
  std::vector<std::vector<long long>> pending(num_ues);
  std::vector<std::size_t> next_packet(num_ues, 0);
  for (int u = 0; u < num_ues; ++u) {
    plans[u] = make_plan(ch, topo, u);
    pending[u] = buffers[u].eligible_packet_bits(slot);
  }

  bool progress = true;
  while (progress) {
    progress = false;
    for (int k = 0; k < per_bs; ++k) {
      for (int b = 0; b < topo.num_bs; ++b) {
        if (pool.exhausted_for(b)) continue;
        const int u = b * per_bs + (state.cursor[b] + k) % per_bs;
        if (next_packet[u] >= pending[u].size()) continue;

        // one packet per visit: the oldest uncovered one
        plans[u].target_bits += double(pending[u][next_packet[u]]);
        if (grant_until_covered(u, plans[u], pool, alloc, ch, topo)) {
          ++next_packet[u];
          progress = true;
        }
      }
    }
  }

  for (int b = 0; b < topo.num_bs; ++b)
    state.cursor[b] = (state.cursor[b] + 1) % per_bs;
  return alloc;
}

double interference_free_rate(const std::vector<int>& subcarriers,
                              const ChannelRealization& ch, int user,
                              const TopologyConfig& topo) {
  const int b = topo.serving_bs(user);
  const double p_sub = topo.subcarrier_power();
  std::vector<double> gammas;
  gammas.reserve(subcarriers.size());
  for (int f : subcarriers)
    gammas.push_back(p_sub * ch.norm2(f, b, user) / topo.noise_power_w);
  return achievable_rate(gammas.data(), int(gammas.size()),
                         topo.block_error_rate);
}

}  // namespace schedsim
