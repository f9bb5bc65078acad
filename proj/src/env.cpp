#include "schedsim/env.hpp"

#include <cmath>
#include <stdexcept>

namespace schedsim {

Policy policy_from_string(const std::string& name) {
  if (name == "lgqp") return Policy::lgqp;
  if (name == "qpips") return Policy::qpips;
  if (name == "rr_edf") return Policy::rr_edf;
  throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::lgqp: return "lgqp";
    case Policy::qpips: return "qpips";
    case Policy::rr_edf: return "rr_edf";
  }
  return "?";
}

bool policy_is_learned(Policy p) { return p != Policy::rr_edf; }

Environment::Environment(const ExperimentConfig& cfg, Policy policy)
    : cfg_(cfg), policy_(policy), topo_(cfg.topology), rr_(cfg.topology.num_bs) {
  cfg_.validate();
  const int num_ues = topo_.num_ues();
  packet_size_.assign(num_ues, double(cfg_.traffic.packet_size_bits));
  arrival_rate_.assign(num_ues, cfg_.traffic.arrival_rate);
  violation_bound_.assign(num_ues, cfg_.traffic.violation_bound);
}

Mat Environment::reset(std::uint64_t seed) {
  const int num_ues = topo_.num_ues();

  if (cfg_.topology.bs_ue_distance_m.empty()) {
    // UEs uniform in their serving cell's disk; BSs on a line
    Rng place_rng(derive_seed(seed, 0));
    std::vector<double> bs_x(topo_.num_bs);
    for (int b = 0; b < topo_.num_bs; ++b)
      bs_x[b] = b * topo_.inter_site_distance_m;
    topo_.bs_ue_distance_m.assign(std::size_t(topo_.num_bs) * num_ues, 0.0);
    for (int u = 0; u < num_ues; ++u) {
      const int home = topo_.serving_bs(u);
      const double ang = 2.0 * 3.14159265358979323846 * place_rng.uniform();
      const double rad = topo_.cell_radius_m * std::sqrt(place_rng.uniform());
      const double x = bs_x[home] + rad * std::cos(ang);
      const double y = rad * std::sin(ang);
      for (int b = 0; b < topo_.num_bs; ++b) {
        const double dx = x - bs_x[b];
        topo_.bs_ue_distance_m[std::size_t(b) * num_ues + u] =
            std::sqrt(dx * dx + y * y);
      }
    }
  } else {
    topo_.bs_ue_distance_m = cfg_.topology.bs_ue_distance_m;
  }

  traffic_rng_ = Rng(derive_seed(seed, 1));
  channel_rng_ = Rng(derive_seed(seed, 2));

  buffers_.clear();
  for (int u = 0; u < num_ues; ++u)
    buffers_.emplace_back(u, cfg_.traffic.packet_size_bits,
                          cfg_.traffic.deadlines_slots[u],
                          cfg_.traffic.arrival_rate,
                          cfg_.traffic.violation_bound,
                          cfg_.traffic.drop_on_expiry);
  vqueue_.assign(num_ues, 0.0);
  rr_ = RoundRobinState(topo_.num_bs);
  records_ = DelayRecord(num_ues);
  events_.clear();
  traces_.clear();
  slot_ = 1;
  reward_sum_ = 0.0;
  steps_ = 0;
  validated_slots_ = 0;
  chan_ = draw_channel(topo_, channel_rng_);
  return observations();
}

UserDirective Environment::directive_from_action(int user, int action) const {
  const int packets_per_level = cfg_.scheduler.max_request_packets + 1;
  UserDirective d;
  d.user = user;
  d.priority = action / packets_per_level;
  d.requested_packets = action % packets_per_level;
  return d;
}

Mat Environment::observations() const {
  const int num_ues = topo_.num_ues();
  const int f_count = topo_.num_subcarriers;
  Mat obs(num_ues, obs_dim());
  const double phase =
      double(slot_) / double(cfg_.trainer.slots_per_episode);
  // backlog and virtual queue are expressed in tens of packets so every
  // feature the value networks see stays O(1)
  constexpr double kQueueScale = 20.0;
  for (int u = 0; u < num_ues; ++u) {
    double* row = obs.row(u);
    row[0] = double(buffers_[u].total_bits()) / packet_size_[u] / kQueueScale;
    row[1] = vqueue_[u] / kQueueScale;
    const int b = topo_.serving_bs(u);
    double peak = 0.0;
    for (int f = 0; f < f_count; ++f) {
      const double norm = std::sqrt(chan_.norm2(f, b, u));
      row[2 + f] = norm;
      if (norm > peak) peak = norm;
    }
    if (peak > 0.0)
      for (int f = 0; f < f_count; ++f) row[2 + f] /= peak;
    row[2 + f_count] = phase;
  }
  return obs;
}

StepOutcome Environment::step(const std::vector<int>& joint_action) {
  const int num_ues = topo_.num_ues();
  if (int(joint_action.size()) != num_ues)
    throw std::invalid_argument("step: one action per user required");
  std::vector<UserDirective> directives(num_ues);
  for (int u = 0; u < num_ues; ++u)
    directives[u] = directive_from_action(u, joint_action[u]);
  const Allocation alloc = allocate(directives, chan_, buffers_, topo_,
                                    cfg_.scheduler, slot_);
  return run_slot(alloc);
}

StepOutcome Environment::step_baseline() {
  const Allocation alloc =
      round_robin_edf(rr_, chan_, buffers_, topo_, cfg_.scheduler, slot_);
  return run_slot(alloc);
}

StepOutcome Environment::run_slot(const Allocation& alloc) {
  const int num_ues = topo_.num_ues();
  validate_allocation(alloc, topo_);  // scheduler bug -> hard abort upstream
  ++validated_slots_;

  SlotTrace trace;
  trace.slot = slot_;
  trace.queue_bits_start.resize(num_ues);
  trace.vqueue_start = vqueue_;
  trace.rate_bits.assign(num_ues, 0.0);
  trace.served_bits.assign(num_ues, 0);
  trace.arrivals.assign(num_ues, 0);
  trace.violations.assign(num_ues, 0);
  for (int u = 0; u < num_ues; ++u)
    trace.queue_bits_start[u] = double(buffers_[u].total_bits());

  // realized rates under the true cross-cell interference
  const Mat gamma = compute_sinr(alloc, chan_, topo_);
  for (int u = 0; u < num_ues; ++u) {
    const double psi = achievable_rate(gamma.row(u), topo_.num_subcarriers,
                                       topo_.block_error_rate);
    trace.rate_bits[u] = std::floor(psi);
  }
  if (cfg_.run.dump_allocations) {
    trace.granted_subcarriers.resize(num_ues);
    trace.planned_bits.assign(num_ues, 0.0);
    for (int u = 0; u < num_ues; ++u) {
      for (int f = 0; f < topo_.num_subcarriers; ++f)
        if (alloc.scheduled(u, f)) trace.granted_subcarriers[u].push_back(f);
      trace.planned_bits[u] = interference_free_rate(
          trace.granted_subcarriers[u], chan_, u, topo_);
    }
  }

  // serve, then expire, then admit this slot's arrivals
  for (int u = 0; u < num_ues; ++u) {
    const long long before = buffers_[u].served_bits();
    const auto completions =
        buffers_[u].serve((long long)trace.rate_bits[u], slot_);
    trace.served_bits[u] = buffers_[u].served_bits() - before;
    for (const auto& c : completions) {
      if (c.packet.violated) continue;  // drains only, already counted
      records_.add_completion(u, c.delay);
      events_.push_back({u, c.packet.arrival_slot, slot_, c.delay});
    }
  }
  for (int u = 0; u < num_ues; ++u) {
    std::vector<Packet> expired;
    const int w = buffers_[u].expire(slot_, &expired);
    trace.violations[u] = w;
    records_.add_violations(u, w);
    for (const auto& p : expired)
      events_.push_back({u, p.arrival_slot, -1, -1});
  }
  for (int u = 0; u < num_ues; ++u) {
    const int a = poisson_arrivals(cfg_.traffic.arrival_rate, traffic_rng_);
    trace.arrivals[u] = a;
    buffers_[u].enqueue(slot_, a);
    records_.add_arrivals(u, a);
  }
  for (int u = 0; u < num_ues; ++u)
    vqueue_[u] = update_virtual_queue(vqueue_[u], trace.violations[u],
                                      trace.arrivals[u],
                                      cfg_.traffic.violation_bound);

  trace.drift = normalized_drift(
      trace.queue_bits_start, trace.vqueue_start, trace.rate_bits,
      trace.arrivals, trace.violations, packet_size_, arrival_rate_,
      violation_bound_, cfg_.reward.drift_const);
  trace.running_jitter = records_.jitter_slots();
  const double r_lgqp =
      lgqp_reward(trace.drift, trace.running_jitter, cfg_.reward);
  const double r_qpips =
      qpips_reward(trace.running_jitter, records_.total_violations(),
                   records_.total_arrivals(), cfg_.reward.qpips_delta);
  trace.reward = policy_ == Policy::qpips ? r_qpips : r_lgqp;

  reward_sum_ += trace.reward;
  ++steps_;
  traces_.push_back(trace);

  ++slot_;
  chan_ = draw_channel(topo_, channel_rng_);

  StepOutcome out;
  out.next_obs = observations();
  out.reward = trace.reward;
  out.trace = std::move(trace);
  return out;
}

EpisodeMetrics Environment::metrics() const {
  const int num_ues = topo_.num_ues();
  EpisodeMetrics m;
  m.per_user_violation_ratio.resize(num_ues);
  m.violations.resize(num_ues);
  m.arrivals.resize(num_ues);
  for (int u = 0; u < num_ues; ++u) {
    m.per_user_violation_ratio[u] = records_.violation_ratio(u);
    m.violations[u] = records_.violations[u];
    m.arrivals[u] = records_.arrivals[u];
  }
  m.mean_violation_ratio = records_.mean_violation_ratio();
  m.jitter_slots = records_.jitter_slots();
  m.mean_delay_slots = records_.mean_delay_slots();
  m.served_packets = records_.total_completed();
  m.mean_reward = steps_ > 0 ? reward_sum_ / double(steps_) : 0.0;
  return m;
}

EpisodeResult run_episode(const ExperimentConfig& cfg, Policy policy,
                          std::uint64_t seed, const QmixModel* model,
                          QmixLearner* learner, Exec ex) {
  if (policy_is_learned(policy) && model == nullptr)
    throw std::invalid_argument("run_episode: learned policy needs a model");

  Environment env(cfg, policy);
  Mat obs = env.reset(seed);
  Rng action_rng(derive_seed(seed, 3));

  EpisodeResult result;
  const int slots = cfg.trainer.slots_per_episode;
  for (int t = 1; t <= slots; ++t) {
    StepOutcome out;
    std::vector<int> actions;
    if (policy == Policy::rr_edf) {
      out = env.step_baseline();
    } else {
      const double eps =
          learner ? learner->cfg.epsilon_at(learner->env_steps) : 0.0;
      actions = select_actions(*model, obs, eps, action_rng);
      out = env.step(actions);
    }
    result.rewards.push_back(out.reward);

    if (learner && policy_is_learned(policy)) {
      Transition tr;
      tr.state.assign(obs.data.begin(), obs.data.end());
      tr.actions = actions;
      tr.reward = out.reward;
      tr.next_state.assign(out.next_obs.data.begin(),
                           out.next_obs.data.end());
      tr.terminal = (t == slots);
      learner->replay.push(std::move(tr));
      ++learner->env_steps;
      if (learner->ready() &&
          learner->env_steps % learner->cfg.train_interval_slots == 0) {
        const TdStats stats = learner->train_once(ex);
        result.losses.push_back(stats.loss);
      }
    }
    obs = std::move(out.next_obs);
  }

  result.metrics = env.metrics();
  result.events = env.events();
  result.traces = env.traces();
  return result;
}

EvalSummary evaluate_policy(const ExperimentConfig& cfg, Policy policy,
                            const QmixModel* model, std::uint64_t seed,
                            int episodes, Exec ex,
                            std::vector<EpisodeResult>* full_results) {
  std::vector<EpisodeMetrics> all(episodes);
  if (full_results) full_results->resize(episodes);
#pragma omp parallel for schedule(dynamic) if (ex == Exec::parallel)
  for (int e = 0; e < episodes; ++e) {
    EpisodeResult r = run_episode(
        cfg, policy, derive_seed(seed, 1000 + e), model, nullptr, Exec::serial);
    all[e] = r.metrics;
    if (full_results) (*full_results)[e] = std::move(r);
  }

  const int num_ues = cfg.topology.num_ues();
  EvalSummary s;
  s.episodes = episodes;
  s.violations.assign(num_ues, 0);
  s.arrivals.assign(num_ues, 0);
  s.per_user_violation_ratio.assign(num_ues, 0.0);
  double jitter_sum = 0.0;
  double delay_weighted = 0.0;
  long long completed = 0;
  for (const auto& m : all) {
    for (int u = 0; u < num_ues; ++u) {
      s.violations[u] += m.violations[u];
      s.arrivals[u] += m.arrivals[u];
    }
    jitter_sum += m.jitter_slots;
    delay_weighted += m.mean_delay_slots * double(m.served_packets);
    completed += m.served_packets;
  }
  long long viol_total = 0, arr_total = 0;
  double ratio_sum = 0.0;
  for (int u = 0; u < num_ues; ++u) {
    s.per_user_violation_ratio[u] =
        s.arrivals[u] > 0 ? double(s.violations[u]) / double(s.arrivals[u])
                          : 0.0;
    ratio_sum += s.per_user_violation_ratio[u];
    viol_total += s.violations[u];
    arr_total += s.arrivals[u];
  }
  s.mean_violation_ratio = num_ues > 0 ? ratio_sum / num_ues : 0.0;
  s.pooled_violation_ratio =
      arr_total > 0 ? double(viol_total) / double(arr_total) : 0.0;
  s.mean_jitter_slots = episodes > 0 ? jitter_sum / episodes : 0.0;
  s.mean_delay_slots = completed > 0 ? delay_weighted / double(completed) : 0.0;
  s.served_packets = completed;
  return s;
}

}  // namespace schedsim
