#pragma once

#include <functional>
#include <string>

#include "schedsim/qmix/mixer.hpp"
#include "schedsim/qmix/network.hpp"
#include "schedsim/qmix/replay.hpp"

namespace schedsim {

struct TrainerConfig {
  double learning_rate = 5e-4;
  double discount = 0.85;
  int batch_size = 4096;
  int buffer_capacity = 50000;
  int target_sync_period = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long long epsilon_decay_steps = 50000;
  int episodes = 2000;
  int slots_per_episode = 50;
  int train_interval_slots = 1;
  int warmup_transitions = 5000;
  std::string optimizer = "sgd";  // "sgd" | "adam"
  double grad_clip_norm = 10.0;   // 0 disables clipping
  bool shared_parameters = false;
  int hidden_units = 64;
  int mixing_width = 32;
  int mixing_head_hidden = 32;

  void validate() const;
  /// Linear exploration schedule evaluated at a step count.
  double epsilon_at(long long env_steps) const;
};

/// Per-agent value networks plus the monotonic mixer.
struct QmixModel {
  int obs_dim = 0;
  int num_actions = 0;
  int num_agents = 0;
  bool shared_parameters = false;
  std::vector<Mlp> agents;  // one net, or a single shared one
  MixingNetwork mixer;

  static QmixModel create(int obs_dim, int num_actions, int num_agents,
                          const TrainerConfig& cfg, Rng& rng);
  const Mlp& agent(int u) const { return agents[shared_parameters ? 0 : u]; }
  Mlp& agent(int u) { return agents[shared_parameters ? 0 : u]; }
  int state_dim() const { return obs_dim * num_agents; }
};

struct QmixGrads {
  std::vector<MlpGrads> agents;
  MixerGrads mixer;
  static QmixGrads zeros_like(const QmixModel& model);
};

struct TdStats {
  double loss = 0.0;
  double grad_norm = 0.0;  // pre-clip L2 norm
};

/// Epsilon-greedy joint action from per-agent observations (rows of
/// `obs`). Ties in the greedy argmax resolve to the lowest action index.
std::vector<int> select_actions(const QmixModel& model, const Mat& obs,
                                double epsilon, Rng& rng);

/// Squared-TD-error loss over a batch and its gradients. The bootstrap
/// target maximizes each agent's target-network value (valid because the
/// mixer is monotone). Throws on an empty batch.
TdStats td_loss(const std::vector<const Transition*>& batch,
                const QmixModel& online, const QmixModel& target,
                double discount, QmixGrads& grads,
                Exec ex = default_exec());

/// Plain gradient descent: p <- p - lr * g. Throws std::runtime_error on
/// non-finite gradients.
void sgd_step(QmixModel& model, const QmixGrads& grads, double lr);

/// Hard copy of every online parameter into the target model.
void sync_target(const QmixModel& online, QmixModel& target);

/// Scales gradients to `max_norm` when they exceed it; returns the
/// pre-clip norm. `max_norm <= 0` only measures.
double clip_gradients(QmixGrads& grads, double max_norm);

/// Visits every parameter (and its gradient) in a fixed order.
void for_each_param(QmixModel& model, const std::function<void(double&)>& fn);
void for_each_param_grad(QmixModel& model, QmixGrads& grads,
                         const std::function<void(double&, double&)>& fn);
std::size_t param_count(const QmixModel& model);

/// Adam optimizer state for the optional adaptive update.
class AdamState {
 public:
  void apply(QmixModel& model, QmixGrads& grads, double lr);

 private:
  std::vector<double> m_, v_;
  long long t_ = 0;
};

void save_checkpoint(const std::string& path, const QmixModel& model,
                     long long train_steps);
QmixModel load_checkpoint(const std::string& path,
                          long long* train_steps = nullptr);

/// Bundles the online/target pair, replay pool and its optimizer.
struct QmixLearner {
  TrainerConfig cfg;
  QmixModel online;
  QmixModel target;
  ReplayBuffer replay;
  AdamState adam;
  Rng sample_rng;
  long long env_steps = 0;
  long long train_steps = 0;

  QmixLearner(int obs_dim, int num_actions, int num_agents,
              const TrainerConfig& trainer_cfg, std::uint64_t seed);

  double epsilon() const { return cfg.epsilon_at(env_steps); }
  bool ready() const {
    const int need =
        cfg.warmup_transitions > cfg.batch_size ? cfg.warmup_transitions
                                                : cfg.batch_size;
    return int(replay.size()) >= need;
  }
  /// One optimization step on a sampled batch; syncs the target network
  /// every cfg.target_sync_period steps.
  TdStats train_once(Exec ex = default_exec());
};

}  // namespace schedsim
