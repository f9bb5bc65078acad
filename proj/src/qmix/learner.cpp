#include "schedsim/qmix/learner.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace schedsim {

void TrainerConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("trainer: " + what);
  };
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(discount > 0.0 && discount < 1.0)) fail("discount must be in (0, 1)");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (buffer_capacity < batch_size)
    fail("buffer_capacity must be >= batch_size");
  if (target_sync_period < 1) fail("target_sync_period must be >= 1");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > 1.0)
    fail("epsilon bounds must be in [0, 1]");
  if (epsilon_decay_steps < 1) fail("epsilon_decay_steps must be >= 1");
  if (episodes < 1) fail("episodes must be >= 1");
  if (slots_per_episode < 1) fail("slots_per_episode must be >= 1");
  if (train_interval_slots < 1) fail("train_interval_slots must be >= 1");
  if (warmup_transitions < 0) fail("warmup_transitions must be >= 0");
  if (optimizer != "sgd" && optimizer != "adam")
    fail("optimizer must be sgd or adam");
  if (hidden_units < 1 || mixing_width < 1 || mixing_head_hidden < 1)
    fail("network widths must be >= 1");
}

double TrainerConfig::epsilon_at(long long env_steps) const {
  if (env_steps >= epsilon_decay_steps) return epsilon_end;
  const double frac = double(env_steps) / double(epsilon_decay_steps);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

QmixModel QmixModel::create(int obs_dim, int num_actions, int num_agents,
                            const TrainerConfig& cfg, Rng& rng) {
  QmixModel model;
  model.obs_dim = obs_dim;
  model.num_actions = num_actions;
  model.num_agents = num_agents;
  model.shared_parameters = cfg.shared_parameters;
  const int nets = cfg.shared_parameters ? 1 : num_agents;
  const std::vector<int> dims = {obs_dim, cfg.hidden_units, cfg.hidden_units,
                                 num_actions};
  for (int i = 0; i < nets; ++i) {
    Mlp net = Mlp::create(dims, rng);
    // start all action heads close together: heads of actions the behavior
    // policy rarely takes keep their initial value, and a wide initial
    // spread would feed the bootstrap maximum with stale noise
    for (double& v : net.layers.back().w.data) v *= 0.05;
    model.agents.push_back(std::move(net));
  }
  model.mixer = MixingNetwork::create(num_agents, obs_dim * num_agents,
                                      cfg.mixing_width,
                                      cfg.mixing_head_hidden, rng);
  return model;
}

QmixGrads QmixGrads::zeros_like(const QmixModel& model) {
  QmixGrads g;
  for (const auto& net : model.agents)
    g.agents.push_back(MlpGrads::zeros_like(net));
  g.mixer = MixerGrads::zeros_like(model.mixer);
  return g;
}

std::vector<int> select_actions(const QmixModel& model, const Mat& obs,
                                double epsilon, Rng& rng) {
  if (obs.rows != model.num_agents || obs.cols != model.obs_dim)
    throw std::invalid_argument("select_actions: observation shape mismatch");
  std::vector<int> actions(model.num_agents);
  Mat row(1, model.obs_dim);
  for (int u = 0; u < model.num_agents; ++u) {
    const bool explore = rng.uniform() < epsilon;
    if (explore) {
      actions[u] = rng.uniform_int(model.num_actions);
      continue;
    }
    std::copy(obs.row(u), obs.row(u) + model.obs_dim, row.row(0));
    const Mat q = mlp_forward(model.agent(u), row, nullptr, Exec::serial);
    int best = 0;
    for (int a = 1; a < model.num_actions; ++a)
      if (q(0, a) > q(0, best)) best = a;
    actions[u] = best;
  }
  return actions;
}

namespace {

/// Copies each agent's observation block out of the joint-state matrix.
Mat agent_slice(const Mat& state, int u, int obs_dim) {
  Mat out(state.rows, obs_dim);
  for (int i = 0; i < state.rows; ++i)
    std::copy(state.row(i) + u * obs_dim, state.row(i) + (u + 1) * obs_dim,
              out.row(i));
  return out;
}

}  // namespace

TdStats td_loss(const std::vector<const Transition*>& batch,
                const QmixModel& online, const QmixModel& target,
                double discount, QmixGrads& grads, Exec ex) {
  const int n = int(batch.size());
  if (n == 0) throw std::invalid_argument("td_loss: empty batch");
  const int u_count = online.num_agents;
  const int obs_dim = online.obs_dim;
  const int actions = online.num_actions;
  const int state_dim = online.state_dim();

  Mat state(n, state_dim), next_state(n, state_dim);
  for (int i = 0; i < n; ++i) {
    std::copy(batch[i]->state.begin(), batch[i]->state.end(), state.row(i));
    std::copy(batch[i]->next_state.begin(), batch[i]->next_state.end(),
              next_state.row(i));
  }

  // online per-agent values at the taken actions
  Mat chosen_q(n, u_count);
  std::vector<MlpCache> caches(u_count);
  std::vector<Mat> obs_slices(u_count);
  for (int u = 0; u < u_count; ++u) {
    obs_slices[u] = agent_slice(state, u, obs_dim);
    const Mat q_all = mlp_forward(online.agent(u), obs_slices[u], &caches[u], ex);
    for (int i = 0; i < n; ++i) chosen_q(i, u) = q_all(i, batch[i]->actions[u]);
  }

  // bootstrap values: per-agent greedy actions under the target networks
  Mat next_q(n, u_count);
  for (int u = 0; u < u_count; ++u) {
    const Mat slice = agent_slice(next_state, u, obs_dim);
    const Mat q_all = mlp_forward(target.agent(u), slice, nullptr, ex);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int a = 1; a < actions; ++a)
        if (q_all(i, a) > q_all(i, best)) best = a;
      next_q(i, u) = q_all(i, best);
    }
  }

  MixerCache mix_cache;
  const std::vector<double> qtot =
      mixer_forward(online.mixer, chosen_q, state, &mix_cache, ex);
  const std::vector<double> qtot_next =
      mixer_forward(target.mixer, next_q, next_state, nullptr, ex);

  std::vector<double> dqtot(n);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double bootstrap =
        batch[i]->terminal ? 0.0 : discount * qtot_next[i];
    const double diff = qtot[i] - (batch[i]->reward + bootstrap);
    loss += diff * diff;
    dqtot[i] = 2.0 * diff / double(n);
  }
  loss /= double(n);

  const Mat dq = mixer_backward(online.mixer, mix_cache, state, dqtot,
                                grads.mixer, ex);
  for (int u = 0; u < u_count; ++u) {
    Mat dq_all(n, actions);
    for (int i = 0; i < n; ++i) dq_all(i, batch[i]->actions[u]) = dq(i, u);
    const int slot = online.shared_parameters ? 0 : u;
    mlp_backward(online.agent(u), caches[u], dq_all, grads.agents[slot],
                 false, ex);
  }

  TdStats stats;
  stats.loss = loss;
  stats.grad_norm = clip_gradients(grads, 0.0);
  return stats;
}

namespace {

template <typename ModelFn, typename MixFn>
void visit_structure(QmixModel& model, ModelFn&& on_dense_mat,
                     MixFn&& on_dense_vec) {
  for (auto& net : model.agents)
    for (auto& layer : net.layers) {
      on_dense_mat(layer.w.data);
      on_dense_vec(layer.b);
    }
  auto dense = [&](DenseLayer& l) {
    on_dense_mat(l.w.data);
    on_dense_vec(l.b);
  };
  dense(model.mixer.w1_hyper);
  dense(model.mixer.b1_hyper);
  dense(model.mixer.w2_hyper);
  for (auto& layer : model.mixer.bias_head.layers) dense(layer);
}

}  // namespace

void for_each_param(QmixModel& model, const std::function<void(double&)>& fn) {
  visit_structure(
      model, [&](std::vector<double>& v) { for (double& x : v) fn(x); },
      [&](std::vector<double>& v) { for (double& x : v) fn(x); });
}

void for_each_param_grad(QmixModel& model, QmixGrads& grads,
                         const std::function<void(double&, double&)>& fn) {
  std::size_t agent_idx = 0;
  for (std::size_t a = 0; a < model.agents.size(); ++a) {
    auto& net = model.agents[a];
    auto& g = grads.agents[a];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto& w = net.layers[l].w.data;
      auto& dw = g.layers[l].dw.data;
      for (std::size_t i = 0; i < w.size(); ++i) fn(w[i], dw[i]);
      auto& b = net.layers[l].b;
      auto& db = g.layers[l].db;
      for (std::size_t i = 0; i < b.size(); ++i) fn(b[i], db[i]);
    }
    ++agent_idx;
  }
  auto dense = [&](DenseLayer& l, DenseGrads& g) {
    for (std::size_t i = 0; i < l.w.data.size(); ++i)
      fn(l.w.data[i], g.dw.data[i]);
    for (std::size_t i = 0; i < l.b.size(); ++i) fn(l.b[i], g.db[i]);
  };
  dense(model.mixer.w1_hyper, grads.mixer.w1_hyper);
  dense(model.mixer.b1_hyper, grads.mixer.b1_hyper);
  dense(model.mixer.w2_hyper, grads.mixer.w2_hyper);
  for (std::size_t l = 0; l < model.mixer.bias_head.layers.size(); ++l)
    dense(model.mixer.bias_head.layers[l], grads.mixer.bias_head.layers[l]);
}

std::size_t param_count(const QmixModel& model) {
  std::size_t count = 0;
  for_each_param(const_cast<QmixModel&>(model), [&](double&) { ++count; });
  return count;
}

void sgd_step(QmixModel& model, const QmixGrads& grads, double lr) {
  bool finite = true;
  for_each_param_grad(model, const_cast<QmixGrads&>(grads),
                      [&](double& p, double& g) {
                        if (!std::isfinite(g)) finite = false;
                        p -= lr * g;
                      });
  if (!finite)
    throw std::runtime_error("sgd_step: non-finite gradient encountered");
}

void sync_target(const QmixModel& online, QmixModel& target) {
  std::vector<double> flat;
  for_each_param(const_cast<QmixModel&>(online),
                 [&](double& p) { flat.push_back(p); });
  std::size_t i = 0;
  for_each_param(target, [&](double& p) { p = flat[i++]; });
  if (i != flat.size())
    throw std::runtime_error("sync_target: model structure mismatch");
}

double clip_gradients(QmixGrads& grads, double max_norm) {
  double sq = 0.0;
  auto accumulate = [&](std::vector<double>& v) {
    for (double g : v) sq += g * g;
  };
  for (auto& ag : grads.agents)
    for (auto& l : ag.layers) {
      accumulate(l.dw.data);
      accumulate(l.db);
    }
  accumulate(grads.mixer.w1_hyper.dw.data);
  accumulate(grads.mixer.w1_hyper.db);
  accumulate(grads.mixer.b1_hyper.dw.data);
  accumulate(grads.mixer.b1_hyper.db);
  accumulate(grads.mixer.w2_hyper.dw.data);
  accumulate(grads.mixer.w2_hyper.db);
  for (auto& l : grads.mixer.bias_head.layers) {
    accumulate(l.dw.data);
    accumulate(l.db);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    auto rescale = [&](std::vector<double>& v) {
      for (double& g : v) g *= scale;
    };
    for (auto& ag : grads.agents)
      for (auto& l : ag.layers) {
        rescale(l.dw.data);
        rescale(l.db);
      }
    rescale(grads.mixer.w1_hyper.dw.data);
    rescale(grads.mixer.w1_hyper.db);
    rescale(grads.mixer.b1_hyper.dw.data);
    rescale(grads.mixer.b1_hyper.db);
    rescale(grads.mixer.w2_hyper.dw.data);
    rescale(grads.mixer.w2_hyper.db);
    for (auto& l : grads.mixer.bias_head.layers) {
      rescale(l.dw.data);
      rescale(l.db);
    }
  }
  return norm;
}

void AdamState::apply(QmixModel& model, QmixGrads& grads, double lr) {
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (m_.empty()) {
    const std::size_t count = param_count(model);
    m_.assign(count, 0.0);
    v_.assign(count, 0.0);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, double(t_));
  const double bc2 = 1.0 - std::pow(beta2, double(t_));
  std::size_t i = 0;
  bool finite = true;
  for_each_param_grad(model, grads, [&](double& p, double& g) {
    if (!std::isfinite(g)) finite = false;
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * g;
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * g * g;
    p -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
    ++i;
  });
  if (!finite)
    throw std::runtime_error("adam: non-finite gradient encountered");
}

namespace {

using nlohmann::json;

json dense_to_json(const DenseLayer& l) {
  return json{{"in", l.w.rows}, {"out", l.w.cols}, {"w", l.w.data},
              {"b", l.b}};
}

DenseLayer dense_from_json(const json& j) {
  DenseLayer l;
  l.w = Mat(j.at("in").get<int>(), j.at("out").get<int>());
  l.w.data = j.at("w").get<std::vector<double>>();
  l.b = j.at("b").get<std::vector<double>>();
  if (int(l.w.data.size()) != l.w.rows * l.w.cols ||
      int(l.b.size()) != l.w.cols)
    throw std::runtime_error("checkpoint: dense layer size mismatch");
  return l;
}

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& l : net.layers) layers.push_back(dense_to_json(l));
  return json{{"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
  Mlp net;
  for (const auto& l : j.at("layers")) net.layers.push_back(dense_from_json(l));
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const QmixModel& model,
                     long long train_steps) {
  json j;
  j["format_version"] = 1;
  j["obs_dim"] = model.obs_dim;
  j["num_actions"] = model.num_actions;
  j["num_agents"] = model.num_agents;
  j["shared_parameters"] = model.shared_parameters;
  j["train_steps"] = train_steps;
  json agents = json::array();
  for (const auto& net : model.agents) agents.push_back(mlp_to_json(net));
  j["agents"] = agents;
  j["mixer"] = json{{"num_agents", model.mixer.num_agents},
                    {"width", model.mixer.width},
                    {"state_dim", model.mixer.state_dim},
                    {"w1_hyper", dense_to_json(model.mixer.w1_hyper)},
                    {"b1_hyper", dense_to_json(model.mixer.b1_hyper)},
                    {"w2_hyper", dense_to_json(model.mixer.w2_hyper)},
                    {"bias_head", mlp_to_json(model.mixer.bias_head)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

QmixModel load_checkpoint(const std::string& path, long long* train_steps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j = json::parse(in);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("checkpoint: unsupported format version");
  QmixModel model;
  model.obs_dim = j.at("obs_dim").get<int>();
  model.num_actions = j.at("num_actions").get<int>();
  model.num_agents = j.at("num_agents").get<int>();
  model.shared_parameters = j.at("shared_parameters").get<bool>();
  for (const auto& a : j.at("agents"))
    model.agents.push_back(mlp_from_json(a));
  const json& m = j.at("mixer");
  model.mixer.num_agents = m.at("num_agents").get<int>();
  model.mixer.width = m.at("width").get<int>();
  model.mixer.state_dim = m.at("state_dim").get<int>();
  model.mixer.w1_hyper = dense_from_json(m.at("w1_hyper"));
  model.mixer.b1_hyper = dense_from_json(m.at("b1_hyper"));
  model.mixer.w2_hyper = dense_from_json(m.at("w2_hyper"));
  model.mixer.bias_head = mlp_from_json(m.at("bias_head"));
  if (train_steps) *train_steps = j.at("train_steps").get<long long>();
  return model;
}

QmixLearner::QmixLearner(int obs_dim, int num_actions, int num_agents,
                         const TrainerConfig& trainer_cfg, std::uint64_t seed)
    : cfg(trainer_cfg),
      replay(std::size_t(trainer_cfg.buffer_capacity)),
      sample_rng(derive_seed(seed, 102)) {
  Rng init_rng(derive_seed(seed, 101));
  online =
      QmixModel::create(obs_dim, num_actions, num_agents, trainer_cfg, init_rng);
  target = online;
}

TdStats QmixLearner::train_once(Exec ex) {
  const auto batch = replay.sample(cfg.batch_size, sample_rng);
  QmixGrads grads = QmixGrads::zeros_like(online);
  TdStats stats = td_loss(batch, online, target, cfg.discount, grads, ex);
  if (cfg.grad_clip_norm > 0.0) clip_gradients(grads, cfg.grad_clip_norm);
  if (cfg.optimizer == "adam")
    adam.apply(online, grads, cfg.learning_rate);
  else
    sgd_step(online, grads, cfg.learning_rate);
  ++train_steps;
  if (train_steps % cfg.target_sync_period == 0) sync_target(online, target);
  return stats;
}

}  // namespace schedsim
