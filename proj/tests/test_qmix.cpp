#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "schedsim/qmix/learner.hpp"

using namespace schedsim;

namespace {

TrainerConfig small_trainer(int hidden = 8, int mix_width = 4,
                            int head_hidden = 6) {
  TrainerConfig t;
  t.hidden_units = hidden;
  t.mixing_width = mix_width;
  t.mixing_head_hidden = head_hidden;
  t.batch_size = 4;
  t.buffer_capacity = 64;
  return t;
}

std::vector<Transition> random_transitions(int n, int agents, int obs_dim,
                                           int actions, Rng& rng) {
  std::vector<Transition> out(n);
  for (auto& tr : out) {
    tr.state.resize(std::size_t(agents) * obs_dim);
    tr.next_state.resize(std::size_t(agents) * obs_dim);
    for (auto& v : tr.state) v = rng.uniform() * 2.0 - 1.0;
    for (auto& v : tr.next_state) v = rng.uniform() * 2.0 - 1.0;
    tr.actions.resize(agents);
    for (auto& a : tr.actions) a = rng.uniform_int(actions);
    tr.reward = rng.uniform() * 2.0 - 1.0;
    tr.terminal = rng.uniform() < 0.2;
  }
  return out;
}

double batch_loss(const std::vector<const Transition*>& batch,
                  const QmixModel& online, const QmixModel& target,
                  double discount) {
  QmixGrads scratch = QmixGrads::zeros_like(online);
  return td_loss(batch, online, target, discount, scratch, Exec::serial).loss;
}

}  // namespace

TEST_CASE("numeric kernels: serial and parallel paths agree bitwise") {
  Rng rng(5);
  Mat a(37, 23), b(23, 19);
  for (auto& v : a.data) v = rng.uniform() * 2.0 - 1.0;
  for (auto& v : b.data) v = rng.uniform() * 2.0 - 1.0;
  Mat c1, c2;
  kernels::matmul(a, b, c1, Exec::serial);
  kernels::matmul(a, b, c2, Exec::parallel);
  CHECK(c1.data == c2.data);

  Mat d(37, 19);
  for (auto& v : d.data) v = rng.uniform();
  Mat e1, e2;
  kernels::matmul_tn(a, d, e1, Exec::serial);
  kernels::matmul_tn(a, d, e2, Exec::parallel);
  CHECK(e1.data == e2.data);

  Mat f1, f2;
  kernels::matmul_nt(d, b, f1, Exec::serial);  // 37x19 * (23x19)^T
  kernels::matmul_nt(d, b, f2, Exec::parallel);
  CHECK(f1.data == f2.data);
}

TEST_CASE("agent forward: zero weights, determinism, hand evaluation") {
  Rng rng(1);
  Mlp net = Mlp::create({3, 4, 4, 5}, rng);
  for (auto& l : net.layers) l.w.zero();
  net.layers.back().b = {0.5, -1.0, 0.25, 0.0, 2.0};
  Mat x(2, 3);
  x(0, 0) = 1.0;
  x(1, 2) = -2.0;
  const Mat q = mlp_forward(net, x, nullptr, Exec::serial);
  for (int i = 0; i < 2; ++i) {
    CHECK(q(i, 0) == doctest::Approx(0.5));
    CHECK(q(i, 1) == doctest::Approx(-1.0));
    CHECK(q(i, 4) == doctest::Approx(2.0));
  }

  Mlp rnd = Mlp::create({3, 4, 4, 5}, rng);
  Mat x2(1, 3);
  x2(0, 0) = 0.3;
  x2(0, 1) = -0.7;
  x2(0, 2) = 1.1;
  const Mat q1 = mlp_forward(rnd, x2, nullptr, Exec::serial);
  const Mat q2 = mlp_forward(rnd, x2, nullptr, Exec::parallel);
  CHECK(q1.data == q2.data);

  // one hidden unit, hand-set weights: q = w2 * relu(w1*x + b1) + b2
  Mlp toy = Mlp::create({1, 1, 1}, rng);
  toy.layers[0].w(0, 0) = 2.0;
  toy.layers[0].b[0] = -1.0;
  toy.layers[1].w(0, 0) = 3.0;
  toy.layers[1].b[0] = 0.25;
  Mat xin(1, 1);
  xin(0, 0) = 1.5;  // pre = 2.0, relu = 2.0, out = 6.25
  CHECK(mlp_forward(toy, xin, nullptr, Exec::serial)(0, 0) ==
        doctest::Approx(6.25));
  xin(0, 0) = -1.0;  // pre = -3, relu = 0, out = 0.25
  CHECK(mlp_forward(toy, xin, nullptr, Exec::serial)(0, 0) ==
        doctest::Approx(0.25));
}

TEST_CASE("mixer collapses to the state bias when hypernets are zero") {
  Rng rng(3);
  MixingNetwork mix = MixingNetwork::create(2, 6, 4, 5, rng);
  mix.w1_hyper.w.zero();
  mix.w1_hyper.b.assign(mix.w1_hyper.b.size(), 0.0);
  mix.b1_hyper.w.zero();
  mix.b1_hyper.b.assign(mix.b1_hyper.b.size(), 0.0);
  mix.w2_hyper.w.zero();
  mix.w2_hyper.b.assign(mix.w2_hyper.b.size(), 0.0);

  Mat q(3, 2), state(3, 6);
  for (auto& v : q.data) v = rng.uniform() * 10.0 - 5.0;
  for (auto& v : state.data) v = rng.uniform();
  const auto qtot = mixer_forward(mix, q, state, nullptr, Exec::serial);
  const Mat head = mlp_forward(mix.bias_head, state, nullptr, Exec::serial);
  for (int i = 0; i < 3; ++i) CHECK(qtot[i] == doctest::Approx(head(i, 0)));
}

TEST_CASE("single-agent mixer is affine increasing in its input") {
  Rng rng(4);
  MixingNetwork mix = MixingNetwork::create(1, 3, 2, 4, rng);
  Mat state(1, 3);
  state(0, 0) = 0.4;
  state(0, 1) = -1.0;
  state(0, 2) = 0.9;
  double prev = -1e300;
  for (double qv = -5.0; qv <= 5.0; qv += 0.25) {
    Mat q(1, 1);
    q(0, 0) = qv;
    const double out = mixer_forward(mix, q, state, nullptr, Exec::serial)[0];
    CHECK(out >= prev - 1e-12);
    prev = out;
  }
}

TEST_CASE("mixed value is monotone in every agent utility") {
  Rng rng(6);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int agents = 2 + rng.uniform_int(3);
    MixingNetwork mix =
        MixingNetwork::create(agents, agents * 3, 4, 4, rng);
    Mat q(1, agents), state(1, agents * 3);
    for (auto& v : q.data) v = rng.uniform() * 8.0 - 4.0;
    for (auto& v : state.data) v = rng.uniform() * 2.0 - 1.0;
    const int u = rng.uniform_int(agents);
    const double h = 1e-5;
    Mat lo = q, hi = q;
    lo(0, u) -= h;
    hi(0, u) += h;
    const double f_lo = mixer_forward(mix, lo, state, nullptr, Exec::serial)[0];
    const double f_hi = mixer_forward(mix, hi, state, nullptr, Exec::serial)[0];
    CHECK((f_hi - f_lo) / (2.0 * h) >= -1e-9);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("per-agent argmax attains the exhaustive joint maximum") {
  Rng rng(8);
  const int actions = 24;
  for (int rep = 0; rep < 50; ++rep) {
    TrainerConfig cfg = small_trainer();
    Rng init(derive_seed(900, rep));
    QmixModel model = QmixModel::create(5, actions, 2, cfg, init);
    Mat obs(2, 5), state(1, 10);
    for (int u = 0; u < 2; ++u)
      for (int k = 0; k < 5; ++k) {
        obs(u, k) = rng.uniform() * 2.0 - 1.0;
        state(0, u * 5 + k) = obs(u, k);
      }
    Mat q_all0 = mlp_forward(model.agent(0), Mat(obs.rows, obs.cols), nullptr,
                             Exec::serial);
    // evaluate each agent's Q row
    Mat row0(1, 5), row1(1, 5);
    std::copy(obs.row(0), obs.row(0) + 5, row0.row(0));
    std::copy(obs.row(1), obs.row(1) + 5, row1.row(0));
    const Mat q0 = mlp_forward(model.agent(0), row0, nullptr, Exec::serial);
    const Mat q1 = mlp_forward(model.agent(1), row1, nullptr, Exec::serial);

    const auto greedy = select_actions(model, obs, 0.0, rng);

    double best = -1e300;
    int best_a0 = -1, best_a1 = -1;
    for (int a0 = 0; a0 < actions; ++a0)
      for (int a1 = 0; a1 < actions; ++a1) {
        Mat q(1, 2);
        q(0, 0) = q0(0, a0);
        q(0, 1) = q1(0, a1);
        const double val =
            mixer_forward(model.mixer, q, state, nullptr, Exec::serial)[0];
        if (val > best) {
          best = val;
          best_a0 = a0;
          best_a1 = a1;
        }
      }
    CHECK(greedy[0] == best_a0);
    CHECK(greedy[1] == best_a1);
  }
}

TEST_CASE("td loss vanishes when the target already matches") {
  // terminal transitions with reward equal to the online mixed value give
  // y == Q_tot, zero loss and zero gradients
  Rng rng(12);
  TrainerConfig cfg = small_trainer();
  Rng init(555);
  QmixModel model = QmixModel::create(4, 6, 2, cfg, init);
  auto transitions = random_transitions(5, 2, 4, 6, rng);
  for (auto& tr : transitions) {
    tr.terminal = true;
    Mat q(1, 2), state(1, 8);
    std::copy(tr.state.begin(), tr.state.end(), state.row(0));
    for (int u = 0; u < 2; ++u) {
      Mat row(1, 4);
      std::copy(tr.state.begin() + u * 4, tr.state.begin() + (u + 1) * 4,
                row.row(0));
      const Mat qa = mlp_forward(model.agent(u), row, nullptr, Exec::serial);
      q(0, u) = qa(0, tr.actions[u]);
    }
    tr.reward = mixer_forward(model.mixer, q, state, nullptr, Exec::serial)[0];
  }
  std::vector<const Transition*> batch;
  for (const auto& tr : transitions) batch.push_back(&tr);
  QmixGrads grads = QmixGrads::zeros_like(model);
  const TdStats stats =
      td_loss(batch, model, model, 0.9, grads, Exec::serial);
  CHECK(stats.loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(stats.grad_norm == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("td loss on a single transition matches the scalar computation") {
  Rng rng(14);
  TrainerConfig cfg = small_trainer();
  Rng init_a(661), init_b(662);
  QmixModel online = QmixModel::create(3, 4, 2, cfg, init_a);
  QmixModel target = QmixModel::create(3, 4, 2, cfg, init_b);
  auto transitions = random_transitions(1, 2, 3, 4, rng);
  transitions[0].terminal = false;
  const Transition& tr = transitions[0];

  auto chosen_value = [&](const QmixModel& m, const std::vector<double>& s,
                          const std::vector<int>* forced) {
    Mat q(1, 2), state(1, 6);
    std::copy(s.begin(), s.end(), state.row(0));
    for (int u = 0; u < 2; ++u) {
      Mat row(1, 3);
      std::copy(s.begin() + u * 3, s.begin() + (u + 1) * 3, row.row(0));
      const Mat qa = mlp_forward(m.agent(u), row, nullptr, Exec::serial);
      if (forced) {
        q(0, u) = qa(0, (*forced)[u]);
      } else {
        double best = qa(0, 0);
        for (int a = 1; a < 4; ++a) best = std::max(best, qa(0, a));
        q(0, u) = best;
      }
    }
    return mixer_forward(m.mixer, q, state, nullptr, Exec::serial)[0];
  };

  const double q_online = chosen_value(online, tr.state, &tr.actions);
  const double q_next = chosen_value(target, tr.next_state, nullptr);
  const double y = tr.reward + 0.85 * q_next;
  const double expected = (q_online - y) * (q_online - y);

  std::vector<const Transition*> batch = {&tr};
  QmixGrads grads = QmixGrads::zeros_like(online);
  const TdStats stats =
      td_loss(batch, online, target, 0.85, grads, Exec::serial);
  CHECK(stats.loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(td_loss({}, online, target, 0.85, grads), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  // reduced network: 2 agents, 8 hidden units
  Rng rng(16);
  TrainerConfig cfg = small_trainer(8, 4, 6);
  Rng init(777);
  QmixModel online = QmixModel::create(4, 5, 2, cfg, init);
  QmixModel target = online;
  auto transitions = random_transitions(6, 2, 4, 5, rng);
  std::vector<const Transition*> batch;
  for (const auto& tr : transitions) batch.push_back(&tr);

  QmixGrads grads = QmixGrads::zeros_like(online);
  td_loss(batch, online, target, 0.85, grads, Exec::serial);

  std::vector<double> analytic;
  for_each_param_grad(online, grads,
                      [&](double&, double& g) { analytic.push_back(g); });

  const double h = 1e-6;
  std::size_t idx = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;
  const std::size_t total = analytic.size();
  for (std::size_t k = 0; k < total; ++k) {
    // perturb parameter k in both directions
    double saved = 0.0;
    std::size_t i = 0;
    for_each_param(online, [&](double& p) {
      if (i == k) {
        saved = p;
        p = saved + h;
      }
      ++i;
    });
    const double up = batch_loss(batch, online, target, 0.85);
    i = 0;
    for_each_param(online, [&](double& p) {
      if (i == k) p = saved - h;
      ++i;
    });
    const double down = batch_loss(batch, online, target, 0.85);
    i = 0;
    for_each_param(online, [&](double& p) {
      if (i == k) p = saved;
      ++i;
    });
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::fabs(numeric), std::fabs(analytic[k]),
                                   1e-8});
    const double rel = std::fabs(numeric - analytic[k]) / denom;
    worst = std::max(worst, rel);
    if (rel >= 1e-4) ++mismatches;
    ++idx;
  }
  INFO("worst relative error ", worst, " over ", total, " parameters");
  CHECK(mismatches == 0);
}

TEST_CASE("action selection: greedy determinism, ties, shift invariance") {
  Rng rng(18);
  TrainerConfig cfg = small_trainer();
  Rng init(881);
  QmixModel model = QmixModel::create(3, 5, 2, cfg, init);
  Mat obs(2, 3);
  for (auto& v : obs.data) v = rng.uniform();

  Rng r1(9), r2(9);
  const auto a1 = select_actions(model, obs, 0.0, r1);
  const auto a2 = select_actions(model, obs, 0.0, r2);
  CHECK(a1 == a2);

  // all-equal values resolve to the lowest index
  QmixModel flat = model;
  for (auto& net : flat.agents) {
    for (auto& l : net.layers) {
      l.w.zero();
      std::fill(l.b.begin(), l.b.end(), 0.7);
    }
  }
  Rng r3(1);
  const auto ties = select_actions(flat, obs, 0.0, r3);
  CHECK(ties[0] == 0);
  CHECK(ties[1] == 0);

  // adding a constant to one agent's outputs keeps its choice
  QmixModel shifted = model;
  for (double& b : shifted.agents[0].layers.back().b) b += 3.25;
  Rng r4(2), r5(2);
  const auto base = select_actions(model, obs, 0.0, r4);
  const auto moved = select_actions(shifted, obs, 0.0, r5);
  CHECK(base[0] == moved[0]);
  CHECK(base[1] == moved[1]);
}

TEST_CASE("full exploration is uniform over the action space") {
  Rng rng(22);
  TrainerConfig cfg = small_trainer();
  Rng init(991);
  const int actions = 24;
  QmixModel model = QmixModel::create(2, actions, 1, cfg, init);
  Mat obs(1, 2);
  obs(0, 0) = 0.1;
  obs(0, 1) = -0.4;
  std::vector<long long> counts(actions, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    counts[select_actions(model, obs, 1.0, rng)[0]] += 1;
  const double expected = double(draws) / actions;
  double chi2 = 0.0;
  for (long long c : counts)
    chi2 += (double(c) - expected) * (double(c) - expected) / expected;
  CHECK(chi2 < 41.64);  // 99th percentile, 23 degrees of freedom
}

TEST_CASE("descent step: identity at zero gradient, hand value, descent") {
  TrainerConfig cfg = small_trainer();
  Rng init(1001);
  QmixModel model = QmixModel::create(3, 4, 2, cfg, init);

  std::vector<double> before;
  for_each_param(model, [&](double& p) { before.push_back(p); });
  QmixGrads zero = QmixGrads::zeros_like(model);
  sgd_step(model, zero, 0.5);
  std::size_t i = 0;
  bool unchanged = true;
  for_each_param(model, [&](double& p) {
    if (p != before[i++]) unchanged = false;
  });
  CHECK(unchanged);

  // scalar quadratic: theta = 0, loss (theta-3)^2, lr 0.1 -> theta = 0.6
  double theta = 0.0;
  const double grad = 2.0 * (theta - 3.0);
  theta -= 0.1 * grad;
  CHECK(theta == doctest::Approx(0.6));

  // one small step on a fixed batch decreases the loss almost always
  Rng rng(26);
  int improved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng seed_rng(derive_seed(5000, trial));
    QmixModel online = QmixModel::create(3, 4, 2, cfg, seed_rng);
    QmixModel target = QmixModel::create(3, 4, 2, cfg, seed_rng);
    auto transitions = random_transitions(8, 2, 3, 4, rng);
    std::vector<const Transition*> batch;
    for (const auto& tr : transitions) batch.push_back(&tr);
    QmixGrads grads = QmixGrads::zeros_like(online);
    const double loss0 =
        td_loss(batch, online, target, 0.85, grads, Exec::serial).loss;
    sgd_step(online, grads, 1e-4);
    const double loss1 = batch_loss(batch, online, target, 0.85);
    if (loss1 < loss0) ++improved;
  }
  CHECK(improved >= 95);

  QmixGrads bad = QmixGrads::zeros_like(model);
  bad.agents[0].layers[0].dw(0, 0) = std::nan("");
  CHECK_THROWS_AS(sgd_step(model, bad, 0.1), std::runtime_error);
}

TEST_CASE("target sync copies now and stays frozen afterwards") {
  TrainerConfig cfg = small_trainer();
  Rng init(1201);
  QmixModel online = QmixModel::create(3, 4, 2, cfg, init);
  QmixModel target = QmixModel::create(3, 4, 2, cfg, init);
  Rng rng(30);
  auto transitions = random_transitions(4, 2, 3, 4, rng);
  std::vector<const Transition*> batch;
  for (const auto& tr : transitions) batch.push_back(&tr);

  // move online away, then sync
  QmixGrads grads = QmixGrads::zeros_like(online);
  td_loss(batch, online, target, 0.85, grads, Exec::serial);
  sgd_step(online, grads, 0.05);
  sync_target(online, target);

  Mat obs(1, 3);
  obs(0, 0) = 0.2;
  obs(0, 1) = 0.4;
  obs(0, 2) = -0.3;
  const Mat qo = mlp_forward(online.agent(0), obs, nullptr, Exec::serial);
  const Mat qt = mlp_forward(target.agent(0), obs, nullptr, Exec::serial);
  CHECK(qo.data == qt.data);

  // another online update leaves the target (and its bootstrap) stale
  QmixGrads grads2 = QmixGrads::zeros_like(online);
  const double y_loss_before = batch_loss(batch, online, target, 0.85);
  td_loss(batch, online, target, 0.85, grads2, Exec::serial);
  sgd_step(online, grads2, 0.05);
  const Mat qt2 = mlp_forward(target.agent(0), obs, nullptr, Exec::serial);
  CHECK(qt.data == qt2.data);
  const double y_loss_after = batch_loss(batch, online, target, 0.85);
  CHECK(y_loss_before != y_loss_after);  // online side moved
  const Mat qo2 = mlp_forward(online.agent(0), obs, nullptr, Exec::serial);
  CHECK(qo.data != qo2.data);
}

TEST_CASE("replay pool: eviction, seeded sampling, uniformity") {
  ReplayBuffer buf(2);
  Transition t1, t2, t3;
  t1.reward = 1.0;
  t2.reward = 2.0;
  t3.reward = 3.0;
  buf.push(t1);
  buf.push(t2);
  buf.push(t3);
  CHECK(buf.size() == 2);
  CHECK(buf.at(0).reward == doctest::Approx(3.0));  // oldest evicted
  CHECK(buf.at(1).reward == doctest::Approx(2.0));

  Rng r1(64), r2(64);
  const auto s1 = buf.sample(2, r1);
  const auto s2 = buf.sample(2, r2);
  for (int i = 0; i < 2; ++i) CHECK(s1[i]->reward == s2[i]->reward);

  Rng rbad(1);
  CHECK_THROWS_AS(buf.sample(3, rbad), std::runtime_error);  // undersized

  ReplayBuffer big(1000);
  for (int i = 0; i < 1000; ++i) {
    Transition t;
    t.reward = double(i);
    big.push(t);
  }
  Rng rs(2025);
  std::vector<long long> counts(1000, 0);
  const int draws = 100000;
  for (int chunk = 0; chunk < draws / 1000; ++chunk)
    for (const Transition* t : big.sample(1000, rs))
      counts[std::size_t(t->reward)] += 1;
  const double expected = double(draws) / 1000.0;
  double chi2 = 0.0;
  for (long long c : counts)
    chi2 += (double(c) - expected) * (double(c) - expected) / expected;
  CHECK(chi2 < 1106.0);  // 99th percentile, 999 degrees of freedom
}

TEST_CASE("checkpoints round-trip the full model") {
  TrainerConfig cfg = small_trainer();
  Rng init(1301);
  QmixModel model = QmixModel::create(5, 7, 3, cfg, init);
  const std::string path = "/tmp/schedsim_test_checkpoint.json";
  save_checkpoint(path, model, 42);
  long long steps = 0;
  const QmixModel loaded = load_checkpoint(path, &steps);
  CHECK(steps == 42);
  CHECK(loaded.num_actions == 7);
  Mat obs(1, 5);
  obs(0, 1) = 0.9;
  obs(0, 3) = -0.2;
  for (int u = 0; u < 3; ++u) {
    const Mat a = mlp_forward(model.agent(u), obs, nullptr, Exec::serial);
    const Mat b = mlp_forward(loaded.agent(u), obs, nullptr, Exec::serial);
    CHECK(a.data == b.data);
  }
  std::remove(path.c_str());
}

TEST_CASE("shared-parameter mode uses one network for every agent") {
  TrainerConfig cfg = small_trainer();
  cfg.shared_parameters = true;
  Rng init(1401);
  QmixModel model = QmixModel::create(3, 4, 4, cfg, init);
  CHECK(model.agents.size() == 1);
  Mat obs(1, 3);
  obs(0, 0) = 0.5;
  const Mat q0 = mlp_forward(model.agent(0), obs, nullptr, Exec::serial);
  const Mat q3 = mlp_forward(model.agent(3), obs, nullptr, Exec::serial);
  CHECK(q0.data == q3.data);

  // gradients from every agent land on the single network
  Rng rng(34);
  auto transitions = random_transitions(4, 4, 3, 4, rng);
  std::vector<const Transition*> batch;
  for (const auto& tr : transitions) batch.push_back(&tr);
  QmixGrads grads = QmixGrads::zeros_like(model);
  CHECK(grads.agents.size() == 1);
  td_loss(batch, model, model, 0.85, grads, Exec::serial);
  double sum = 0.0;
  for (const auto& l : grads.agents[0].layers)
    for (double g : l.dw.data) sum += std::fabs(g);
  CHECK(sum > 0.0);
}

TEST_CASE("training math is identical in serial and parallel mode") {
  TrainerConfig cfg = small_trainer(16, 8, 8);
  Rng init(1501);
  QmixModel online = QmixModel::create(6, 8, 3, cfg, init);
  QmixModel target = QmixModel::create(6, 8, 3, cfg, init);
  Rng rng(38);
  auto transitions = random_transitions(32, 3, 6, 8, rng);
  std::vector<const Transition*> batch;
  for (const auto& tr : transitions) batch.push_back(&tr);

  QmixGrads g_serial = QmixGrads::zeros_like(online);
  QmixGrads g_parallel = QmixGrads::zeros_like(online);
  const TdStats s1 =
      td_loss(batch, online, target, 0.85, g_serial, Exec::serial);
  const TdStats s2 =
      td_loss(batch, online, target, 0.85, g_parallel, Exec::parallel);
  CHECK(s1.loss == s2.loss);
  CHECK(s1.grad_norm == s2.grad_norm);
  std::vector<double> flat1, flat2;
  for_each_param_grad(online, g_serial,
                      [&](double&, double& g) { flat1.push_back(g); });
  for_each_param_grad(online, g_parallel,
                      [&](double&, double& g) { flat2.push_back(g); });
  CHECK(flat1 == flat2);
}
