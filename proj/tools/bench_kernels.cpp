// Compares the serial reference kernels against the OpenMP versions on the
// matrix shapes the trainer actually runs, plus a full optimization step.

#include <chrono>
#include <cstdio>
#include <vector>

#include "schedsim/qmix/learner.hpp"

using namespace schedsim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void bench_matmul(int n, int k, int p, int reps) {
  Rng rng(1);
  Mat a(n, k), b(k, p), c;
  for (auto& v : a.data) v = rng.uniform();
  for (auto& v : b.data) v = rng.uniform();
  const double flops = 2.0 * n * k * p * reps;

  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) kernels::matmul(a, b, c, Exec::serial);
  const double serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) kernels::matmul(a, b, c, Exec::parallel);
  const double parallel = seconds_since(t0);

  std::printf("matmul %4dx%3dx%3d  serial %7.1f MFLOP/s  omp %7.1f MFLOP/s  speedup %.2fx\n",
              n, k, p, flops / serial / 1e6, flops / parallel / 1e6,
              serial / parallel);
}

void bench_train_step(int batch, int reps) {
  TrainerConfig cfg;
  cfg.batch_size = batch;
  cfg.buffer_capacity = 4 * batch;
  cfg.warmup_transitions = batch;
  const int obs_dim = 35, actions = 24, agents = 6;
  Rng rng(7);

  auto run = [&](Exec ex) {
    QmixLearner learner(obs_dim, actions, agents, cfg, 99);
    Rng data_rng(11);
    for (int i = 0; i < cfg.buffer_capacity; ++i) {
      Transition tr;
      tr.state.resize(std::size_t(agents) * obs_dim);
      tr.next_state.resize(std::size_t(agents) * obs_dim);
      for (auto& v : tr.state) v = data_rng.uniform();
      for (auto& v : tr.next_state) v = data_rng.uniform();
      tr.actions.resize(agents);
      for (auto& a : tr.actions) a = data_rng.uniform_int(actions);
      tr.reward = data_rng.uniform();
      learner.replay.push(std::move(tr));
    }
    auto t0 = std::chrono::steady_clock::now();
    double loss = 0.0;
    for (int r = 0; r < reps; ++r) loss = learner.train_once(ex).loss;
    return std::pair<double, double>(seconds_since(t0), loss);
  };

  const auto [serial, loss_s] = run(Exec::serial);
  const auto [parallel, loss_p] = run(Exec::parallel);
  std::printf("train step batch %4d  serial %6.2f ms  omp %6.2f ms  speedup %.2fx  (losses %.6g / %.6g)\n",
              batch, serial * 1e3 / reps, parallel * 1e3 / reps,
              serial / parallel, loss_s, loss_p);
  (void)rng;
}

}  // namespace

int main() {
  bench_matmul(128, 210, 192, 200);
  bench_matmul(128, 35, 64, 600);
  bench_matmul(256, 64, 64, 400);
  bench_train_step(128, 20);
  bench_train_step(512, 8);
  return 0;
}
