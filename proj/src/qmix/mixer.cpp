#include "schedsim/qmix/mixer.hpp"

#include <cassert>
#include <cmath>

namespace schedsim {

namespace {
double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

MixingNetwork MixingNetwork::create(int num_agents, int state_dim, int width,
                                    int head_hidden, Rng& rng) {
  MixingNetwork mix;
  mix.num_agents = num_agents;
  mix.width = width;
  mix.state_dim = state_dim;
  mix.w1_hyper = make_dense(state_dim, num_agents * width, rng);
  mix.b1_hyper = make_dense(state_dim, width, rng);
  mix.w2_hyper = make_dense(state_dim, width, rng);
  mix.bias_head = Mlp::create({state_dim, head_hidden, 1}, rng);
  // damp the initial mixing gains: with |.|-rectified weights the mixed
  // value would otherwise start an order of magnitude above the reward
  // scale and the bootstrap target would run away from the start
  const double damp = 0.05;
  for (double& v : mix.w1_hyper.w.data) v *= damp;
  for (double& v : mix.w2_hyper.w.data) v *= damp;
  for (double& v : mix.b1_hyper.w.data) v *= damp;
  for (double& v : mix.bias_head.layers.back().w.data) v *= damp;
  return mix;
}

MixerGrads MixerGrads::zeros_like(const MixingNetwork& mix) {
  auto zero_dense = [](const DenseLayer& l) {
    DenseGrads g;
    g.dw = Mat(l.w.rows, l.w.cols);
    g.db.assign(l.b.size(), 0.0);
    return g;
  };
  MixerGrads g;
  g.w1_hyper = zero_dense(mix.w1_hyper);
  g.b1_hyper = zero_dense(mix.b1_hyper);
  g.w2_hyper = zero_dense(mix.w2_hyper);
  g.bias_head = MlpGrads::zeros_like(mix.bias_head);
  return g;
}

namespace {

Mat dense_forward(const DenseLayer& l, const Mat& x, Exec ex) {
  Mat out;
  kernels::matmul(x, l.w, out, ex);
  kernels::add_row_bias(out, l.b, ex);
  return out;
}

void dense_backward(const DenseLayer&, const Mat& x, const Mat& dpre,
                    DenseGrads& grads, Exec ex) {
  Mat dw;
  kernels::matmul_tn(x, dpre, dw, ex);
  std::vector<double> db;
  kernels::col_sum(dpre, db, ex);
  for (std::size_t i = 0; i < dw.data.size(); ++i)
    grads.dw.data[i] += dw.data[i];
  for (std::size_t i = 0; i < db.size(); ++i) grads.db[i] += db[i];
}

}  // namespace

std::vector<double> mixer_forward(const MixingNetwork& mix, const Mat& q,
                                  const Mat& state, MixerCache* cache,
                                  Exec ex) {
  assert(q.cols == mix.num_agents);
  assert(state.cols == mix.state_dim);
  const int n = q.rows, u_count = mix.num_agents, h_count = mix.width;

  MixerCache local;
  MixerCache& c = cache ? *cache : local;
  c.q = q;
  c.pre_w1 = dense_forward(mix.w1_hyper, state, ex);
  c.pre_b1 = dense_forward(mix.b1_hyper, state, ex);
  c.pre_w2 = dense_forward(mix.w2_hyper, state, ex);
  c.w1 = c.pre_w1;
  kernels::abs_inplace(c.w1, ex);
  c.w2 = c.pre_w2;
  kernels::abs_inplace(c.w2, ex);
  c.head_out = mlp_forward(mix.bias_head, state, &c.head_cache, ex);

  c.mix_pre = Mat(n, h_count);
  c.mix_act = Mat(n, h_count);
  std::vector<double> qtot(n, 0.0);

  auto run_row = [&](int i) {
    const double* qi = q.row(i);
    const double* w1i = c.w1.row(i);
    const double* b1i = c.pre_b1.row(i);
    const double* w2i = c.w2.row(i);
    double* prei = c.mix_pre.row(i);
    double* acti = c.mix_act.row(i);
    double total = c.head_out(i, 0);
    for (int h = 0; h < h_count; ++h) {
      double m = b1i[h];
      for (int u = 0; u < u_count; ++u) m += w1i[h * u_count + u] * qi[u];
      prei[h] = m;
      const double a = m > 0.0 ? m : std::expm1(m);
      acti[h] = a;
      total += w2i[h] * a;
    }
    qtot[i] = total;
  };

  if (ex == Exec::parallel && double(n) * h_count * u_count > 5e5) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) run_row(i);
  } else {
    for (int i = 0; i < n; ++i) run_row(i);
  }
  return qtot;
}

Mat mixer_backward(const MixingNetwork& mix, const MixerCache& cache,
                   const Mat& state, const std::vector<double>& dout,
                   MixerGrads& grads, Exec ex) {
  const int n = cache.q.rows, u_count = mix.num_agents, h_count = mix.width;
  assert(int(dout.size()) == n);

  Mat dq(n, u_count);
  Mat dpre_w1(n, u_count * h_count);
  Mat dpre_b1(n, h_count);
  Mat dpre_w2(n, h_count);
  Mat dhead(n, 1);

  auto run_row = [&](int i) {
    const double g = dout[i];
    dhead(i, 0) = g;
    const double* qi = cache.q.row(i);
    const double* w1i = cache.w1.row(i);
    const double* w2i = cache.w2.row(i);
    const double* prei = cache.mix_pre.row(i);
    const double* acti = cache.mix_act.row(i);
    const double* pw1i = cache.pre_w1.row(i);
    const double* pw2i = cache.pre_w2.row(i);
    double* dqi = dq.row(i);
    double* dp1i = dpre_w1.row(i);
    double* db1i = dpre_b1.row(i);
    double* dp2i = dpre_w2.row(i);
    for (int u = 0; u < u_count; ++u) dqi[u] = 0.0;
    for (int h = 0; h < h_count; ++h) {
      dp2i[h] = g * acti[h] * sign_of(pw2i[h]);
      const double dact = g * w2i[h];
      const double dm =
          dact * (prei[h] > 0.0 ? 1.0 : std::exp(prei[h]));  // ELU slope
      db1i[h] = dm;
      for (int u = 0; u < u_count; ++u) {
        const int k = h * u_count + u;
        dp1i[k] = dm * qi[u] * sign_of(pw1i[k]);
        dqi[u] += w1i[k] * dm;
      }
    }
  };

  if (ex == Exec::parallel && double(n) * h_count * u_count > 5e5) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) run_row(i);
  } else {
    for (int i = 0; i < n; ++i) run_row(i);
  }

  dense_backward(mix.w1_hyper, state, dpre_w1, grads.w1_hyper, ex);
  dense_backward(mix.b1_hyper, state, dpre_b1, grads.b1_hyper, ex);
  dense_backward(mix.w2_hyper, state, dpre_w2, grads.w2_hyper, ex);
  mlp_backward(mix.bias_head, cache.head_cache, dhead, grads.bias_head, false,
               ex);
  return dq;
}

}  // namespace schedsim
