#include "schedsim/qmix/network.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace schedsim {

DenseLayer make_dense(int in, int out, Rng& rng) {
  DenseLayer layer;
  layer.w = Mat(in, out);
  layer.b.assign(out, 0.0);
  const double bound = std::sqrt(6.0 / double(in + out));
  for (double& v : layer.w.data) v = (2.0 * rng.uniform() - 1.0) * bound;
  return layer;
}

Mlp Mlp::create(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output dims");
  Mlp net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    net.layers.push_back(make_dense(dims[i], dims[i + 1], rng));
  return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const auto& layer : net.layers) {
    DenseGrads dg;
    dg.dw = Mat(layer.w.rows, layer.w.cols);
    dg.db.assign(layer.b.size(), 0.0);
    g.layers.push_back(std::move(dg));
  }
  return g;
}

Mat mlp_forward(const Mlp& net, const Mat& x, MlpCache* cache, Exec ex) {
  if (x.cols != net.in_dim())
    throw std::invalid_argument("mlp: input dimension mismatch");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Mat cur = x;
  const int last = int(net.layers.size()) - 1;
  for (int l = 0; l <= last; ++l) {
    if (cache) cache->inputs.push_back(cur);
    Mat pre;
    kernels::matmul(cur, net.layers[l].w, pre, ex);
    kernels::add_row_bias(pre, net.layers[l].b, ex);
    if (cache) cache->pre.push_back(pre);
    if (l < last) kernels::relu_inplace(pre, ex);
    cur = std::move(pre);
  }
  return cur;
}

Mat mlp_backward(const Mlp& net, const MlpCache& cache, const Mat& dout,
                 MlpGrads& grads, bool want_dinput, Exec ex) {
  assert(cache.inputs.size() == net.layers.size());
  Mat d = dout;
  for (int l = int(net.layers.size()) - 1; l >= 0; --l) {
    Mat dw;
    kernels::matmul_tn(cache.inputs[l], d, dw, ex);
    std::vector<double> db;
    kernels::col_sum(d, db, ex);
    for (std::size_t i = 0; i < dw.data.size(); ++i)
      grads.layers[l].dw.data[i] += dw.data[i];
    for (std::size_t i = 0; i < db.size(); ++i) grads.layers[l].db[i] += db[i];

    if (l == 0 && !want_dinput) return Mat();
    Mat dprev;
    kernels::matmul_nt(d, net.layers[l].w, dprev, ex);
    if (l > 0) kernels::relu_backward(cache.pre[l - 1], dprev, ex);
    d = std::move(dprev);
  }
  return d;
}

}  // namespace schedsim
