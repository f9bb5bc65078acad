#pragma once

#include <vector>

#include "schedsim/linalg.hpp"
#include "schedsim/rng.hpp"

namespace schedsim {

struct DenseLayer {
  Mat w;                  // in x out
  std::vector<double> b;  // out
};

DenseLayer make_dense(int in, int out, Rng& rng);

struct DenseGrads {
  Mat dw;
  std::vector<double> db;
};

/// Fully-connected net with ReLU hidden layers and a linear output layer.
/// Agent value networks and the mixer's bias head are instances of this.
struct Mlp {
  std::vector<DenseLayer> layers;

  static Mlp create(const std::vector<int>& dims, Rng& rng);
  int in_dim() const { return layers.front().w.rows; }
  int out_dim() const { return layers.back().w.cols; }
};

/// Intermediate activations kept by a forward pass for backprop.
struct MlpCache {
  std::vector<Mat> inputs;  // input of each layer
  std::vector<Mat> pre;     // pre-activation of each layer
};

struct MlpGrads {
  std::vector<DenseGrads> layers;
  static MlpGrads zeros_like(const Mlp& net);
};

/// x: batch x in. Returns batch x out; fills `cache` when non-null.
Mat mlp_forward(const Mlp& net, const Mat& x, MlpCache* cache,
                Exec ex = default_exec());

/// Accumulates parameter gradients for upstream gradient `dout`
/// (batch x out). Returns the gradient w.r.t. the input when
/// `want_dinput`, otherwise an empty Mat.
Mat mlp_backward(const Mlp& net, const MlpCache& cache, const Mat& dout,
                 MlpGrads& grads, bool want_dinput, Exec ex = default_exec());

}  // namespace schedsim
