#pragma once

#include "schedsim/qmix/network.hpp"

namespace schedsim {

/// Monotonic mixing network. A hypernetwork conditioned on the global
/// state emits the mixing weights; absolute values keep them nonnegative,
/// so the mixed value is nondecreasing in every agent's utility and the
/// joint argmax factorizes into per-agent argmaxes.
struct MixingNetwork {
  int num_agents = 0;
  int width = 0;
  int state_dim = 0;
  DenseLayer w1_hyper;  // state -> num_agents * width, |.| applied
  DenseLayer b1_hyper;  // state -> width
  DenseLayer w2_hyper;  // state -> width, |.| applied
  Mlp bias_head;        // state -> head hidden -> 1

  static MixingNetwork create(int num_agents, int state_dim, int width,
                              int head_hidden, Rng& rng);
};

struct MixerGrads {
  DenseGrads w1_hyper, b1_hyper, w2_hyper;
  MlpGrads bias_head;
  static MixerGrads zeros_like(const MixingNetwork& mix);
};

struct MixerCache {
  Mat q;                        // batch x U
  Mat pre_w1, pre_b1, pre_w2;   // hypernetwork pre-activations
  Mat w1, w2;                   // after |.|
  MlpCache head_cache;
  Mat head_out;                 // batch x 1
  Mat mix_pre, mix_act;         // batch x width (pre/post ELU)
};

/// q: batch x num_agents of chosen per-agent values; state: batch x
/// state_dim. Returns the mixed value per sample.
std::vector<double> mixer_forward(const MixingNetwork& mix, const Mat& q,
                                  const Mat& state, MixerCache* cache,
                                  Exec ex = default_exec());

/// Backprop of per-sample upstream gradients through the mixer and its
/// hypernetworks. Returns the gradient w.r.t. q (batch x num_agents).
Mat mixer_backward(const MixingNetwork& mix, const MixerCache& cache,
                   const Mat& state, const std::vector<double>& dout,
                   MixerGrads& grads, Exec ex = default_exec());

}  // namespace schedsim
