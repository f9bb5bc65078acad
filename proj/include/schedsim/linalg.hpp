#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace schedsim {

/// Execution mode for the numeric kernels. Every kernel partitions its
/// output so that each element is produced by exactly one thread with a
/// fixed inner summation order; serial and parallel runs are therefore
/// bit-identical, and so are runs with different thread counts.
enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);

/// Dense row-major matrix of doubles.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(std::size_t(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  double operator()(int r, int c) const {
    return data[std::size_t(r) * cols + c];
  }
  double* row(int r) { return data.data() + std::size_t(r) * cols; }
  const double* row(int r) const { return data.data() + std::size_t(r) * cols; }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

namespace kernels {

/// C = A * B
void matmul(const Mat& a, const Mat& b, Mat& c, Exec ex = default_exec());

/// C = A^T * B  (A: n x m, B: n x p, C: m x p). Gradient accumulation over
/// a batch goes through this, giving a fixed reduction order.
void matmul_tn(const Mat& a, const Mat& b, Mat& c, Exec ex = default_exec());

/// C = A * B^T
void matmul_nt(const Mat& a, const Mat& b, Mat& c, Exec ex = default_exec());

/// X(i, :) += bias
void add_row_bias(Mat& x, const std::vector<double>& bias,
                  Exec ex = default_exec());

/// out[j] = sum_i A(i, j)
void col_sum(const Mat& a, std::vector<double>& out, Exec ex = default_exec());

void relu_inplace(Mat& x, Exec ex = default_exec());
/// grad ⊙= relu'(pre)
void relu_backward(const Mat& pre, Mat& grad, Exec ex = default_exec());

void elu_inplace(Mat& x, Exec ex = default_exec());
void elu_backward(const Mat& pre, Mat& grad, Exec ex = default_exec());

void abs_inplace(Mat& x, Exec ex = default_exec());
/// grad ⊙= sign(pre); the subgradient at zero is taken as zero.
void abs_backward(const Mat& pre, Mat& grad, Exec ex = default_exec());

}  // namespace kernels

}  // namespace schedsim
