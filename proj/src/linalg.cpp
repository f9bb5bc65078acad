#include "schedsim/linalg.hpp"

#include <cassert>
#include <cmath>

namespace schedsim {

namespace {
Exec g_default = Exec::parallel;
}

Exec default_exec() { return g_default; }
void set_default_exec(Exec e) { g_default = e; }

namespace kernels {

void matmul(const Mat& a, const Mat& b, Mat& c, Exec ex) {
  assert(a.cols == b.rows);
  c.rows = a.rows;
  c.cols = b.cols;
  c.data.assign(std::size_t(c.rows) * c.cols, 0.0);
  const int n = a.rows, k = a.cols, p = b.cols;
  // small products are cheaper without the parallel region; the arithmetic
  // per output element is identical either way
  if (ex == Exec::parallel && double(n) * k * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (int t = 0; t < k; ++t) {
        const double av = ai[t];
        const double* bt = b.row(t);
        for (int j = 0; j < p; ++j) ci[j] += av * bt[j];
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (int t = 0; t < k; ++t) {
        const double av = ai[t];
        const double* bt = b.row(t);
        for (int j = 0; j < p; ++j) ci[j] += av * bt[j];
      }
    }
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& c, Exec ex) {
  assert(a.rows == b.rows);
  c.rows = a.cols;
  c.cols = b.cols;
  c.data.assign(std::size_t(c.rows) * c.cols, 0.0);
  const int n = a.rows, m = a.cols, p = b.cols;
  if (ex == Exec::parallel && double(n) * m * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      double* ci = c.row(i);
      for (int t = 0; t < n; ++t) {
        const double av = a(t, i);
        const double* bt = b.row(t);
        for (int j = 0; j < p; ++j) ci[j] += av * bt[j];
      }
    }
  } else {
    for (int i = 0; i < m; ++i) {
      double* ci = c.row(i);
      for (int t = 0; t < n; ++t) {
        const double av = a(t, i);
        const double* bt = b.row(t);
        for (int j = 0; j < p; ++j) ci[j] += av * bt[j];
      }
    }
  }
}

void matmul_nt(const Mat& a, const Mat& b, Mat& c, Exec ex) {
  assert(a.cols == b.cols);
  c.rows = a.rows;
  c.cols = b.rows;
  c.data.assign(std::size_t(c.rows) * c.cols, 0.0);
  const int n = a.rows, k = a.cols, p = b.rows;
  if (ex == Exec::parallel && double(n) * k * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (int j = 0; j < p; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
        ci[j] = acc;
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double* ci = c.row(i);
      const double* ai = a.row(i);
      for (int j = 0; j < p; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
        ci[j] = acc;
      }
    }
  }
}

void add_row_bias(Mat& x, const std::vector<double>& bias, Exec ex) {
  assert(int(bias.size()) == x.cols);
  const int n = x.rows, p = x.cols;
  if (ex == Exec::parallel && double(n) * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double* xi = x.row(i);
      for (int j = 0; j < p; ++j) xi[j] += bias[j];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double* xi = x.row(i);
      for (int j = 0; j < p; ++j) xi[j] += bias[j];
    }
  }
}

void col_sum(const Mat& a, std::vector<double>& out, Exec ex) {
  out.assign(a.cols, 0.0);
  const int n = a.rows, p = a.cols;
  if (ex == Exec::parallel && double(n) * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += a(i, j);
      out[j] = acc;
    }
  } else {
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += a(i, j);
      out[j] = acc;
    }
  }
}

namespace {

template <typename F>
void elementwise(Mat& x, Exec ex, F f) {
  const int n = x.rows, p = x.cols;
  if (ex == Exec::parallel && double(n) * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double* xi = x.row(i);
      for (int j = 0; j < p; ++j) xi[j] = f(xi[j]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double* xi = x.row(i);
      for (int j = 0; j < p; ++j) xi[j] = f(xi[j]);
    }
  }
}

template <typename F>
void elementwise_backward(const Mat& pre, Mat& grad, Exec ex, F dfdx) {
  assert(pre.rows == grad.rows && pre.cols == grad.cols);
  const int n = grad.rows, p = grad.cols;
  if (ex == Exec::parallel && double(n) * p > 2e6) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double* gi = grad.row(i);
      const double* pi = pre.row(i);
      for (int j = 0; j < p; ++j) gi[j] *= dfdx(pi[j]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double* gi = grad.row(i);
      const double* pi = pre.row(i);
      for (int j = 0; j < p; ++j) gi[j] *= dfdx(pi[j]);
    }
  }
}

}  // namespace

void relu_inplace(Mat& x, Exec ex) {
  elementwise(x, ex, [](double v) { return v > 0.0 ? v : 0.0; });
}

void relu_backward(const Mat& pre, Mat& grad, Exec ex) {
  elementwise_backward(pre, grad, ex,
                       [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

void elu_inplace(Mat& x, Exec ex) {
  elementwise(x, ex, [](double v) { return v > 0.0 ? v : std::expm1(v); });
}

void elu_backward(const Mat& pre, Mat& grad, Exec ex) {
  elementwise_backward(pre, grad, ex,
                       [](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
}

void abs_inplace(Mat& x, Exec ex) {
  elementwise(x, ex, [](double v) { return std::fabs(v); });
}

void abs_backward(const Mat& pre, Mat& grad, Exec ex) {
  elementwise_backward(pre, grad, ex, [](double v) {
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  });
}

}  // namespace kernels
}  // namespace schedsim
