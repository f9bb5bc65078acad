#pragma once

// Test-only reference computations, kept independent of the library code
// they check.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

/// Gaussian tail probability by composite Simpson quadrature of the normal
/// density over [x, x + 14] (the remainder beyond is negligible relative to
/// the integral for the arguments used in tests).
inline double gaussian_tail_quadrature(double x) {
  const double span = 14.0;
  const int n = 140000;  // even
  const double h = span / n;
  auto pdf = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  double sum = pdf(x) + pdf(x + span);
  for (int i = 1; i < n; ++i) sum += pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Direct evaluation of the completion-slot argmin for the a-th packet
/// arriving in slot t: the first slot tau > t by which the cumulative
/// service from t+1 covers the backlog left after slot t plus packet a's
/// position. Returns the delay tau - t, or -1 when service never covers it
/// within the trace.
/// `service[i]` is the slot-(i+1) service in bits; `queue_start[i]` is the
/// recursion backlog at the start of slot i+1.
inline long long delay_argmin(const std::vector<long long>& service,
                              const std::vector<long long>& queue_start,
                              long long t, long long a, long long g) {
  const long long horizon = (long long)service.size();
  long long backlog = queue_start[t - 1] - service[t - 1];
  if (backlog < 0) backlog = 0;
  long long rem = backlog + g * a;
  for (long long tau = t + 1; tau <= horizon; ++tau) {
    rem -= service[tau - 1];
    if (rem <= 0) return tau - t;
  }
  return -1;
}

/// Scalar queue-length recursion Z(t+1) = [Z(t) - psi]^+ + A(t) * G.
inline std::vector<long long> queue_recursion(
    const std::vector<long long>& service, const std::vector<long long>& arrivals,
    long long g) {
  std::vector<long long> z(service.size() + 1, 0);
  for (std::size_t i = 0; i < service.size(); ++i) {
    long long rest = z[i] - service[i];
    if (rest < 0) rest = 0;
    z[i + 1] = rest + arrivals[i] * g;
  }
  return z;
}

/// Average over users of the population standard deviation of each user's
/// delay list (users with fewer than two entries contribute zero).
inline double jitter_from_delays(
    const std::vector<std::vector<long long>>& per_user_delays) {
  if (per_user_delays.empty()) return 0.0;
  double total = 0.0;
  for (const auto& delays : per_user_delays) {
    if (delays.size() <= 1) continue;
    double mean = 0.0;
    for (long long d : delays) mean += double(d);
    mean /= double(delays.size());
    double var = 0.0;
    for (long long d : delays) var += (double(d) - mean) * (double(d) - mean);
    var /= double(delays.size());
    total += std::sqrt(var);
  }
  return total / double(per_user_delays.size());
}

}  // namespace oracles
