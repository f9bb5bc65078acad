#include "schedsim/channel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace schedsim {

namespace {
constexpr double kLog2E = 1.4426950408889634;  // log2(e)

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
}  // namespace

void TopologyConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("topology: " + what);
  };
  if (num_bs < 1) fail("num_bs must be >= 1");
  if (ues_per_bs < 1) fail("ues_per_bs must be >= 1");
  if (num_subcarriers < 1) fail("num_subcarriers must be >= 1");
  if (num_antennas < 1) fail("num_antennas must be >= 1");
  if (!(ref_distance_m > 0.0)) fail("ref_distance_m must be > 0");
  if (path_loss_exponent < 0.0) fail("path_loss_exponent must be >= 0");
  if (!(noise_power_w > 0.0)) fail("noise_power_w must be > 0");
  if (!(max_power_w > 0.0)) fail("max_power_w must be > 0");
  if (!(block_error_rate > 0.0 && block_error_rate < 0.5))
    fail("block_error_rate must be in (0, 0.5)");
  if (!(cell_radius_m > 0.0)) fail("cell_radius_m must be > 0");
  if (inter_site_distance_m < 0.0) fail("inter_site_distance_m must be >= 0");
  if (!bs_ue_distance_m.empty() &&
      int(bs_ue_distance_m.size()) != num_bs * num_ues())
    fail("bs_ue_distance_m must have num_bs * num_ues entries");
}

double large_scale_gain(double distance_m, const TopologyConfig& cfg) {
  return std::pow(1.0 + distance_m / cfg.ref_distance_m,
                  -cfg.path_loss_exponent);
}

ChannelRealization draw_channel(const TopologyConfig& cfg, Rng& rng) {
  if (cfg.bs_ue_distance_m.empty())
    throw std::invalid_argument("draw_channel: UE distances not set");
  ChannelRealization ch;
  ch.F = cfg.num_subcarriers;
  ch.B = cfg.num_bs;
  ch.M = cfg.num_antennas;
  ch.U = cfg.num_ues();
  ch.gains.resize(std::size_t(ch.F) * ch.B * ch.M * ch.U);

  // sqrt(beta) per (b, u) link
  std::vector<double> scale(std::size_t(ch.B) * ch.U);
  for (int b = 0; b < ch.B; ++b)
    for (int u = 0; u < ch.U; ++u)
      scale[std::size_t(b) * ch.U + u] =
          std::sqrt(large_scale_gain(cfg.distance(b, u), cfg));

  const double s2 = std::sqrt(0.5);  // unit-variance complex Gaussian parts
  for (int f = 0; f < ch.F; ++f)
    for (int b = 0; b < ch.B; ++b)
      for (int m = 0; m < ch.M; ++m)
        for (int u = 0; u < ch.U; ++u) {
          const double sc = scale[std::size_t(b) * ch.U + u];
          ch.at(f, b, m, u) =
              cplx(rng.normal() * s2 * sc, rng.normal() * s2 * sc);
        }
  return ch;
}

std::vector<cplx> mrt_beamformer(const cplx* h, int m, double power_w) {
  if (power_w < 0.0) throw std::invalid_argument("negative beam power");
  double n2 = 0.0;
  for (int i = 0; i < m; ++i) n2 += std::norm(h[i]);
  if (n2 <= 0.0) throw std::invalid_argument("degenerate channel");
  const double scale = std::sqrt(power_w / n2);
  std::vector<cplx> w(m);
  for (int i = 0; i < m; ++i) w[i] = h[i] * scale;
  return w;
}

Mat compute_sinr(const Allocation& alloc, const ChannelRealization& ch,
                 const TopologyConfig& cfg) {
  const int U = ch.U, F = ch.F, M = ch.M;
  Mat gamma(U, F);
  for (int f = 0; f < F; ++f) {
    // scheduled users on this subcarrier, in user order
    std::vector<int> active;
    for (int u = 0; u < U; ++u)
      if (alloc.scheduled(u, f)) active.push_back(u);
    if (active.empty()) continue;

    for (int u : active) {
      const int bu = cfg.serving_bs(u);
      cplx sig(0.0, 0.0);
      const cplx* wu = alloc.beam_at(u, f);
      for (int m = 0; m < M; ++m)
        sig += std::conj(ch.at(f, bu, m, u)) * wu[m];
      double interference = 0.0;
      for (int v : active) {
        if (v == u) continue;
        const int bv = cfg.serving_bs(v);
        const cplx* wv = alloc.beam_at(v, f);
        cplx cross(0.0, 0.0);
        for (int m = 0; m < M; ++m)
          cross += std::conj(ch.at(f, bv, m, u)) * wv[m];
        interference += std::norm(cross);
      }
      gamma(u, f) = std::norm(sig) / (interference + cfg.noise_power_w);
    }
  }
  return gamma;
}

double q_inverse(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("q_inverse: eps must be in (0, 1)");
  double lo = -40.0, hi = 40.0;
  // Q is strictly decreasing: Q(lo) ~ 1 > eps > Q(hi) ~ 0.
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double q = gaussian_tail(mid);
    if (q > eps)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double achievable_rate(const double* gamma, int f, double eps) {
  // the inverse tail value is cached across calls with the same eps
  thread_local double cached_eps = -1.0;
  thread_local double cached_qinv = 0.0;
  if (eps != cached_eps) {
    cached_qinv = q_inverse(eps);
    cached_eps = eps;
  }
  double bits = 0.0;
  double dispersion = 0.0;
  for (int i = 0; i < f; ++i) {
    const double g = gamma[i];
    bits += std::log1p(g) * kLog2E;
    const double t = 1.0 + g;
    dispersion += kLog2E * kLog2E * (1.0 - 1.0 / (t * t));
  }
  const double rate = bits - cached_qinv * std::sqrt(dispersion);
  return rate > 0.0 ? rate : 0.0;
}

void validate_allocation(const Allocation& alloc, const TopologyConfig& cfg) {
  const int U = alloc.U, F = alloc.F;
  if (U != cfg.num_ues() || F != cfg.num_subcarriers ||
      alloc.M != cfg.num_antennas)
    throw std::runtime_error("allocation: dimension mismatch with topology");

  for (int b = 0; b < cfg.num_bs; ++b) {
    double power = 0.0;
    for (int f = 0; f < F; ++f) {
      int count = 0;
      for (int u = 0; u < U; ++u) {
        if (cfg.serving_bs(u) != b) continue;
        if (alloc.scheduled(u, f)) {
          ++count;
          const double p = alloc.beam_power(u, f);
          if (!std::isfinite(p))
            throw std::runtime_error("allocation: non-finite beam power");
          power += p;
        } else if (alloc.beam_power(u, f) != 0.0) {
          throw std::runtime_error(
              "allocation: beam set on unscheduled pair");
        }
      }
      if (count > 1) {
        std::ostringstream os;
        os << "allocation: subcarrier " << f << " shared within cell " << b;
        throw std::runtime_error(os.str());
      }
    }
    if (power > cfg.max_power_w + 1e-9) {
      std::ostringstream os;
      os << "allocation: cell " << b << " power " << power << " exceeds "
         << cfg.max_power_w;
      throw std::runtime_error(os.str());
    }
  }
}

}  // namespace schedsim
