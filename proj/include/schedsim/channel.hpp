#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "schedsim/linalg.hpp"
#include "schedsim/rng.hpp"

namespace schedsim {

using cplx = std::complex<double>;

/// Static description of the multi-cell downlink: geometry, antenna and
/// subcarrier counts, power and noise levels. Base stations sit on a line
/// with spacing `inter_site_distance_m`; UE-to-BS distances are filled in
/// at episode start (or supplied directly for fixed scenarios).
struct TopologyConfig {
  int num_bs = 3;
  int ues_per_bs = 2;
  int num_subcarriers = 32;
  int num_antennas = 16;
  double cell_radius_m = 40.0;
  double ref_distance_m = 1.0;
  double path_loss_exponent = 2.0;
  double noise_power_w = 1.2589254117941663e-16;  // -129 dBm per subcarrier
  double max_power_w = 10.0;
  double block_error_rate = 1e-9;
  double inter_site_distance_m = 80.0;
  /// Row-major B x U distance table d(b, u) in meters. Empty until UE
  /// placement happens; fixed scenarios may pre-populate it via config.
  std::vector<double> bs_ue_distance_m;

  int num_ues() const { return num_bs * ues_per_bs; }
  int serving_bs(int u) const { return u / ues_per_bs; }
  /// Transmit power of one scheduled (user, subcarrier) pair. The per-BS
  /// power budget is split equally across the band, which keeps every
  /// allocation inside the power constraint by construction.
  double subcarrier_power() const { return max_power_w / num_subcarriers; }
  double distance(int b, int u) const {
    return bs_ue_distance_m[std::size_t(b) * num_ues() + u];
  }

  /// Throws std::invalid_argument on parameter-range violations.
  void validate() const;
};

/// Per-slot complex gains h for every (subcarrier, BS, antenna, UE) tuple.
struct ChannelRealization {
  int F = 0, B = 0, M = 0, U = 0;
  std::vector<cplx> gains;  // index ((f * B + b) * M + m) * U + u

  cplx& at(int f, int b, int m, int u) {
    return gains[(std::size_t((f * B + b)) * M + m) * U + u];
  }
  cplx at(int f, int b, int m, int u) const {
    return gains[(std::size_t((f * B + b)) * M + m) * U + u];
  }
  /// Squared channel norm over antennas for the (f, b, u) link.
  double norm2(int f, int b, int u) const {
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += std::norm(at(f, b, m, u));
    return s;
  }
};

/// One slot's scheduling decision: binary user/subcarrier indicators plus
/// the beamformer of every scheduled pair.
struct Allocation {
  int U = 0, F = 0, M = 0;

  Allocation() = default;
  Allocation(int users, int subcarriers, int antennas)
      : U(users),
        F(subcarriers),
        M(antennas),
        zeta(std::size_t(users) * subcarriers, 0),
        beam(std::size_t(users) * subcarriers * antennas, cplx(0.0, 0.0)) {}

  std::vector<std::uint8_t> zeta;  // U x F
  std::vector<cplx> beam;          // U x F x M

  bool scheduled(int u, int f) const {
    return zeta[std::size_t(u) * F + f] != 0;
  }
  void set_scheduled(int u, int f) { zeta[std::size_t(u) * F + f] = 1; }
  cplx* beam_at(int u, int f) {
    return beam.data() + (std::size_t(u) * F + f) * M;
  }
  const cplx* beam_at(int u, int f) const {
    return beam.data() + (std::size_t(u) * F + f) * M;
  }
  double beam_power(int u, int f) const {
    const cplx* w = beam_at(u, f);
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += std::norm(w[m]);
    return s;
  }
};

/// Distance-based large-scale gain (1 + d/d0)^(-alpha).
double large_scale_gain(double distance_m, const TopologyConfig& cfg);

/// Draws one block-fading realization: i.i.d. circularly-symmetric unit
/// variance complex Gaussians scaled by the square root of the large-scale
/// gain of each (b, u) link. Requires cfg.bs_ue_distance_m to be populated.
ChannelRealization draw_channel(const TopologyConfig& cfg, Rng& rng);

/// Maximum ratio transmission beamformer: w = sqrt(power) * h / ||h||.
/// Throws std::invalid_argument("degenerate channel") when ||h|| == 0.
std::vector<cplx> mrt_beamformer(const cplx* h, int m, double power_w);

/// Per-(user, subcarrier) SINR of an allocation under the realized channel;
/// zero wherever the user is not scheduled. Interference sums over every
/// other scheduled pair on the same subcarrier, across all cells.
Mat compute_sinr(const Allocation& alloc, const ChannelRealization& ch,
                 const TopologyConfig& cfg);

/// Inverse of the Gaussian tail function Q. Bisection to an interval width
/// of 1e-12; throws std::domain_error outside (0, 1).
double q_inverse(double eps);

/// Finite-blocklength achievable rate in bits per slot for one user given
/// its per-subcarrier SINR row: sum log2(1+g) minus the dispersion penalty
/// Q^{-1}(eps) * sqrt(sum V), clamped at zero.
double achievable_rate(const double* gamma, int f, double eps);

/// Throws std::runtime_error when the allocation breaks subcarrier
/// exclusivity within a cell or a per-BS power budget (1e-9 W tolerance).
void validate_allocation(const Allocation& alloc, const TopologyConfig& cfg);

}  // namespace schedsim
