#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include "qlab/constants.hpp"
#include "qlab/field.hpp"
#include "qlab/fft.hpp"
#include "qlab/grid.hpp"

namespace qlab {

/// Angular frequency of a positive-frequency mode, omega(k) = c sqrt(|k|^2 + (mc/hbar)^2).
/// Strictly positive for every wave vector.
inline double dispersion(const std::array<double, 3>& k, const PhysicalConstants& pc) {
  double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  double mu = pc.mu();
  return pc.c * std::sqrt(k2 + mu * mu);
}

/// Raw Gaussian amplitudes a(k) = exp(-|k - k0|^2 / (4 dk^2)), not normalized.
/// Requires the 6-sigma support ellipsoid to fit inside the grid.
inline cvec gaussian_amplitude(const KGrid& grid, const std::array<double, 3>& k0,
                               double delta_k) {
  if (!(delta_k > 0.0))
    throw Error(ErrorCode::ConfigInvalid, "delta_k must be positive");
  for (int a = 0; a < grid.dim(); ++a) {
    double off = std::abs(k0[a] - grid.k_offset(a));
    if (off + 6.0 * delta_k > grid.k_half_extent(a))
      throw Error(ErrorCode::GridTooNarrow,
                  "6-sigma support of the Gaussian exceeds the grid extent");
  }
  cvec a(grid.size());
  const double inv = 1.0 / (4.0 * delta_k * delta_k);
  for (std::size_t f = 0; f < a.size(); ++f) {
    auto k = grid.k_vector(f);
    double r2 = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) {
      double d = k[ax] - k0[ax];
      r2 += d * d;
    }
    a[f] = std::exp(-r2 * inv);
  }
  return a;
}

/// Raw outgoing-shell amplitudes a(k) = w(k_hat) exp(-(|k| - k_mag)^2 / (4 dk^2)).
/// 3D only; the angular weight must be nonnegative and not identically zero on
/// the grid. The k = 0 node has no direction and gets zero weight.
inline cvec shell_amplitude(const KGrid& grid, double k_mag, double delta_k,
                            const std::function<double(std::array<double, 3>)>& angular_weight) {
  if (grid.dim() != 3)
    throw Error(ErrorCode::DimensionMismatch, "shell packets are 3D");
  if (!(delta_k > 0.0) || !(k_mag - 6.0 * delta_k > 0.0))
    throw Error(ErrorCode::GridTooNarrow, "shell must satisfy k_mag - 6 delta_k > 0");
  for (int a = 0; a < 3; ++a) {
    if (std::abs(grid.k_offset(a)) > 0.0)
      throw Error(ErrorCode::ConfigInvalid, "shell grids must be centered on k = 0");
    if (k_mag + 6.0 * delta_k > grid.k_half_extent(a))
      throw Error(ErrorCode::GridTooNarrow, "6-sigma shell support exceeds the grid extent");
  }
  cvec a(grid.size());
  const double inv = 1.0 / (4.0 * delta_k * delta_k);
  bool any = false;
  for (std::size_t f = 0; f < a.size(); ++f) {
    auto k = grid.k_vector(f);
    double r = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (r == 0.0) {
      a[f] = 0.0;
      continue;
    }
    std::array<double, 3> khat{k[0] / r, k[1] / r, k[2] / r};
    double w = angular_weight(khat);
    if (w < 0.0) throw Error(ErrorCode::ZeroWeight, "angular weight must be nonnegative");
    double d = r - k_mag;
    a[f] = w * std::exp(-d * d * inv);
    if (std::abs(a[f]) > 0.0) any = true;
  }
  if (!any)
    throw Error(ErrorCode::ZeroWeight, "angular weight vanishes everywhere on the grid");
  return a;
}

/// Normalized positive-frequency wave packet: complex amplitudes alpha(k) on a
/// KGrid with sum |alpha|^2 dk^d = 1. Construction renormalizes and rejects
/// amplitudes that fail to decay below 1e-12 inside the 4-node boundary margin,
/// since periodic wrap-around would silently break localization assumptions.
class MomentumPacket {
 public:
  /// Rescale raw amplitudes by sigma = (sum |a|^2 dk^d)^(-1/2). The applied
  /// sigma is reported through `sigma_out` when non-null.
  static MomentumPacket normalize(const KGrid& grid, cvec raw,
                                  const PhysicalConstants& pc,
                                  double* sigma_out = nullptr) {
    pc.validate();
    long double s = 0.0L;
    for (const cplx& v : raw) s += std::norm(v);
    double total = static_cast<double>(s) * grid.k_measure();
    if (!(total > 0.0))
      throw Error(ErrorCode::ZeroNorm, "amplitudes are identically zero");
    double sigma = 1.0 / std::sqrt(total);
    for (cplx& v : raw) v *= sigma;
    if (sigma_out) *sigma_out = sigma;
    return MomentumPacket(grid, std::move(raw), pc);
  }

  const KGrid& grid() const { return grid_; }
  const PhysicalConstants& constants() const { return consts_; }
  const cvec& alpha() const { return alpha_; }

  double norm_sq() const {
    long double s = 0.0L;
    for (const cplx& v : alpha_) s += std::norm(v);
    return static_cast<double>(s) * grid_.k_measure();
  }

  double omega(std::size_t flat) const { return dispersion(grid_.k_vector(flat), consts_); }

  /// Probability-weighted mean wave vector.
  std::array<double, 3> mean_k() const {
    std::array<long double, 3> acc{0.0L, 0.0L, 0.0L};
    for (std::size_t f = 0; f < alpha_.size(); ++f) {
      double w = std::norm(alpha_[f]);
      auto k = grid_.k_vector(f);
      for (int a = 0; a < grid_.dim(); ++a) acc[a] += w * k[a];
    }
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < grid_.dim(); ++a)
      out[a] = static_cast<double>(acc[a]) * grid_.k_measure();
    return out;
  }

  /// Packet translated by x0: alpha multiplied by exp(-i k . x0).
  MomentumPacket translated(const std::array<double, 3>& x0) const {
    MomentumPacket out = *this;
    for (std::size_t f = 0; f < out.alpha_.size(); ++f) {
      auto k = grid_.k_vector(f);
      double phase = 0.0;
      for (int a = 0; a < grid_.dim(); ++a) phase += k[a] * x0[a];
      out.alpha_[f] *= std::polar(1.0, -phase);
    }
    return out;
  }

  /// Amplitudes restricted to the nodes where keep() is true, renormalized.
  MomentumPacket restricted(const std::function<bool(std::size_t)>& keep) const {
    cvec a = alpha_;
    for (std::size_t f = 0; f < a.size(); ++f)
      if (!keep(f)) a[f] = 0.0;
    return normalize(grid_, std::move(a), consts_);
  }

 private:
  MomentumPacket(const KGrid& grid, cvec alpha, const PhysicalConstants& pc)
      : grid_(grid), alpha_(std::move(alpha)), consts_(pc) {
    if (alpha_.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "amplitude count does not match grid");
    if (!std::isfinite(dispersion({grid_.k_max_norm(), 0.0, 0.0}, pc)))
      throw Error(ErrorCode::ConfigInvalid, "dispersion overflows on this grid");
    double worst = 0.0;
    for (std::size_t f = 0; f < alpha_.size(); ++f)
      if (grid_.in_boundary_margin(f, kBoundaryMargin))
        worst = std::max(worst, std::abs(alpha_[f]));
    if (worst >= kMarginAmplitude)
      throw Error(ErrorCode::MarginViolation,
                  "amplitudes do not decay below 1e-12 inside the 4-node margin");
  }

  KGrid grid_;
  cvec alpha_;
  PhysicalConstants consts_;
};

/// Mode coefficients of the synthesized field: c_j = dk^d alpha_j e^{-i omega_j t}
/// / sqrt((2 pi)^d 2 k0_j), so that psi(x) = sum_j c_j e^{i k_j . x}.
inline cvec synthesis_coefficients(const MomentumPacket& packet, double t,
                                   int time_derivative_order = 0) {
  const KGrid& g = packet.grid();
  const PhysicalConstants& pc = packet.constants();
  const double measure = g.k_measure();
  const double two_pi_d = std::pow(2.0 * std::numbers::pi, g.dim());
  cvec c(g.size());
  for (std::size_t f = 0; f < c.size(); ++f) {
    double om = dispersion(g.k_vector(f), pc);
    double root = std::sqrt(two_pi_d * 2.0 * om / pc.c);  // (2 pi)^d 2 k^0
    cplx w = packet.alpha()[f] * (measure / root) * std::polar(1.0, -om * t);
    for (int o = 0; o < time_derivative_order; ++o) w *= cplx(0.0, -om);
    c[f] = w;
  }
  return c;
}

/// Evaluate the packet's field at time t on the dual position grid, including
/// its first and second time derivatives.
inline FieldState synthesize(const MomentumPacket& packet, double t) {
  cvec psi, psi_dt, psi_dtt;
  synth_modes(packet.grid(), synthesis_coefficients(packet, t, 0), psi);
  synth_modes(packet.grid(), synthesis_coefficients(packet, t, 1), psi_dt);
  synth_modes(packet.grid(), synthesis_coefficients(packet, t, 2), psi_dtt);
  return FieldState(packet.grid(), packet.constants(), std::move(psi), std::move(psi_dt),
                    std::move(psi_dtt), t);
}

}  // namespace qlab
