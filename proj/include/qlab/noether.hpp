#pragma once

#include <array>

#include "qlab/operators.hpp"
#include "qlab/packet.hpp"

namespace qlab {

/// Contravariant 4-vector, component 0 first. Spatial entries beyond the grid
/// dimension stay zero.
using FourVector = std::array<double, 4>;

inline double minkowski_square(const FourVector& p) {
  return p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
}

/// Relativistic bilinear <psi|O|psi> = i Int [psi* d0(O psi) - (d0 psi*)(O psi)] dx^d.
/// Time derivatives are spectral, never finite differences, so the state must
/// carry at least one jet level and O may consume at most one more.
inline cplx braket_kg(const FieldState& psi, const OperatorSpec& O) {
  const FieldState opsi = O.apply(psi);
  if (!psi.has_dt() || !opsi.has_dt())
    throw Error(ErrorCode::MissingPacket,
                "braket_kg needs spectral time derivatives on both factors");
  const double inv_c = 1.0 / psi.constants().c;
  const cvec& v = psi.values();
  const cvec& vdt = psi.values_dt();
  const cvec& ov = opsi.values();
  const cvec& ovdt = opsi.values_dt();
  long double re = 0.0L, im = 0.0L;
  for (std::size_t f = 0; f < v.size(); ++f) {
    cplx term = std::conj(v[f]) * (ovdt[f] * inv_c) - std::conj(vdt[f] * inv_c) * ov[f];
    re += term.real();
    im += term.imag();
  }
  cplx sum(static_cast<double>(re), static_cast<double>(im));
  return cplx(0.0, 1.0) * sum * psi.grid().x_measure();
}

/// Low-energy bilinear Int psi* (O psi) dx^d.
inline cplx braket_nr(const FieldState& psi, const OperatorSpec& O) {
  const FieldState opsi = O.apply(psi);
  const cvec& v = psi.values();
  const cvec& ov = opsi.values();
  long double re = 0.0L, im = 0.0L;
  for (std::size_t f = 0; f < v.size(); ++f) {
    cplx term = std::conj(v[f]) * ov[f];
    re += term.real();
    im += term.imag();
  }
  return cplx(static_cast<double>(re), static_cast<double>(im)) * psi.grid().x_measure();
}

/// Integrated charge density Int j^0 dx^d with j^0 = i hbar (psi* d0 psi - psi d0 psi*).
/// Equals hbar for every normalized packet.
inline double noether_charge(const FieldState& psi) {
  const double hbar = psi.constants().hbar;
  const double inv_c = 1.0 / psi.constants().c;
  const cvec& v = psi.values();
  const cvec& vdt = psi.values_dt();
  long double s = 0.0L;
  for (std::size_t f = 0; f < v.size(); ++f)
    s += std::imag(std::conj(v[f]) * vdt[f]);
  return -2.0 * hbar * inv_c * static_cast<double>(s) * psi.grid().x_measure();
}

inline double noether_charge(const MomentumPacket& packet, double t = 0.0) {
  return noether_charge(synthesize(packet, t));
}

/// Noether 4-momentum P^mu = hbar sum |alpha|^2 k^mu dk^d with k^0 = omega/c.
inline FourVector noether_momentum(const MomentumPacket& packet) {
  const KGrid& g = packet.grid();
  const PhysicalConstants& pc = packet.constants();
  std::array<long double, 4> acc{0.0L, 0.0L, 0.0L, 0.0L};
  for (std::size_t f = 0; f < packet.alpha().size(); ++f) {
    double w = std::norm(packet.alpha()[f]);
    if (w == 0.0) continue;
    auto k = g.k_vector(f);
    acc[0] += w * dispersion(k, pc) / pc.c;
    for (int a = 0; a < g.dim(); ++a) acc[a + 1] += w * k[a];
  }
  FourVector p{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i)
    p[i] = pc.hbar * static_cast<double>(acc[i]) * g.k_measure();
  return p;
}

/// Same momentum through the bilinear route, P^mu = <psi| i hbar d^mu |psi>.
inline FourVector noether_momentum_braket(const FieldState& psi) {
  const double hbar = psi.constants().hbar;
  FourVector p{0.0, 0.0, 0.0, 0.0};
  p[0] = braket_kg(psi, OperatorSpec::time_derivative().scaled(cplx(0.0, hbar))).real();
  for (int a = 0; a < psi.grid().dim(); ++a)
    p[a + 1] = braket_kg(psi, OperatorSpec::momentum(a, hbar)).real();
  return p;
}

/// Noether angular momentum J_i = <psi| (x cross pi)_i |psi>, about the
/// coordinate origin, 3D only. Uses the relativistic bilinear when the state
/// carries time derivatives and the low-energy form otherwise.
inline std::array<double, 3> angular_momentum(const FieldState& psi) {
  if (psi.grid().dim() != 3)
    throw Error(ErrorCode::DimensionMismatch, "angular momentum requires a 3D grid");
  const double hbar = psi.constants().hbar;
  std::array<double, 3> j{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    OperatorSpec L = angular_momentum_operator(i, hbar);
    j[i] = psi.has_dt() ? braket_kg(psi, L).real()
                        : (braket_nr(psi, L) / psi.norm_sq()).real();
  }
  return j;
}

/// Position expectation in the low-energy form Int psi* x psi / Int |psi|^2.
/// The relativistic notion of position is only approximate, so this is the
/// documented convention. Requires a localized state.
inline std::array<double, 3> position_expectation(const FieldState& psi) {
  if (!psi.localized())
    throw Error(ErrorCode::Delocalized,
                "field does not decay below 1e-12 inside the boundary margin");
  const double norm = psi.norm_sq();
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < psi.grid().dim(); ++a)
    x[a] = braket_nr(psi, OperatorSpec::coordinate(a)).real() / norm;
  return x;
}

/// Relative residual of the canonical commutator on a test state:
/// ||(x_i pi_j - pi_j x_i) psi - i hbar delta_ij psi||_2 / ||psi||_2.
inline double commutator_check(const FieldState& psi, int i, int j) {
  const double hbar = psi.constants().hbar;
  OperatorSpec xi = OperatorSpec::coordinate(i);
  OperatorSpec pj = OperatorSpec::momentum(j, hbar);
  FieldState lhs = xi.apply(pj.apply(psi));
  FieldState rhs = pj.apply(xi.apply(psi));
  const cplx expected = (i == j) ? cplx(0.0, hbar) : cplx(0.0, 0.0);
  long double num = 0.0L, den = 0.0L;
  const cvec& v = psi.values();
  for (std::size_t f = 0; f < v.size(); ++f) {
    cplx r = lhs.values()[f] - rhs.values()[f] - expected * v[f];
    num += std::norm(r);
    den += std::norm(v[f]);
  }
  return std::sqrt(static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace qlab
