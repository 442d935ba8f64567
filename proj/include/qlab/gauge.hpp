#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qlab/noether.hpp"
#include "qlab/operators.hpp"
#include "qlab/packet.hpp"

namespace qlab {

/// Flat-top window built from error functions: machine-exactly 1 for
/// |u| <~ r0 - 5 tau, zero at the boundary, with Gaussian-decay spectral
/// content. Makes linear-growth potentials periodic-compatible at spectral
/// accuracy; a polynomial taper would cap the accuracy at a few digits.
struct WindowSpec {
  double r0_frac = 0.62;   // flat-top edge as a fraction of the half extent
  double tau_cells = 3.3;  // taper scale in grid cells
};

inline double erf_window(double u, double r0, double tau) {
  return 0.5 * (std::erf((u + r0) / tau) - std::erf((u - r0) / tau));
}

/// Product window over the axes of the position grid.
inline double grid_window(const KGrid& g, const std::array<double, 3>& x,
                          const WindowSpec& spec) {
  double w = 1.0;
  for (int a = 0; a < g.dim(); ++a) {
    double half = g.x_half_extent(a);
    double tau = spec.tau_cells * g.x_spacing(a);
    double r0 = spec.r0_frac * half;
    if (half - r0 < 5.0 * tau)
      throw Error(ErrorCode::ConfigInvalid, "grid too coarse for a windowed preset");
    w *= erf_window(x[a], r0, tau);
  }
  return w;
}

/// Radius of the region where the window is 1 to machine precision.
inline double window_flat_radius(const KGrid& g, const WindowSpec& spec = {}) {
  double r = 1e300;
  for (int a = 0; a < g.dim(); ++a)
    r = std::min(r, spec.r0_frac * g.x_half_extent(a) - 5.0 * spec.tau_cells * g.x_spacing(a));
  return r;
}

/// Static electromagnetic potential sampled on the position grid: scalar phi
/// and vector A per axis (A_0 = phi / c). Construction rejects fields whose
/// spectral content above 0.8 Nyquist carries more than 1e-8 of total power.
class EMPotential {
 public:
  EMPotential(KGrid grid, std::vector<double> phi,
              std::array<std::vector<double>, 3> A)
      : grid_(std::move(grid)), phi_(std::move(phi)), A_(std::move(A)) {
    if (phi_.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "phi size does not match grid");
    for (int a = 0; a < grid_.dim(); ++a)
      if (A_[a].size() != grid_.size())
        throw Error(ErrorCode::GridMismatch, "A size does not match grid");
    check_smooth(phi_, "phi");
    for (int a = 0; a < grid_.dim(); ++a) check_smooth(A_[a], "A");
  }

  static EMPotential zero(const KGrid& grid) {
    std::array<std::vector<double>, 3> A;
    for (int a = 0; a < grid.dim(); ++a) A[a].assign(grid.size(), 0.0);
    return EMPotential(grid, std::vector<double>(grid.size(), 0.0), std::move(A));
  }

  /// phi = -E.x, windowed to the interior so the sawtooth never appears.
  static EMPotential uniform_e(const KGrid& grid, const std::array<double, 3>& E,
                               const WindowSpec& win = {}) {
    EMPotential em = zero(grid);
    for (std::size_t f = 0; f < grid.size(); ++f) {
      auto x = grid.x_vector(f);
      double v = 0.0;
      for (int a = 0; a < grid.dim(); ++a) v -= E[a] * x[a];
      em.phi_[f] = v * grid_window(grid, x, win);
    }
    em.revalidate();
    return em;
  }

  /// Uniform magnetic field in the symmetric gauge, windowed to the interior. 3D.
  static EMPotential uniform_b(const KGrid& grid, const std::array<double, 3>& B,
                               const WindowSpec& win = {}) {
    if (grid.dim() != 3)
      throw Error(ErrorCode::DimensionMismatch, "uniform-b preset is 3D");
    EMPotential em = zero(grid);
    for (std::size_t f = 0; f < grid.size(); ++f) {
      auto x = grid.x_vector(f);
      double w = grid_window(grid, x, win);
      // A = (1/2) B x r
      em.A_[0][f] = 0.5 * (B[1] * x[2] - B[2] * x[1]) * w;
      em.A_[1][f] = 0.5 * (B[2] * x[0] - B[0] * x[2]) * w;
      em.A_[2][f] = 0.5 * (B[0] * x[1] - B[1] * x[0]) * w;
    }
    em.revalidate();
    return em;
  }

  /// q phi = (1/2) m omega_c^2 |x|^2 inside the window.
  static EMPotential harmonic(const KGrid& grid, double omega_c,
                              const PhysicalConstants& pc, const WindowSpec& win = {}) {
    EMPotential em = zero(grid);
    const double coeff = 0.5 * pc.m * omega_c * omega_c / pc.q;
    for (std::size_t f = 0; f < grid.size(); ++f) {
      auto x = grid.x_vector(f);
      double r2 = 0.0;
      for (int a = 0; a < grid.dim(); ++a) r2 += x[a] * x[a];
      em.phi_[f] = coeff * r2 * grid_window(grid, x, win);
    }
    em.revalidate();
    return em;
  }

  /// Spatially uniform vector potential (trivially smooth).
  static EMPotential uniform_a(const KGrid& grid, const std::array<double, 3>& A) {
    EMPotential em = zero(grid);
    for (int a = 0; a < grid.dim(); ++a)
      em.A_[a].assign(grid.size(), A[a]);
    return em;
  }

  const KGrid& grid() const { return grid_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& A(int axis) const { return A_[axis]; }
  bool is_static() const { return true; }

  bool phi_is_zero() const {
    for (double v : phi_)
      if (v != 0.0) return false;
    return true;
  }
  bool a_is_zero() const {
    for (int a = 0; a < grid_.dim(); ++a)
      for (double v : A_[a])
        if (v != 0.0) return false;
    return true;
  }
  bool is_zero() const { return phi_is_zero() && a_is_zero(); }

  /// True if every A component is constant over the grid; fills the values.
  bool a_is_uniform(std::array<double, 3>* value = nullptr) const {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int a = 0; a < grid_.dim(); ++a) {
      v[a] = A_[a][0];
      for (double x : A_[a])
        if (x != v[a]) return false;
    }
    if (value) *value = v;
    return true;
  }

  /// A with the gradient of lambda added (the gauge image of this potential).
  EMPotential shifted_by_gradient(const std::vector<double>& lambda) const {
    EMPotential out = *this;
    for (int a = 0; a < grid_.dim(); ++a) {
      std::vector<double> dl = spectral_derivative_real(grid_, lambda, a);
      for (std::size_t f = 0; f < out.A_[a].size(); ++f) out.A_[a][f] += dl[f];
    }
    return out;
  }

 private:
  void check_smooth(const std::vector<double>& v, const char* what) const {
    if (high_mode_power_fraction(grid_, v, 0.8) >= 1e-8)
      throw Error(ErrorCode::RoughField,
                  std::string(what) + " carries more than 1e-8 power above 0.8 Nyquist");
  }
  void revalidate() const {
    check_smooth(phi_, "phi");
    for (int a = 0; a < grid_.dim(); ++a) check_smooth(A_[a], "A");
  }

  KGrid grid_;
  std::vector<double> phi_;
  std::array<std::vector<double>, 3> A_;
};

/// Antisymmetric field-strength tensor over d+1 spacetime indices per node.
/// Only mu < nu components are stored; the accessor supplies the sign, so
/// antisymmetry is exact by layout.
class CurvatureTensor {
 public:
  CurvatureTensor(KGrid grid, int spacetime_dim)
      : grid_(std::move(grid)), sdim_(spacetime_dim) {
    comps_.resize(static_cast<std::size_t>(sdim_ * (sdim_ - 1) / 2),
                  std::vector<double>(grid_.size(), 0.0));
  }

  const KGrid& grid() const { return grid_; }
  int spacetime_dim() const { return sdim_; }

  double operator()(int mu, int nu, std::size_t f) const {
    if (mu == nu) return 0.0;
    return mu < nu ? comps_[slot(mu, nu)][f] : -comps_[slot(nu, mu)][f];
  }

  std::vector<double>& component(int mu, int nu) {
    if (mu >= nu) throw Error(ErrorCode::ConfigInvalid, "store only mu < nu components");
    return comps_[slot(mu, nu)];
  }
  const std::vector<double>& component(int mu, int nu) const {
    if (mu >= nu) throw Error(ErrorCode::ConfigInvalid, "store only mu < nu components");
    return comps_[slot(mu, nu)];
  }

 private:
  std::size_t slot(int mu, int nu) const {
    // packed upper triangle, rows mu = 0..sdim-2
    return static_cast<std::size_t>(mu * sdim_ - mu * (mu + 1) / 2 + (nu - mu - 1));
  }

  KGrid grid_;
  int sdim_;
  std::vector<std::vector<double>> comps_;
};

/// F_{mu nu} = d_mu A_nu - d_nu A_mu with spectral derivatives. Static
/// potentials give F_{0i} = -d_i phi / c and the usual magnetic block.
inline CurvatureTensor curvature(const EMPotential& em, const PhysicalConstants& pc) {
  const KGrid& g = em.grid();
  const int d = g.dim();
  CurvatureTensor F(g, d + 1);
  const double inv_c = 1.0 / pc.c;
  for (int i = 0; i < d; ++i) {
    // F_{0i} = d_0 A_i - d_i A_0 = -d_i (phi/c) for static potentials
    std::vector<double> dphi = spectral_derivative_real(g, em.phi(), i);
    auto& f0i = F.component(0, i + 1);
    for (std::size_t f = 0; f < f0i.size(); ++f) f0i[f] = -dphi[f] * inv_c;
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      std::vector<double> diAj = spectral_derivative_real(g, em.A(j), i);
      std::vector<double> djAi = spectral_derivative_real(g, em.A(i), j);
      auto& fij = F.component(i + 1, j + 1);
      for (std::size_t f = 0; f < fij.size(); ++f) fij[f] = diAj[f] - djAi[f];
    }
  return F;
}

namespace detail {
inline int levi_civita4(int a, int b, int c, int d) {
  int perm[4] = {a, b, c, d};
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (perm[i] == perm[j]) return 0;
      if (perm[i] > perm[j]) {
        std::swap(perm[i], perm[j]);
        sign = -sign;
      }
    }
  return sign;
}
}  // namespace detail

/// Max-norm of eps^{alpha beta mu nu} d_beta F_{mu nu} over the grid. Static
/// fields carry no time derivatives, so beta = 0 terms drop. In 1D the identity
/// is trivial and the residual is zero.
inline double bianchi_residual(const CurvatureTensor& F) {
  const KGrid& g = F.grid();
  if (g.dim() == 1) return 0.0;
  if (F.spacetime_dim() != 4)
    throw Error(ErrorCode::DimensionMismatch, "bianchi check expects 3+1 dimensions");

  // cache spatial derivatives d_b F_{mu nu} for stored components
  std::vector<std::vector<double>> dF(3 * 6);
  int slot = 0;
  std::array<std::pair<int, int>, 6> pairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (int b = 1; b <= 3; ++b)
    for (auto [mu, nu] : pairs)
      dF[slot++] = spectral_derivative_real(g, F.component(mu, nu), b - 1);
  auto deriv = [&](int b, int mu, int nu) -> double* {
    int p = 0;
    for (int i = 0; i < 6; ++i)
      if (pairs[i].first == std::min(mu, nu) && pairs[i].second == std::max(mu, nu)) p = i;
    return dF[(b - 1) * 6 + p].data();
  };

  double worst = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    for (int alpha = 0; alpha < 4; ++alpha) {
      double acc = 0.0;
      for (int b = 1; b <= 3; ++b)
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) {
            if (mu == nu) continue;
            int eps = detail::levi_civita4(alpha, b, mu, nu);
            if (eps == 0) continue;
            double sign = (mu < nu) ? 1.0 : -1.0;
            acc += eps * sign * deriv(b, mu, nu)[f];
          }
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

/// Covariant derivative D_mu psi = d_mu psi + i (q/hbar) A_mu psi. Index 0 is
/// the x^0 direction: D_0 = (1/c) d_t + i (q/hbar) (phi/c).
inline FieldState covariant_derivative(const FieldState& psi, const EMPotential& em,
                                       int mu) {
  if (!psi.grid().same_layout(em.grid()))
    throw Error(ErrorCode::GridMismatch, "field and potential grids differ");
  const double gam = psi.constants().gamma();
  if (mu == 0) {
    FieldState d0 = psi.time_derivative_dx0();
    const double inv_c = 1.0 / psi.constants().c;
    const std::vector<double>& phi = em.phi();
    FieldState coupled =
        psi.mapped([&](std::size_t f) { return cplx(0.0, gam * phi[f] * inv_c); });
    d0 += coupled;
    return d0;
  }
  FieldState d = psi.derivative(mu - 1);
  const std::vector<double>& A = em.A(mu - 1);
  FieldState coupled = psi.mapped([&](std::size_t f) { return cplx(0.0, gam * A[f]); });
  d += coupled;
  return d;
}

/// Minimally coupled momentum <-i hbar D_i> / <1> in the low-energy form.
/// Gauge invariant by construction, unlike the bare <pi>.
inline std::array<double, 3> minimally_coupled_momentum(const FieldState& psi,
                                                        const EMPotential& em) {
  std::array<double, 3> p{0.0, 0.0, 0.0};
  const double hbar = psi.constants().hbar;
  const double norm = psi.norm_sq();
  for (int a = 0; a < psi.grid().dim(); ++a) {
    FieldState d = covariant_derivative(psi, em, a + 1);
    long double acc = 0.0L;
    for (std::size_t f = 0; f < d.values().size(); ++f)
      acc += std::imag(std::conj(psi.values()[f]) * d.values()[f]);
    // Re <psi| -i hbar D |psi> = hbar Im Int psi* D psi
    p[a] = hbar * static_cast<double>(acc) * psi.grid().x_measure() / norm;
  }
  return p;
}

/// Gauge transformation: psi -> e^{-i (q/hbar) lambda} psi, A -> A + grad lambda,
/// with static lambda so phi is untouched. This pairing makes D_mu transform
/// covariantly, which the tests verify directly.
inline std::pair<FieldState, EMPotential> gauge_transform(const FieldState& psi,
                                                          const EMPotential& em,
                                                          const std::vector<double>& lambda) {
  if (lambda.size() != psi.grid().size())
    throw Error(ErrorCode::GridMismatch, "lambda size does not match grid");
  if (high_mode_power_fraction(psi.grid(), lambda, 0.8) >= 1e-8)
    throw Error(ErrorCode::RoughLambda,
                "lambda carries more than 1e-8 power above 0.8 Nyquist");
  const double gam = psi.constants().gamma();
  FieldState psi2 =
      psi.mapped([&](std::size_t f) { return std::polar(1.0, -gam * lambda[f]); });
  return {std::move(psi2), em.shifted_by_gradient(lambda)};
}

/// Coupled Lagrangian density integrated over the grid at the state's instant:
/// S[A] = Int hbar [ |D_0 psi|^2 - sum_i |D_i psi|^2 - mu^2 |psi|^2 ] dx^d.
inline double lagrangian_action(const FieldState& psi, const EMPotential& em) {
  const PhysicalConstants& pc = psi.constants();
  const double mu2 = pc.mu() * pc.mu();
  const int d = psi.grid().dim();
  std::vector<FieldState> D;
  D.reserve(d + 1);
  for (int mu = 0; mu <= d; ++mu) D.push_back(covariant_derivative(psi, em, mu));
  long double acc = 0.0L;
  for (std::size_t f = 0; f < psi.values().size(); ++f) {
    long double v = std::norm(D[0].values()[f]);
    for (int i = 1; i <= d; ++i) v -= std::norm(D[i].values()[f]);
    v -= mu2 * std::norm(psi.values()[f]);
    acc += v;
  }
  return pc.hbar * static_cast<double>(acc) * psi.grid().x_measure();
}

/// Conserved current j^mu = i hbar (psi* d^mu psi - psi d^mu psi*) of the free
/// Lagrangian, evaluated node-wise. mu = 0 needs the jet.
inline std::vector<double> current_density(const FieldState& psi, int mu) {
  const double hbar = psi.constants().hbar;
  std::vector<double> j(psi.values().size());
  if (mu == 0) {
    const double inv_c = 1.0 / psi.constants().c;
    const cvec& v = psi.values();
    const cvec& vdt = psi.values_dt();
    for (std::size_t f = 0; f < j.size(); ++f)
      j[f] = -2.0 * hbar * inv_c * std::imag(std::conj(v[f]) * vdt[f]);
  } else {
    // d^i = -d_i
    FieldState dpsi = psi.derivative(mu - 1);
    const cvec& v = psi.values();
    for (std::size_t f = 0; f < j.size(); ++f)
      j[f] = 2.0 * hbar * std::imag(std::conj(v[f]) * dpsi.values()[f]);
  }
  return j;
}

struct BumpSpec {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 1.0;
};

inline std::vector<double> bump_profile(const KGrid& g, const BumpSpec& spec) {
  std::vector<double> b(g.size());
  const double inv = 1.0 / (2.0 * spec.width * spec.width);
  for (std::size_t f = 0; f < b.size(); ++f) {
    auto x = g.x_vector(f);
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      double d = x[a] - spec.center[a];
      r2 += d * d;
    }
    b[f] = std::exp(-r2 * inv);
  }
  return b;
}

struct CurrentIdentityResult {
  double central_difference;  // [S(+eps) - S(-eps)] / (2 eps)
  double current_overlap;     // -(q/hbar) Int bump j^mu dx^d
  double rel_error;           // |difference| / max(|overlap|, floor)
};

/// Central-difference check of dL_D/dA_mu at A = 0 against -(q/hbar) j^mu:
/// perturbs A_mu by +/- eps * bump, differences the integrated Lagrangian and
/// compares with the overlap integral of the bump against the current.
inline CurrentIdentityResult current_identity_check(
    const MomentumPacket& packet, int mu, double epsilon,
    const BumpSpec& bump_spec = {.center = {}, .width = 1.0}) {
  FieldState psi = synthesize(packet, 0.0);
  const KGrid& g = packet.grid();
  const PhysicalConstants& pc = packet.constants();
  std::vector<double> bump = bump_profile(g, bump_spec);

  auto perturbed = [&](double eps) {
    std::vector<double> phi(g.size(), 0.0);
    std::array<std::vector<double>, 3> A;
    for (int a = 0; a < g.dim(); ++a) A[a].assign(g.size(), 0.0);
    if (mu == 0) {
      // A_0 = phi / c, so perturbing A_0 by eps*bump means phi = c * eps * bump
      for (std::size_t f = 0; f < phi.size(); ++f) phi[f] = pc.c * eps * bump[f];
    } else {
      for (std::size_t f = 0; f < phi.size(); ++f) A[mu - 1][f] = eps * bump[f];
    }
    return EMPotential(g, std::move(phi), std::move(A));
  };

  double s_plus = lagrangian_action(psi, perturbed(+epsilon));
  double s_minus = lagrangian_action(psi, perturbed(-epsilon));
  double lhs = (s_plus - s_minus) / (2.0 * epsilon);

  std::vector<double> j = current_density(psi, mu);
  long double overlap = 0.0L;
  for (std::size_t f = 0; f < j.size(); ++f) overlap += bump[f] * j[f];
  double rhs = -pc.gamma() * static_cast<double>(overlap) * g.x_measure();

  double scale = std::max(std::abs(rhs), 1e-30);
  return {lhs, rhs, std::abs(lhs - rhs) / scale};
}

}  // namespace qlab
