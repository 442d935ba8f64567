#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qlab/gauge.hpp"
#include "qlab/noether.hpp"
#include "qlab/packet.hpp"
#include "qlab/stats.hpp"

namespace qlab {

/// Second-order-in-time state for the wave equation: psi and its time
/// derivative. Initialization from a packet makes psi_dot the exact spectral
/// -i omega action on the modes.
struct KGState {
  KGrid grid;
  PhysicalConstants consts;
  cvec psi;
  cvec psi_dot;  // d psi / dt
  double t = 0.0;

  static KGState from_packet(const MomentumPacket& packet, double t0 = 0.0) {
    FieldState f = synthesize(packet, t0);
    return {f.grid(), f.constants(), f.values(), f.values_dt(), t0};
  }

  FieldState to_field() const { return FieldState(grid, consts, psi, psi_dot, t); }
};

/// Time-series record of an evolution run. Drifts are measured against the
/// first sample.
struct EvolutionReport {
  std::vector<double> times;
  std::vector<double> norm;             // sum |psi|^2 dx^d
  std::vector<double> charge;           // covariant KG charge, or q * norm
  std::vector<FourVector> momentum;     // monitored momentum-like functionals
  std::vector<double> l2_discrepancy;   // filled by the low-energy comparison
  double dt = 0.0;
  long steps = 0;
};

/// Stability bound for the explicit wave stepper on this grid.
inline double kg_stability_dt_max(const KGrid& grid, const PhysicalConstants& pc) {
  double om_max = dispersion({grid.k_max_norm(), 0.0, 0.0}, pc);
  return 0.5 / om_max;
}

inline double kg_default_dt(const KGrid& grid, const PhysicalConstants& pc) {
  double om_max = dispersion({grid.k_max_norm(), 0.0, 0.0}, pc);
  return 0.1 / om_max;
}

/// Covariant charge of a wave state, Int j^0_D dx^d. Reduces to the free
/// charge when phi = 0.
inline double kg_covariant_charge(const KGState& s, const EMPotential& em) {
  const double gam = s.consts.gamma();
  const std::vector<double>& phi = em.phi();
  long double acc = 0.0L;
  for (std::size_t f = 0; f < s.psi.size(); ++f)
    acc += std::imag(std::conj(s.psi[f]) * s.psi_dot[f]) + gam * phi[f] * std::norm(s.psi[f]);
  return -2.0 * s.consts.hbar / s.consts.c * static_cast<double>(acc) * s.grid.x_measure();
}

/// Exact spectral evolution of a free packet; no time-stepping error.
inline FieldState evolve_free_kg(const MomentumPacket& packet, double t) {
  return synthesize(packet, t);
}

namespace detail {

// acceleration without the first-order term: c^2 (lap - mu^2) psi + (gamma phi)^2 psi
inline cvec kg_acceleration(const KGState& s, const std::vector<double>& gphi) {
  cvec acc = spectral_laplacian(s.grid, s.psi);
  const double c2 = s.consts.c * s.consts.c;
  const double mu2 = s.consts.mu() * s.consts.mu();
  for (std::size_t f = 0; f < acc.size(); ++f)
    acc[f] = c2 * (acc[f] - mu2 * s.psi[f]) + gphi[f] * gphi[f] * s.psi[f];
  return acc;
}

// Cayley half-kick: v <- [(1 - i g h) v + h a] / (1 + i g h); exactly invertible
// by the same kick with h -> -h, which is what makes the stepper reversible.
inline void kg_half_kick(cvec& v, const cvec& a, const std::vector<double>& gphi, double h) {
  for (std::size_t f = 0; f < v.size(); ++f) {
    cplx g(0.0, gphi[f] * h);
    v[f] = ((1.0 - g) * v[f] + h * a[f]) / (1.0 + g);
  }
}

}  // namespace detail

/// Leapfrog for the minimally coupled wave equation with a static scalar
/// potential (A = 0 in this version): expanding D_0 D^0 with A_0 = phi / c,
///   psi_dd = c^2 (lap - mu^2) psi + (gamma phi)^2 psi - 2 i gamma phi psi_dot.
/// The psi_dot cross term enters through a Cayley midpoint kick, keeping the
/// scheme second order and exactly time-reversible.
inline KGState evolve_kg_coupled(KGState state, const EMPotential& em, double dt,
                                 long steps, EvolutionReport* report = nullptr,
                                 long sample_every = 0) {
  if (!state.grid.same_layout(em.grid()))
    throw Error(ErrorCode::GridMismatch, "state and potential grids differ");
  if (!em.a_is_zero())
    throw Error(ErrorCode::NonzeroVectorPotential,
                "coupled wave evolution supports scalar potentials only");
  double bound = kg_stability_dt_max(state.grid, state.consts);
  if (std::abs(dt) > bound)
    throw Error(ErrorCode::UnstableStep, "dt exceeds the stability bound 0.5/omega_max");

  const double gam = state.consts.gamma();
  std::vector<double> gphi(em.phi().size());
  for (std::size_t f = 0; f < gphi.size(); ++f) gphi[f] = gam * em.phi()[f];

  auto sample = [&](long step_index) {
    if (!report) return;
    if (sample_every <= 0) return;
    if (step_index % sample_every != 0 && step_index != steps) return;
    report->times.push_back(state.t);
    FieldState f = state.to_field();
    report->norm.push_back(f.norm_sq());
    report->charge.push_back(kg_covariant_charge(state, em));
    FourVector p{0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < state.grid.dim(); ++a)
      p[a + 1] = braket_kg(f, OperatorSpec::momentum(a, state.consts.hbar)).real();
    report->momentum.push_back(p);
  };

  if (report) {
    report->dt = dt;
    report->steps = steps;
  }
  const double h = 0.5 * dt;
  cvec acc = detail::kg_acceleration(state, gphi);
  sample(0);
  for (long s = 0; s < steps; ++s) {
    detail::kg_half_kick(state.psi_dot, acc, gphi, h);
    for (std::size_t f = 0; f < state.psi.size(); ++f) state.psi[f] += dt * state.psi_dot[f];
    state.t += dt;
    acc = detail::kg_acceleration(state, gphi);
    detail::kg_half_kick(state.psi_dot, acc, gphi, h);
    sample(s + 1);
  }
  return state;
}

/// Strang split-step for the minimally coupled low-energy equation
///   i hbar dpsi/dt = [ (1/2m) (hbar k - q A)^2 + q phi ] psi
/// with phi arbitrary smooth and A restricted to a spatially uniform vector.
/// Half potential phase, full kinetic phase in k-space, half potential phase;
/// the norm is preserved to machine precision by construction.
inline FieldState evolve_schrodinger(FieldState psi, const EMPotential& em, double dt,
                                     long steps, EvolutionReport* report = nullptr,
                                     long sample_every = 0) {
  if (!psi.grid().same_layout(em.grid()))
    throw Error(ErrorCode::GridMismatch, "state and potential grids differ");
  std::array<double, 3> A{0.0, 0.0, 0.0};
  if (!em.a_is_uniform(&A))
    throw Error(ErrorCode::NonuniformVectorPotential,
                "split-step supports uniform vector potentials only");

  const KGrid& g = psi.grid();
  const PhysicalConstants& pc = psi.constants();
  const double q = pc.q, hbar = pc.hbar, m = pc.m;

  // phase factors are constant through the run
  cvec half_pot(g.size()), kin(g.size());
  for (std::size_t f = 0; f < g.size(); ++f)
    half_pot[f] = std::polar(1.0, -q * em.phi()[f] * dt / (2.0 * hbar));
  for (std::size_t f = 0; f < g.size(); ++f) {
    auto k = g.k_vector(f);
    double kin2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      double p = hbar * k[a] - q * A[a];
      kin2 += p * p;
    }
    kin[f] = std::polar(1.0, -kin2 * dt / (2.0 * m * hbar));
  }

  cvec v = psi.values();
  cvec modes(v.size());
  double t = psi.time();

  auto sample = [&](long step_index) {
    if (!report || sample_every <= 0) return;
    if (step_index % sample_every != 0 && step_index != steps) return;
    FieldState s(g, pc, v, t);
    report->times.push_back(t);
    double n = s.norm_sq();
    report->norm.push_back(n);
    report->charge.push_back(q * n);
    FourVector p{0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a)
      p[a + 1] = braket_nr(s, OperatorSpec::momentum(a, hbar)).real();
    report->momentum.push_back(p);
  };

  if (report) {
    report->dt = dt;
    report->steps = steps;
  }
  sample(0);
  for (long s = 0; s < steps; ++s) {
    for (std::size_t f = 0; f < v.size(); ++f) v[f] *= half_pot[f];
    analyze_modes(g, v, modes);
    for (std::size_t f = 0; f < modes.size(); ++f) modes[f] *= kin[f];
    synth_modes(g, modes, v);
    for (std::size_t f = 0; f < v.size(); ++f) v[f] *= half_pot[f];
    t += dt;
    sample(s + 1);
  }
  return FieldState(g, pc, std::move(v), t);
}

/// Strip the rest-mass phase: psi_S = e^{+i m c^2 t / hbar} psi. The result is
/// directly comparable with low-energy evolution.
inline FieldState reduce_nonrelativistic(const FieldState& kg) {
  const PhysicalConstants& pc = kg.constants();
  const double omega_rest = pc.m * pc.c * pc.c / pc.hbar;
  const cplx phase = std::polar(1.0, omega_rest * kg.time());
  cvec v = kg.values();
  for (cplx& z : v) z *= phase;
  if (!kg.has_dt()) return FieldState(kg.grid(), pc, std::move(v), kg.time());
  cvec vdt = kg.values_dt();
  for (std::size_t f = 0; f < vdt.size(); ++f)
    vdt[f] = phase * (vdt[f] + cplx(0.0, omega_rest) * kg.values()[f]);
  return FieldState(kg.grid(), pc, std::move(v), std::move(vdt), kg.time());
}

inline FieldState reduce_nonrelativistic(const KGState& kg) {
  return reduce_nonrelativistic(kg.to_field());
}

/// L2 distance between unit-normalized fields after the unobservable global
/// phase is optimized away: sqrt(2 - 2 |<a,b>|).
inline double phase_aligned_l2(const cvec& a, const cvec& b) {
  long double na = 0.0L, nb = 0.0L;
  long double ore = 0.0L, oim = 0.0L;
  for (std::size_t f = 0; f < a.size(); ++f) {
    na += std::norm(a[f]);
    nb += std::norm(b[f]);
    cplx o = std::conj(a[f]) * b[f];
    ore += o.real();
    oim += o.imag();
  }
  double overlap = std::hypot(static_cast<double>(ore), static_cast<double>(oim)) /
                   std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
}

struct CompareOptions {
  int samples = 32;
  double dt = 0.0;          // wave-equation step; 0 selects the default
  double beta_max = 0.3;    // nonrelativistic gate on hbar |k0| / (m c)
};

/// Run the wave equation and the low-energy equation from the same initial
/// data and report the phase-aligned L2 discrepancy of the reduced fields over
/// time. With phi = 0 the wave side uses the exact spectral propagator (it is
/// the same operation as evolve_free_kg); a potential switches it to the
/// leapfrog stepper.
inline EvolutionReport compare_low_energy(const MomentumPacket& packet,
                                          const EMPotential& em, double horizon,
                                          CompareOptions opt = {}) {
  const PhysicalConstants& pc = packet.constants();
  auto kbar = packet.mean_k();
  double kmag = std::sqrt(kbar[0] * kbar[0] + kbar[1] * kbar[1] + kbar[2] * kbar[2]);
  if (pc.hbar * kmag / (pc.m * pc.c) > opt.beta_max)
    throw Error(ErrorCode::TooRelativistic,
                "packet mean momentum exceeds the nonrelativistic gate");
  if (!em.a_is_zero())
    throw Error(ErrorCode::NonzeroVectorPotential,
                "low-energy comparison couples through phi only");

  const bool free_case = em.phi_is_zero();
  const KGrid& g = packet.grid();
  EvolutionReport rep;
  const int samples = std::max(2, opt.samples);
  const double sample_dt = horizon / samples;

  // low-energy side: split-step from the same initial data
  FieldState schro = synthesize(packet, 0.0);
  cvec schro_v = schro.values();

  KGState kg = KGState::from_packet(packet, 0.0);
  double kg_dt = opt.dt > 0.0 ? opt.dt : kg_default_dt(g, pc);
  long kg_steps_per_sample = free_case ? 0 : std::max(1L, std::lround(sample_dt / kg_dt));
  // split-step is exact for phi = 0 at any dt; with a potential match the wave dt
  long schro_steps_per_sample = free_case ? 1 : kg_steps_per_sample;

  rep.dt = free_case ? sample_dt : kg_dt;
  rep.steps = free_case ? samples : kg_steps_per_sample * samples;

  for (int s = 0; s <= samples; ++s) {
    double t = s * sample_dt;
    if (s > 0) {
      FieldState stepped = evolve_schrodinger(
          FieldState(g, pc, std::move(schro_v), (s - 1) * sample_dt), em,
          sample_dt / schro_steps_per_sample, schro_steps_per_sample);
      schro_v = stepped.values();
      if (!free_case)
        kg = evolve_kg_coupled(std::move(kg), em, sample_dt / kg_steps_per_sample,
                               kg_steps_per_sample);
    }
    FieldState reduced = free_case
                             ? reduce_nonrelativistic(evolve_free_kg(packet, t))
                             : reduce_nonrelativistic(kg);
    rep.times.push_back(t);
    rep.l2_discrepancy.push_back(phase_aligned_l2(schro_v, reduced.values()));
    FieldState snap(g, pc, schro_v, t);
    rep.norm.push_back(snap.norm_sq());
    rep.charge.push_back(pc.q * rep.norm.back());
    rep.momentum.push_back(FourVector{0.0, 0.0, 0.0, 0.0});
  }
  return rep;
}

struct SweepPoint {
  double beta;
  double final_l2;
  double horizon;
};

struct LowEnergySweepResult {
  std::vector<SweepPoint> points;
  double exponent;  // fitted log-log slope of final_l2 against beta
};

/// Free-field discrepancy scaling over a v/c sweep. Per point: a Gaussian
/// packet with k0 = beta m c / hbar and delta_k = k0 / 10, centered so it
/// traverses `travel_widths` position widths by the end of the run.
inline LowEnergySweepResult low_energy_scaling(const PhysicalConstants& pc,
                                               const std::vector<double>& betas,
                                               double travel_widths = 10.0,
                                               int points_per_axis = 1024) {
  LowEnergySweepResult out;
  for (double beta : betas) {
    const double k0 = beta * pc.m * pc.c / pc.hbar;
    const double dk = k0 / 10.0;
    const double sigma_x = 1.0 / (2.0 * dk);
    const double travel = travel_widths * sigma_x;
    const double domain = travel + 24.0 * sigma_x;
    KGrid g(1, points_per_axis, {2.0 * std::numbers::pi / domain}, {0.0, 0.0, 0.0});
    MomentumPacket p =
        MomentumPacket::normalize(g, gaussian_amplitude(g, {k0, 0.0, 0.0}, dk), pc)
            .translated({-0.5 * travel, 0.0, 0.0});
    const double vg = pc.c * pc.c * pc.hbar * k0 / dispersion({k0, 0.0, 0.0}, pc) ;
    const double horizon = travel / vg;
    EvolutionReport rep = compare_low_energy(p, EMPotential::zero(g), horizon);
    out.points.push_back({beta, rep.l2_discrepancy.back(), horizon});
  }
  if (out.points.size() >= 2) {
    std::vector<double> b, d;
    for (const auto& pt : out.points) {
      b.push_back(pt.beta);
      d.push_back(pt.final_l2);
    }
    out.exponent = stats::fitted_order(b, d);
  } else {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace qlab
