#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "qlab/noether.hpp"
#include "qlab/packet.hpp"

using namespace qlab;

namespace {

MomentumPacket gaussian_packet(const KGrid& g, std::array<double, 3> k0, double dk,
                               PhysicalConstants pc = {}) {
  return MomentumPacket::normalize(g, gaussian_amplitude(g, k0, dk), pc);
}

// x-space Gaussian with a momentum ramp, assembled directly from values.
FieldState xspace_gaussian(const KGrid& g, double sigma, double k0) {
  cvec v(g.size());
  for (int m = 0; m < g.points(); ++m) {
    double x = g.x_coord(0, m);
    v[m] = std::exp(-x * x / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * x);
  }
  return FieldState(g, {}, std::move(v), 0.0);
}

}  // namespace

TEST_CASE("<psi|psi> = 1 for normalized packets, including offset and 3D grids") {
  {
    MomentumPacket p = gaussian_packet(KGrid(1, 512, {0.01}), {0.4, 0.0, 0.0}, 0.05);
    CHECK(std::abs(braket_kg(synthesize(p, 0.0), OperatorSpec::identity()) - 1.0) < 1e-8);
  }
  {
    KGrid g(1, 256, {4.0 / 256}, {5.0, 0.0, 0.0});
    MomentumPacket p = gaussian_packet(g, {5.0, 0.0, 0.0}, 0.05);
    CHECK(std::abs(braket_kg(synthesize(p, 0.3), OperatorSpec::identity()) - 1.0) < 1e-8);
  }
  {
    MomentumPacket p = gaussian_packet(KGrid(3, 16, {0.5}), {0.0, 0.0, 0.0}, 0.15);
    CHECK(std::abs(braket_kg(synthesize(p, 0.0), OperatorSpec::identity()) - 1.0) < 1e-8);
  }
}

TEST_CASE("i hbar d^0 on a single-mode plane wave returns hbar k^0") {
  PhysicalConstants pc{1.3, 0.8, 1.7, -1.0};
  KGrid g(1, 64, {0.1});
  cvec a(g.size(), 0.0);
  a[40] = 1.0;
  MomentumPacket p = MomentumPacket::normalize(g, a, pc);
  double k = g.k_coord(0, 40);
  double k0 = dispersion({k, 0.0, 0.0}, pc) / pc.c;
  OperatorSpec O = OperatorSpec::time_derivative().scaled(cplx(0.0, pc.hbar));
  cplx val = braket_kg(synthesize(p, 0.0), O);
  CHECK(std::abs(val - cplx(pc.hbar * k0, 0.0)) < 1e-8 * pc.hbar * k0);
}

TEST_CASE("braket identity agrees with the k-space sum (Parseval route)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  KGrid g(1, 256, {0.04});
  cvec a = gaussian_amplitude(g, {0.3, 0.0, 0.0}, 0.2);
  for (auto& v : a) v *= cplx(1.0 + 0.3 * u(rng), 0.3 * u(rng));  // roughen the profile
  MomentumPacket p = MomentumPacket::normalize(g, a, {});
  double ksum = p.norm_sq();  // sum |alpha|^2 dk
  cplx x = braket_kg(synthesize(p, 0.1), OperatorSpec::identity());
  CHECK(std::abs(x - ksum) < 1e-8);
}

TEST_CASE("braket_nr basics: normalization, odd moment, momentum ramp") {
  KGrid g(1, 512, {0.02});
  FieldState psi = xspace_gaussian(g, 8.0, 0.6);
  double n = psi.norm_sq();
  CHECK(std::abs(braket_nr(psi, OperatorSpec::identity()).real() / n - 1.0) < 1e-10);
  CHECK(std::abs(braket_nr(psi, OperatorSpec::coordinate(0)).real() / n) < 1e-10);
  // analytic: <pi> = hbar k0 for a Gaussian times exp(i k0 x)
  cplx pi_exp = braket_nr(psi, OperatorSpec::momentum(0, 1.0));
  CHECK(std::abs(pi_exp.real() / n - 0.6) < 1e-8);
  CHECK(std::abs(pi_exp.imag()) < 1e-10);
}

TEST_CASE("noether charge equals hbar for every normalized packet") {
  PhysicalConstants pc1;
  PhysicalConstants pc2{0.7, 2.0, 1.1, 3.0};
  KGrid g(1, 512, {0.01});
  for (const PhysicalConstants& pc : {pc1, pc2}) {
    MomentumPacket p =
        MomentumPacket::normalize(g, gaussian_amplitude(g, {0.3, 0.0, 0.0}, 0.04), pc);
    CHECK(std::abs(noether_charge(p) - pc.hbar) < 1e-8 * pc.hbar);
  }
  // single-node plane wave
  KGrid gp(1, 64, {0.1});
  cvec a(gp.size(), 0.0);
  a[25] = 1.0;
  MomentumPacket pw = MomentumPacket::normalize(gp, a, pc1);
  CHECK(std::abs(noether_charge(pw) - pc1.hbar) < 1e-10);
}

TEST_CASE("charge is bilinear: doubling the field quadruples the integral") {
  MomentumPacket p = gaussian_packet(KGrid(1, 256, {0.02}), {0.2, 0.0, 0.0}, 0.06);
  FieldState psi = synthesize(p, 0.0);
  double q1 = noether_charge(psi);
  double q2 = noether_charge(psi.scaled(2.0));
  CHECK(q2 == Catch::Approx(4.0 * q1).epsilon(1e-12));
}

TEST_CASE("plane-wave momentum is the de Broglie relation") {
  PhysicalConstants pc;
  KGrid g(1, 64, {0.1});
  cvec a(g.size(), 0.0);
  a[41] = 1.0;
  MomentumPacket p = MomentumPacket::normalize(g, a, pc);
  double k = g.k_coord(0, 41);
  FourVector P = noether_momentum(p);
  CHECK(P[1] == Catch::Approx(pc.hbar * k).epsilon(1e-14));
  CHECK(P[0] == Catch::Approx(pc.hbar * dispersion({k, 0.0, 0.0}, pc) / pc.c).epsilon(1e-14));
}

TEST_CASE("symmetric packet at k0 = 0 has vanishing spatial momentum") {
  MomentumPacket p = gaussian_packet(KGrid(1, 256, {0.02}), {0.0, 0.0, 0.0}, 0.06);
  FourVector P = noether_momentum(p);
  CHECK(std::abs(P[1]) < 1e-12);
  CHECK(P[0] > 0.0);
}

TEST_CASE("narrow gaussian at k0 = 5 carries P1 = 5 hbar, checked two ways") {
  KGrid g(1, 256, {4.0 / 256}, {5.0, 0.0, 0.0});
  MomentumPacket p = gaussian_packet(g, {5.0, 0.0, 0.0}, 0.05);
  FourVector P = noether_momentum(p);
  CHECK(std::abs(P[1] - 5.0) < 1e-6);
  // independent quadrature for P^0
  double e = 0.0;
  for (std::size_t f = 0; f < p.alpha().size(); ++f)
    e += std::norm(p.alpha()[f]) * dispersion(g.k_vector(f), p.constants());
  e *= g.k_measure();
  CHECK(P[0] == Catch::Approx(e).epsilon(1e-12));
}

TEST_CASE("bilinear route reproduces the k-space momentum sum") {
  KGrid g(1, 512, {0.01});
  MomentumPacket p = gaussian_packet(g, {0.35, 0.0, 0.0}, 0.03);
  FieldState psi = synthesize(p, 0.25);
  FourVector Pk = noether_momentum(p);
  FourVector Pb = noether_momentum_braket(psi);
  CHECK(std::abs(Pb[0] - Pk[0]) < 1e-8);
  CHECK(std::abs(Pb[1] - Pk[1]) < 1e-8);
  CHECK(Pk[0] > 0.0);
}

TEST_CASE("all functionals are invariant under a global phase of alpha") {
  KGrid g(1, 256, {0.02});
  cvec a = gaussian_amplitude(g, {0.3, 0.0, 0.0}, 0.06);
  MomentumPacket p1 = MomentumPacket::normalize(g, a, {});
  for (auto& v : a) v *= std::polar(1.0, 2.13);
  MomentumPacket p2 = MomentumPacket::normalize(g, a, {});
  FourVector P1 = noether_momentum(p1), P2 = noether_momentum(p2);
  CHECK(std::abs(noether_charge(p1) - noether_charge(p2)) < 1e-12);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(P1[i] - P2[i]) < 1e-12);
}

TEST_CASE("momentum condition holds to second order in delta k") {
  // |P.P - m^2 c^2| / (m^2 c^2) <= 10 (hbar dk / m c)^2 across a sweep
  PhysicalConstants pc;
  for (double k0 : {0.0, 0.5, 2.0}) {
    for (double dk : {0.01, 0.02, 0.04, 0.08}) {
      KGrid g(1, 1024, {dk / 4.0}, {k0, 0.0, 0.0});
      MomentumPacket p = gaussian_packet(g, {k0, 0.0, 0.0}, dk);
      FourVector P = noether_momentum(p);
      double m2c2 = pc.m * pc.m * pc.c * pc.c;
      double rel = std::abs(minkowski_square(P) - m2c2) / m2c2;
      double budget = 10.0 * std::pow(pc.hbar * dk / (pc.m * pc.c), 2);
      CHECK(rel <= budget);
    }
  }
}

TEST_CASE("spherically symmetric packet carries no angular momentum") {
  KGrid g(3, 32, {0.5});
  MomentumPacket p = gaussian_packet(g, {0.0, 0.0, 0.0}, 0.5);
  auto J = angular_momentum(synthesize(p, 0.0));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(J[i]) < 1e-8);
}

TEST_CASE("unit azimuthal winding carries J_z = hbar") {
  KGrid g(3, 48, {0.5});
  const double dk = 0.9;
  cvec a(g.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    auto k = g.k_vector(f);
    double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    // (kx + i ky) * gaussian: an m = 1 azimuthal eigenstate, smooth at the poles
    a[f] = cplx(k[0], k[1]) * std::exp(-k2 / (4.0 * dk * dk));
  }
  MomentumPacket p = MomentumPacket::normalize(g, a, {});
  auto J = angular_momentum(synthesize(p, 0.0));
  CHECK(std::abs(J[2] - 1.0) < 1e-6);
  CHECK(std::abs(J[0]) < 1e-6);
  CHECK(std::abs(J[1]) < 1e-6);
}

TEST_CASE("real fields carry no angular momentum") {
  KGrid g(3, 16, {0.5});
  cvec v(g.size());
  for (std::size_t f = 0; f < v.size(); ++f) {
    auto x = g.x_vector(f);
    double r2 = x[0] * x[0] + 1.3 * x[1] * x[1] + 0.7 * x[2] * x[2];
    v[f] = std::exp(-r2);
  }
  FieldState psi(g, {}, std::move(v), 0.0);
  auto J = angular_momentum(psi);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(J[i]) < 1e-10);
}

TEST_CASE("angular momentum rejects 1D states") {
  MomentumPacket p = gaussian_packet(KGrid(1, 128, {0.05}), {0.0, 0.0, 0.0}, 0.15);
  CHECK_THROWS_AS(angular_momentum(synthesize(p, 0.0)), Error);
}

TEST_CASE("position expectation: centered, then shifted by a phase ramp") {
  KGrid g(1, 512, {0.02});
  MomentumPacket p = gaussian_packet(g, {0.3, 0.0, 0.0}, 0.08);
  auto x0 = position_expectation(synthesize(p, 0.0));
  CHECK(std::abs(x0[0]) < 1e-10);
  const double shift = 7.25;  // not a grid multiple
  auto xs = position_expectation(synthesize(p.translated({shift, 0.0, 0.0}), 0.0));
  CHECK(std::abs(xs[0] - shift) < 1e-8);
}

TEST_CASE("position expectation refuses delocalized states") {
  KGrid g(1, 64, {0.1});
  cvec a(g.size(), 0.0);
  a[40] = 1.0;  // plane wave
  MomentumPacket p = MomentumPacket::normalize(g, a, {});
  CHECK_THROWS_AS(position_expectation(synthesize(p, 0.0)), Error);
}

TEST_CASE("canonical commutator residuals") {
  KGrid g1(1, 512, {0.02});
  FieldState psi = xspace_gaussian(g1, 12.0, 0.3);
  CHECK(commutator_check(psi, 0, 0) < 1e-8);

  KGrid g3(3, 16, {0.5});
  cvec v(g3.size());
  for (std::size_t f = 0; f < v.size(); ++f) {
    auto x = g3.x_vector(f);
    v[f] = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * 2.0);
  }
  FieldState psi3(g3, {}, std::move(v), 0.0);
  CHECK(commutator_check(psi3, 0, 1) < 1e-10);
}

TEST_CASE("commutator residual grows monotonically as resolution degrades") {
  KGrid g(1, 256, {0.05});
  double prev = 0.0;
  bool first = true;
  for (double sigma_in_cells : {6.0, 1.2, 0.6}) {
    FieldState psi = xspace_gaussian(g, sigma_in_cells * g.x_spacing(0), 0.0);
    double r = commutator_check(psi, 0, 0);
    if (!first) CHECK(r > prev);
    prev = r;
    first = false;
  }
}

TEST_CASE("operator chains are linear") {
  KGrid g(1, 256, {0.05});
  FieldState psi1 = xspace_gaussian(g, 6.0, 0.4);
  FieldState psi2 = xspace_gaussian(g, 4.0, -0.7);
  const cplx za(0.8, -0.3), zb(-1.1, 0.5);

  std::vector<OperatorSpec> ops = {
      OperatorSpec::coordinate(0).after(OperatorSpec::momentum(0, 1.0)),
      OperatorSpec::momentum(0, 1.0) + OperatorSpec::coordinate(0).scaled(cplx(0.0, 2.0)),
      OperatorSpec::partial(0).after(OperatorSpec::partial(0)).scaled(-0.5),
  };
  for (const auto& O : ops) {
    FieldState combo = psi1.scaled(za);
    combo += psi2.scaled(zb);
    FieldState lhs = O.apply(combo);
    FieldState rhs = O.apply(psi1).scaled(za);
    rhs += O.apply(psi2).scaled(zb);
    double worst = 0.0;
    for (std::size_t f = 0; f < lhs.values().size(); ++f)
      worst = std::max(worst, std::abs(lhs.values()[f] - rhs.values()[f]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("time-derivative operators demand jet data") {
  KGrid g(1, 128, {0.05});
  FieldState bare = xspace_gaussian(g, 5.0, 0.0);  // no jet
  CHECK_THROWS_AS(braket_kg(bare, OperatorSpec::identity()), Error);
  MomentumPacket p = gaussian_packet(g, {0.0, 0.0, 0.0}, 0.15);
  FieldState full = synthesize(p, 0.0);
  // two time derivatives exhaust the jet
  OperatorSpec dd = OperatorSpec::time_derivative().after(OperatorSpec::time_derivative());
  CHECK_THROWS_AS(braket_kg(full, dd), Error);
  CHECK_NOTHROW(braket_kg(full, OperatorSpec::time_derivative()));
}
