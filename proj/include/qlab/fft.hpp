#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "qlab/grid.hpp"

namespace qlab {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

namespace detail {

/// Process-wide cache of FFTW plans keyed by (rank, n, sign). Plans are made
/// with FFTW_ESTIMATE | FFTW_UNALIGNED on scratch buffers so they can be
/// executed on any array pair via fftw_execute_dft. Plan creation is guarded
/// by a mutex; execution is reentrant.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine e;
    return e;
  }

  void transform(int rank, int n, const cplx* in, cplx* out, int sign) {
    fftw_plan plan = plan_for(rank, n, sign);
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  FftEngine() = default;
  ~FftEngine() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan plan_for(int rank, int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::tuple{rank, n, sign};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t total = 1;
    std::vector<int> dims(rank, n);
    for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(n);
    cvec a(total), b(total);
    fftw_plan plan = fftw_plan_dft(
        rank, dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(b.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

/// i^n for integer n, exact.
inline cplx unit_power_i(long n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace detail

/// Synthesis: out[m] = sum_j coeffs[j] * exp(i k_j . x_m) over the grid's own
/// wavenumbers k_j (offset included) and dual positions x_m. Exact inverse of
/// analyze_modes up to roundoff.
inline void synth_modes(const KGrid& grid, const cvec& coeffs, cvec& out) {
  const int n = grid.points();
  const int d = grid.dim();
  const std::size_t total = grid.size();
  cvec buf(total);
  for (std::size_t f = 0; f < total; ++f) {
    auto idx = grid.decompose(f);
    int jsum = 0;
    for (int a = 0; a < d; ++a) jsum += idx[a];
    buf[f] = (jsum % 2 == 0) ? coeffs[f] : -coeffs[f];
  }
  out.resize(total);
  detail::FftEngine::instance().transform(d, n, buf.data(), out.data(), FFTW_BACKWARD);
  const cplx ipow = detail::unit_power_i(static_cast<long>(n) * d);
  for (std::size_t f = 0; f < total; ++f) {
    auto idx = grid.decompose(f);
    int msum = 0;
    double phase = 0.0;
    for (int a = 0; a < d; ++a) {
      msum += idx[a];
      phase += grid.k_offset(a) * grid.x_coord(a, idx[a]);
    }
    cplx factor = ipow * std::polar(1.0, phase);
    if (msum % 2 != 0) factor = -factor;
    out[f] *= factor;
  }
}

/// Analysis: recover mode coefficients from grid values, inverse of synth_modes.
inline void analyze_modes(const KGrid& grid, const cvec& values, cvec& out) {
  const int n = grid.points();
  const int d = grid.dim();
  const std::size_t total = grid.size();
  const cplx ipow_conj = std::conj(detail::unit_power_i(static_cast<long>(n) * d));
  cvec buf(total);
  for (std::size_t f = 0; f < total; ++f) {
    auto idx = grid.decompose(f);
    int msum = 0;
    double phase = 0.0;
    for (int a = 0; a < d; ++a) {
      msum += idx[a];
      phase += grid.k_offset(a) * grid.x_coord(a, idx[a]);
    }
    cplx factor = ipow_conj * std::polar(1.0, -phase);
    if (msum % 2 != 0) factor = -factor;
    buf[f] = values[f] * factor;
  }
  out.resize(total);
  detail::FftEngine::instance().transform(d, n, buf.data(), out.data(), FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t f = 0; f < total; ++f) {
    auto idx = grid.decompose(f);
    int jsum = 0;
    for (int a = 0; a < d; ++a) jsum += idx[a];
    out[f] *= (jsum % 2 == 0) ? scale : -scale;
  }
}

/// Spectral partial derivative along `axis` using the grid's own modes.
inline cvec spectral_derivative(const KGrid& grid, const cvec& values, int axis) {
  cvec c;
  analyze_modes(grid, values, c);
  for (std::size_t f = 0; f < c.size(); ++f) {
    auto idx = grid.decompose(f);
    c[f] *= cplx(0.0, grid.k_coord(axis, idx[axis]));
  }
  cvec out;
  synth_modes(grid, c, out);
  return out;
}

/// Spectral Laplacian using the grid's own modes.
inline cvec spectral_laplacian(const KGrid& grid, const cvec& values) {
  cvec c;
  analyze_modes(grid, values, c);
  for (std::size_t f = 0; f < c.size(); ++f) {
    auto kv = grid.k_vector(f);
    double k2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) k2 += kv[a] * kv[a];
    c[f] *= -k2;
  }
  cvec out;
  synth_modes(grid, c, out);
  return out;
}

/// Derivative of a real scalar sampled on the position grid (zero-centered modes).
inline std::vector<double> spectral_derivative_real(const KGrid& grid,
                                                    const std::vector<double>& values,
                                                    int axis) {
  const KGrid cg = grid.centered();
  cvec v(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) v[f] = values[f];
  cvec dv = spectral_derivative(cg, v, axis);
  std::vector<double> out(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) out[f] = dv[f].real();
  return out;
}

/// Fraction of spectral power carried by modes with any |k_a - offset_a| above
/// `fraction` of the axis Nyquist wavenumber. Zero input reports zero.
inline double high_mode_power_fraction(const KGrid& grid, const cvec& values,
                                       double fraction) {
  cvec c;
  analyze_modes(grid, values, c);
  double total = 0.0, high = 0.0;
  for (std::size_t f = 0; f < c.size(); ++f) {
    auto idx = grid.decompose(f);
    double p = std::norm(c[f]);
    total += p;
    for (int a = 0; a < grid.dim(); ++a) {
      double rel = std::abs(idx[a] - grid.points() / 2) /
                   static_cast<double>(grid.points() / 2);
      if (rel > fraction) {
        high += p;
        break;
      }
    }
  }
  return total > 0.0 ? high / total : 0.0;
}

inline double high_mode_power_fraction(const KGrid& grid,
                                       const std::vector<double>& values,
                                       double fraction) {
  cvec v(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) v[f] = values[f];
  return high_mode_power_fraction(grid.centered(), v, fraction);
}

}  // namespace qlab
