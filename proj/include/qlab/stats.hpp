#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {
namespace stats {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a), by the
/// usual series / continued-fraction split.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw Error(ErrorCode::ConfigInvalid, "gamma_q needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, Q = 1 - P
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  // Lentz continued fraction for Q
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

/// CDF of the chi-squared distribution with df degrees of freedom.
inline double chi2_cdf(int df, double x) { return 1.0 - gamma_q(0.5 * df, 0.5 * x); }

/// Quantile of the chi-squared distribution by bisection.
inline double chi2_quantile(int df, double p) {
  if (df < 1 || !(p > 0.0) || !(p < 1.0))
    throw Error(ErrorCode::ConfigInvalid, "chi2_quantile needs df >= 1, 0 < p < 1");
  double lo = 0.0, hi = df + 100.0 + 20.0 * std::sqrt(static_cast<double>(df));
  while (chi2_cdf(df, hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (chi2_cdf(df, mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

struct LinFit {
  double slope;
  double intercept;
};

/// Ordinary least squares y = slope x + intercept.
inline LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::ConfigInvalid, "linear_fit needs >= 2 matching points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  return {(n * sxy - sx * sy) / denom, (sy * sxx - sx * sxy) / denom};
}

/// Fitted power-law order of `values` against `scales` (log-log slope).
inline double fitted_order(const std::vector<double>& scales,
                           const std::vector<double>& values) {
  std::vector<double> lx(scales.size()), ly(values.size());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    lx[i] = std::log(scales[i]);
    ly[i] = std::log(values[i]);
  }
  return linear_fit(lx, ly).slope;
}

struct MeanStderr {
  double mean;
  double stderr_;
};

inline MeanStderr mean_stderr(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::ConfigInvalid, "mean_stderr of empty sample");
  long double s = 0.0L;
  for (double x : v) s += x;
  double mean = static_cast<double>(s) / v.size();
  long double ss = 0.0L;
  for (double x : v) ss += (x - mean) * (x - mean);
  double var = v.size() > 1 ? static_cast<double>(ss) / (v.size() - 1) : 0.0;
  return {mean, std::sqrt(var / v.size())};
}

}  // namespace stats
}  // namespace qlab
