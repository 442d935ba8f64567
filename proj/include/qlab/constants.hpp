#pragma once

#include <cmath>

#include "qlab/errors.hpp"

namespace qlab {

/// Structural constants of the theory. Defaults are natural units with a
/// negative unit charge; all four are overridable.
struct PhysicalConstants {
  double hbar = 1.0;
  double c = 1.0;
  double m = 1.0;
  double q = -1.0;

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw Error(ErrorCode::ConfigInvalid, "hbar must be positive");
    if (!(c > 0.0) || !std::isfinite(c))
      throw Error(ErrorCode::ConfigInvalid, "c must be positive");
    if (!(m > 0.0) || !std::isfinite(m))
      throw Error(ErrorCode::ConfigInvalid, "m must be positive");
    if (q == 0.0 || !std::isfinite(q))
      throw Error(ErrorCode::ConfigInvalid, "q must be nonzero");
  }

  /// Compton wavenumber mc/hbar; the mass parameter of the wave equation.
  double mu() const { return m * c / hbar; }

  /// Coupling q/hbar appearing in the covariant derivative.
  double gamma() const { return q / hbar; }
};

}  // namespace qlab
