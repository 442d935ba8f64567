#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "qlab/errors.hpp"

namespace qlab {

/// Uniform momentum-space grid in 1 or 3 dimensions, together with its exact
/// discrete-Fourier dual position grid.
///
/// Node j on axis a carries wavenumber  k = offset[a] + (j - points/2) * spacing[a],
/// so k = offset is always a node (points is even). The dual position grid has
/// spacing dx = 2*pi / (points * dk) per axis and is centered on x = 0.
/// Storage is row-major with the last axis fastest.
class KGrid {
 public:
  KGrid(int dim, int points_per_axis, std::array<double, 3> spacing,
        std::array<double, 3> offset = {0.0, 0.0, 0.0})
      : dim_(dim), points_(points_per_axis), spacing_(spacing), offset_(offset) {
    if (dim_ != 1 && dim_ != 3)
      throw Error(ErrorCode::ConfigInvalid, "grid dimension must be 1 or 3");
    if (points_ < 8 || points_ % 2 != 0)
      throw Error(ErrorCode::ConfigInvalid, "points per axis must be even and >= 8");
    for (int a = 0; a < dim_; ++a) {
      if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
        throw Error(ErrorCode::ConfigInvalid, "k spacing must be positive");
      if (!std::isfinite(offset_[a]))
        throw Error(ErrorCode::ConfigInvalid, "k offset must be finite");
    }
  }

  KGrid(int dim, int points_per_axis, double spacing, std::array<double, 3> offset = {})
      : KGrid(dim, points_per_axis, {spacing, spacing, spacing}, offset) {}

  int dim() const { return dim_; }
  int points() const { return points_; }
  double k_spacing(int axis) const { return spacing_[axis]; }
  double k_offset(int axis) const { return offset_[axis]; }
  double x_spacing(int axis) const {
    return 2.0 * std::numbers::pi / (points_ * spacing_[axis]);
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= static_cast<std::size_t>(points_);
    return n;
  }

  double k_coord(int axis, int j) const {
    return offset_[axis] + (j - points_ / 2) * spacing_[axis];
  }
  double x_coord(int axis, int m) const { return (m - points_ / 2) * x_spacing(axis); }

  /// Half-extent of axis a in k, measured from the grid center k_offset.
  double k_half_extent(int axis) const { return (points_ / 2) * spacing_[axis]; }
  double x_half_extent(int axis) const { return (points_ / 2) * x_spacing(axis); }

  /// Momentum-space cell volume dk^d.
  double k_measure() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing_[a];
    return v;
  }
  /// Position-space cell volume dx^d.
  double x_measure() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= x_spacing(a);
    return v;
  }

  std::array<int, 3> decompose(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % points_);
      flat /= points_;
    }
    return idx;
  }

  std::size_t flatten(const std::array<int, 3>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f = f * points_ + idx[a];
    return f;
  }

  std::array<double, 3> k_vector(std::size_t flat) const {
    auto idx = decompose(flat);
    std::array<double, 3> k{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) k[a] = k_coord(a, idx[a]);
    return k;
  }

  std::array<double, 3> x_vector(std::size_t flat) const {
    auto idx = decompose(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = x_coord(a, idx[a]);
    return x;
  }

  /// True if the node lies within `margin` nodes of any grid face.
  bool in_boundary_margin(std::size_t flat, int margin) const {
    auto idx = decompose(flat);
    for (int a = 0; a < dim_; ++a)
      if (idx[a] < margin || idx[a] >= points_ - margin) return true;
    return false;
  }

  /// Largest |k| over all nodes (offset included).
  double k_max_norm() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double lo = std::abs(k_coord(a, 0));
      double hi = std::abs(k_coord(a, points_ - 1));
      double e = std::max(lo, hi);
      s += e * e;
    }
    return std::sqrt(s);
  }

  /// Same grid with the offset dropped; the natural modes of the position grid.
  KGrid centered() const { return KGrid(dim_, points_, spacing_, {0.0, 0.0, 0.0}); }

  bool same_layout(const KGrid& o) const {
    if (dim_ != o.dim_ || points_ != o.points_) return false;
    for (int a = 0; a < dim_; ++a)
      if (spacing_[a] != o.spacing_[a]) return false;
    return true;
  }

  bool operator==(const KGrid& o) const {
    if (!same_layout(o)) return false;
    for (int a = 0; a < dim_; ++a)
      if (offset_[a] != o.offset_[a]) return false;
    return true;
  }

 private:
  int dim_;
  int points_;
  std::array<double, 3> spacing_;
  std::array<double, 3> offset_;
};

inline constexpr int kBoundaryMargin = 4;       // nodes
inline constexpr double kMarginAmplitude = 1e-12;

}  // namespace qlab
