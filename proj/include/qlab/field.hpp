#pragma once

#include <optional>
#include <utility>

#include "qlab/constants.hpp"
#include "qlab/fft.hpp"
#include "qlab/grid.hpp"

namespace qlab {

/// Complex field sampled on the dual position grid of a KGrid, tagged with the
/// time it was evaluated at. States synthesized from a momentum packet also
/// carry their first and second time derivatives ("jet"), which is what makes
/// exact spectral evaluation of d/dt possible downstream; states assembled
/// from raw values carry only what the caller supplies.
class FieldState {
 public:
  FieldState(KGrid grid, PhysicalConstants consts, cvec psi, double t)
      : grid_(std::move(grid)), consts_(consts), t_(t), psi_(std::move(psi)) {
    if (psi_.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "field size does not match grid");
  }

  FieldState(KGrid grid, PhysicalConstants consts, cvec psi, cvec psi_dt, double t)
      : FieldState(std::move(grid), consts, std::move(psi), t) {
    if (psi_dt.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "field size does not match grid");
    psi_dt_ = std::move(psi_dt);
  }

  FieldState(KGrid grid, PhysicalConstants consts, cvec psi, cvec psi_dt, cvec psi_dtt,
             double t)
      : FieldState(std::move(grid), consts, std::move(psi), std::move(psi_dt), t) {
    if (psi_dtt.size() != grid_.size())
      throw Error(ErrorCode::GridMismatch, "field size does not match grid");
    psi_dtt_ = std::move(psi_dtt);
  }

  const KGrid& grid() const { return grid_; }
  const PhysicalConstants& constants() const { return consts_; }
  double time() const { return t_; }

  const cvec& values() const { return psi_; }
  cvec& values() { return psi_; }

  bool has_dt() const { return psi_dt_.has_value(); }
  bool has_dtt() const { return psi_dtt_.has_value(); }
  const cvec& values_dt() const {
    if (!psi_dt_)
      throw Error(ErrorCode::MissingPacket,
                  "state carries no time derivative; synthesize it from a packet");
    return *psi_dt_;
  }
  const cvec& values_dtt() const {
    if (!psi_dtt_)
      throw Error(ErrorCode::MissingPacket,
                  "state carries no second time derivative; synthesize it from a packet");
    return *psi_dtt_;
  }

  /// How many time derivatives are available.
  int jet_depth() const { return psi_dtt_ ? 2 : (psi_dt_ ? 1 : 0); }

  /// L2 norm squared over the position grid, sum |psi|^2 dx^d.
  double norm_sq() const {
    long double s = 0.0L;
    for (const cplx& v : psi_) s += std::norm(v);
    return static_cast<double>(s) * grid_.x_measure();
  }

  /// Largest |psi| within the 4-node boundary margin.
  double boundary_amplitude() const {
    double worst = 0.0;
    for (std::size_t f = 0; f < psi_.size(); ++f)
      if (grid_.in_boundary_margin(f, kBoundaryMargin))
        worst = std::max(worst, std::abs(psi_[f]));
    return worst;
  }

  bool localized() const { return boundary_amplitude() < kMarginAmplitude; }

  /// Apply a node-wise factor to every available jet level. Valid for factors
  /// with no time dependence.
  template <typename F>
  FieldState mapped(F&& factor) const {
    FieldState out = *this;
    for (std::size_t f = 0; f < psi_.size(); ++f) {
      cplx w = factor(f);
      out.psi_[f] *= w;
      if (out.psi_dt_) (*out.psi_dt_)[f] *= w;
      if (out.psi_dtt_) (*out.psi_dtt_)[f] *= w;
    }
    return out;
  }

  /// Spectral partial derivative along a spatial axis, applied to every jet level.
  FieldState derivative(int axis) const {
    if (axis < 0 || axis >= grid_.dim())
      throw Error(ErrorCode::DimensionMismatch, "derivative axis out of range");
    FieldState out = *this;
    out.psi_ = spectral_derivative(grid_, psi_, axis);
    if (psi_dt_) out.psi_dt_ = spectral_derivative(grid_, *psi_dt_, axis);
    if (psi_dtt_) out.psi_dtt_ = spectral_derivative(grid_, *psi_dtt_, axis);
    return out;
  }

  /// Shift the jet down by one: result value = d/dx0 psi = psi_dt / c.
  FieldState time_derivative_dx0() const {
    const double inv_c = 1.0 / consts_.c;
    cvec v = values_dt();
    for (cplx& z : v) z *= inv_c;
    if (psi_dtt_) {
      cvec vdot = *psi_dtt_;
      for (cplx& z : vdot) z *= inv_c;
      return FieldState(grid_, consts_, std::move(v), std::move(vdot), t_);
    }
    return FieldState(grid_, consts_, std::move(v), t_);
  }

  FieldState& operator+=(const FieldState& o) {
    if (!(grid_ == o.grid_))
      throw Error(ErrorCode::GridMismatch, "cannot add fields on different grids");
    for (std::size_t f = 0; f < psi_.size(); ++f) psi_[f] += o.psi_[f];
    if (psi_dt_ && o.psi_dt_)
      for (std::size_t f = 0; f < psi_.size(); ++f) (*psi_dt_)[f] += (*o.psi_dt_)[f];
    else
      psi_dt_.reset();
    if (psi_dtt_ && o.psi_dtt_)
      for (std::size_t f = 0; f < psi_.size(); ++f) (*psi_dtt_)[f] += (*o.psi_dtt_)[f];
    else
      psi_dtt_.reset();
    return *this;
  }

  FieldState scaled(cplx z) const {
    return mapped([z](std::size_t) { return z; });
  }

 private:
  KGrid grid_;
  PhysicalConstants consts_;
  double t_;
  cvec psi_;
  std::optional<cvec> psi_dt_;
  std::optional<cvec> psi_dtt_;
};

}  // namespace qlab
