#pragma once

#include <memory>
#include <vector>

#include "qlab/field.hpp"

namespace qlab {

/// Composable linear operator acting on field states. Primitives:
/// multiply-by-coordinate, spectral partial derivative, the momentum component
/// pi_a = -i hbar d_a, multiply-by-function, d/dx0 (spectral in time, consumes
/// one jet level), identity. Combinators: scalar multiple, sum, composition.
/// Every chain is linear; that is spot-checked by tests rather than assumed.
class OperatorSpec {
 public:
  static OperatorSpec identity() { return OperatorSpec(std::make_shared<Node>(Node{Kind::Identity})); }

  static OperatorSpec coordinate(int axis) {
    Node n{Kind::Coordinate};
    n.axis = axis;
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  /// Plain spatial derivative d_axis.
  static OperatorSpec partial(int axis) {
    Node n{Kind::Partial};
    n.axis = axis;
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  /// pi_axis = -i hbar d_axis.
  static OperatorSpec momentum(int axis, double hbar) {
    return partial(axis).scaled(cplx(0.0, -hbar));
  }

  /// d/dx0 = (1/c) d/dt; needs a state carrying at least one jet level.
  static OperatorSpec time_derivative() {
    return OperatorSpec(std::make_shared<Node>(Node{Kind::TimeDeriv}));
  }

  static OperatorSpec multiply(cvec values) {
    Node n{Kind::Multiply};
    n.values = std::move(values);
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  static OperatorSpec multiply_real(const std::vector<double>& values) {
    cvec v(values.size());
    for (std::size_t f = 0; f < values.size(); ++f) v[f] = values[f];
    return multiply(std::move(v));
  }

  OperatorSpec scaled(cplx z) const {
    Node n{Kind::Scale};
    n.factor = z;
    n.children = {root_};
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  OperatorSpec operator+(const OperatorSpec& o) const {
    Node n{Kind::Sum};
    n.children = {root_, o.root_};
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  OperatorSpec operator-(const OperatorSpec& o) const { return *this + o.scaled(-1.0); }

  /// Composition: (*this)(o(psi)).
  OperatorSpec after(const OperatorSpec& o) const {
    Node n{Kind::Compose};
    n.children = {root_, o.root_};
    return OperatorSpec(std::make_shared<Node>(std::move(n)));
  }

  FieldState apply(const FieldState& state) const { return apply_node(*root_, state); }

 private:
  enum class Kind { Identity, Coordinate, Partial, TimeDeriv, Multiply, Scale, Sum, Compose };

  struct Node {
    Kind kind;
    int axis = 0;
    cplx factor{1.0, 0.0};
    cvec values;
    std::vector<std::shared_ptr<const Node>> children;
  };

  explicit OperatorSpec(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  static FieldState apply_node(const Node& n, const FieldState& s) {
    switch (n.kind) {
      case Kind::Identity:
        return s;
      case Kind::Coordinate: {
        const KGrid& g = s.grid();
        if (n.axis >= g.dim())
          throw Error(ErrorCode::DimensionMismatch, "coordinate axis out of range");
        int axis = n.axis;
        return s.mapped([&g, axis](std::size_t f) {
          return cplx(g.x_coord(axis, g.decompose(f)[axis]), 0.0);
        });
      }
      case Kind::Partial:
        return s.derivative(n.axis);
      case Kind::TimeDeriv:
        return s.time_derivative_dx0();
      case Kind::Multiply: {
        if (n.values.size() != s.values().size())
          throw Error(ErrorCode::GridMismatch, "multiplier size does not match grid");
        const cvec& v = n.values;
        return s.mapped([&v](std::size_t f) { return v[f]; });
      }
      case Kind::Scale: {
        cplx z = n.factor;
        return apply_node(*n.children[0], s).mapped([z](std::size_t) { return z; });
      }
      case Kind::Sum: {
        FieldState acc = apply_node(*n.children[0], s);
        for (std::size_t i = 1; i < n.children.size(); ++i)
          acc += apply_node(*n.children[i], s);
        return acc;
      }
      case Kind::Compose:
        return apply_node(*n.children[0], apply_node(*n.children[1], s));
    }
    throw Error(ErrorCode::ConfigInvalid, "unreachable operator kind");
  }

  std::shared_ptr<const Node> root_;
};

/// Angular momentum component operators L_i = eps_ijk x_j pi_k (3D).
inline OperatorSpec angular_momentum_operator(int i, double hbar) {
  int j = (i + 1) % 3, k = (i + 2) % 3;
  return OperatorSpec::coordinate(j).after(OperatorSpec::momentum(k, hbar)) -
         OperatorSpec::coordinate(k).after(OperatorSpec::momentum(j, hbar));
}

}  // namespace qlab
