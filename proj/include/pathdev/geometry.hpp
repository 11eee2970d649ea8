#pragma once

#include "pathdev/manifold.hpp"

namespace pathdev {

/// Smooth vector field on a chart. `jacobian`, when set, returns
/// J(i, k) = d_k Y^i; otherwise derivatives are taken by central differences.
struct VectorField {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
  int differentiability = 2;

  Vector operator()(const Vector& x) const { return value(x); }
};

/// Field whose components are expressions in x1..xn; the jacobian is symbolic.
VectorField make_expression_field(const std::vector<std::string>& components);

struct DerivativeOptions {
  double fd_step = 1e-5;
  bool prefer_analytic = true;
};

/// Gamma^i_{jk} a^j b^k.
Vector contract_gamma(const Tensor& gamma, const Vector& a, const Vector& b);
/// T(X, Y)^i = T^i_{jk} X^j Y^k.
Vector apply_torsion(const Tensor& torsion, const Vector& x, const Vector& y);
/// R(X, Y)Z^i = R^i_{jkl} Z^j X^k Y^l.
Vector apply_curvature(const Tensor& curvature, const Vector& x, const Vector& y, const Vector& z);
/// (nabla_W T)(X, Y)^i = (nabla T)^i_{jkl} X^j Y^k W^l.
Vector apply_torsion_derivative(const Tensor& dtorsion, const Vector& w, const Vector& x, const Vector& y);

/// T^i_{jk} = Gamma^i_{kj} - Gamma^i_{jk}.
Tensor torsion_tensor(const Manifold& m, const Vector& x);

/// R^i_{jkl} from the operator definition evaluated on coordinate fields.
Tensor curvature_tensor(const Manifold& m, const Vector& x, const DerivativeOptions& opts = {});

/// (nabla_l T)^i_{jk}, stored (i, j, k, l).
Tensor torsion_derivative(const Manifold& m, const Vector& x, const DerivativeOptions& opts = {});

/// (nabla_X Y)(x) with X = `direction`, a vector at x.
Vector covariant_derivative(const Manifold& m, const Vector& direction, const VectorField& y, const Vector& x,
                            double fd_step = 1e-5);
Vector covariant_derivative(const Manifold& m, const VectorField& x_field, const VectorField& y, const Vector& x,
                            double fd_step = 1e-5);

/// Directional derivative X^k d_k Y (no connection term), central differences
/// unless Y has a jacobian.
Vector directional_derivative(const Manifold& m, const Vector& direction, const VectorField& y, const Vector& x,
                              double fd_step);

}  // namespace pathdev
