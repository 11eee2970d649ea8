#pragma once

#include "pathdev/curve.hpp"
#include "pathdev/manifold.hpp"
#include "pathdev/transport.hpp"

#include <memory>

namespace pathdev {

/// Force per unit mass F(s, x, U) for forced trajectories.
using ForceFn = std::function<Vector(double s, const Vector& x, const Vector& u)>;

/// Solves x'' + Gamma(x', x') = f(u) x' with x(a) = x0, x'(a) = u0 by
/// classical RK4 with a fixed step <= `step`. Throws TruncationError when the
/// trajectory leaves the chart.
std::shared_ptr<const IntegratedCurve> integrate_geodesic(const Manifold& m, const Vector& x0, const Vector& u0,
                                                          Interval interval, const ScalarFn& f = {},
                                                          double step = 1e-3, std::string id = "geodesic");

/// Solves nabla_U U = F(s, x, U).
std::shared_ptr<const IntegratedCurve> integrate_forced(const Manifold& m, const Vector& x0, const Vector& u0,
                                                        const ForceFn& force, Interval interval,
                                                        double step = 1e-3, std::string id = "forced");

/// max over sampled (s, t) of |gamma'(t) - H(t,s) gamma'(s)|.
double i_path_residual(const TransportLaw& law, const Curve& curve, int sample_count);

/// Two-parameter family y(u, v); u-lines are the particles, v-lines the
/// connectors. Partials come from the supplied functions or from central
/// differences with step `fd_step`.
class Congruence {
 public:
  using SurfaceFn = std::function<Vector(double u, double v)>;

  Congruence(int dim, SurfaceFn point, SurfaceFn du = {}, SurfaceFn dv = {}, double fd_step = 1e-4);

  int dim() const { return dim_; }
  Vector point(double u, double v) const { return point_(u, v); }
  Vector U(double u, double v) const;
  Vector V(double u, double v) const;
  double fd_step() const { return fd_step_; }

  /// The v-line y(u, .) over [v_lo, v_hi] as a curve in v.
  CurvePtr v_line(double u, Interval v_range) const;
  /// The u-line y(., v) as a curve in u.
  CurvePtr u_line(double v, Interval u_range) const;

 private:
  int dim_;
  SurfaceFn point_;
  SurfaceFn du_;
  SurfaceFn dv_;
  double fd_step_;
};

/// Congruence given by expressions of (u, v); partials are symbolic.
Congruence make_expression_congruence(const std::vector<std::string>& components, double fd_step = 1e-4);

/// Congruence of geodesics in u issued from the seed curve: y(u, v) starts at
/// seed_point(v) with tangent seed_tangent(v) at u = u_interval.lo and obeys
/// nabla_U U = f(u) U. V is a central difference in v with step h_v; U comes
/// from the integrated state. Throws TruncationError naming the member.
Congruence geodesic_congruence(ManifoldPtr m, PointFn seed_point, PointFn seed_tangent, Interval u_interval,
                               ScalarFn f = {}, double step = 1e-3, double h_v = 1e-4);

struct ShootingOptions {
  double step = 1e-2;
  double tolerance = 1e-9;
  int max_iterations = 50;
};

/// Geodesic on [0, 1] from a to b by damped Newton iteration on the initial
/// tangent. Throws Error(Numerical) when it does not converge.
std::shared_ptr<const IntegratedCurve> shoot_geodesic(const Manifold& m, const Vector& a, const Vector& b,
                                                      const ShootingOptions& opts = {}, std::string id = "shot");

}  // namespace pathdev
