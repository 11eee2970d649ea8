#include "pathdev/paths.hpp"

#include "pathdev/geometry.hpp"

#include <cmath>
#include <sstream>

namespace pathdev {

namespace {

using AccelFn = std::function<Vector(double, const Vector&, const Vector&)>;

std::shared_ptr<const IntegratedCurve> integrate_second_order(const Manifold& m, const Vector& x0,
                                                              const Vector& u0, const AccelFn& accel,
                                                              Interval interval, double step, std::string id) {
  if (!(step > 0.0)) throw Error(ErrorKind::Argument, "integrator step must be positive");
  if (!(interval.hi > interval.lo)) throw Error(ErrorKind::Argument, "integration interval must be non-empty");
  if (x0.size() != m.dim() || u0.size() != m.dim())
    throw Error(ErrorKind::Argument, "initial data dimension does not match manifold '" + m.name() + "'");
  m.require_inside(x0, "integrate");

  const int steps = std::max(1, static_cast<int>(std::ceil(interval.length() / step - 1e-9)));
  const double h = interval.length() / steps;

  std::vector<double> nodes{interval.lo};
  std::vector<Vector> xs{x0}, vs{u0}, as{accel(interval.lo, x0, u0)};
  nodes.reserve(static_cast<std::size_t>(steps) + 1);

  auto check = [&](const Vector& x, double t_last) {
    if (!m.contains(x)) {
      std::ostringstream os;
      os << "trajectory '" << id << "' leaves the domain of '" << m.name() << "' after parameter " << t_last;
      throw TruncationError(os.str(), t_last);
    }
  };

  Vector x = x0, v = u0;
  for (int k = 0; k < steps; ++k) {
    const double t0 = interval.lo + k * h;
    const double t1 = (k + 1 == steps) ? interval.hi : interval.lo + (k + 1) * h;
    const Vector& a1 = as.back();
    const Vector x2 = x + 0.5 * h * v;
    const Vector v2 = v + 0.5 * h * a1;
    check(x2, t0);
    const Vector a2 = accel(t0 + 0.5 * h, x2, v2);
    const Vector x3 = x + 0.5 * h * v2;
    const Vector v3 = v + 0.5 * h * a2;
    check(x3, t0);
    const Vector a3 = accel(t0 + 0.5 * h, x3, v3);
    const Vector x4 = x + h * v3;
    const Vector v4 = v + h * a3;
    check(x4, t0);
    const Vector a4 = accel(t1, x4, v4);
    x += h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    check(x, t0);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!std::isfinite(v[i])) throw TruncationError("trajectory '" + id + "' blew up", t0);
    nodes.push_back(t1);
    xs.push_back(x);
    vs.push_back(v);
    as.push_back(accel(t1, x, v));
  }
  return std::make_shared<IntegratedCurve>(std::move(id), std::move(nodes), std::move(xs), std::move(vs),
                                           std::move(as));
}

}  // namespace

std::shared_ptr<const IntegratedCurve> integrate_geodesic(const Manifold& m, const Vector& x0, const Vector& u0,
                                                          Interval interval, const ScalarFn& f, double step,
                                                          std::string id) {
  AccelFn accel = [&m, &f](double t, const Vector& x, const Vector& v) -> Vector {
    Vector a = -contract_gamma(m.christoffel(x), v, v);
    if (f) a += f(t) * v;
    return a;
  };
  return integrate_second_order(m, x0, u0, accel, interval, step, std::move(id));
}

std::shared_ptr<const IntegratedCurve> integrate_forced(const Manifold& m, const Vector& x0, const Vector& u0,
                                                        const ForceFn& force, Interval interval, double step,
                                                        std::string id) {
  AccelFn accel = [&m, &force](double t, const Vector& x, const Vector& v) -> Vector {
    Vector a = -contract_gamma(m.christoffel(x), v, v);
    if (force) a += force(t, x, v);
    return a;
  };
  return integrate_second_order(m, x0, u0, accel, interval, step, std::move(id));
}

double i_path_residual(const TransportLaw& law, const Curve& curve, int sample_count) {
  if (sample_count < 2) throw Error(ErrorKind::Argument, "i_path_residual: need at least 2 samples");
  const Interval iv = curve.interval();
  std::vector<double> ts;
  for (int k = 0; k < sample_count; ++k) ts.push_back(iv.lo + iv.length() * k / (sample_count - 1));
  double worst = 0.0;
  // All pairs anchored at each sample via one sweep per anchor.
  for (double s : ts) {
    const Vector vs = curve.tangent(s);
    for (double t : ts) {
      if (t == s) continue;
      const Matrix h = transport_matrix(law, curve, s, t).H;
      worst = std::max(worst, (curve.tangent(t) - h * vs).norm());
    }
  }
  return worst;
}

Congruence::Congruence(int dim, SurfaceFn point, SurfaceFn du, SurfaceFn dv, double fd_step)
    : dim_(dim), point_(std::move(point)), du_(std::move(du)), dv_(std::move(dv)), fd_step_(fd_step) {
  if (!point_) throw Error(ErrorKind::Argument, "congruence needs a point function");
  if (!(fd_step_ > 0.0)) throw Error(ErrorKind::Argument, "congruence: fd step must be positive");
}

Vector Congruence::U(double u, double v) const {
  if (du_) return du_(u, v);
  return (point_(u + fd_step_, v) - point_(u - fd_step_, v)) / (2.0 * fd_step_);
}

Vector Congruence::V(double u, double v) const {
  if (dv_) return dv_(u, v);
  return (point_(u, v + fd_step_) - point_(u, v - fd_step_)) / (2.0 * fd_step_);
}

CurvePtr Congruence::v_line(double u, Interval v_range) const {
  std::ostringstream id;
  id << "v_line(u=" << u << ")";
  auto self = *this;
  return std::make_shared<AnalyticCurve>(
      id.str(), v_range, dim_, [self, u](double v) { return self.point(u, v); },
      [self, u](double v) { return self.V(u, v); });
}

CurvePtr Congruence::u_line(double v, Interval u_range) const {
  std::ostringstream id;
  id << "u_line(v=" << v << ")";
  auto self = *this;
  return std::make_shared<AnalyticCurve>(
      id.str(), u_range, dim_, [self, v](double u) { return self.point(u, v); },
      [self, v](double u) { return self.U(u, v); });
}

Congruence make_expression_congruence(const std::vector<std::string>& components, double fd_step) {
  const int n = static_cast<int>(components.size());
  auto y = std::make_shared<std::vector<Expression>>();
  auto yu = std::make_shared<std::vector<Expression>>();
  auto yv = std::make_shared<std::vector<Expression>>();
  for (const auto& c : components) {
    y->push_back(Expression::parse(c, {"u", "v"}));
    yu->push_back(y->back().derivative(0));
    yv->push_back(y->back().derivative(1));
  }
  auto eval = [n](std::shared_ptr<std::vector<Expression>> e) {
    return [e, n](double u, double v) {
      const double args[2] = {u, v};
      Vector out(n);
      for (int i = 0; i < n; ++i) out[i] = (*e)[static_cast<std::size_t>(i)](args);
      return out;
    };
  };
  return Congruence(n, eval(y), eval(yu), eval(yv), fd_step);
}

Congruence geodesic_congruence(ManifoldPtr m, PointFn seed_point, PointFn seed_tangent, Interval u_interval,
                               ScalarFn f, double step, double h_v) {
  const int n = m->dim();
  auto member = [m, seed_point, seed_tangent, u_interval, f, step](double v) {
    std::ostringstream id;
    id << "congruence member v=" << v;
    try {
      return integrate_geodesic(*m, seed_point(v), seed_tangent(v), u_interval, f, step, id.str());
    } catch (const TruncationError& e) {
      throw TruncationError(std::string("congruence truncated: ") + e.what(), e.exit_parameter());
    }
  };
  auto point = [member](double u, double v) { return member(v)->point(u); };
  auto du = [member](double u, double v) { return member(v)->tangent(u); };
  return Congruence(n, point, du, {}, h_v);
}

std::shared_ptr<const IntegratedCurve> shoot_geodesic(const Manifold& m, const Vector& a, const Vector& b,
                                                      const ShootingOptions& opts, std::string id) {
  const int n = m.dim();
  const Interval unit{0.0, 1.0};
  auto endpoint = [&](const Vector& u0) -> Vector {
    return integrate_geodesic(m, a, u0, unit, {}, opts.step, id)->point(1.0) - b;
  };
  Vector u0 = b - a;
  if (u0.norm() == 0.0) return integrate_geodesic(m, a, u0, unit, {}, opts.step, std::move(id));

  Vector res = endpoint(u0);
  bool converged = res.norm() < opts.tolerance;
  bool polished = false;
  for (int it = 0; it < opts.max_iterations && !polished; ++it) {
    if (converged) polished = true;  // one extra Newton step after convergence
    Matrix jac(n, n);
    for (int k = 0; k < n; ++k) {
      const double eps = 1e-7 * std::max(1.0, std::abs(u0[k]));
      Vector up = u0, um = u0;
      up[k] += eps;
      um[k] -= eps;
      jac.col(k) = (endpoint(up) - endpoint(um)) / (2.0 * eps);
    }
    const Vector delta = jac.fullPivLu().solve(-res);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      Vector trial = u0 + lambda * delta;
      Vector trial_res;
      try {
        trial_res = endpoint(trial);
      } catch (const TruncationError&) {
        lambda *= 0.5;
        continue;
      }
      if (trial_res.norm() < res.norm() || (converged && trial_res.norm() <= res.norm())) {
        u0 = trial;
        res = trial_res;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      if (converged) break;
      throw Error(ErrorKind::Numerical, "geodesic shooting stalled for '" + id + "'");
    }
    converged = converged || res.norm() < opts.tolerance;
  }
  if (!converged) {
    std::ostringstream os;
    os << "geodesic shooting for '" << id << "' did not converge in " << opts.max_iterations
       << " iterations (residual " << res.norm() << ")";
    throw Error(ErrorKind::Numerical, os.str());
  }
  return integrate_geodesic(m, a, u0, unit, {}, opts.step, std::move(id));
}

}  // namespace pathdev
