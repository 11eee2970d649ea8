#include "pathdev/oracles.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>

namespace pathdev {

std::string RefinementReport::to_json() const {
  nlohmann::json j;
  j["parameter_values"] = parameter_values;
  j["errors"] = errors;
  j["fitted_order"] = fitted_order;
  return j.dump();
}

RefinementReport fit_order(std::vector<double> steps, std::vector<double> errors) {
  if (steps.size() < 3 || steps.size() != errors.size())
    throw Error(ErrorKind::Argument, "measure_order: need at least three (step, error) pairs");
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (!(steps[i] < steps[i - 1])) throw Error(ErrorKind::Argument, "measure_order: steps must strictly decrease");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw Error(ErrorKind::Numerical, "measure_order: errors must be positive and finite for a log-log fit");
    const double x = std::log(steps[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  RefinementReport r;
  r.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.parameter_values = std::move(steps);
  r.errors = std::move(errors);
  return r;
}

RefinementReport measure_order(const std::function<double(double)>& error_of, const std::vector<double>& steps) {
  std::vector<double> errors;
  errors.reserve(steps.size());
  for (double h : steps) errors.push_back(error_of(h));
  return fit_order(steps, std::move(errors));
}

Matrix holonomy_curvature(const Manifold& m, const Vector& x, int k, int l, double eps, double transport_step) {
  const int n = m.dim();
  if (k < 0 || l < 0 || k >= n || l >= n || k == l)
    throw Error(ErrorKind::Argument, "holonomy_curvature: plane indices must be distinct and in range");
  if (!(eps > 0.0)) throw Error(ErrorKind::Argument, "holonomy_curvature: eps must be positive");
  const Vector ek = Vector::Unit(n, k) * eps;
  const Vector el = Vector::Unit(n, l) * eps;
  const Vector c0 = x - 0.5 * ek - 0.5 * el;
  const Vector c1 = c0 + ek;
  const Vector c2 = c1 + el;
  const Vector c3 = c0 + el;
  for (const Vector* c : {&c0, &c1, &c2, &c3})
    if (!m.contains(*c)) throw DomainError("holonomy_curvature: loop leaves the chart domain of '" + m.name() + "'");
  const TransportLaw law = TransportLaw::parallel(std::shared_ptr<const Manifold>(&m, [](const Manifold*) {}),
                                                  transport_step > 0.0 ? transport_step : 0.1);
  auto leg = [&law](const Vector& a, const Vector& b) {
    return transport_matrix(law, *make_segment("leg", a, b), 0.0, 1.0).H;
  };
  const Matrix loop = leg(c3, c0) * leg(c2, c3) * leg(c1, c2) * leg(c0, c1);
  const Matrix in = leg(x, c0);
  const Matrix at_x = in.inverse() * loop * in;
  return (Matrix::Identity(n, n) - at_x) / (eps * eps);
}

SeparationResult two_geodesic_separation(const Manifold& m, const Vector& x0, const Vector& u0,
                                         const Vector& offset_v0, const Vector& offset_dv0, double u, double delta,
                                         double step) {
  if (!(delta > 0.0)) throw Error(ErrorKind::Argument, "two_geodesic_separation: delta must be positive");
  const Interval iv{0.0, u};
  const Vector base = integrate_geodesic(m, x0, u0, iv, {}, step, "base")->point(u);
  auto sep = [&](double d) -> Vector {
    const Vector nb =
        integrate_geodesic(m, x0 + d * offset_v0, u0 + d * offset_dv0, iv, {}, step, "neighbour")->point(u);
    return (nb - base) / d;
  };
  const Vector j1 = sep(delta);
  const Vector j2 = sep(0.5 * delta);
  const Vector j4 = sep(0.25 * delta);
  const Vector r1 = 2.0 * j2 - j1;
  const Vector r2 = 2.0 * j4 - j2;
  SeparationResult out;
  out.value = r1;
  out.convergence = (r2 - r1).norm();
  out.evidence.parameter_values = {delta, 0.5 * delta, 0.25 * delta};
  out.evidence.errors = {(j1 - r2).norm(), (j2 - r2).norm(), (j4 - r2).norm()};
  try {
    out.evidence = fit_order(out.evidence.parameter_values, out.evidence.errors);
  } catch (const Error&) {
    out.evidence.fitted_order = 0.0;
  }
  return out;
}

Vector fd_second_deviation(const DeviationScenario& scn, const TransportLaw& law, double s, double h_s,
                           int panels) {
  if (!(h_s > 0.0)) throw Error(ErrorKind::Argument, "fd_second_deviation: step must be positive");
  const int n = scn.x->dim();
  auto h = [&](double q) { return deviation_vector(law, scn, q, panels).components; };
  auto gamma_term = [&](const Vector& v, double q) -> Vector {
    if (!law.manifold()) return Vector::Zero(n);
    return contract_gamma(law.manifold()->christoffel(scn.x->point(q)), v, scn.x->tangent(q));
  };
  const Vector hm2 = h(s - 2.0 * h_s), hm1 = h(s - h_s), h0 = h(s), hp1 = h(s + h_s), hp2 = h(s + 2.0 * h_s);
  const Vector wm = (h0 - hm2) / (2.0 * h_s) + gamma_term(hm1, s - h_s);
  const Vector w0 = (hp1 - hm1) / (2.0 * h_s) + gamma_term(h0, s);
  const Vector wp = (hp2 - h0) / (2.0 * h_s) + gamma_term(hp1, s + h_s);
  return (wp - wm) / (2.0 * h_s) + gamma_term(w0, s);
}

LatitudeHolonomy sphere_latitude_holonomy(double theta0, double step) {
  const ManifoldPtr sphere = make_manifold("sphere2:1");
  const double sn = std::sin(theta0);
  const auto circle = std::make_shared<AnalyticCurve>(
      "latitude", Interval{0.0, 2.0 * std::numbers::pi}, 2,
      [theta0](double t) {
        Vector p(2);
        p << theta0, t;
        return p;
      },
      [](double) {
        Vector v(2);
        v << 0.0, 1.0;
        return v;
      });
  auto angle_at = [&](double h) {
    const Matrix hm = transport_matrix(TransportLaw::parallel(sphere, h), *circle, 0.0, 2.0 * std::numbers::pi).H;
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = sn;
    const Matrix q = d * hm * d.inverse();
    return std::abs(std::atan2(q(1, 0), q(0, 0)));
  };
  LatitudeHolonomy out;
  out.raw_angle = angle_at(step);
  const double half = angle_at(0.5 * step);
  out.angle = (16.0 * half - out.raw_angle) / 15.0;
  out.refinement_change = std::abs(half - out.raw_angle);
  return out;
}

}  // namespace pathdev
