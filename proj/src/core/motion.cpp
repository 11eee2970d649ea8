#include "pathdev/deviation.hpp"
#include "pathdev/oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pathdev {

namespace {

std::vector<double> simpson_nodes(double a, double b, int panels) {
  std::vector<double> nodes(static_cast<std::size_t>(panels) + 1);
  const double h = (b - a) / panels;
  for (int k = 0; k <= panels; ++k) nodes[static_cast<std::size_t>(k)] = (k == panels) ? b : a + k * h;
  return nodes;
}

double simpson_weight(int k, int panels) { return (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0); }

int even_panels(int panels) {
  if (panels < 2) throw Error(ErrorKind::Argument, "quadrature needs at least 2 panels");
  return panels + panels % 2;
}

void require_fixed_limits(const DeviationScenario& scn, double s, double h) {
  if (!scn.fixed_limits(s, h) || !scn.fixed_limits(s, 2.0 * h))
    throw Error(ErrorKind::Config,
                "equation of motion: r' and r'' must not depend on s (the boundary term is not supported)");
}

// Second-order difference of a matrix-valued function; one-sided at the ends
// of [lo, hi].
Matrix derivative_in(const std::function<Matrix(double)>& fn, double x, double h, double lo, double hi) {
  if (x - h >= lo && x + h <= hi) return (fn(x + h) - fn(x - h)) / (2.0 * h);
  if (x - h < lo) return (-3.0 * fn(x) + 4.0 * fn(x + h) - fn(x + 2.0 * h)) / (2.0 * h);
  return (3.0 * fn(x) - 4.0 * fn(x - h) + fn(x - 2.0 * h)) / (2.0 * h);
}

Matrix gamma_matrix(const Tensor& g, const Vector& direction) {
  const int n = g.dim();
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) m(i, k) += g(i, k, l) * direction[l];
  return m;
}

// D/ds of gamma_s'(u) along the s-line through gamma_s(u).
Vector family_tangent_derivative(const Manifold& m, const DeviationScenario& scn, const Curve& gs, double s,
                                 double u, double h) {
  const Vector gd = gs.tangent(u);
  const Vector gp = scn.family_velocity(s, u, h);
  const Vector d = (scn.gamma(s + h)->tangent(u) - scn.gamma(s - h)->tangent(u)) / (2.0 * h);
  return d + contract_gamma(m.christoffel(gs.point(u)), gd, gp);
}

// D/du F_s(u) along gamma_s.
Vector force_derivative(const Manifold& m, const Curve& gs, const FamilyForceFn& force, double s, double u,
                        double h) {
  const Vector f = force(s, u);
  return (force(s, u + h) - force(s, u - h)) / (2.0 * h) + contract_gamma(m.christoffel(gs.point(u)), f, gs.tangent(u));
}

}  // namespace

Vector equation_of_motion_rhs(const Manifold& m, const TransportLaw& law, const DeviationScenario& scn, double s,
                              const FamilyForceFn& force, const MotionOptions& opts) {
  const double h = opts.h_fd;
  require_fixed_limits(scn, s, h);
  const int panels = even_panels(opts.panels);
  const double r1 = scn.r_prime(s), r2 = scn.r_dprime(s);
  const int n = m.dim();

  const MultiPointField h_field = [&](double q) { return observer_transport(law, scn, q); };
  const Matrix big_h = h_field(s).as_matrix();
  const Matrix dh = multipoint_covariant_derivative(m, h_field, s, h).as_matrix();
  const Matrix d2h =
      multipoint_covariant_derivative(
          m, [&](double q) { return multipoint_covariant_derivative(m, h_field, q, h); }, s, h)
          .as_matrix();
  const CurvePtr eta = scn.eta(s);
  const Matrix h_inv = transport_matrix(law, *eta, scn.t_dprime(s), scn.t_prime(s)).H;
  const Vector dev = deviation_vector(law, scn, s, opts.panels).components;

  const CurvePtr gs = scn.gamma(s);
  Vector first = Vector::Zero(n), second = Vector::Zero(n);
  if (r1 != r2) {
    const std::vector<double> nodes = simpson_nodes(r1, r2, panels);
    for (int k = 0; k <= panels; ++k) {
      const double u = nodes[static_cast<std::size_t>(k)];
      const MultiPointField lam_field = [&](double q) { return connector_pullback(law, scn, q, u); };
      const Matrix lam = lam_field(s).as_matrix();
      const Matrix dlam = multipoint_covariant_derivative(m, lam_field, s, h).as_matrix();
      const Matrix d2lam =
          multipoint_covariant_derivative(
              m, [&](double q) { return multipoint_covariant_derivative(m, lam_field, q, h); }, s, h)
              .as_matrix();
      const Vector p = gs->point(u);
      const Vector gd = gs->tangent(u);
      const Vector gp = scn.family_velocity(s, u, h);
      const Vector dgd = family_tangent_derivative(m, scn, *gs, s, u, h);
      const Vector f = force ? force(s, u) : Vector::Zero(n);
      const Vector df = force ? force_derivative(m, *gs, force, s, u, h) : Vector::Zero(n);
      const Tensor tor = torsion_tensor(m, p);
      const Vector bracket = apply_curvature(curvature_tensor(m, p, opts.derivative), gp, gd, gp) +
                             apply_torsion_derivative(torsion_derivative(m, p, opts.derivative), gp, gp, gd) +
                             apply_torsion(tor, gp, dgd) + df + apply_torsion(tor, f, gd);
      const double w = simpson_weight(k, panels);
      first += w * (dlam * gd + lam * dgd);
      second += w * (d2lam * gd + 2.0 * dlam * dgd + lam * bracket);
    }
    const double scale = (r2 - r1) / panels / 3.0;
    first *= scale;
    second *= scale;
  }
  return d2h * h_inv * dev + 2.0 * dh * first + big_h * second;
}

ForceDifference force_difference_term(const Manifold& m, const TransportLaw& law, const DeviationScenario& scn,
                                      double s, const FamilyForceFn& force, const MotionOptions& opts) {
  const int panels = even_panels(opts.panels);
  const double h = opts.h_fd;
  const int n = m.dim();
  const double r1 = scn.r_prime(s), r2 = scn.r_dprime(s);
  const Matrix big_h = observer_transport(law, scn, s).as_matrix();
  const CurvePtr gs = scn.gamma(s);
  const Interval range = gs->interval();

  ForceDifference out;
  const Matrix back = transport_matrix(law, *gs, r2, r1).H;
  out.transported_difference = big_h * (back * force(s, r2) - force(s, r1));
  out.correction = Vector::Zero(n);
  out.direct = Vector::Zero(n);
  if (r1 != r2) {
    auto lambda_of = [&](double u) { return transport_matrix(law, *gs, u, r1).H; };
    const std::vector<double> nodes = simpson_nodes(r1, r2, panels);
    for (int k = 0; k <= panels; ++k) {
      const double u = nodes[static_cast<std::size_t>(k)];
      const Matrix lam = lambda_of(u);
      const Vector gd = gs->tangent(u);
      const Vector f = force(s, u);
      const Tensor g = m.christoffel(gs->point(u));
      // The lower slot of Lambda moves with u; its correction is -Lambda Gamma(., gamma').
      const Matrix dlam_du = derivative_in(lambda_of, u, h, range.lo, range.hi) - lam * gamma_matrix(g, gd);
      const Vector tf = apply_torsion(torsion_tensor(m, gs->point(u)), f, gd);
      const double w = simpson_weight(k, panels);
      out.correction += w * (lam * tf - dlam_du * f);
      out.direct += w * (lam * (force_derivative(m, *gs, force, s, u, h) + tf));
    }
    const double scale = (r2 - r1) / panels / 3.0;
    out.correction = big_h * out.correction * scale;
    out.direct = big_h * out.direct * scale;
  }
  out.total = out.transported_difference + out.correction;
  return out;
}

InfinitesimalResidual infinitesimal_deviation_equation_residual(const Manifold& m, const TransportLaw& law,
                                                                const DeviationScenario& scn, double s,
                                                                const FamilyForceFn& force, double h_s,
                                                                const MotionOptions& opts) {
  const double h = opts.h_fd;
  require_fixed_limits(scn, s, h);
  const int n = m.dim();
  const double r1 = scn.r_prime(s), dr = scn.r_dprime(s) - r1;
  const CurvePtr gs = scn.gamma(s);
  const Vector p = gs->point(r1);
  const Vector gd = gs->tangent(r1);
  const Vector gp = scn.family_velocity(s, r1, h);
  const Vector zeta = dr * gd;
  const Vector dzeta = dr * family_tangent_derivative(m, scn, *gs, s, r1, h);
  const Vector f = force ? force(s, r1) : Vector::Zero(n);
  const Vector df = force ? force_derivative(m, *gs, force, s, r1, h) : Vector::Zero(n);
  const Tensor tor = torsion_tensor(m, p);

  InfinitesimalResidual out;
  out.rhs = apply_curvature(curvature_tensor(m, p, opts.derivative), gp, zeta, gp) + dr * df +
            apply_torsion(tor, f, zeta) +
            apply_torsion_derivative(torsion_derivative(m, p, opts.derivative), gp, gp, zeta) +
            apply_torsion(tor, gp, dzeta);
  out.lhs = fd_second_deviation(scn, law, s, h_s, opts.panels);
  out.residual = (out.lhs - out.rhs).norm();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CurvePtr reparameterize(CurvePtr c, double span) {
  if (span == 1.0) return c;
  return std::make_shared<AnalyticCurve>(
      c->id(), Interval{0.0, span}, c->dim(), [c, span](double t) { return c->point(t / span); },
      [c, span](double t) { return Vector(c->tangent(t / span) / span); });
}

CurvePtr connector_curve(const ManifoldPtr& m, ConnectorKind kind, const Vector& a, const Vector& b, double span,
                         const ShootingOptions& shooting, const std::string& id) {
  CurvePtr c = kind == ConnectorKind::Geodesic ? CurvePtr(shoot_geodesic(*m, a, b, shooting, id))
                                               : make_segment(id, a, b);
  return reparameterize(std::move(c), span);
}

ScalarFn constant(double v) {
  return [v](double) { return v; };
}

}  // namespace

DeviationScenario make_connector_scenario(ManifoldPtr m, CurvePtr x1, CurvePtr x2, CurvePtr x, Interval s_range,
                                          const ConnectorOptions& opts, bool observer_is_x1) {
  if (!(opts.gamma_span > 0.0) || !(opts.eta_span > 0.0))
    throw Error(ErrorKind::Argument, "connector spans must be positive");
  DeviationScenario scn;
  scn.name = "connectors";
  scn.dim = m->dim();
  scn.s_range = s_range;
  scn.x1 = x1;
  scn.x2 = x2;
  scn.tau1 = opts.tau1;
  scn.tau2 = opts.tau2;
  const ScalarFn tau1 = opts.tau1 ? opts.tau1 : ScalarFn([](double s) { return s; });
  const ScalarFn tau2 = opts.tau2 ? opts.tau2 : ScalarFn([](double s) { return s; });
  scn.gamma = [m, x1, x2, opts, tau1, tau2](double s) {
    std::ostringstream id;
    id << "gamma_s(" << s << ")";
    return connector_curve(m, opts.gamma, x1->point(tau1(s)), x2->point(tau2(s)), opts.gamma_span, opts.shooting,
                           id.str());
  };
  scn.r_prime = constant(0.0);
  scn.r_dprime = constant(opts.gamma_span);
  if (observer_is_x1) {
    if (opts.tau1) {
      ScalarFn rate = opts.tau1_rate;
      if (!rate) rate = [tau1](double s) { return (tau1(s + 1e-6) - tau1(s - 1e-6)) / 2e-6; };
      scn.x = std::make_shared<AnalyticCurve>(
          "observer", s_range, x1->dim(), [x1, tau1](double s) { return x1->point(tau1(s)); },
          [x1, tau1, rate](double s) { return Vector(x1->tangent(tau1(s)) * rate(s)); });
    } else {
      scn.x = x1;
    }
    scn.eta = [x1, tau1](double s) { return make_point_curve("eta_s", x1->point(tau1(s))); };
    scn.t_prime = constant(0.0);
    scn.t_dprime = constant(0.0);
  } else {
    scn.x = x;
    scn.eta = [m, x1, x, opts, tau1](double s) {
      std::ostringstream id;
      id << "eta_s(" << s << ")";
      return connector_curve(m, opts.eta, x1->point(tau1(s)), x->point(s), opts.eta_span, opts.shooting, id.str());
    };
    scn.t_prime = constant(0.0);
    scn.t_dprime = constant(opts.eta_span);
  }
  return scn;
}

DeviationScenario make_congruence_scenario(const Congruence& cong, double v1, double v2, Interval u_range) {
  DeviationScenario scn;
  scn.name = "congruence";
  scn.dim = cong.dim();
  scn.s_range = u_range;
  scn.x1 = cong.u_line(v1, u_range);
  scn.x2 = cong.u_line(v2, u_range);
  scn.x = scn.x1;
  const Interval v_range{std::min(v1, v2), std::max(v1, v2)};
  scn.gamma = [cong, v_range](double u) { return cong.v_line(u, v_range); };
  scn.eta = [cong, v1](double u) { return make_point_curve("eta_u", cong.point(u, v1)); };
  scn.r_prime = constant(v1);
  scn.r_dprime = constant(v2);
  scn.t_prime = constant(0.0);
  scn.t_dprime = constant(0.0);
  scn.gamma_s_velocity = [cong](double u, double v) { return cong.U(u, v); };
  return scn;
}

ForcedFamily::ForcedFamily(ManifoldPtr m, PointFn chi, PointFn phi, FamilyForce force, Interval s_range,
                           Interval r_range, double s_step, int r_nodes)
    : m_(std::move(m)), force_(std::move(force)), s_range_(s_range), r_range_(r_range) {
  if (r_nodes < 2) throw Error(ErrorKind::Argument, "forced family: need at least 2 r nodes");
  if (!(r_range_.hi > r_range_.lo)) throw Error(ErrorKind::Argument, "forced family: empty r range");
  const int nn = r_nodes - 1;
  const double mid = 0.5 * (r_range_.lo + r_range_.hi);
  const double half = 0.5 * r_range_.length();
  for (int j = 0; j <= nn; ++j) {
    const double r = mid + half * std::cos(std::numbers::pi * j / nn);
    nodes_.push_back(r);
    double w = (j % 2) ? -1.0 : 1.0;
    if (j == 0 || j == nn) w *= 0.5;
    weights_.push_back(w);
    auto member_force = [this, r](double s, const Vector& x, const Vector& u) {
      return force_ ? force_(s, r, x, u) : Vector(Vector::Zero(x.size()));
    };
    std::ostringstream id;
    id << "family member r=" << r;
    members_.push_back(integrate_forced(*m_, chi(r), phi(r), member_force, s_range_, s_step, id.str()));
  }
  // Differentiation matrix of the interpolant at its own nodes.
  const auto count = static_cast<Eigen::Index>(nodes_.size());
  diff_ = Matrix::Zero(count, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      diff_(i, j) = (weights_[uj] / weights_[ui]) / (nodes_[ui] - nodes_[uj]);
      diff_(i, i) -= diff_(i, j);
    }
  }
}

Vector ForcedFamily::interpolate(double s, double r, bool velocity, bool derivative) const {
  const auto count = static_cast<Eigen::Index>(nodes_.size());
  Vector basis = Vector::Zero(count);
  bool at_node = false;
  for (Eigen::Index j = 0; j < count && !at_node; ++j)
    if (r == nodes_[static_cast<std::size_t>(j)]) {
      basis[j] = 1.0;
      at_node = true;
    }
  if (!at_node) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      basis[j] = weights_[uj] / (r - nodes_[uj]);
    }
    basis /= basis.sum();
  }
  // The derivative of the interpolant is the interpolant of D y.
  const Vector coeff = derivative ? Vector(diff_.transpose() * basis) : basis;
  Vector out = Vector::Zero(m_->dim());
  for (Eigen::Index j = 0; j < count; ++j) {
    if (coeff[j] == 0.0) continue;
    const auto& mem = *members_[static_cast<std::size_t>(j)];
    out += coeff[j] * (velocity ? mem.tangent(s) : mem.point(s));
  }
  return out;
}

Vector ForcedFamily::point(double s, double r) const { return interpolate(s, r, false, false); }
Vector ForcedFamily::s_velocity(double s, double r) const { return interpolate(s, r, true, false); }
Vector ForcedFamily::r_velocity(double s, double r) const { return interpolate(s, r, false, true); }

Vector ForcedFamily::force(double s, double r) const {
  if (!force_) return Vector::Zero(m_->dim());
  return force_(s, r, point(s, r), s_velocity(s, r));
}

CurvePtr ForcedFamily::connector(double s) const {
  auto self = shared_from_this();
  std::ostringstream id;
  id << "gamma_s(" << s << ")";
  return std::make_shared<AnalyticCurve>(
      id.str(), r_range_, m_->dim(), [self, s](double r) { return self->point(s, r); },
      [self, s](double r) { return self->r_velocity(s, r); });
}

DeviationScenario make_forced_family_scenario(std::shared_ptr<const ForcedFamily> family, double r1, double r2,
                                              const ObserverSpec& observer) {
  if (!family->r_range().contains(r1, 0.0) || !family->r_range().contains(r2, 0.0))
    throw Error(ErrorKind::Argument, "forced family scenario: r', r'' must lie in the family's r range");
  DeviationScenario scn;
  scn.name = "forced_family";
  scn.dim = family->manifold()->dim();
  scn.s_range = family->s_range();
  auto line = [family](double r, const char* id) -> CurvePtr {
    return std::make_shared<AnalyticCurve>(
        id, family->s_range(), family->manifold()->dim(), [family, r](double s) { return family->point(s, r); },
        [family, r](double s) { return family->s_velocity(s, r); });
  };
  scn.x1 = line(r1, "x1");
  scn.x2 = line(r2, "x2");
  scn.gamma = [family](double s) { return family->connector(s); };
  scn.gamma_s_velocity = [family](double s, double r) { return family->s_velocity(s, r); };
  scn.r_prime = constant(r1);
  scn.r_dprime = constant(r2);
  scn.t_prime = constant(0.0);
  if (observer.is_x1) {
    scn.x = scn.x1;
    const CurvePtr x1 = scn.x1;
    scn.eta = [x1](double s) { return make_point_curve("eta_s", x1->point(s)); };
    scn.t_dprime = constant(0.0);
  } else {
    const double span = observer.eta_span;
    if (!(span > 0.0)) throw Error(ErrorKind::Argument, "observer connector span must be positive");
    scn.x = integrate_forced(*family->manifold(), observer.x0, observer.u0, observer.force, family->s_range(),
                             observer.step, "observer");
    const CurvePtr x1 = scn.x1, x = scn.x;
    scn.eta = [x1, x, span](double s) { return reparameterize(make_segment("eta_s", x1->point(s), x->point(s)), span); };
    scn.t_dprime = constant(span);
  }
  return scn;
}

}  // namespace pathdev
