#include "pathdev/deviation.hpp"

#include <cmath>
#include <sstream>

namespace pathdev {

namespace {

void require_close(const Vector& a, const Vector& b, double tol, const char* identity, double s) {
  const double gap = (a - b).cwiseAbs().maxCoeff();
  if (!(gap <= tol)) {
    std::ostringstream os;
    os << "scenario inconsistency at s = " << s << ": " << identity << " fails by " << gap;
    throw Error(ErrorKind::ScenarioConsistency, os.str());
  }
}

void check_endpoints(const DeviationScenario& scn, double s, const Curve& g, const Curve& e) {
  const Vector p1 = scn.x1->point(scn.tau1_at(s));
  const Vector p2 = scn.x2->point(scn.tau2_at(s));
  require_close(g.point(scn.r_prime(s)), p1, scn.tolerance, "gamma_s(r'_s) = x1(tau1(s))", s);
  require_close(g.point(scn.r_dprime(s)), p2, scn.tolerance, "gamma_s(r''_s) = x2(tau2(s))", s);
  require_close(e.point(scn.t_prime(s)), p1, scn.tolerance, "eta_s(t'_s) = x1(tau1(s))", s);
  require_close(e.point(scn.t_dprime(s)), scn.x->point(s), scn.tolerance, "eta_s(t''_s) = x(s)", s);
}

// Row-major multi-index digits of a flat offset.
std::vector<int> digits_of(std::size_t flat, int dim, int rank) {
  std::vector<int> d(static_cast<std::size_t>(rank));
  for (int r = rank - 1; r >= 0; --r) {
    d[static_cast<std::size_t>(r)] = static_cast<int>(flat % static_cast<std::size_t>(dim));
    flat /= static_cast<std::size_t>(dim);
  }
  return d;
}

std::size_t flat_of(const std::vector<int>& d, int dim) {
  std::size_t off = 0;
  for (int i : d) off = off * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return off;
}

// out += sign * (M applied on slot `pos` of a), contravariant: sum_k M(i,k) a[..k..];
// covariant: sum_k M(k,i) a[..k..].
void add_slot_correction(Tensor& out, const Tensor& a, int pos, const Matrix& m, bool covariant) {
  const int n = a.dim();
  const int rank = a.rank();
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t f = 0; f < dst.size(); ++f) {
    std::vector<int> d = digits_of(f, n, rank);
    const int i = d[static_cast<std::size_t>(pos)];
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      d[static_cast<std::size_t>(pos)] = k;
      acc += (covariant ? m(k, i) : m(i, k)) * src[flat_of(d, n)];
    }
    dst[f] += covariant ? -acc : acc;
  }
}

std::vector<double> simpson_nodes(double a, double b, int panels) {
  std::vector<double> nodes(static_cast<std::size_t>(panels) + 1);
  const double h = (b - a) / panels;
  for (int k = 0; k <= panels; ++k) nodes[static_cast<std::size_t>(k)] = (k == panels) ? b : a + k * h;
  return nodes;
}

double simpson_weight(int k, int panels) { return (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0); }

}  // namespace

void DeviationScenario::validate(double s) const {
  if (!x1 || !x2 || !x || !gamma || !eta || !r_prime || !r_dprime || !t_prime || !t_dprime)
    throw Error(ErrorKind::ScenarioConsistency, "scenario '" + name + "' is incomplete");
  const CurvePtr g = gamma(s);
  const CurvePtr e = eta(s);
  check_endpoints(*this, s, *g, *e);
}

Vector DeviationScenario::family_velocity(double s, double r, double h_fd) const {
  if (gamma_s_velocity) return gamma_s_velocity(s, r);
  return (gamma(s + h_fd)->point(r) - gamma(s - h_fd)->point(r)) / (2.0 * h_fd);
}

bool DeviationScenario::fixed_limits(double s, double h) const {
  return r_prime(s + h) == r_prime(s - h) && r_dprime(s + h) == r_dprime(s - h);
}

TangentVector deviation_vector(const TransportLaw& law, const DeviationScenario& scn, double s, int panels) {
  const CurvePtr g = scn.gamma(s);
  const CurvePtr e = scn.eta(s);
  check_endpoints(scn, s, *g, *e);
  const Vector d = displacement_vector(law, *g, scn.r_prime(s), scn.r_dprime(s), panels).vector.components;
  const Matrix h = transport_matrix(law, *e, scn.t_prime(s), scn.t_dprime(s)).H;
  return TangentVector{scn.x->point(s), h * d};
}

TangentVector infinitesimal_deviation(const DeviationScenario& scn, double s) {
  const CurvePtr g = scn.gamma(s);
  const double r1 = scn.r_prime(s);
  return TangentVector{g->point(r1), (scn.r_dprime(s) - r1) * g->tangent(r1)};
}

// ---------------------------------------------------------------------------

MultiPointTensor::MultiPointTensor(int dim, int p, int q, std::vector<Anchor> anchors, Tensor components)
    : dim_(dim), p_(p), q_(q), anchors_(std::move(anchors)), components_(std::move(components)) {
  if (p_ < 0 || q_ < 0 || static_cast<int>(anchors_.size()) != p_ + q_)
    throw Error(ErrorKind::Argument, "multipoint tensor: anchor count must equal p + q");
  if (components_.dim() != dim_ || components_.rank() != p_ + q_)
    throw Error(ErrorKind::Argument, "multipoint tensor: component shape must be n^(p+q)");
  for (const auto& a : anchors_)
    if (!a.curve) throw Error(ErrorKind::Argument, "multipoint tensor: anchor without a curve");
}

MultiPointTensor MultiPointTensor::vector(const Vector& v, Anchor at) {
  const int n = static_cast<int>(v.size());
  Tensor t(n, 1);
  for (int i = 0; i < n; ++i) t(i) = v[i];
  return MultiPointTensor(n, 1, 0, {std::move(at)}, std::move(t));
}

MultiPointTensor MultiPointTensor::matrix(const Matrix& m, Anchor upper, Anchor lower) {
  const int n = static_cast<int>(m.rows());
  Tensor t(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(i, j) = m(i, j);
  return MultiPointTensor(n, 1, 1, {std::move(upper), std::move(lower)}, std::move(t));
}

Vector MultiPointTensor::as_vector() const {
  if (p_ + q_ != 1) throw Error(ErrorKind::Argument, "multipoint tensor is not a vector");
  Vector v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = components_(i);
  return v;
}

Matrix MultiPointTensor::as_matrix() const {
  if (p_ + q_ != 2) throw Error(ErrorKind::Argument, "multipoint tensor is not of rank 2");
  Matrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = components_(i, j);
  return m;
}

MultiPointTensor tensor_product(const MultiPointTensor& a, const MultiPointTensor& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::Argument, "tensor_product: dimension mismatch");
  const int n = a.dim();
  const int pa = a.upper(), qa = a.lower(), pb = b.upper(), qb = b.lower();
  const int rank = pa + pb + qa + qb;
  std::vector<Anchor> anchors;
  for (int i = 0; i < pa; ++i) anchors.push_back(a.anchors()[static_cast<std::size_t>(i)]);
  for (int i = 0; i < pb; ++i) anchors.push_back(b.anchors()[static_cast<std::size_t>(i)]);
  for (int i = 0; i < qa; ++i) anchors.push_back(a.anchors()[static_cast<std::size_t>(pa + i)]);
  for (int i = 0; i < qb; ++i) anchors.push_back(b.anchors()[static_cast<std::size_t>(pb + i)]);
  Tensor out(n, rank);
  auto dst = out.data();
  auto sa = a.components().data();
  auto sb = b.components().data();
  for (std::size_t f = 0; f < dst.size(); ++f) {
    const std::vector<int> d = digits_of(f, n, rank);
    std::vector<int> da, db;
    for (int i = 0; i < pa; ++i) da.push_back(d[static_cast<std::size_t>(i)]);
    for (int i = 0; i < qa; ++i) da.push_back(d[static_cast<std::size_t>(pa + pb + i)]);
    for (int i = 0; i < pb; ++i) db.push_back(d[static_cast<std::size_t>(pa + i)]);
    for (int i = 0; i < qb; ++i) db.push_back(d[static_cast<std::size_t>(pa + pb + qa + i)]);
    dst[f] = sa[flat_of(da, n)] * sb[flat_of(db, n)];
  }
  return MultiPointTensor(n, pa + pb, qa + qb, std::move(anchors), std::move(out));
}

MultiPointTensor contract(const MultiPointTensor& t, int a, int b, double tolerance) {
  const int p = t.upper(), q = t.lower(), n = t.dim();
  if (a < 0 || a >= p || b < 0 || b >= q) throw Error(ErrorKind::Argument, "contract: slot out of range");
  const int ua = a, lb = p + b;
  const Vector za = t.anchors()[static_cast<std::size_t>(ua)].point();
  const Vector zb = t.anchors()[static_cast<std::size_t>(lb)].point();
  if ((za - zb).cwiseAbs().maxCoeff() > tolerance)
    throw Error(ErrorKind::Argument, "contract: slots are anchored at different points");
  std::vector<Anchor> anchors;
  for (int i = 0; i < p + q; ++i)
    if (i != ua && i != lb) anchors.push_back(t.anchors()[static_cast<std::size_t>(i)]);
  const int rank = p + q - 2;
  Tensor out(n, rank);
  auto dst = out.data();
  auto src = t.components().data();
  for (std::size_t f = 0; f < dst.size(); ++f) {
    const std::vector<int> d = digits_of(f, n, rank);
    std::vector<int> full;
    full.reserve(static_cast<std::size_t>(p + q));
    std::size_t c = 0;
    for (int i = 0; i < p + q; ++i) full.push_back((i == ua || i == lb) ? 0 : d[c++]);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      full[static_cast<std::size_t>(ua)] = k;
      full[static_cast<std::size_t>(lb)] = k;
      acc += src[flat_of(full, n)];
    }
    dst[f] = acc;
  }
  return MultiPointTensor(n, p - 1, q - 1, std::move(anchors), std::move(out));
}

MultiPointTensor multipoint_covariant_derivative(const Manifold& m, const MultiPointField& field, double s,
                                                 double h_fd) {
  const MultiPointTensor a0 = field(s);
  const MultiPointTensor ap = field(s + h_fd);
  const MultiPointTensor am = field(s - h_fd);
  const int n = a0.dim();
  const int p = a0.upper();
  const int rank = p + a0.lower();
  Tensor out = (1.0 / (2.0 * h_fd)) * (ap.components() - am.components());
  for (int slot = 0; slot < rank; ++slot) {
    const auto idx = static_cast<std::size_t>(slot);
    const Vector z = a0.anchors()[idx].point();
    const Vector zdot = (ap.anchors()[idx].point() - am.anchors()[idx].point()) / (2.0 * h_fd);
    const Tensor g = m.christoffel(z);
    Matrix corr = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) corr(i, k) += g(i, k, l) * zdot[l];
    add_slot_correction(out, a0.components(), slot, corr, slot >= p);
  }
  return MultiPointTensor(n, p, a0.lower(), a0.anchors(), std::move(out));
}

MultiPointTensor observer_transport(const TransportLaw& law, const DeviationScenario& scn, double s) {
  const CurvePtr e = scn.eta(s);
  const double t1 = scn.t_prime(s), t2 = scn.t_dprime(s);
  return MultiPointTensor::matrix(transport_matrix(law, *e, t1, t2).H, Anchor{e, t2}, Anchor{e, t1});
}

MultiPointTensor connector_pullback(const TransportLaw& law, const DeviationScenario& scn, double s, double u) {
  const CurvePtr g = scn.gamma(s);
  const double r1 = scn.r_prime(s);
  return MultiPointTensor::matrix(transport_matrix(law, *g, u, r1).H, Anchor{g, r1}, Anchor{g, u});
}

TangentVector deviation_vector_matrix_form(const TransportLaw& law, const DeviationScenario& scn, double s,
                                           int panels) {
  const CurvePtr g = scn.gamma(s);
  const CurvePtr e = scn.eta(s);
  check_endpoints(scn, s, *g, *e);
  const double r1 = scn.r_prime(s), r2 = scn.r_dprime(s);
  const int n = scn.x->dim();
  const double t1 = scn.t_prime(s), t2 = scn.t_dprime(s);
  const MultiPointTensor big_h =
      MultiPointTensor::matrix(transport_matrix(law, *e, t1, t2).H, Anchor{e, t2}, Anchor{e, t1});
  Vector integral = Vector::Zero(n);
  if (r1 != r2) {
    if (panels == 0) panels = default_panels(law, r1, r2);
    panels += panels % 2;
    const std::vector<double> nodes = simpson_nodes(r1, r2, panels);
    for (int k = 0; k <= panels; ++k) {
      const double u = nodes[static_cast<std::size_t>(k)];
      const MultiPointTensor lambda =
          MultiPointTensor::matrix(transport_matrix(law, *g, u, r1).H, Anchor{g, r1}, Anchor{g, u});
      const MultiPointTensor tangent = MultiPointTensor::vector(g->tangent(u), Anchor{g, u});
      integral += simpson_weight(k, panels) * contract(tensor_product(lambda, tangent), 1, 0).as_vector();
    }
    integral *= (r2 - r1) / panels / 3.0;
  }
  const MultiPointTensor carried = MultiPointTensor::vector(integral, Anchor{g, r1});
  const Vector h = contract(tensor_product(big_h, carried), 1, 0, 10.0 * scn.tolerance).as_vector();
  return TangentVector{scn.x->point(s), h};
}

// ---------------------------------------------------------------------------

BasicEquationTerms basic_equation_terms(const Manifold& m, const VectorField& u, const VectorField& xi,
                                        const Vector& x, double h_fd) {
  if (!(h_fd > 0.0)) throw Error(ErrorKind::Argument, "basic_equation: fd step must be positive");
  auto cov_field = [&m, h_fd](const VectorField& dir, const VectorField& y) {
    return VectorField{[&m, dir, y, h_fd](const Vector& p) { return covariant_derivative(m, dir(p), y, p, h_fd); },
                       {},
                       1};
  };
  const VectorField nabla_u_xi = cov_field(u, xi);
  const VectorField accel = cov_field(u, u);
  const VectorField torsion_field{[&m, u, xi](const Vector& p) { return apply_torsion(torsion_tensor(m, p), u(p), xi(p)); },
                                  {},
                                  1};
  const VectorField bracket{[&m, u, xi, h_fd](const Vector& p) {
                              return Vector(directional_derivative(m, u(p), xi, p, h_fd) -
                                            directional_derivative(m, xi(p), u, p, h_fd));
                            },
                            {},
                            1};
  const Vector ux = u(x);
  const Vector xix = xi(x);
  BasicEquationTerms out;
  out.lhs = covariant_derivative(m, ux, nabla_u_xi, x, h_fd);
  DerivativeOptions opts;
  out.curvature = apply_curvature(curvature_tensor(m, x, opts), ux, xix, ux);
  out.acceleration = covariant_derivative(m, xix, accel, x, h_fd);
  out.torsion = covariant_derivative(m, ux, torsion_field, x, h_fd);
  out.bracket_u = covariant_derivative(m, ux, bracket, x, h_fd);
  out.bracket_xi = covariant_derivative(m, bracket(x), u, x, h_fd);
  out.residual =
      (out.lhs - out.curvature - out.acceleration - out.torsion - out.bracket_u - out.bracket_xi).norm();
  return out;
}

double basic_equation_residual(const Manifold& m, const VectorField& u, const VectorField& xi, const Vector& x,
                               double h_fd) {
  return basic_equation_terms(m, u, xi, x, h_fd).residual;
}

// ---------------------------------------------------------------------------

namespace {

struct PointGeometry {
  Vector u;
  Tensor gamma, torsion, curvature, dtorsion;
};

PointGeometry geometry_at(const Manifold& m, const Curve& base, double t, const DerivativeOptions& opts) {
  const Vector x = base.point(t);
  if (!m.contains(x)) {
    std::ostringstream os;
    os << "geodesic deviation: base curve leaves the domain of '" << m.name() << "' at u = " << t;
    throw TruncationError(os.str(), t);
  }
  return PointGeometry{base.tangent(t), m.christoffel(x), torsion_tensor(m, x), curvature_tensor(m, x, opts),
                       torsion_derivative(m, x, opts)};
}

void jacobi_rhs(const PointGeometry& g, const Vector& h, const Vector& w, Vector& dh, Vector& dw) {
  dh = w - contract_gamma(g.gamma, h, g.u);
  dw = apply_curvature(g.curvature, g.u, h, g.u) + apply_torsion_derivative(g.dtorsion, g.u, g.u, h) +
       apply_torsion(g.torsion, g.u, w) - contract_gamma(g.gamma, w, g.u);
}

}  // namespace

std::vector<JacobiState> integrate_geodesic_deviation(const Manifold& m, const Curve& base, const Vector& h0,
                                                      const Vector& dh0, Interval interval, double step,
                                                      const DerivativeOptions& opts) {
  if (!(step > 0.0)) throw Error(ErrorKind::Argument, "geodesic deviation: step must be positive");
  if (h0.size() != m.dim() || dh0.size() != m.dim())
    throw Error(ErrorKind::Argument, "geodesic deviation: initial data dimension mismatch");
  base.require_parameter(interval.lo, "integrate_geodesic_deviation");
  base.require_parameter(interval.hi, "integrate_geodesic_deviation");
  const int steps = std::max(1, static_cast<int>(std::ceil(interval.length() / step - 1e-9)));
  const double du = interval.length() / steps;

  std::vector<JacobiState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back({interval.lo, h0, dh0});
  Vector h = h0, w = dh0;
  PointGeometry g0 = geometry_at(m, base, interval.lo, opts);
  for (int k = 0; k < steps; ++k) {
    const double t0 = interval.lo + k * du;
    const double t1 = (k + 1 == steps) ? interval.hi : interval.lo + (k + 1) * du;
    const PointGeometry gm = geometry_at(m, base, t0 + 0.5 * du, opts);
    PointGeometry g1 = geometry_at(m, base, t1, opts);
    Vector k1h, k1w, k2h, k2w, k3h, k3w, k4h, k4w;
    jacobi_rhs(g0, h, w, k1h, k1w);
    jacobi_rhs(gm, h + 0.5 * du * k1h, w + 0.5 * du * k1w, k2h, k2w);
    jacobi_rhs(gm, h + 0.5 * du * k2h, w + 0.5 * du * k2w, k3h, k3w);
    jacobi_rhs(g1, h + du * k3h, w + du * k3w, k4h, k4w);
    h += du / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
    w += du / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    out.push_back({t1, h, w});
    g0 = std::move(g1);
  }
  return out;
}

LambdaFactor lambda_factor(const std::function<double(double, double)>& g, double u, double v1, double v2,
                           int panels, bool g_depends_on_u, double h_u) {
  if (panels < 2) throw Error(ErrorKind::Argument, "lambda_factor: need at least 2 panels");
  panels += panels % 2;
  auto lambda_at = [&](double uu) {
    if (v1 == v2) return 0.0;
    const double dv = (v2 - v1) / panels;
    double inner = 0.0;
    double prev = g(uu, v1);
    double acc = 1.0;  // exp(0) at v1
    for (int k = 1; k <= panels; ++k) {
      const double a = v1 + (k - 1) * dv;
      const double b = (k == panels) ? v2 : v1 + k * dv;
      const double gb = g(uu, b);
      inner += (b - a) / 6.0 * (prev + 4.0 * g(uu, 0.5 * (a + b)) + gb);
      prev = gb;
      acc += simpson_weight(k, panels) * std::exp(inner);
    }
    return acc * dv / 3.0;
  };
  LambdaFactor out;
  out.lambda = lambda_at(u);
  if (g_depends_on_u && v1 != v2) {
    const double lp = lambda_at(u + h_u);
    const double lm = lambda_at(u - h_u);
    out.d1 = (lp - lm) / (2.0 * h_u);
    out.d2 = (lp - 2.0 * out.lambda + lm) / (h_u * h_u);
  }
  return out;
}

double congruence_geodesic_factor(const Manifold& m, const Congruence& cong, double u, double v, bool along_u,
                                  double fd_step) {
  const Vector w = along_u ? cong.U(u, v) : cong.V(u, v);
  const Vector dw = along_u ? (cong.U(u + fd_step, v) - cong.U(u - fd_step, v)) / (2.0 * fd_step)
                            : (cong.V(u, v + fd_step) - cong.V(u, v - fd_step)) / (2.0 * fd_step);
  const Vector acc = dw + contract_gamma(m.christoffel(cong.point(u, v)), w, w);
  const double ww = w.squaredNorm();
  if (ww == 0.0) throw Error(ErrorKind::Degenerate, "congruence_geodesic_factor: zero tangent");
  return acc.dot(w) / ww;
}

Vector geodesic_deviation_rhs_general(const Manifold& m, const Congruence& cong, double u, double v1, double v2,
                                      const SurfaceScalarFn& f, const SurfaceScalarFn& g,
                                      const DeviationRhsOptions& opts) {
  const double e = opts.fd_step;
  const LambdaFactor lf = lambda_factor(g, u, v1, v2, opts.lambda_panels, opts.g_depends_on_u);
  if (lf.lambda == 0.0)
    throw Error(ErrorKind::Degenerate, "deviation rhs: lambda vanishes (v1 = v2), the scaling is degenerate");
  const double lam = lf.lambda, l1 = lf.d1 / lam, l2 = lf.d2 / lam;

  const Vector x = cong.point(u, v1);
  const Vector uu = cong.U(u, v1);
  const Vector vv = cong.V(u, v1);
  const Tensor gam = m.christoffel(x);
  const Tensor tor = torsion_tensor(m, x);
  const Tensor cur = curvature_tensor(m, x, opts.derivative);

  const Vector dv_du = (cong.V(u + e, v1) - cong.V(u - e, v1)) / (2.0 * e) + contract_gamma(gam, vv, uu);
  const Vector h = lam * vv;
  const Vector dh = lf.d1 * vv + lam * dv_du;

  Vector rhs = apply_curvature(cur, uu, h, uu) + l1 * (2.0 * dh - 2.0 * l1 * h + apply_torsion(tor, h, uu)) + l2 * h;

  if (opts.form == CongruenceForm::BothGeodesic) {
    if (!f) throw Error(ErrorKind::Argument, "deviation rhs: both-geodesic form needs f");
    const Tensor dtor = torsion_derivative(m, x, opts.derivative);
    auto fu = [&](double vq) { return Vector(f(u, vq) * cong.U(u, vq)); };
    const Vector nabla_v_fu = (fu(v1 + e) - fu(v1 - e)) / (2.0 * e) + contract_gamma(gam, fu(v1), vv);
    rhs += f(u, v1) * apply_torsion(tor, uu, h) + apply_torsion_derivative(dtor, uu, uu, h) +
           apply_torsion(tor, uu, dh) + lam * nabla_v_fu;
  } else {
    // nabla_U (T(U, h)) along the u-line, h(u') = lambda(u') V(u', v1).
    auto tuh = [&](double uq) {
      const double dl = uq - u;
      const double lam_q = lam + lf.d1 * dl + 0.5 * lf.d2 * dl * dl;
      return apply_torsion(torsion_tensor(m, cong.point(uq, v1)), cong.U(uq, v1), Vector(lam_q * cong.V(uq, v1)));
    };
    const Vector nabla_u_tuh = (tuh(u + e) - tuh(u - e)) / (2.0 * e) + contract_gamma(gam, tuh(u), uu);
    auto accel = [&](double vq) {
      const Vector du = (cong.U(u + e, vq) - cong.U(u - e, vq)) / (2.0 * e);
      const Vector uq = cong.U(u, vq);
      return Vector(du + contract_gamma(m.christoffel(cong.point(u, vq)), uq, uq));
    };
    const Vector nabla_v_acc = (accel(v1 + e) - accel(v1 - e)) / (2.0 * e) + contract_gamma(gam, accel(v1), vv);
    rhs += nabla_u_tuh + lam * nabla_v_acc;
  }
  return rhs;
}

}  // namespace pathdev
