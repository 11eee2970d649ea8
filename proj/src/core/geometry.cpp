#include "pathdev/geometry.hpp"

#include <sstream>

namespace pathdev {

VectorField make_expression_field(const std::vector<std::string>& components) {
  const int n = static_cast<int>(components.size());
  if (n == 0) throw Error(ErrorKind::Argument, "vector field needs at least one component");
  auto exprs = std::make_shared<std::vector<Expression>>();
  auto grads = std::make_shared<std::vector<Expression>>();
  for (const auto& c : components) exprs->push_back(Expression::parse_coordinates(c, n));
  for (const auto& e : *exprs)
    for (int k = 0; k < n; ++k) grads->push_back(e.derivative(static_cast<std::size_t>(k)));
  VectorField f;
  f.value = [exprs, n](const Vector& x) {
    Vector v(n);
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < n; ++i) v[i] = (*exprs)[static_cast<std::size_t>(i)](xs);
    return v;
  };
  f.jacobian = [grads, n](const Vector& x) {
    Matrix j(n, n);
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) j(i, k) = (*grads)[static_cast<std::size_t>(i * n + k)](xs);
    return j;
  };
  f.differentiability = 1000;
  return f;
}

Vector contract_gamma(const Tensor& gamma, const Vector& a, const Vector& b) {
  const int n = gamma.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (a[j] == 0.0) continue;
      for (int k = 0; k < n; ++k) acc += gamma(i, j, k) * a[j] * b[k];
    }
    out[i] = acc;
  }
  return out;
}

Vector apply_torsion(const Tensor& torsion, const Vector& x, const Vector& y) {
  return contract_gamma(torsion, x, y);
}

Vector apply_curvature(const Tensor& r, const Vector& x, const Vector& y, const Vector& z) {
  const int n = r.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out[i] += r(i, j, k, l) * z[j] * x[k] * y[l];
  return out;
}

Vector apply_torsion_derivative(const Tensor& dt, const Vector& w, const Vector& x, const Vector& y) {
  const int n = dt.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out[i] += dt(i, j, k, l) * x[j] * y[k] * w[l];
  return out;
}

Tensor torsion_tensor(const Manifold& m, const Vector& x) {
  const Tensor g = m.christoffel(x);
  const int n = m.dim();
  Tensor t(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) t(i, j, k) = g(i, k, j) - g(i, j, k);
  return t;
}

namespace {

Tensor christoffel_gradient(const Manifold& m, const Vector& x, const DerivativeOptions& opts) {
  return m.christoffel_derivative(x, opts.fd_step, !opts.prefer_analytic);
}

}  // namespace

Tensor curvature_tensor(const Manifold& m, const Vector& x, const DerivativeOptions& opts) {
  const int n = m.dim();
  const Tensor g = m.christoffel(x);
  const Tensor dg = christoffel_gradient(m, x, opts);
  Tensor r(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (l == k) continue;
          if (l < k) {
            r(i, j, k, l) = -r(i, j, l, k);
            continue;
          }
          double v = dg(i, j, l, k) - dg(i, j, k, l);
          for (int mm = 0; mm < n; ++mm) v += g(mm, j, l) * g(i, mm, k) - g(mm, j, k) * g(i, mm, l);
          r(i, j, k, l) = v;
        }
  return r;
}

Tensor torsion_derivative(const Manifold& m, const Vector& x, const DerivativeOptions& opts) {
  const int n = m.dim();
  const Tensor g = m.christoffel(x);
  const Tensor dg = christoffel_gradient(m, x, opts);
  const Tensor t = torsion_tensor(m, x);
  Tensor out(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = dg(i, k, j, l) - dg(i, j, k, l);
          for (int a = 0; a < n; ++a)
            v += g(i, a, l) * t(a, j, k) - g(a, j, l) * t(i, a, k) - g(a, k, l) * t(i, j, a);
          out(i, j, k, l) = v;
        }
  return out;
}

Vector directional_derivative(const Manifold& m, const Vector& direction, const VectorField& y, const Vector& x,
                              double fd_step) {
  if (y.jacobian) return y.jacobian(x) * direction;
  const int n = m.dim();
  Vector out = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (direction[k] == 0.0) continue;
    Vector xp = x, xm = x;
    xp[k] += fd_step;
    xm[k] -= fd_step;
    if (!m.contains(xp) || !m.contains(xm)) {
      std::ostringstream os;
      os << "covariant derivative: stencil of step " << fd_step << " around (" << x.transpose()
         << ") leaves the domain of '" << m.name() << "'";
      throw StencilError(os.str());
    }
    out += direction[k] * (y(xp) - y(xm)) / (2.0 * fd_step);
  }
  return out;
}

Vector covariant_derivative(const Manifold& m, const Vector& direction, const VectorField& y, const Vector& x,
                            double fd_step) {
  m.require_inside(x, "covariant_derivative");
  return directional_derivative(m, direction, y, x, fd_step) + contract_gamma(m.christoffel(x), y(x), direction);
}

Vector covariant_derivative(const Manifold& m, const VectorField& x_field, const VectorField& y, const Vector& x,
                            double fd_step) {
  return covariant_derivative(m, x_field(x), y, x, fd_step);
}

}  // namespace pathdev
