#include "pathdev/transport.hpp"

#include "pathdev/geometry.hpp"

#include <cmath>
#include <sstream>

namespace pathdev {

TransportLaw::TransportLaw(TransportKind kind, ManifoldPtr manifold, double step)
    : kind_(kind), manifold_(std::move(manifold)), step_(step) {
  if (!(step_ > 0.0) || !std::isfinite(step_))
    throw Error(ErrorKind::Argument, "transport law: integrator step must be positive");
  if (kind_ == TransportKind::Parallel && !manifold_)
    throw Error(ErrorKind::Argument, "parallel transport needs a manifold");
}

TransportLaw TransportLaw::parallel(ManifoldPtr manifold, double step) {
  return TransportLaw(TransportKind::Parallel, std::move(manifold), step);
}

TransportLaw TransportLaw::euclidean(double step) { return TransportLaw(TransportKind::Euclidean, nullptr, step); }

TransportLaw TransportLaw::with_step(double step) const { return TransportLaw(kind_, manifold_, step); }

Matrix TransportLaw::generator(const Curve& curve, double t) const {
  const int n = curve.dim();
  if (kind_ == TransportKind::Euclidean) return Matrix::Zero(n, n);
  const Vector x = curve.point(t);
  if (!manifold_->contains(x)) {
    std::ostringstream os;
    os << "transport: curve '" << curve.id() << "' leaves the domain of '" << manifold_->name() << "' at t = " << t;
    throw TruncationError(os.str(), t);
  }
  const Tensor g = manifold_->christoffel(x);
  const Vector v = curve.tangent(t);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += g(i, j, k) * v[k];
      a(i, j) = acc;
    }
  return a;
}

namespace {

int step_count(double length, double step) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(length) / step - 1e-9)));
}

// Classical RK4 for dH/dt = -A(t) H over [s, t].
Matrix integrate_forward(const TransportLaw& law, const Curve& curve, double s, double t) {
  const int n = curve.dim();
  Matrix h = Matrix::Identity(n, n);
  const int steps = step_count(t - s, law.step());
  const double dt = (t - s) / steps;
  for (int k = 0; k < steps; ++k) {
    const double t0 = s + k * dt;
    const double tm = t0 + 0.5 * dt;
    const double t1 = (k + 1 == steps) ? t : s + (k + 1) * dt;
    const Matrix a0 = law.generator(curve, t0);
    const Matrix am = law.generator(curve, tm);
    const Matrix a1 = law.generator(curve, t1);
    const Matrix k1 = -a0 * h;
    const Matrix k2 = -am * (h + 0.5 * dt * k1);
    const Matrix k3 = -am * (h + 0.5 * dt * k2);
    const Matrix k4 = -a1 * (h + dt * k3);
    h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return h;
}

}  // namespace

TransportMatrix transport_matrix(const TransportLaw& law, const Curve& curve, double s, double t) {
  curve.require_parameter(s, "transport_matrix");
  curve.require_parameter(t, "transport_matrix");
  const int n = curve.dim();
  TransportMatrix out{Matrix::Identity(n, n), curve.id(), s, t};
  if (s == t || law.is_identity()) return out;
  if (law.manifold()->dim() != n)
    throw Error(ErrorKind::Argument, "transport_matrix: curve dimension does not match the manifold");
  out.H = integrate_forward(law, curve, s, t);
  return out;
}

TangentVector transport_vector(const TransportLaw& law, const Curve& curve, double s, double t,
                               const TangentVector& u, double base_tolerance) {
  const Vector base = curve.point(s);
  if (u.base_point.size() != base.size() || (u.base_point - base).cwiseAbs().maxCoeff() > base_tolerance) {
    std::ostringstream os;
    os << "transport_vector: base point (" << u.base_point.transpose() << ") is not curve(" << s << ") = ("
       << base.transpose() << ")";
    throw Error(ErrorKind::Argument, os.str());
  }
  return TangentVector{curve.point(t), transport_matrix(law, curve, s, t).H * u.components};
}

double compose_check(const TransportLaw& law, const Curve& curve, double s, double t, double r) {
  const Matrix hts = transport_matrix(law, curve, s, t).H;
  const Matrix hrt = transport_matrix(law, curve, t, r).H;
  const Matrix hrs = transport_matrix(law, curve, s, r).H;
  return max_abs(hrt * hts - hrs);
}

std::vector<Matrix> pullback_sweep(const TransportLaw& law, const Curve& curve, std::span<const double> nodes) {
  const int n = curve.dim();
  std::vector<Matrix> out;
  out.reserve(nodes.size());
  if (nodes.empty()) return out;
  Matrix g = Matrix::Identity(n, n);
  out.push_back(g);
  if (law.is_identity()) {
    out.resize(nodes.size(), g);
    return out;
  }
  for (std::size_t q = 1; q < nodes.size(); ++q) {
    const double a = nodes[q - 1];
    const double b = nodes[q];
    const int steps = step_count(b - a, law.step());
    const double du = (b - a) / steps;
    for (int k = 0; k < steps; ++k) {
      const double u0 = a + k * du;
      const double um = u0 + 0.5 * du;
      const double u1 = (k + 1 == steps) ? b : a + (k + 1) * du;
      const Matrix a0 = law.generator(curve, u0);
      const Matrix am = law.generator(curve, um);
      const Matrix a1 = law.generator(curve, u1);
      const Matrix k1 = g * a0;
      const Matrix k2 = (g + 0.5 * du * k1) * am;
      const Matrix k3 = (g + 0.5 * du * k2) * am;
      const Matrix k4 = (g + du * k3) * a1;
      g += du / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace pathdev
