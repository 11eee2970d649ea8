#include "pathdev/displacement.hpp"

#include <cmath>
#include <limits>

namespace pathdev {

int default_panels(const TransportLaw& law, double s, double t) {
  int n = static_cast<int>(std::ceil(std::abs(t - s) / law.step() - 1e-9));
  n = std::max(n, 2);
  return n + (n % 2);
}

DisplacementVector displacement_vector(const TransportLaw& law, const Curve& gamma, double s, double t,
                                       int panels) {
  gamma.require_parameter(s, "displacement_vector");
  gamma.require_parameter(t, "displacement_vector");
  const int n = gamma.dim();
  DisplacementVector out{s, t, TangentVector{gamma.point(s), Vector::Zero(n)}};
  if (s == t) return out;
  if (panels < 0) throw Error(ErrorKind::Argument, "displacement_vector: panel count must be non-negative");
  if (panels == 0) panels = default_panels(law, s, t);
  panels += panels % 2;

  std::vector<double> nodes(static_cast<std::size_t>(panels) + 1);
  const double h = (t - s) / panels;
  for (int k = 0; k <= panels; ++k) nodes[static_cast<std::size_t>(k)] = (k == panels) ? t : s + k * h;
  const std::vector<Matrix> pull = pullback_sweep(law, gamma, nodes);

  Vector acc = Vector::Zero(n);
  for (int k = 0; k <= panels; ++k) {
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const auto q = static_cast<std::size_t>(k);
    acc += w * (pull[q] * gamma.tangent(nodes[q]));
  }
  out.vector.components = acc * (h / 3.0);
  return out;
}

double composition_residual(const TransportLaw& law, const Curve& gamma, double r, double s, double t,
                            int panels) {
  if (r == s && s == t) return 0.0;
  const Vector drs = displacement_vector(law, gamma, r, s, panels).vector.components;
  const Vector drt = displacement_vector(law, gamma, r, t, panels).vector.components;
  const Vector dts = displacement_vector(law, gamma, t, s, panels).vector.components;
  const Matrix hrt = transport_matrix(law, gamma, t, r).H;
  return (drs - drt - hrt * dts).norm();
}

TangentVector infinitesimal_displacement(const Curve& gamma, double s, double t) {
  gamma.require_parameter(s, "infinitesimal_displacement");
  gamma.require_parameter(t, "infinitesimal_displacement");
  return TangentVector{gamma.point(s), (t - s) * gamma.tangent(s)};
}

RecoveryResult coordinate_recovery_check(const TransportLaw& law, const Curve& gamma, double s, int samples,
                                         int panels) {
  if (samples < 3) throw Error(ErrorKind::Argument, "coordinate_recovery_check: need at least 3 samples");
  const Interval iv = gamma.interval();
  RecoveryResult out;
  std::vector<Vector> d;
  for (int k = 0; k < samples; ++k) {
    const double t = iv.lo + iv.length() * k / (samples - 1);
    out.samples.push_back(t);
    d.push_back(displacement_vector(law, gamma, s, t, panels).vector.components);
  }
  std::size_t far = 0;
  for (std::size_t k = 1; k < d.size(); ++k)
    if (d[k].norm() > d[far].norm()) far = k;
  if (d[far].norm() == 0.0) {
    out.monotone = false;
    out.max_inversion_error = std::numeric_limits<double>::infinity();
    return out;
  }
  const Vector e = d[far].normalized();
  auto phi = [&](double t) { return displacement_vector(law, gamma, s, t, panels).vector.components.dot(e); };

  std::vector<double> values;
  for (const auto& dk : d) values.push_back(dk.dot(e));
  const double direction = values.back() >= values.front() ? 1.0 : -1.0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (direction * (values[k] - values[k - 1]) <= 0.0) out.monotone = false;

  for (std::size_t k = 0; k < values.size(); ++k) {
    const double target = values[k];
    double lo = iv.lo, hi = iv.hi;
    for (int it = 0; it < 60 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (direction * (phi(mid) - target) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    const double t_rec = 0.5 * (lo + hi);
    out.recovered.push_back(t_rec);
    out.max_inversion_error = std::max(out.max_inversion_error, std::abs(t_rec - out.samples[k]));
  }
  return out;
}

}  // namespace pathdev
