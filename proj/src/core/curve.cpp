#include "pathdev/curve.hpp"

#include "pathdev/expression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pathdev {

void Curve::require_parameter(double t, const char* what) const {
  if (!std::isfinite(t) || !interval_.contains(t, 1e-12 * (1.0 + std::abs(t)))) {
    std::ostringstream os;
    os << what << ": parameter " << t << " outside [" << interval_.lo << ", " << interval_.hi << "] of curve '"
       << id_ << "'";
    throw Error(ErrorKind::Argument, os.str());
  }
}

AnalyticCurve::AnalyticCurve(std::string id, Interval interval, int dim, PointFn point, PointFn tangent,
                             double fd_step)
    : Curve(std::move(id), interval, dim), point_(std::move(point)), tangent_(std::move(tangent)), fd_step_(fd_step) {
  if (!point_) throw Error(ErrorKind::Argument, "analytic curve needs a point function");
}

Vector AnalyticCurve::point(double t) const { return point_(t); }

Vector AnalyticCurve::tangent(double t) const {
  if (tangent_) return tangent_(t);
  return (point_(t + fd_step_) - point_(t - fd_step_)) / (2.0 * fd_step_);
}

CurvePtr make_expression_curve(std::string id, const std::vector<std::string>& components, Interval interval,
                               const std::string& parameter) {
  const int n = static_cast<int>(components.size());
  if (n == 0) throw Error(ErrorKind::Argument, "curve '" + id + "' has no components");
  auto exprs = std::make_shared<std::vector<Expression>>();
  auto diffs = std::make_shared<std::vector<Expression>>();
  for (const auto& c : components) {
    exprs->push_back(Expression::parse(c, {parameter}));
    diffs->push_back(exprs->back().derivative(0));
  }
  auto eval = [n](const std::shared_ptr<std::vector<Expression>>& e) {
    return [e, n](double t) {
      Vector v(n);
      const double args[1] = {t};
      for (int i = 0; i < n; ++i) v[i] = (*e)[static_cast<std::size_t>(i)](args);
      return v;
    };
  };
  return std::make_shared<AnalyticCurve>(std::move(id), interval, n, eval(exprs), eval(diffs));
}

CurvePtr make_segment(std::string id, const Vector& a, const Vector& b) {
  const Vector d = b - a;
  return std::make_shared<AnalyticCurve>(
      std::move(id), Interval{0.0, 1.0}, static_cast<int>(a.size()), [a, d](double t) -> Vector { return a + t * d; },
      [d](double) -> Vector { return d; });
}

CurvePtr make_point_curve(std::string id, const Vector& p, Interval interval) {
  const auto n = p.size();
  return std::make_shared<AnalyticCurve>(
      std::move(id), interval, static_cast<int>(n), [p](double) -> Vector { return p; },
      [n](double) -> Vector { return Vector::Zero(n); });
}

IntegratedCurve::IntegratedCurve(std::string id, std::vector<double> nodes, std::vector<Vector> position,
                                 std::vector<Vector> velocity, std::vector<Vector> acceleration)
    : Curve(std::move(id), Interval{nodes.front(), nodes.back()}, static_cast<int>(position.front().size())),
      nodes_(std::move(nodes)),
      x_(std::move(position)),
      v_(std::move(velocity)),
      a_(std::move(acceleration)) {
  if (nodes_.size() < 2 || x_.size() != nodes_.size() || v_.size() != nodes_.size() || a_.size() != nodes_.size())
    throw Error(ErrorKind::Argument, "integrated curve: inconsistent node data");
}

std::size_t IntegratedCurve::locate(double t, double& theta, double& h) const {
  require_parameter(t, "integrated curve");
  // Uniform grid; clamp to the last cell.
  const double h0 = nodes_[1] - nodes_[0];
  auto idx = static_cast<std::ptrdiff_t>(std::floor((t - nodes_.front()) / h0));
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(nodes_.size()) - 2);
  const auto i = static_cast<std::size_t>(idx);
  h = nodes_[i + 1] - nodes_[i];
  theta = (t - nodes_[i]) / h;
  return i;
}

namespace {

// Cubic Hermite on [0, 1] scaled by cell width h.
Vector hermite(const Vector& p0, const Vector& m0, const Vector& p1, const Vector& m1, double s, double h) {
  if (s == 0.0) return p0;
  if (s == 1.0) return p1;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1;
}

}  // namespace

Vector IntegratedCurve::point(double t) const {
  double s = 0.0, h = 0.0;
  const auto i = locate(t, s, h);
  return hermite(x_[i], v_[i], x_[i + 1], v_[i + 1], s, h);
}

Vector IntegratedCurve::tangent(double t) const {
  double s = 0.0, h = 0.0;
  const auto i = locate(t, s, h);
  return hermite(v_[i], a_[i], v_[i + 1], a_[i + 1], s, h);
}

Vector IntegratedCurve::acceleration(double t) const {
  double s = 0.0, h = 0.0;
  const auto i = locate(t, s, h);
  return (1.0 - s) * a_[i] + s * a_[i + 1];
}

}  // namespace pathdev
