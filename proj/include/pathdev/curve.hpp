#pragma once

#include "pathdev/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pathdev {

enum class CurveKind { Analytic, Integrated };

/// Parametric C^2 path with exact point and tangent evaluation at any
/// parameter of its interval.
class Curve {
 public:
  Curve(std::string id, Interval interval, int dim) : id_(std::move(id)), interval_(interval), dim_(dim) {}
  virtual ~Curve() = default;

  virtual Vector point(double t) const = 0;
  virtual Vector tangent(double t) const = 0;
  virtual CurveKind kind() const = 0;

  const std::string& id() const { return id_; }
  const Interval& interval() const { return interval_; }
  int dim() const { return dim_; }

  void require_parameter(double t, const char* what) const;

 private:
  std::string id_;
  Interval interval_;
  int dim_;
};

using CurvePtr = std::shared_ptr<const Curve>;
using PointFn = std::function<Vector(double)>;

class AnalyticCurve final : public Curve {
 public:
  /// Without a tangent function the tangent is a central difference of
  /// `point` with step `fd_step`.
  AnalyticCurve(std::string id, Interval interval, int dim, PointFn point, PointFn tangent = {},
                double fd_step = 1e-6);

  Vector point(double t) const override;
  Vector tangent(double t) const override;
  CurveKind kind() const override { return CurveKind::Analytic; }

 private:
  PointFn point_;
  PointFn tangent_;
  double fd_step_;
};

/// Curve with components given as expressions of a single parameter `t`;
/// tangents are symbolic.
CurvePtr make_expression_curve(std::string id, const std::vector<std::string>& components, Interval interval,
                               const std::string& parameter = "t");

/// Straight coordinate segment a + t (b - a), t in [0, 1].
CurvePtr make_segment(std::string id, const Vector& a, const Vector& b);

/// Constant curve at `p` over `interval`.
CurvePtr make_point_curve(std::string id, const Vector& p, Interval interval = {0.0, 1.0});

/// Output of a fixed-step second-order integration: nodes with position,
/// velocity and acceleration; dense output by cubic Hermite interpolation
/// (position from position/velocity, velocity from velocity/acceleration).
class IntegratedCurve final : public Curve {
 public:
  IntegratedCurve(std::string id, std::vector<double> nodes, std::vector<Vector> position,
                  std::vector<Vector> velocity, std::vector<Vector> acceleration);

  Vector point(double t) const override;
  Vector tangent(double t) const override;
  Vector acceleration(double t) const;
  CurveKind kind() const override { return CurveKind::Integrated; }

  std::size_t node_count() const { return nodes_.size(); }
  double step() const { return nodes_.size() > 1 ? nodes_[1] - nodes_[0] : 0.0; }

 private:
  std::size_t locate(double t, double& theta, double& h) const;

  std::vector<double> nodes_;
  std::vector<Vector> x_;
  std::vector<Vector> v_;
  std::vector<Vector> a_;
};

}  // namespace pathdev
