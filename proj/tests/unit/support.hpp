#pragma once

#include "pathdev/deviation.hpp"
#include "pathdev/expression.hpp"
#include "pathdev/manifold.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testing {

using pathdev::Matrix;
using pathdev::Vector;

inline constexpr double pi = std::numbers::pi;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double norm_inf(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Seeded generator with the handful of draws the property tests need.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Vector point(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Smooth bounded expression in one variable: a low-order trigonometric
  // polynomial plus a linear drift.
  std::string smooth_component(const std::string& var) {
    std::string e = fmt(uniform(-1, 1)) + " + " + fmt(uniform(-1, 1)) + "*" + var;
    for (int k = 1; k <= 2; ++k) {
      e += " + " + fmt(uniform(-0.5, 0.5)) + "*sin(" + std::to_string(k) + "*" + var + ")";
      e += " + " + fmt(uniform(-0.5, 0.5)) + "*cos(" + std::to_string(k) + "*" + var + ")";
    }
    return e;
  }

  std::vector<std::string> smooth_curve(int n, const std::string& var = "t") {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(smooth_component(var));
    return out;
  }

  // Bounded smooth field component in x1..xn.
  std::string field_component(int n) {
    std::string e = fmt(uniform(-1, 1));
    for (int i = 1; i <= n; ++i) {
      const std::string x = "x" + std::to_string(i);
      e += " + " + fmt(uniform(-0.5, 0.5)) + "*sin(" + fmt(uniform(0.5, 1.5)) + "*" + x + ")";
      e += " + " + fmt(uniform(-0.5, 0.5)) + "*" + x;
    }
    return e;
  }

  std::vector<std::string> field(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(field_component(n));
    return out;
  }

  using NodePtr = std::shared_ptr<const pathdev::Expression::Node>;

  // Random expression tree over `nvars` variables; only total functions, so
  // every evaluation is finite or an honest division overflow.
  NodePtr tree(int nvars, int depth) {
    using pathdev::Function;
    using pathdev::NodeOp;
    auto node = std::make_shared<pathdev::Expression::Node>();
    if (depth <= 0 || integer(0, 4) == 0) {
      if (coin()) {
        node->op = NodeOp::Number;
        node->value = uniform(-3, 3);
        if (integer(0, 3) == 0) node->value = std::round(node->value);
      } else {
        node->op = NodeOp::Variable;
        node->variable = static_cast<std::size_t>(integer(0, nvars - 1));
      }
      return node;
    }
    switch (integer(0, 6)) {
      case 0:
        node->op = NodeOp::Negate;
        node->args = {tree(nvars, depth - 1)};
        break;
      case 1: node->op = NodeOp::Add; break;
      case 2: node->op = NodeOp::Sub; break;
      case 3: node->op = NodeOp::Mul; break;
      case 4: node->op = NodeOp::Div; break;
      default: {
        static const Function fns[] = {Function::Sin, Function::Cos, Function::Atan, Function::Tanh,
                                       Function::Abs};
        node->op = NodeOp::Call;
        node->function = fns[integer(0, 4)];
        node->args = {tree(nvars, depth - 1)};
        return node;
      }
    }
    if (node->args.empty()) node->args = {tree(nvars, depth - 1), tree(nvars, depth - 1)};
    return node;
  }

 private:
  std::mt19937_64 rng_;
};

// Straight-line in the plane at constant speed; used by several flat-space checks.
inline pathdev::CurvePtr line(const Vector& a, const Vector& v, pathdev::Interval iv) {
  return std::make_shared<pathdev::AnalyticCurve>(
      "line", iv, static_cast<int>(a.size()), [a, v](double t) { return Vector(a + t * v); },
      [v](double) { return v; });
}

// Great-circle equator of the unit sphere, phi = t.
inline pathdev::CurvePtr equator(pathdev::Interval iv = {0.0, 3.2}) {
  return line(vec({pi / 2, 0.0}), vec({0.0, 1.0}), iv);
}

inline double sphere_norm(const Vector& x, const Vector& v) {
  const double s = std::sin(x[0]);
  return std::sqrt(v[0] * v[0] + s * s * v[1] * v[1]);
}

}  // namespace testing
