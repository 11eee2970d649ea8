#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathdev {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Scalar function of one real parameter.
using ScalarFn = std::function<double(double)>;

// Error categories. The C API and the CLI exit codes are derived from these.
enum class ErrorKind {
  Argument,
  Domain,
  Stencil,
  Parse,
  Config,
  Numerical,
  Truncation,
  ScenarioConsistency,
  Degenerate,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class StencilError : public Error {
 public:
  explicit StencilError(const std::string& what) : Error(ErrorKind::Stencil, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(ErrorKind::Parse, what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// An integrated trajectory left the chart domain. `exit_parameter` is the
/// last parameter value at which the state was still inside.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double exit_parameter)
      : Error(ErrorKind::Truncation, what), exit_parameter_(exit_parameter) {}
  double exit_parameter() const noexcept { return exit_parameter_; }

 private:
  double exit_parameter_;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double t, double slack = 1e-12) const { return t >= lo - slack && t <= hi + slack; }
  double length() const { return hi - lo; }
};

/// Vector anchored at a coordinate point.
struct TangentVector {
  Vector base_point;
  Vector components;
};

/// Dense array of rank r over an n-dimensional index range, row-major
/// (last index fastest).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }

  template <class... Idx>
  double& operator()(Idx... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... Idx>
  double operator()(Idx... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double max_abs() const;
  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double factor);

 private:
  std::size_t offset(std::initializer_list<int> idx) const {
    std::size_t off = 0;
    for (int i : idx) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return off;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<double> data_;
};

Tensor operator-(Tensor a, const Tensor& b);
Tensor operator+(Tensor a, const Tensor& b);
Tensor operator*(double factor, Tensor a);

double max_abs(const Matrix& m);

}  // namespace pathdev
