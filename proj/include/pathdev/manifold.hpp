#pragma once

#include "pathdev/expression.hpp"
#include "pathdev/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathdev {

// Index convention used throughout the library (coordinate bases only):
//
//   nabla_{d_k} d_j = Gamma^i_{jk} d_i
//
// i.e. the last lower index is the differentiation direction. A Christoffel
// array is a rank-3 Tensor indexed (i, j, k). With this convention
//
//   (nabla_X Y)^i = X^k d_k Y^i + Gamma^i_{mk} Y^m X^k
//   T^i_{jk}      = Gamma^i_{kj} - Gamma^i_{jk}
//   R^i_{jkl}     = d_k Gamma^i_{jl} - d_l Gamma^i_{jk}
//                 + Gamma^m_{jl} Gamma^i_{mk} - Gamma^m_{jk} Gamma^i_{ml}
//
// where T(d_j, d_k) = T^i_{jk} d_i and R(d_k, d_l) d_j = R^i_{jkl} d_i.

using CoefficientFn = std::function<Tensor(const Vector&)>;
using DomainFn = std::function<bool(const Vector&)>;

/// Chart with an affine connection. Immutable after construction.
class Manifold {
 public:
  /// `derivative`, when given, returns d_l Gamma^i_{jk} as a rank-4 tensor
  /// indexed (i, j, k, l).
  Manifold(std::string name, int dim, CoefficientFn gamma, DomainFn domain, CoefficientFn derivative = {});

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool contains(const Vector& x) const;

  /// Throws DomainError outside the chart domain.
  Tensor christoffel(const Vector& x) const;

  bool has_analytic_derivatives() const { return static_cast<bool>(derivative_); }

  /// d_l Gamma^i_{jk}; analytic when available unless `force_finite_difference`.
  Tensor christoffel_derivative(const Vector& x, double fd_step, bool force_finite_difference = false) const;

  void require_inside(const Vector& x, const char* what) const;

 private:
  std::string name_;
  int dim_;
  CoefficientFn gamma_;
  DomainFn domain_;
  CoefficientFn derivative_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Table of Christoffel entries given as expressions in x1..xn.
struct ExpressionConnection {
  struct Entry {
    int i = 0;  // zero-based
    int j = 0;
    int k = 0;
    std::string expression;
  };
  std::string name = "custom";
  int dim = 0;
  std::vector<Entry> entries;  // unspecified entries are zero
  std::optional<std::vector<double>> lower;  // box domain, exclusive
  std::optional<std::vector<double>> upper;
};

/// Compiles an expression table; derivatives are symbolic.
ManifoldPtr make_expression_manifold(const ExpressionConnection& table);

struct CatalogEntry {
  std::string name;  // e.g. "sphere2:<radius>"
  int dim;           // 0 when the dimension is a parameter
  std::vector<std::string> params;
  std::string description;
};

const std::vector<CatalogEntry>& manifold_catalog();

/// Builds a built-in manifold from its catalog name, e.g. "euclidean:3",
/// "sphere2:1", "flat_torsion:0.5". `margin` is the excluded band around
/// chart singularities.
ManifoldPtr make_manifold(const std::string& spec, double margin = 1e-3);

}  // namespace pathdev
