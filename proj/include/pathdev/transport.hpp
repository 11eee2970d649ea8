#pragma once

#include "pathdev/curve.hpp"
#include "pathdev/manifold.hpp"

#include <span>

namespace pathdev {

enum class TransportKind { Parallel, Euclidean };

/// Linear transport along paths. Every shipped kind is generated by a matrix
/// field A(t) along the curve: dH(t,s)/dt = -A(t) H(t,s), H(s,s) = I.
class TransportLaw {
 public:
  static TransportLaw parallel(ManifoldPtr manifold, double step = 1e-3);
  static TransportLaw euclidean(double step = 1e-3);

  TransportKind kind() const { return kind_; }
  double step() const { return step_; }
  const ManifoldPtr& manifold() const { return manifold_; }
  TransportLaw with_step(double step) const;

  /// A(t)^i_j = Gamma^i_{jk}(gamma(t)) gamma'(t)^k for the parallel kind.
  Matrix generator(const Curve& curve, double t) const;
  bool is_identity() const { return kind_ == TransportKind::Euclidean; }

 private:
  TransportLaw(TransportKind kind, ManifoldPtr manifold, double step);

  TransportKind kind_;
  ManifoldPtr manifold_;
  double step_;
};

struct TransportMatrix {
  Matrix H;
  std::string curve_id;
  double source = 0.0;
  double target = 0.0;
};

/// H(t, s; curve): maps components at curve(s) to components at curve(t).
TransportMatrix transport_matrix(const TransportLaw& law, const Curve& curve, double s, double t);

TangentVector transport_vector(const TransportLaw& law, const Curve& curve, double s, double t,
                               const TangentVector& u, double base_tolerance = 1e-9);

/// Max-norm of H(r,t) H(t,s) - H(r,s).
double compose_check(const TransportLaw& law, const Curve& curve, double s, double t, double r);

/// H(anchor, u_k) for every node of a monotone grid starting at the anchor
/// (nodes.front() == anchor). Computed incrementally: the pull-back G(u) =
/// H(anchor, u) satisfies dG/du = G A(u).
std::vector<Matrix> pullback_sweep(const TransportLaw& law, const Curve& curve, std::span<const double> nodes);

}  // namespace pathdev
