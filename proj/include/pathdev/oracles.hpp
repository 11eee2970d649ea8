#pragma once

#include "pathdev/deviation.hpp"

#include <string>

namespace pathdev {

struct RefinementReport {
  std::vector<double> parameter_values;
  std::vector<double> errors;
  double fitted_order = 0.0;

  std::string to_json() const;
};

/// Least-squares slope of log(error) against log(parameter). Parameters must
/// be strictly decreasing and errors positive; at least three of each.
RefinementReport measure_order(const std::function<double(double)>& error_of, const std::vector<double>& steps);
RefinementReport fit_order(std::vector<double> steps, std::vector<double> errors);

/// (I - H_loop) / eps^2 for the coordinate square of side eps centred on x in
/// the (k, l) plane, traversed k first, conjugated back to x. Estimates the
/// matrix R^i_j(kl).
Matrix holonomy_curvature(const Manifold& m, const Vector& x, int k, int l, double eps, double transport_step = 0.0);

struct SeparationResult {
  Vector value;         // Richardson-extrapolated separation per unit delta
  double convergence = 0.0;  // change of the extrapolated value when delta halves
  RefinementReport evidence;
};

/// Finite-difference Jacobi field: integrates the geodesic from (x0, u0) and
/// neighbours from (x0 + d a, u0 + d b) for d = delta, delta/2, delta/4, and
/// returns 2 J(delta/2) - J(delta) where J(d) = (neighbour(u) - base(u)) / d.
SeparationResult two_geodesic_separation(const Manifold& m, const Vector& x0, const Vector& u0,
                                         const Vector& offset_v0, const Vector& offset_dv0, double u, double delta,
                                         double step = 1e-3);

/// D^2 h / ds^2 along x by nested central differences with step h_s:
/// W(s') = (h(s'+h_s) - h(s'-h_s)) / 2h_s + Gamma(h(s'), x'(s')), then the same
/// rule applied to W at s. Uses h at s, s +- h_s, s +- 2h_s.
Vector fd_second_deviation(const DeviationScenario& scn, const TransportLaw& law, double s, double h_s,
                           int panels = 0);

/// Holonomy of parallel transport around the latitude circle theta = theta0 on
/// the sphere of the given radius, as a rotation angle in the orthonormal frame
/// (d_theta, d_phi / sin theta0). Richardson-refined over step and step/2.
struct LatitudeHolonomy {
  double angle = 0.0;
  double raw_angle = 0.0;
  double refinement_change = 0.0;
};
LatitudeHolonomy sphere_latitude_holonomy(double theta0, double step);

}  // namespace pathdev
