#pragma once

#include "pathdev/displacement.hpp"
#include "pathdev/geometry.hpp"
#include "pathdev/paths.hpp"

namespace pathdev {

/// Observed paths x1, x2, observer x, and the connector families. gamma(s)
/// joins x1(tau1(s)) = gamma_s(r'_s) to x2(tau2(s)) = gamma_s(r''_s); eta(s)
/// joins x1(tau1(s)) = eta_s(t'_s) to x(s) = eta_s(t''_s).
struct DeviationScenario {
  std::string name = "scenario";
  int dim = 0;
  Interval s_range;
  CurvePtr x1, x2, x;
  ScalarFn tau1, tau2;  // identity when empty
  std::function<CurvePtr(double)> gamma;
  std::function<CurvePtr(double)> eta;
  ScalarFn r_prime, r_dprime, t_prime, t_dprime;
  /// d/ds gamma_s(r); central differences across the family when empty.
  std::function<Vector(double s, double r)> gamma_s_velocity;
  double tolerance = 1e-8;

  double tau1_at(double s) const { return tau1 ? tau1(s) : s; }
  double tau2_at(double s) const { return tau2 ? tau2(s) : s; }
  /// Throws Error(ScenarioConsistency) naming the violated endpoint identity.
  void validate(double s) const;
  /// d/ds gamma_s(r).
  Vector family_velocity(double s, double r, double h_fd = 1e-4) const;
  bool fixed_limits(double s, double h) const;
};

/// h21(s) = H(t'', t'; eta_s) d^{gamma_s}_{r'}(r''), at x(s).
TangentVector deviation_vector(const TransportLaw& law, const DeviationScenario& scn, double s, int panels = 0);

/// (r'' - r') gamma_s'(r') at gamma_s(r').
TangentVector infinitesimal_deviation(const DeviationScenario& scn, double s);

// ---------------------------------------------------------------------------
// Multipoint tensors

struct Anchor {
  CurvePtr curve;
  double parameter = 0.0;
  Vector point() const { return curve->point(parameter); }
};

/// Tensor whose p upper slots and q lower slots live at separate points.
/// Slot order in `components`: the p upper indices, then the q lower ones.
class MultiPointTensor {
 public:
  MultiPointTensor(int dim, int p, int q, std::vector<Anchor> anchors, Tensor components);

  static MultiPointTensor vector(const Vector& v, Anchor at);
  /// (1,1) tensor M^i_j with upper slot at `upper`, lower slot at `lower`.
  static MultiPointTensor matrix(const Matrix& m, Anchor upper, Anchor lower);

  int dim() const { return dim_; }
  int upper() const { return p_; }
  int lower() const { return q_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }
  const Tensor& components() const { return components_; }
  Tensor& components() { return components_; }
  Vector as_vector() const;
  Matrix as_matrix() const;

 private:
  int dim_;
  int p_;
  int q_;
  std::vector<Anchor> anchors_;
  Tensor components_;
};

/// A (x) B with slots ordered (A upper, B upper, A lower, B lower).
MultiPointTensor tensor_product(const MultiPointTensor& a, const MultiPointTensor& b);

/// Contracts upper slot `a` with lower slot `b`; their anchors must coincide.
MultiPointTensor contract(const MultiPointTensor& t, int a, int b, double tolerance = 1e-8);

using MultiPointField = std::function<MultiPointTensor(double s)>;

/// Componentwise central difference in s plus one connection correction per
/// slot, each at its own anchor with the anchor velocity differenced in s.
MultiPointTensor multipoint_covariant_derivative(const Manifold& m, const MultiPointField& field, double s,
                                                 double h_fd = 1e-4);

/// The matrix factorization h = H . integral Lambda(u) . gamma_s'(u) du with H
/// and each Lambda(u) obtained by separate transport solves.
TangentVector deviation_vector_matrix_form(const TransportLaw& law, const DeviationScenario& scn, double s,
                                           int panels = 0);

/// H(t''_s, t'_s; eta_s) as a multipoint tensor.
MultiPointTensor observer_transport(const TransportLaw& law, const DeviationScenario& scn, double s);
/// Lambda(u) = H(r'_s, u; gamma_s) as a multipoint tensor.
MultiPointTensor connector_pullback(const TransportLaw& law, const DeviationScenario& scn, double s, double u);

// ---------------------------------------------------------------------------
// Basic equation

struct BasicEquationTerms {
  Vector lhs;        // nabla_U nabla_U xi
  Vector curvature;  // R(U, xi) U
  Vector acceleration;  // nabla_xi (nabla_U U)
  Vector torsion;    // nabla_U (T(U, xi))
  Vector bracket_u;  // nabla_U [U, xi]
  Vector bracket_xi;  // nabla_[U, xi] U
  double residual = 0.0;
};

/// Evaluates both sides of the basic equation at x with nested central
/// differences of step h_fd; `residual` is |lhs - sum of the five terms|.
BasicEquationTerms basic_equation_terms(const Manifold& m, const VectorField& u, const VectorField& xi,
                                        const Vector& x, double h_fd);
double basic_equation_residual(const Manifold& m, const VectorField& u, const VectorField& xi, const Vector& x,
                               double h_fd);

// ---------------------------------------------------------------------------
// Geodesic deviation

struct JacobiState {
  double u = 0.0;
  Vector h;
  Vector dh;  // D h / du
};

/// Integrates D^2h/du^2 = R(U,h)U + (nabla_U T)(U,h) + T(U, Dh/du) along an
/// affinely parameterized geodesic, RK4 with fixed step <= `step`. Returns the
/// state at every node, starting at interval.lo.
std::vector<JacobiState> integrate_geodesic_deviation(const Manifold& m, const Curve& base, const Vector& h0,
                                                      const Vector& dh0, Interval interval, double step,
                                                      const DerivativeOptions& opts = {});

struct LambdaFactor {
  double lambda = 0.0;
  double d1 = 0.0;  // d lambda / du
  double d2 = 0.0;  // d^2 lambda / du^2
};

/// Scaling between the deviation vector and V(u, v1) on a congruence whose
/// v-lines satisfy nabla_V V = g_u(v) V:
/// lambda(u) = integral_{v1}^{v2} exp(integral_{v1}^{v} g(u, w) dw) dv.
/// Nested Simpson quadrature; u-derivatives by central differences (step
/// `h_u`) unless `g_depends_on_u` is false.
LambdaFactor lambda_factor(const std::function<double(double u, double v)>& g, double u, double v1, double v2,
                           int panels = 256, bool g_depends_on_u = true, double h_u = 1e-4);

/// Which families of the congruence are geodesic (possibly non-affine).
enum class CongruenceForm { BothGeodesic, VGeodesic };

using SurfaceScalarFn = std::function<double(double u, double v)>;

struct DeviationRhsOptions {
  CongruenceForm form = CongruenceForm::BothGeodesic;
  double fd_step = 1e-4;
  int lambda_panels = 256;
  bool g_depends_on_u = true;
  DerivativeOptions derivative;
};

/// Right-hand side of the non-affine deviation equation for h = lambda V on
/// the congruence at (u, v1). `f` gives nabla_U U = f U (unused for the
/// VGeodesic form), `g` gives nabla_V V = g V.
Vector geodesic_deviation_rhs_general(const Manifold& m, const Congruence& cong, double u, double v1, double v2,
                                      const SurfaceScalarFn& f, const SurfaceScalarFn& g,
                                      const DeviationRhsOptions& opts = {});

/// Proportionality factor c in nabla_W W = c W along a family line, obtained
/// from the covariant acceleration by least squares. `along_u` selects U or V.
double congruence_geodesic_factor(const Manifold& m, const Congruence& cong, double u, double v, bool along_u,
                                  double fd_step = 1e-4);

// ---------------------------------------------------------------------------
// Equation of motion

/// Force field on the connector family: F_s(r), a vector at gamma_s(r).
using FamilyForceFn = std::function<Vector(double s, double r)>;

struct MotionOptions {
  double h_fd = 1e-4;
  int panels = 32;
  DerivativeOptions derivative;
};

/// Right-hand side of the deviation equation in equation-of-motion form,
/// with fixed r', r'' (so the boundary term vanishes).
Vector equation_of_motion_rhs(const Manifold& m, const TransportLaw& law, const DeviationScenario& scn, double s,
                              const FamilyForceFn& force, const MotionOptions& opts = {});

struct ForceDifference {
  Vector transported_difference;  // L^eta (L^gamma_{r''->r'} F(r'') - F(r'))
  Vector correction;              // H . integral (Lambda T(F, gamma') - DLambda/du F) du
  Vector total;
  Vector direct;                  // H . integral Lambda (DF/du + T(F, gamma')) du
};

ForceDifference force_difference_term(const Manifold& m, const TransportLaw& law, const DeviationScenario& scn, double s,
                                      const FamilyForceFn& force, const MotionOptions& opts = {});

struct InfinitesimalResidual {
  Vector lhs;   // D^2 h / ds^2 of the exact deviation vector
  Vector rhs;   // infinitesimal-limit right-hand side evaluated on zeta
  double residual = 0.0;
};

/// Compares the second derivative of the deviation vector with the
/// infinitesimal-limit right-hand side built from zeta = (r'' - r') gamma_s'(r').
InfinitesimalResidual infinitesimal_deviation_equation_residual(const Manifold& m, const TransportLaw& law,
                                                                const DeviationScenario& scn, double s,
                                                                const FamilyForceFn& force, double h_s,
                                                                const MotionOptions& opts = {});

// ---------------------------------------------------------------------------
// Scenario construction

enum class ConnectorKind { Geodesic, Segment };

struct ConnectorOptions {
  ConnectorKind gamma = ConnectorKind::Geodesic;
  ConnectorKind eta = ConnectorKind::Geodesic;
  /// Parameter length of the connectors: gamma_s runs over [0, gamma_span],
  /// eta_s over [0, eta_span].
  double gamma_span = 1.0;
  double eta_span = 1.0;
  ShootingOptions shooting;
  /// Monotone reparameterizations of x1 and x2; identity when empty.
  /// `tau1_rate` is d tau1 / ds, used for the observer tangent when the
  /// observer is x1 (central differences when empty).
  ScalarFn tau1, tau2, tau1_rate;
};

/// Scenario with connectors built from the endpoints (geodesic shooting or
/// coordinate segments). When x coincides with x1 the observer connector is
/// a constant curve with t' = t''.
DeviationScenario make_connector_scenario(ManifoldPtr m, CurvePtr x1, CurvePtr x2, CurvePtr x, Interval s_range,
                                          const ConnectorOptions& opts = {}, bool observer_is_x1 = false);

/// Congruence scenario: x1 = y(., v1), x2 = y(., v2), observer x1, and the
/// connectors are the v-lines y(u, .) on [v1, v2].
DeviationScenario make_congruence_scenario(const Congruence& cong, double v1, double v2, Interval u_range);

/// Two-parameter family y(s, r) whose s-lines solve nabla U = Phi(s, r, y, U)
/// from y(s0, r) = chi(r), d/ds y(s0, r) = phi(r), s0 = s_range.lo. Members
/// are integrated at Chebyshev nodes in r and joined by barycentric
/// interpolation, so r-derivatives are derivatives of the interpolant.
class ForcedFamily : public std::enable_shared_from_this<ForcedFamily> {
 public:
  using FamilyForce = std::function<Vector(double s, double r, const Vector& x, const Vector& u)>;

  ForcedFamily(ManifoldPtr m, PointFn chi, PointFn phi, FamilyForce force, Interval s_range, Interval r_range,
               double s_step = 1e-3, int r_nodes = 33);

  Vector point(double s, double r) const;
  Vector s_velocity(double s, double r) const;
  Vector r_velocity(double s, double r) const;
  /// F_s(r) = Phi(s, r, y(s, r), d/ds y(s, r)).
  Vector force(double s, double r) const;
  const Interval& s_range() const { return s_range_; }
  const Interval& r_range() const { return r_range_; }
  const ManifoldPtr& manifold() const { return m_; }
  /// gamma_s as a curve in r over the family's r range. The family must be
  /// owned by a shared_ptr.
  CurvePtr connector(double s) const;

 private:
  Vector interpolate(double s, double r, bool velocity, bool derivative) const;

  ManifoldPtr m_;
  FamilyForce force_;
  Interval s_range_;
  Interval r_range_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Matrix diff_;
  std::vector<std::shared_ptr<const IntegratedCurve>> members_;
};

struct ObserverSpec {
  bool is_x1 = true;
  Vector x0;       // observer initial point at s_range.lo
  Vector u0;       // observer initial velocity
  ForceFn force;   // force per unit mass on the observer
  double eta_span = 1.0;
  double step = 1e-3;
};

/// Equation-of-motion scenario on a forced family with fixed r', r''.
/// The observer connector is the coordinate segment from x1(s) to x(s).
DeviationScenario make_forced_family_scenario(std::shared_ptr<const ForcedFamily> family, double r1, double r2,
                                              const ObserverSpec& observer);

}  // namespace pathdev
