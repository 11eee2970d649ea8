#include "support.hpp"

#include "pathdev/deviation.hpp"
#include "pathdev/oracles.hpp"

#include <doctest.h>

using namespace pathdev;
using namespace testing;

namespace {

ConnectorOptions segments() {
  ConnectorOptions o;
  o.gamma = ConnectorKind::Segment;
  o.eta = ConnectorKind::Segment;
  return o;
}

ScalarFn fn(double a, double b, double c) {
  return [a, b, c](double s) { return a + b * s + c * s * s; };
}

}  // namespace

TEST_CASE("deviation_vector examples") {
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  const auto x1 = make_expression_curve("x1", {"1 + 0.1*t", "0.2 + t"}, {0, 1});
  const auto obs = make_expression_curve("x", {"0.9 + 0.2*t", "0.3 + t"}, {0, 1});
  const DeviationScenario same = make_connector_scenario(sphere, x1, x1, obs, {0, 1});
  CHECK(norm_inf(deviation_vector(law, same, 0.4).components) < 1e-15);

  const auto flat = make_manifold("euclidean:2");
  Gen gen(21);
  const auto a = make_expression_curve("a", gen.smooth_curve(2), {0, 1});
  const auto b = make_expression_curve("b", gen.smooth_curve(2), {0, 1});
  const auto x = make_expression_curve("x", gen.smooth_curve(2), {0, 1});
  ConnectorOptions opts;
  opts.tau1 = fn(0.05, 0.9, 0.0);
  opts.tau2 = fn(0.0, 0.8, 0.1);
  opts.tau1_rate = fn(0.9, 0.0, 0.0);
  for (const bool x1_observer : {false, true}) {
    const DeviationScenario scn = make_connector_scenario(flat, a, b, x, {0, 1}, opts, x1_observer);
    for (double s : {0.1, 0.5, 0.9}) {
      const TangentVector h = deviation_vector(TransportLaw::parallel(flat), scn, s);
      CHECK(norm_inf(h.components - (b->point(opts.tau2(s)) - a->point(opts.tau1(s)))) < 1e-12);
      const Vector base = x1_observer ? a->point(opts.tau1(s)) : x->point(s);
      CHECK(norm_inf(h.base_point - base) < 1e-14);
    }
  }
}

TEST_CASE("affine geodesic connectors give (v2 - v1) V") {
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  // v-lines are meridians theta = v, affine geodesics.
  const Congruence cong = make_expression_congruence({"v", "0.3 + u"});
  const DeviationScenario scn = make_congruence_scenario(cong, 0.8, 1.4, {0, 1});
  for (double u : {0.2, 0.7}) {
    const Vector h = deviation_vector(law, scn, u).components;
    CHECK(norm_inf(h - 0.6 * cong.V(u, 0.8)) < 1e-12);
  }
}

TEST_CASE("matrix form agrees with the direct deviation vector") {
  const auto flat = make_manifold("euclidean:2");
  Gen gen(4);
  const auto a = make_expression_curve("a", gen.smooth_curve(2), {0, 1});
  const auto b = make_expression_curve("b", gen.smooth_curve(2), {0, 1});
  const auto x = make_expression_curve("x", gen.smooth_curve(2), {0, 1});
  const DeviationScenario fs = make_connector_scenario(flat, a, b, x, {0, 1}, segments());
  const TransportLaw flat_law = TransportLaw::parallel(flat);
  CHECK(norm_inf(deviation_vector(flat_law, fs, 0.3).components -
                 deviation_vector_matrix_form(flat_law, fs, 0.3).components) < 1e-10);

  // Euclidean law: H = I, Lambda = I, a plain tangent integral.
  const TransportLaw e = TransportLaw::euclidean();
  CHECK(norm_inf(deviation_vector_matrix_form(e, fs, 0.6).components - (b->point(0.6) - a->point(0.6))) < 1e-12);

  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  const auto x1 = make_expression_curve("x1", {"1.0 + 0.1*t", "0.2 + t"}, {0, 1});
  const auto x2 = make_expression_curve("x2", {"1.3 + 0.05*t*t", "0.4 + 0.9*t"}, {0, 1});
  const auto obs = make_expression_curve("x", {"0.9 + 0.2*t", "0.3 + t"}, {0, 1});
  const DeviationScenario ss = make_connector_scenario(sphere, x1, x2, obs, {0, 1});
  for (double s : {0.25, 0.75}) {
    const Vector d = deviation_vector(law, ss, s, 64).components;
    const Vector m = deviation_vector_matrix_form(law, ss, s, 64).components;
    CHECK(norm_inf(d - m) < 1e-12);
  }
}

TEST_CASE("scenario endpoint identities are enforced") {
  const auto flat = make_manifold("euclidean:2");
  const auto a = make_expression_curve("a", {"t", "0"}, {0, 1});
  const auto b = make_expression_curve("b", {"t", "1"}, {0, 1});
  DeviationScenario scn = make_connector_scenario(flat, a, b, a, {0, 1}, segments(), true);
  CHECK_NOTHROW(scn.validate(0.5));
  scn.r_dprime = [](double) { return 0.5; };
  try {
    scn.validate(0.5);
    FAIL("expected a consistency error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScenarioConsistency);
  }
}

TEST_CASE("infinitesimal_deviation examples") {
  const auto flat = make_manifold("euclidean:2");
  const auto a = make_expression_curve("a", {"t", "0.3*t"}, {0, 1});
  const auto b = make_expression_curve("b", {"0.2 + t", "0.5 + 0.3*t"}, {0, 1});
  const DeviationScenario same = make_connector_scenario(flat, a, a, a, {0, 1}, segments(), true);
  CHECK(norm_inf(infinitesimal_deviation(same, 0.5).components) == 0.0);

  const DeviationScenario par = make_connector_scenario(flat, a, b, a, {0, 1}, segments(), true);
  for (double s : {0.2, 0.8}) {
    const Vector z = infinitesimal_deviation(par, s).components;
    CHECK(norm_inf(z - deviation_vector(TransportLaw::parallel(flat), par, s).components) < 1e-14);
    CHECK(norm_inf(z - vec({0.2, 0.5})) < 1e-14);
  }
}

TEST_CASE("basic equation closes") {
  const auto flat = make_manifold("euclidean:2");
  const VectorField u = make_expression_field({"1 + x1*x2", "x1 - 0.5*x2*x2"});
  const VectorField xi = make_expression_field({"x2*x2", "2 + x1"});
  const double f1 = basic_equation_residual(*flat, u, xi, vec({0.3, 0.7}), 2e-3);
  const double f2 = basic_equation_residual(*flat, u, xi, vec({0.3, 0.7}), 1e-3);
  CHECK(f2 < 2e-6);
  CHECK(f1 / f2 == doctest::Approx(4.0).epsilon(0.15));
  // Affine fields leave nothing for the nested differences to truncate.
  const VectorField ua = make_expression_field({"1 + 0.5*x1 - x2", "0.3*x2"});
  const VectorField xa = make_expression_field({"2 - x1", "x1 + 0.7*x2"});
  CHECK(basic_equation_residual(*flat, ua, xa, vec({0.3, 0.7}), 1e-3) <= 1e-9);

  const auto sphere = make_manifold("sphere2:1");
  const VectorField us = make_expression_field({"0.4 + 0.3*sin(x2)", "cos(x1) + 0.2*x2"});
  const VectorField xs = make_expression_field({"sin(x1 + x2)", "0.5*cos(x1) - 0.1*x2"});
  const double r1 = basic_equation_residual(*sphere, us, xs, vec({1.1, 0.4}), 2e-3);
  const double r2 = basic_equation_residual(*sphere, us, xs, vec({1.1, 0.4}), 1e-3);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));

  const auto tors = make_manifold("flat_torsion:0.5");
  const BasicEquationTerms t = basic_equation_terms(*tors, us, xs, vec({0.3, 0.2}), 1e-3);
  CHECK(norm_inf(t.torsion) > 1e-2);
  CHECK(t.residual < 1e-5);
}

TEST_CASE("Jacobi integration examples") {
  const auto flat = make_manifold("euclidean:2");
  const auto base = line(vec({0, 0}), vec({1, 0.5}), {0, 2});
  const auto flat_states = integrate_geodesic_deviation(*flat, *base, vec({0.1, 0.2}), vec({0.3, -0.4}), {0, 2}, 1e-2);
  for (const auto& st : flat_states) CHECK(norm_inf(st.h - (vec({0.1, 0.2}) + st.u * vec({0.3, -0.4}))) < 1e-13);

  const auto sphere = make_manifold("sphere2:1");
  const auto states = integrate_geodesic_deviation(*sphere, *equator(), vec({0, 0}), vec({1, 0}), {0, 3.0}, 1e-3);
  for (const auto& st : states) {
    if (st.u < 0.1) continue;
    CHECK(sphere_norm(vec({pi / 2, st.u}), st.h) / std::sin(st.u) == doctest::Approx(1.0).epsilon(1e-4));
  }
  const SeparationResult sep = two_geodesic_separation(*sphere, vec({pi / 2, 0}), vec({0, 1}), vec({0, 0}),
                                                       vec({1, 0}), 1.5, 1e-4);
  CHECK(norm_inf(sep.value - vec({std::sin(1.5), 0})) < 1e-5);
}

TEST_CASE("torsion Jacobi field matches the two-geodesic oracle") {
  const auto m = make_manifold("flat_torsion:0.5");
  const Vector x0 = vec({0.1, -0.2}), u0 = vec({0.7, 0.4});
  const auto base = integrate_geodesic(*m, x0, u0, {0, 2});
  const Vector h0 = vec({0.3, 0.1}), dh0 = vec({-0.2, 0.5});
  const auto states = integrate_geodesic_deviation(*m, *base, h0, dh0, {0, 2}, 1e-3);
  const Vector dv0 = dh0 - contract_gamma(m->christoffel(x0), h0, u0);
  const SeparationResult sep = two_geodesic_separation(*m, x0, u0, h0, dv0, 2.0, 1e-4);
  CHECK(norm_inf(states.back().h - sep.value) <= 10 * std::max(sep.convergence, 1e-12));
}

TEST_CASE("lambda_factor examples") {
  auto zero = [](double, double) { return 0.0; };
  const LambdaFactor a = lambda_factor(zero, 0.3, 0.1, 0.6, 64, false);
  CHECK(a.lambda == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.d1 == 0.0);
  CHECK(a.d2 == 0.0);

  for (double c : {1.0, -0.5, 2.0}) {
    const LambdaFactor b = lambda_factor([c](double, double) { return c; }, 0.0, 0.1, 0.5, 256, false);
    CHECK(std::abs(b.lambda - (std::exp(c * 0.4) - 1) / c) <= 1e-10);
  }
  CHECK(lambda_factor([](double, double v) { return v; }, 0.0, 0.4, 0.4).lambda == 0.0);
}

TEST_CASE("general deviation right-hand side reduces to the curvature term when f = g = 0") {
  const auto sphere = make_manifold("sphere2:1");
  const Congruence cong = geodesic_congruence(
      sphere, [](double v) { return vec({pi / 2, v}); }, [](double v) { return vec({0.6, 0.8 + 0.1 * v}); },
      {0, 1});
  auto zero = [](double, double) { return 0.0; };
  DeviationRhsOptions opts;
  opts.g_depends_on_u = false;
  const double u = 0.4, v1 = 0.1, v2 = 0.3;
  const Vector rhs = geodesic_deviation_rhs_general(*sphere, cong, u, v1, v2, zero, zero, opts);
  const Vector x = cong.point(u, v1);
  const Vector expect =
      (v2 - v1) * apply_curvature(curvature_tensor(*sphere, x), cong.U(u, v1), cong.V(u, v1), cong.U(u, v1));
  CHECK(norm_inf(rhs - expect) < 1e-9);
  CHECK_THROWS_AS(geodesic_deviation_rhs_general(*sphere, cong, u, v1, v1, zero, zero, opts), Error);
}

TEST_CASE("multipoint derivative of a vector is the covariant derivative along its curve") {
  const auto sphere = make_manifold("sphere2:1");
  const auto c = make_expression_curve("c", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  auto v = [](double s) { return vec({std::cos(s), 0.5 * s}); };
  const MultiPointField field = [&](double s) { return MultiPointTensor::vector(v(s), Anchor{c, s}); };
  const double s = 0.8, h = 1e-4;
  const Vector dv = (v(s + h) - v(s - h)) / (2 * h);
  const Vector expect = dv + contract_gamma(sphere->christoffel(c->point(s)), v(s), c->tangent(s));
  CHECK(norm_inf(multipoint_covariant_derivative(*sphere, field, s).as_vector() - expect) < 1e-7);
}

TEST_CASE("multipoint derivative obeys the Leibniz rule") {
  const auto sphere = make_manifold("sphere2:1");
  const auto c1 = make_expression_curve("c1", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  const auto c2 = make_expression_curve("c2", {"1.4 - 0.2*t", "0.5*t*t"}, {0, 2});
  auto a = [&](double s) { return MultiPointTensor::vector(vec({std::sin(s), 1.0 + s}), Anchor{c1, s}); };
  auto b = [&](double s) {
    Matrix m(2, 2);
    m << 1 + s, 0.2, std::cos(s), s * s;
    return MultiPointTensor::matrix(m, Anchor{c2, s}, Anchor{c1, s});
  };
  const double s = 0.9;
  const MultiPointTensor lhs =
      multipoint_covariant_derivative(*sphere, [&](double q) { return tensor_product(a(q), b(q)); }, s);
  const MultiPointTensor da = multipoint_covariant_derivative(*sphere, a, s);
  const MultiPointTensor db = multipoint_covariant_derivative(*sphere, b, s);
  const Tensor rhs = tensor_product(da, b(s)).components() + tensor_product(a(s), db).components();
  CHECK((lhs.components() - rhs).max_abs() < 1e-7);
}

TEST_CASE("multipoint derivative commutes with contraction") {
  const auto sphere = make_manifold("sphere2:1");
  const auto c = make_expression_curve("c", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  auto m = [&](double s) {
    Matrix a(2, 2);
    a << std::cos(s), s, 0.3, 1 + s * s;
    return MultiPointTensor::matrix(a, Anchor{c, s}, Anchor{c, s});
  };
  const double s = 1.1, h = 1e-4;
  const double trace_rate = (m(s + h).as_matrix().trace() - m(s - h).as_matrix().trace()) / (2 * h);
  const MultiPointTensor dm = multipoint_covariant_derivative(*sphere, m, s);
  const MultiPointTensor contracted = contract(dm, 0, 0);
  CHECK(contracted.components().data()[0] == doctest::Approx(trace_rate).epsilon(1e-7));
}

TEST_CASE("observer transport along a flat parallel family has zero derivative") {
  const auto flat = make_manifold("euclidean:2");
  const auto a = make_expression_curve("a", {"t", "0"}, {0, 1});
  const auto b = make_expression_curve("b", {"t", "1"}, {0, 1});
  const auto x = make_expression_curve("x", {"t", "-1"}, {0, 1});
  const DeviationScenario scn = make_connector_scenario(flat, a, b, x, {0, 1}, segments());
  const TransportLaw law = TransportLaw::parallel(flat);
  const MultiPointTensor d =
      multipoint_covariant_derivative(*flat, [&](double s) { return observer_transport(law, scn, s); }, 0.5);
  CHECK(d.components().max_abs() < 1e-12);
}
