#include "support.hpp"

#include "pathdev/geometry.hpp"
#include "pathdev/oracles.hpp"

#include <doctest.h>

using namespace pathdev;
using namespace testing;

namespace {

VectorField constant_field(const Vector& v) {
  VectorField f;
  f.value = [v](const Vector&) { return v; };
  return f;
}

Vector basis(int n, int i) { return Vector::Unit(n, i); }

// T(d_j, d_k) = nabla_j d_k - nabla_k d_j for coordinate fields, from the
// covariant derivative alone.
Tensor torsion_oracle(const Manifold& m, const Vector& x) {
  const int n = m.dim();
  Tensor t(n, 3);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Vector v = covariant_derivative(m, basis(n, j), constant_field(basis(n, k)), x) -
                       covariant_derivative(m, basis(n, k), constant_field(basis(n, j)), x);
      for (int i = 0; i < n; ++i) t(i, j, k) = v[i];
    }
  return t;
}

// R(d_k, d_l) d_j = nabla_k nabla_l d_j - nabla_l nabla_k d_j by nested
// covariant derivatives of coordinate fields.
Tensor curvature_oracle(const Manifold& m, const Vector& x, double h) {
  const int n = m.dim();
  Tensor r(n, 4);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        auto inner = [&](int dir) {
          VectorField f;
          f.value = [&m, n, j, dir](const Vector& p) {
            return covariant_derivative(m, basis(n, dir), constant_field(basis(n, j)), p);
          };
          return f;
        };
        const Vector v = covariant_derivative(m, basis(n, k), inner(l), x, h) -
                         covariant_derivative(m, basis(n, l), inner(k), x, h);
        for (int i = 0; i < n; ++i) r(i, j, k, l) = v[i];
      }
  return r;
}

const char* const kBuiltins[] = {"euclidean:3", "euclidean2_polar", "sphere2:1", "hyperbolic2", "flat_torsion:0.5"};

Vector sample_point(const std::string& name) {
  if (name == "euclidean:3") return vec({0.3, -0.2, 0.9});
  if (name == "euclidean2_polar") return vec({2.0, 1.0});
  if (name == "sphere2:1") return vec({1.1, 0.4});
  if (name == "hyperbolic2") return vec({0.3, 1.2});
  return vec({0.5, -0.7});
}

}  // namespace

TEST_CASE("torsion vanishes for the flat and sphere connections") {
  const auto flat = make_manifold("euclidean:3");
  CHECK(torsion_tensor(*flat, vec({1, 2, 3})).max_abs() == 0.0);
  const auto sphere = make_manifold("sphere2:1");
  const Vector x = vec({pi / 2, 0.0});
  CHECK(torsion_tensor(*sphere, x).max_abs() == 0.0);
  CHECK((torsion_tensor(*sphere, x) - torsion_oracle(*sphere, x)).max_abs() < 1e-14);
}

TEST_CASE("flat_torsion has T^1_12 = -c") {
  const double c = 0.7;
  const auto m = make_manifold("flat_torsion:0.7");
  const Vector x = vec({0.2, 0.3});
  const Tensor t = torsion_tensor(*m, x);
  CHECK(t(0, 0, 1) == doctest::Approx(-c).epsilon(1e-15));
  CHECK(t(0, 1, 0) == doctest::Approx(c).epsilon(1e-15));
  CHECK(t(1, 0, 1) == 0.0);
  CHECK((t - torsion_oracle(*m, x)).max_abs() < 1e-14);
}

TEST_CASE("torsion agrees with the operator definition on every built-in") {
  for (const char* name : kBuiltins) {
    CAPTURE(name);
    const auto m = make_manifold(name);
    const Vector x = sample_point(name);
    CHECK((torsion_tensor(*m, x) - torsion_oracle(*m, x)).max_abs() < 1e-12);
  }
}

TEST_CASE("curvature examples") {
  const auto flat = make_manifold("euclidean:3");
  CHECK(curvature_tensor(*flat, vec({1, 2, 3})).max_abs() == 0.0);

  const auto sphere = make_manifold("sphere2:1");
  const Vector eq = vec({pi / 2, 0.0});
  const Tensor r = curvature_tensor(*sphere, eq);
  // R^theta_{phi theta phi} = sin^2(theta).
  CHECK(r(0, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r(0, 1, 1, 0) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(r(1, 0, 0, 1) == doctest::Approx(-1.0).epsilon(1e-8));

  const Matrix hol = holonomy_curvature(*sphere, eq, 0, 1, 1e-3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(hol(i, j) == doctest::Approx(r(i, j, 0, 1)).epsilon(1e-3).scale(1.0));

  const auto polar = make_manifold("euclidean2_polar");
  CHECK(curvature_tensor(*polar, vec({2.0, 1.0})).max_abs() < 1e-6);
  CHECK(max_abs(holonomy_curvature(*polar, vec({2.0, 1.0}), 0, 1, 1e-3)) < 1e-3);
}

TEST_CASE("curvature agrees with nested covariant derivatives on every built-in") {
  for (const char* name : kBuiltins) {
    CAPTURE(name);
    const auto m = make_manifold(name);
    const Vector x = sample_point(name);
    const Tensor diff = curvature_tensor(*m, x) - curvature_oracle(*m, x, 1e-4);
    CHECK(diff.max_abs() < 1e-6);
  }
}

TEST_CASE("curvature with analytic derivatives matches finite differences") {
  ExpressionConnection table;
  table.dim = 2;
  table.entries = {{0, 1, 1, "-sin(x1)*cos(x1)"}, {1, 0, 1, "cos(x1)/sin(x1)"}, {1, 1, 0, "cos(x1)/sin(x1)"}};
  table.lower = std::vector<double>{1e-3, -100};
  table.upper = std::vector<double>{pi - 1e-3, 100};
  const auto m = make_expression_manifold(table);
  REQUIRE(m->has_analytic_derivatives());
  const Vector x = vec({1.0, 0.2});
  DerivativeOptions fd;
  fd.prefer_analytic = false;
  const Tensor a = curvature_tensor(*m, x);
  const Tensor b = curvature_tensor(*m, x, fd);
  CHECK((a - b).max_abs() < 1e-8);
  CHECK(a(0, 1, 0, 1) == doctest::Approx(std::sin(1.0) * std::sin(1.0)).epsilon(1e-13));
}

TEST_CASE("covariant derivative examples") {
  const auto flat = make_manifold("euclidean:3");
  const Vector x = vec({0.4, 0.5, 0.6});
  CHECK(norm_inf(covariant_derivative(*flat, basis(3, 0), constant_field(vec({1, 2, 3})), x)) == 0.0);

  const VectorField y = make_expression_field({"x1", "0", "0"});
  const Vector d = covariant_derivative(*flat, basis(3, 0), y, x);
  CHECK(norm_inf(d - basis(3, 0)) < 1e-15);

  const auto sphere = make_manifold("sphere2:1");
  const VectorField dphi = make_expression_field({"0", "1"});
  const Vector g = covariant_derivative(*sphere, basis(2, 1), dphi, vec({pi / 2, 0.0}));
  CHECK(norm_inf(g) < 1e-15);
}

TEST_CASE("points outside the chart are rejected") {
  const auto sphere = make_manifold("sphere2:1");
  CHECK_THROWS_AS(sphere->christoffel(vec({0.0, 0.0})), DomainError);
  CHECK_THROWS_AS(torsion_tensor(*sphere, vec({pi, 0.0})), DomainError);
  const auto polar = make_manifold("euclidean2_polar");
  try {
    curvature_tensor(*polar, vec({1.0005e-3, 0.0}));
    FAIL("expected a stencil error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::Stencil || e.kind() == ErrorKind::Domain));
  }
}

TEST_CASE("catalog names and errors") {
  CHECK(manifold_catalog().size() == 5);
  CHECK(make_manifold("euclidean:4")->dim() == 4);
  CHECK(make_manifold("sphere2:2.5")->dim() == 2);
  try {
    make_manifold("sphere3:1");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("hyperbolic2") != std::string::npos);
  }
  CHECK_THROWS_AS(make_manifold("euclidean:0"), Error);
  CHECK_THROWS_AS(make_manifold("sphere2:-1"), Error);
  CHECK_THROWS_AS(make_manifold("flat_torsion"), Error);
}

TEST_CASE("expression examples") {
  const Expression a = Expression::parse_coordinates("sin(x1)*cos(x1)", 1);
  CHECK(std::abs(a.evaluate(std::vector<double>{pi / 2})) <= 1e-15);

  const Expression b = Expression::parse_coordinates("-(x2/ x1)", 2);
  CHECK(b.evaluate(std::vector<double>{2, 6}) == -3.0);

  const Expression c = Expression::parse_coordinates("x1*x1", 1).derivative(0);
  CHECK(c.evaluate(std::vector<double>{3}) == 6.0);

  CHECK(Expression::parse("2*pi", {}).evaluate(std::vector<double>{}) == doctest::Approx(2 * pi));
  CHECK(Expression::parse("pow(t, 3)", {"t"}).derivative(0).evaluate(std::vector<double>{2}) ==
        doctest::Approx(12.0));
}

TEST_CASE("expression errors carry positions") {
  try {
    Expression::parse_coordinates("x1 + * 2", 1);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
  CHECK_THROWS_AS(Expression::parse_coordinates("x3", 2), ParseError);
  CHECK_THROWS_AS(Expression::parse_coordinates("foo(x1)", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse_coordinates("pow(x1)", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse_coordinates("sin(x1, x1)", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse_coordinates("(x1", 1), ParseError);
  CHECK_THROWS_AS(Expression::parse_coordinates("", 1), ParseError);
}
