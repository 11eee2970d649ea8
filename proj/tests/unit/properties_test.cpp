#include "support.hpp"

#include "pathdev/geometry.hpp"
#include "pathdev/oracles.hpp"

#include <doctest.h>

using namespace pathdev;
using namespace testing;

namespace {

bool same_value(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

ManifoldPtr random_connection(Gen& gen, int n, bool symmetric) {
  ExpressionConnection table;
  table.name = "random";
  table.dim = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = symmetric ? j : 0; k < n; ++k) {
        const std::string e = gen.field_component(n);
        table.entries.push_back({i, j, k, e});
        if (symmetric && k != j) table.entries.push_back({i, k, j, e});
      }
  return make_expression_manifold(table);
}

const char* const kBuiltins[] = {"euclidean:3", "euclidean2_polar", "sphere2:1", "hyperbolic2", "flat_torsion:0.5"};

Vector random_point(Gen& gen, const std::string& name) {
  if (name == "euclidean:3") return gen.point(3, -2, 2);
  if (name == "euclidean2_polar") return vec({gen.uniform(0.5, 3), gen.uniform(-3, 3)});
  if (name == "sphere2:1") return vec({gen.uniform(0.4, 2.7), gen.uniform(-3, 3)});
  if (name == "hyperbolic2") return vec({gen.uniform(-2, 2), gen.uniform(0.3, 3)});
  return gen.point(2, -2, 2);
}

}  // namespace

TEST_CASE("expression printing round-trips") {
  Gen gen(2024);
  const std::vector<std::string> vars{"x1", "x2", "x3"};
  auto shared_vars = std::make_shared<const std::vector<std::string>>(vars);
  for (int trial = 0; trial < 300; ++trial) {
    const Expression e(gen.tree(3, 6), shared_vars);
    const std::string text = e.to_string();
    CAPTURE(text);
    const Expression back = Expression::parse(text, vars);
    for (int p = 0; p < 4; ++p) {
      const std::vector<double> x{gen.uniform(-3, 3), gen.uniform(-3, 3), gen.uniform(-3, 3)};
      CHECK(same_value(e.evaluate(x), back.evaluate(x)));
    }
  }
}

TEST_CASE("symbolic derivatives agree with central differences") {
  Gen gen(77);
  const std::vector<std::string> vars{"x1", "x2"};
  auto shared_vars = std::make_shared<const std::vector<std::string>>(vars);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Expression e(gen.tree(2, 4), shared_vars);
    for (std::size_t k = 0; k < 2; ++k) {
      const Expression d = e.derivative(k);
      std::vector<double> x{gen.uniform(-2, 2), gen.uniform(-2, 2)};
      const double h = 1e-5;
      std::vector<double> xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (e.evaluate(xp) - e.evaluate(xm)) / (2 * h);
      const double exact = d.evaluate(x);
      // Skip kinks of abs and poles of division near the sample.
      if (!std::isfinite(fd) || !std::isfinite(exact) || std::abs(exact) > 1e4) continue;
      const double e2 = e.evaluate(xp) + e.evaluate(xm) - 2 * e.evaluate(x);
      if (std::abs(e2) > 1e-3) continue;
      CAPTURE(e.to_string());
      CHECK(fd == doctest::Approx(exact).epsilon(1e-5).scale(1.0));
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("torsion and curvature are antisymmetric") {
  Gen gen(9);
  std::vector<ManifoldPtr> ms;
  for (const char* name : kBuiltins) ms.push_back(make_manifold(name));
  ms.push_back(random_connection(gen, 2, false));
  ms.push_back(random_connection(gen, 3, false));
  for (const auto& m : ms) {
    CAPTURE(m->name());
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = m->name() == "random" ? gen.point(m->dim(), -1, 1) : random_point(gen, m->name());
      const Tensor t = torsion_tensor(*m, x);
      const Tensor r = curvature_tensor(*m, x);
      const int n = m->dim();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            CHECK(t(i, j, k) == -t(i, k, j));
            for (int l = 0; l < n; ++l) CHECK(r(i, j, k, l) == -r(i, j, l, k));
          }
    }
  }
}

TEST_CASE("symmetric connections are torsion free") {
  Gen gen(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_connection(gen, trial % 2 ? 3 : 2, true);
    CHECK(torsion_tensor(*m, gen.point(m->dim(), -1, 1)).max_abs() == 0.0);
  }
}

TEST_CASE("polar-chart curvature vanishes at second order in the derivative step") {
  const auto polar = make_manifold("euclidean2_polar");
  Gen gen(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = vec({gen.uniform(0.8, 3), gen.uniform(-3, 3)});
    DerivativeOptions a, b;
    a.fd_step = 1e-2;
    b.fd_step = 5e-3;
    const double ratio = curvature_tensor(*polar, x, a).max_abs() / curvature_tensor(*polar, x, b).max_abs();
    CHECK(ratio >= 3.4);
    CHECK(ratio <= 4.6);
  }
}

TEST_CASE("covariant derivative is additive and Leibniz") {
  Gen gen(13);
  const char* names[] = {"sphere2:1", "hyperbolic2", "flat_torsion:0.5", "euclidean2_polar"};
  for (const char* name : names) {
    CAPTURE(name);
    const auto m = make_manifold(name);
    for (int trial = 0; trial < 4; ++trial) {
      const Vector x = random_point(gen, name);
      const Vector dir = gen.point(2, -1, 1);
      const auto yc = gen.field(2), zc = gen.field(2);
      const std::string f = gen.field_component(2);
      const VectorField y = make_expression_field(yc);
      const VectorField z = make_expression_field(zc);
      const VectorField sum = make_expression_field({"(" + yc[0] + ") + (" + zc[0] + ")", "(" + yc[1] + ") + (" + zc[1] + ")"});
      const VectorField fy = make_expression_field({"(" + f + ")*(" + yc[0] + ")", "(" + f + ")*(" + yc[1] + ")"});
      CHECK(norm_inf(covariant_derivative(*m, dir, sum, x) - covariant_derivative(*m, dir, y, x) -
                     covariant_derivative(*m, dir, z, x)) < 1e-12);

      const Expression fe = Expression::parse_coordinates(f, 2);
      const std::vector<double> xs{x[0], x[1]};
      const double fx = fe.evaluate(xs);
      const double xf = dir[0] * fe.derivative(0).evaluate(xs) + dir[1] * fe.derivative(1).evaluate(xs);
      const Vector leibniz = xf * y(x) + fx * covariant_derivative(*m, dir, y, x);
      CHECK(norm_inf(covariant_derivative(*m, dir, fy, x) - leibniz) < 1e-12);

      // The same identities with finite-difference directional derivatives, to O(h^2).
      VectorField fy_fd, y_fd;
      fy_fd.value = fy.value;
      y_fd.value = y.value;
      const double h = 1e-4;
      const Vector fd_leibniz = xf * y(x) + fx * covariant_derivative(*m, dir, y_fd, x, h);
      CHECK(norm_inf(covariant_derivative(*m, dir, fy_fd, x, h) - fd_leibniz) < 1e-7);
    }
  }
}

TEST_CASE("transport: identity at s = t, inverse consistency, and metric compatibility") {
  Gen gen(14);
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  for (int trial = 0; trial < 6; ++trial) {
    const std::string th = "1.57 + 0.4*sin(" + fmt(gen.uniform(0.5, 2)) + "*t + " + fmt(gen.uniform(0, 3)) + ")";
    const auto curve = make_expression_curve("c", {th, gen.smooth_component("t")}, {0, 2});
    const double s = gen.uniform(0, 2), t = gen.uniform(0, 2);
    CHECK(transport_matrix(law, *curve, s, s).H == Matrix::Identity(2, 2));
    const Matrix fwd = transport_matrix(law, *curve, s, t).H;
    const Matrix back = transport_matrix(law, *curve, t, s).H;
    CHECK(max_abs(back * fwd - Matrix::Identity(2, 2)) <= 2e-8);
    const Vector v = gen.point(2, -1, 1);
    CHECK(sphere_norm(curve->point(t), fwd * v) == doctest::Approx(sphere_norm(curve->point(s), v)).epsilon(1e-10));
  }
}

TEST_CASE("metric norm drift shrinks at fourth order") {
  const auto sphere = make_manifold("sphere2:1");
  const auto curve = make_expression_curve("c", {"1.2 + 0.4*sin(2*t)", "t + 0.3*cos(t)"}, {0, 2});
  const Vector v = vec({0.3, -0.8});
  auto drift = [&](double h) {
    const Matrix H = transport_matrix(TransportLaw::parallel(sphere, h), *curve, 0, 2).H;
    return std::abs(sphere_norm(curve->point(2), H * v) - sphere_norm(curve->point(0), v));
  };
  const RefinementReport rep = measure_order(drift, {0.1, 0.05, 0.025});
  CHECK(rep.fitted_order >= 3.5);
  CHECK(rep.fitted_order <= 4.5);
}

TEST_CASE("affine geodesics: displacement equals (t - s) times the initial tangent") {
  Gen gen(15);
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  for (int trial = 0; trial < 4; ++trial) {
    const Vector x0 = vec({gen.uniform(1.0, 2.1), gen.uniform(-1, 1)});
    const Vector u0 = gen.point(2, -0.5, 0.5);
    const auto g = integrate_geodesic(*sphere, x0, u0, {0, 1.5});
    const double s = gen.uniform(0, 0.7), t = gen.uniform(0.8, 1.5);
    const Vector d = displacement_vector(law, *g, s, t).vector.components;
    CHECK(norm_inf(d - (t - s) * g->tangent(s)) < 1e-9);
  }
}

TEST_CASE("euclidean law: displacement is an exact coordinate difference") {
  Gen gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto curve = make_expression_curve("c", gen.smooth_curve(3), {0, 2});
    const double s = gen.uniform(0, 2), t = gen.uniform(0, 2);
    const Vector d = displacement_vector(TransportLaw::euclidean(), *curve, s, t).vector.components;
    const Vector back = displacement_vector(TransportLaw::euclidean(), *curve, t, s).vector.components;
    CHECK(norm_inf(d - (curve->point(t) - curve->point(s))) <= 1e-10);
    CHECK(norm_inf(d + back) < 1e-14);
  }
}

TEST_CASE("congruence with affine v-lines: h = (v2 - v1) V") {
  Gen gen(17);
  const auto hyp = make_manifold("hyperbolic2");
  const TransportLaw law = TransportLaw::parallel(hyp, 1e-3);
  for (int trial = 0; trial < 3; ++trial) {
    // v-lines are vertical geodesics x = const run at unit hyperbolic speed.
    const double a = gen.uniform(-1, 1), b = gen.uniform(0.2, 0.6);
    const Congruence cong =
        make_expression_congruence({fmt(a) + " + " + fmt(b) + "*u", "(1 + 0.2*u)*exp(v)"});
    const double v1 = gen.uniform(-0.3, 0), v2 = gen.uniform(0.1, 0.4);
    const DeviationScenario scn = make_congruence_scenario(cong, v1, v2, {0, 1});
    const double u = gen.uniform(0.1, 0.9);
    CHECK(norm_inf(deviation_vector(law, scn, u).components - (v2 - v1) * cong.V(u, v1)) < 1e-11);
  }
}

TEST_CASE("curve tangents agree with differenced points") {
  Gen gen(18);
  for (int trial = 0; trial < 10; ++trial) {
    const auto curve = make_expression_curve("c", gen.smooth_curve(3), {0, 2});
    const double t = gen.uniform(0.1, 1.9), h = 1e-5;
    CHECK(norm_inf((curve->point(t + h) - curve->point(t - h)) / (2 * h) - curve->tangent(t)) < 1e-8);
  }
}
