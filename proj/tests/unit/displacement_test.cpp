#include "support.hpp"

#include "pathdev/displacement.hpp"
#include "pathdev/oracles.hpp"
#include "pathdev/paths.hpp"

#include <doctest.h>

using namespace pathdev;
using namespace testing;

TEST_CASE("displacement_vector examples") {
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  const auto curve = make_expression_curve("c", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  const DisplacementVector zero = displacement_vector(law, *curve, 0.7, 0.7);
  CHECK(norm_inf(zero.vector.components) == 0.0);
  CHECK(norm_inf(zero.vector.base_point - curve->point(0.7)) == 0.0);

  Gen gen(3);
  const auto wiggle = make_expression_curve("w", gen.smooth_curve(3), {0, 2});
  const DisplacementVector d = displacement_vector(TransportLaw::euclidean(), *wiggle, 0.2, 1.9);
  CHECK(norm_inf(d.vector.components - (wiggle->point(1.9) - wiggle->point(0.2))) < 1e-12);

  const DisplacementVector e = displacement_vector(law, *equator(), 0, 0.5);
  CHECK(norm_inf(e.vector.components - vec({0, 0.5})) < 1e-12);
  CHECK(norm_inf(e.vector.base_point - vec({pi / 2, 0})) == 0.0);
}

TEST_CASE("composition_residual examples") {
  const auto sphere = make_manifold("sphere2:1");
  const auto curve = make_expression_curve("c", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-3);
  CHECK(composition_residual(law, *curve, 0.5, 0.5, 0.5) == 0.0);
  CHECK(composition_residual(TransportLaw::euclidean(), *curve, 0, 1.0, 0.4) < 1e-14);
  CHECK(composition_residual(law, *curve, 0, 1.0, 0.4, 400) <= 1e-7);
}

TEST_CASE("infinitesimal displacement is first-order Taylor") {
  const auto sphere = make_manifold("sphere2:1");
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-4);
  const auto curve = make_expression_curve("c", {"1 + 0.3*sin(t)", "t + 0.2*t*t"}, {0, 2});
  CHECK(norm_inf(infinitesimal_displacement(*curve, 0.6, 0.6).components) == 0.0);
  const TangentVector z = infinitesimal_displacement(*curve, 0.6, 1.1);
  CHECK(norm_inf(z.components - 0.5 * curve->tangent(0.6)) <= 1e-15);

  auto err = [&](double dt) {
    return norm_inf(displacement_vector(law, *curve, 0.6, 0.6 + dt, 64).vector.components -
                    infinitesimal_displacement(*curve, 0.6, 0.6 + dt).components);
  };
  const RefinementReport rep = measure_order(err, {0.2, 0.1, 0.05, 0.025});
  CHECK(rep.fitted_order == doctest::Approx(2.0).epsilon(0.15));

  const auto geo = integrate_geodesic(*sphere, vec({1.0, 0.2}), vec({0.3, 0.7}), {0, 2});
  const TransportLaw fine = TransportLaw::parallel(sphere, 1e-3);
  for (double t : {0.5, 1.3, 2.0}) {
    const Vector d = displacement_vector(fine, *geo, 0.1, t).vector.components;
    CHECK(norm_inf(d - infinitesimal_displacement(*geo, 0.1, t).components) < 1e-8);
  }
}

TEST_CASE("antisymmetry of the displacement vector") {
  Gen gen(5);
  const auto curve = make_expression_curve("c", gen.smooth_curve(2), {0, 2});
  const TransportLaw e = TransportLaw::euclidean();
  const Vector a = displacement_vector(e, *curve, 0.3, 1.6).vector.components;
  const Vector b = displacement_vector(e, *curve, 1.6, 0.3).vector.components;
  CHECK(norm_inf(a + b) < 1e-14);

  const auto sphere = make_manifold("sphere2:1");
  const auto c2 = make_expression_curve("c", {"1 + 0.3*sin(t)", "t"}, {0, 2});
  const TransportLaw p = TransportLaw::parallel(sphere, 1e-3);
  const Vector ds = displacement_vector(p, *c2, 0.3, 1.6, 400).vector.components;
  const Vector dt = displacement_vector(p, *c2, 1.6, 0.3, 400).vector.components;
  const Matrix h = transport_matrix(p, *c2, 1.6, 0.3).H;
  CHECK(norm_inf(ds + h * dt) <= 2e-7);
}

TEST_CASE("Simpson quadrature converges at fourth order in the panel count") {
  const auto sphere = make_manifold("sphere2:1");
  const auto curve = make_expression_curve("c", {"1 + 0.3*sin(3*t)", "t + 0.4*cos(2*t)"}, {0, 2});
  const TransportLaw law = TransportLaw::parallel(sphere, 1e-4);
  auto d = [&](int panels) { return Vector(displacement_vector(law, *curve, 0, 2, panels).vector.components); };
  const Vector ref = d(512) + (d(512) - d(256)) / 15.0;
  auto err = [&](double h) { return norm_inf(d(static_cast<int>(std::lround(2.0 / h))) - ref); };
  const RefinementReport rep = measure_order(err, {2.0 / 8, 2.0 / 16, 2.0 / 32, 2.0 / 64});
  CHECK(rep.fitted_order == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("flat-chart displacement equals the coordinate difference") {
  Gen gen(8);
  const auto flat = make_manifold("euclidean:3");
  for (int trial = 0; trial < 5; ++trial) {
    const auto curve = make_expression_curve("c", gen.smooth_curve(3), {0, 2});
    const double s = gen.uniform(0, 2), t = gen.uniform(0, 2);
    const Vector d = displacement_vector(TransportLaw::parallel(flat), *curve, s, t).vector.components;
    CHECK(norm_inf(d - (curve->point(t) - curve->point(s))) < 1e-10);
  }
}

TEST_CASE("coordinate recovery examples") {
  const auto straight = line(vec({0, 0}), vec({1, 2}), {0, 1});
  const RecoveryResult a = coordinate_recovery_check(TransportLaw::euclidean(), *straight, 0, 12);
  CHECK(a.monotone);
  CHECK(a.max_inversion_error < 1e-12);

  const auto sphere = make_manifold("sphere2:1");
  const RecoveryResult b = coordinate_recovery_check(TransportLaw::parallel(sphere), *equator({0, 2.5}), 0, 12);
  CHECK(b.monotone);
  CHECK(b.max_inversion_error <= 1e-6);

  const auto eight = make_expression_curve("eight", {"sin(t)", "sin(t)*cos(t)"}, {0, 2 * pi});
  const RecoveryResult c = coordinate_recovery_check(TransportLaw::euclidean(), *eight, 0, 32);
  CHECK_FALSE(c.monotone);
}
