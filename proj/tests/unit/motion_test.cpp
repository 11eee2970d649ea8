#include "support.hpp"

#include "pathdev/deviation.hpp"
#include "pathdev/oracles.hpp"

#include <doctest.h>

using namespace pathdev;
using namespace testing;

namespace {

using FamilyForce = ForcedFamily::FamilyForce;

std::shared_ptr<const ForcedFamily> family(const std::string& manifold, PointFn chi, PointFn phi, FamilyForce force,
                                           Interval s_range, Interval r_range) {
  return std::make_shared<ForcedFamily>(make_manifold(manifold), std::move(chi), std::move(phi), std::move(force),
                                        s_range, r_range);
}

FamilyForceFn force_of(const std::shared_ptr<const ForcedFamily>& fam) {
  return [fam](double s, double r) { return fam->force(s, r); };
}

std::shared_ptr<const ForcedFamily> flat_family() {
  return family(
      "euclidean:2", [](double r) { return vec({r, 0}); }, [](double r) { return vec({0, 1 + 0.2 * r}); },
      [](double, double r, const Vector&, const Vector&) { return vec({std::sin(r), std::cos(r)}); }, {0, 1},
      {0, 1});
}

std::shared_ptr<const ForcedFamily> sphere_family(double strength) {
  return family(
      "sphere2:1", [](double r) { return vec({1.1, 0.2 + r}); }, [](double r) { return vec({0.3, 1.0 + 0.2 * r}); },
      [strength](double s, double r, const Vector&, const Vector&) {
        return vec({strength * std::sin(r + s), 0.5 * strength});
      },
      {0, 1}, {-0.1, 0.5});
}

}  // namespace

TEST_CASE("flat space: the equation of motion is the force jump") {
  const auto fam = flat_family();
  const DeviationScenario scn = make_forced_family_scenario(fam, 0.2, 0.9, ObserverSpec{});
  const auto m = fam->manifold();
  const TransportLaw law = TransportLaw::parallel(m);
  const double s = 0.5;
  const Vector jump = fam->force(s, 0.9) - fam->force(s, 0.2);
  CHECK(norm_inf(jump - vec({std::sin(0.9) - std::sin(0.2), std::cos(0.9) - std::cos(0.2)})) < 1e-12);

  const Vector rhs = equation_of_motion_rhs(*m, law, scn, s, force_of(fam));
  CHECK(norm_inf(rhs - jump) < 1e-6);
  const Vector lhs = fd_second_deviation(scn, law, s, 1e-2);
  CHECK(norm_inf(lhs - jump) <= 1e-6);

  const ForceDifference fd = force_difference_term(*m, law, scn, s, force_of(fam));
  CHECK(norm_inf(fd.total - jump) < 1e-12);
  CHECK(norm_inf(fd.transported_difference - jump) < 1e-12);
}

TEST_CASE("zero forces in flat space: h is affine in s") {
  const auto fam = family(
      "euclidean:2", [](double r) { return vec({r, 0.5 * r}); }, [](double r) { return vec({1, 0.3 * r}); },
      [](double, double, const Vector&, const Vector&) { return vec({0, 0}); }, {0, 1}, {0, 1});
  const DeviationScenario scn = make_forced_family_scenario(fam, 0.1, 0.7, ObserverSpec{});
  const TransportLaw law = TransportLaw::parallel(fam->manifold());
  CHECK(norm_inf(equation_of_motion_rhs(*fam->manifold(), law, scn, 0.4, force_of(fam))) < 1e-7);
  const Vector h0 = deviation_vector(law, scn, 0.2).components;
  const Vector h1 = deviation_vector(law, scn, 0.5).components;
  const Vector h2 = deviation_vector(law, scn, 0.8).components;
  CHECK(norm_inf(h2 - 2 * h1 + h0) < 1e-12);
  CHECK(norm_inf(force_difference_term(*fam->manifold(), law, scn, 0.4, force_of(fam)).total) == 0.0);
}

TEST_CASE("sphere: equation-of-motion residual is second order in the s step") {
  const auto fam = sphere_family(0.1);
  const DeviationScenario scn = make_forced_family_scenario(fam, 0.0, 0.3, ObserverSpec{});
  const auto& m = *fam->manifold();
  const TransportLaw law = TransportLaw::parallel(fam->manifold());
  const Vector rhs = equation_of_motion_rhs(m, law, scn, 0.5, force_of(fam));
  auto err = [&](double h) { return norm_inf(fd_second_deviation(scn, law, 0.5, h, 64) - rhs); };
  const RefinementReport rep = measure_order(err, {0.04, 0.02, 0.01});
  CHECK(rep.fitted_order == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("force difference: integration by parts matches the direct quadrature") {
  const auto fam = sphere_family(0.1);
  const DeviationScenario scn = make_forced_family_scenario(fam, 0.0, 0.3, ObserverSpec{});
  const TransportLaw law = TransportLaw::parallel(fam->manifold());
  MotionOptions opts;
  opts.panels = 64;
  const ForceDifference fd = force_difference_term(*fam->manifold(), law, scn, 0.5, force_of(fam), opts);
  CHECK(norm_inf(fd.total - fd.direct) < 1e-9);

  const auto tors = family(
      "flat_torsion:0.5", [](double r) { return vec({r, 0.1 * r}); }, [](double r) { return vec({0.2, 1 + r}); },
      [](double s, double r, const Vector&, const Vector&) { return vec({0.3 * std::cos(r), 0.1 * s}); }, {0, 1},
      {0, 1});
  const DeviationScenario ts = make_forced_family_scenario(tors, 0.2, 0.8, ObserverSpec{});
  const ForceDifference td =
      force_difference_term(*tors->manifold(), TransportLaw::parallel(tors->manifold()), ts, 0.5, force_of(tors), opts);
  CHECK(norm_inf(td.correction) > 1e-4);
  CHECK(norm_inf(td.total - td.direct) < 1e-9);
}

TEST_CASE("infinitesimal-limit equation: tidal forces in flat space") {
  // Forces linear in position: F = -k x, so D^2 zeta / ds^2 = -k zeta exactly.
  const double k = 0.8;
  const auto fam = family(
      "euclidean:2", [](double r) { return vec({r, 0}); }, [](double r) { return vec({0, 1 + 0.2 * r}); },
      [k](double, double, const Vector& x, const Vector&) { return Vector(-k * x); }, {0, 1}, {0, 0.5});
  const DeviationScenario scn = make_forced_family_scenario(fam, 0.1, 0.3, ObserverSpec{});
  const InfinitesimalResidual r = infinitesimal_deviation_equation_residual(
      *fam->manifold(), TransportLaw::parallel(fam->manifold()), scn, 0.5, force_of(fam), 2.5e-3);
  CHECK(r.residual < 1e-6);
}

TEST_CASE("infinitesimal-limit equation: quadratic in the connector span on the sphere") {
  const auto fam = sphere_family(0.1);
  const TransportLaw law = TransportLaw::parallel(fam->manifold());
  auto err = [&](double dr) {
    const DeviationScenario scn = make_forced_family_scenario(fam, 0.0, dr, ObserverSpec{});
    return infinitesimal_deviation_equation_residual(*fam->manifold(), law, scn, 0.5, force_of(fam), 2e-3).residual;
  };
  const RefinementReport rep = measure_order(err, {0.2, 0.1, 0.05});
  CHECK(rep.fitted_order == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("without forces the family variation is the Jacobi field") {
  // zeta / (r'' - r') tends to d/dr y(s, r'), a variation through geodesics;
  // it must solve the Jacobi equation integrated independently along x1.
  const auto fam = sphere_family(0.0);
  const auto& m = *fam->manifold();
  const double r1 = 0.1;
  const auto x1 = integrate_geodesic(m, fam->point(0, r1), fam->s_velocity(0, r1), {0, 1});
  const Vector h0 = fam->r_velocity(0, r1);
  const Vector dh0 = vec({0.0, 0.2}) + contract_gamma(m.christoffel(fam->point(0, r1)), h0, fam->s_velocity(0, r1));
  const auto states = integrate_geodesic_deviation(m, *x1, h0, dh0, {0, 1}, 1e-3);
  for (const auto& st : states) {
    if (std::abs(st.u - 0.5) > 1e-9 && std::abs(st.u - 1.0) > 1e-9) continue;
    CHECK(norm_inf(st.h - fam->r_velocity(st.u, r1)) < 1e-7);
  }
  const DeviationScenario scn = make_forced_family_scenario(fam, r1, r1 + 0.05, ObserverSpec{});
  CHECK(norm_inf(infinitesimal_deviation(scn, 0.5).components - 0.05 * fam->r_velocity(0.5, r1)) < 1e-12);
}
