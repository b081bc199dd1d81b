#include <cmath>
#include <random>

#include "doctest.h"

#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/errors.hpp"
#include "cartan/noether.hpp"
#include "cartan/presets.hpp"

using namespace cartan;

namespace {

Vec vec2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Trajectory autoparallel(const GeometrySpec& spec, const PhaseState& st, double span, double step = 1e-3) {
  IntegratorConfig c;
  c.span = span;
  c.step = step;
  return integrate(spec, st, c, EquationKind::Autoparallel);
}

double max_drift(const SeriesResult& r) {
  double m = 0.0;
  for (double x : r.value) m = std::max(m, std::abs(x - r.value.front()));
  return m;
}

}  // namespace

TEST_CASE("charges of the basic symmetries") {
  const auto spec = flat_geometry(2);
  const auto L = kinetic_lagrangian(spec);
  const PhaseState st{vec2(0.5, 2.0), vec2(3.0, -1.0), 0.0};
  CHECK(charge(L, time_translation(L), st) == doctest::Approx(5.0));
  CHECK(charge(L, translation_symmetry(2, 0), st) == doctest::Approx(3.0));
  CHECK(charge(L, rotation_symmetry(2, 0, 1), st) == doctest::Approx(0.5 * -1.0 - 2.0 * 3.0));
  CHECK_THROWS_AS(translation_symmetry(2, 2), ConfigError);
}

TEST_CASE("sphere azimuthal momentum is conserved along geodesics") {
  const auto spec = sphere_geometry(1.0);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(1.1, 0.2), vec2(0.4, 0.9), 0.0}, 3.0);
  REQUIRE(traj.ok());
  const auto sym = translation_symmetry(2, 1);
  const double expected = std::pow(std::sin(1.1), 2) * 0.9;
  CHECK(charge(L, sym, traj.state(0)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(max_drift(charge_series(L, sym, traj)) < 1e-8);
  const auto I = noether_charge(L, sym, traj);
  CHECK(std::abs(I(1.2345) - expected) < 1e-8);
}

TEST_CASE("modified rate identity on every preset") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& spec : {flat_geometry(2), constant_torsion_2d(1.0, -0.5), sphere_geometry(1.0),
                           poly_metric_2d(0.8), weitzenboeck_geometry(0.7, 0.2)}) {
    const auto L = kinetic_lagrangian(spec);
    const PhaseState st{vec2(1.0 + 0.3 * u(rng), 0.3 * u(rng)), vec2(u(rng), u(rng)), 0.0};
    const auto traj = autoparallel(spec, st, 2.0);
    REQUIRE(traj.ok());
    for (const auto& sym : preset_symmetries(spec, L)) {
      CAPTURE(spec.name());
      CAPTURE(sym.name);
      CHECK(modified_rate_residual(spec, L, sym, traj).max_abs() < 1e-6);
      CHECK(rate_identity_residual(L, sym, traj).max_abs() < 1e-6);
    }
  }
}

TEST_CASE("torsion breaks momentum conservation but not energy") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0.0, 0.0), vec2(0.6, 0.8), 0.0}, 5.0);
  REQUIRE(traj.ok());
  const auto p1 = translation_symmetry(2, 0);
  CHECK(charge_rate(L, p1, traj).max_abs() > 0.1);
  CHECK(modified_rate_residual(spec, L, p1, traj).max_abs() < 1e-6);
  CHECK(max_drift(charge_series(L, rotation_symmetry(2, 0, 1), traj)) > 1e-3);
  CHECK(max_drift(charge_series(L, time_translation(L), traj)) < 1e-10);

  // Without torsion the same symmetries are conserved.
  const auto flat = spec.without_torsion();
  const auto line = autoparallel(flat, {vec2(0.0, 0.0), vec2(0.6, 0.8), 0.0}, 5.0);
  CHECK(charge_rate(L, p1, line).max_abs() < 1e-8);
  CHECK(charge_rate(L, rotation_symmetry(2, 0, 1), line).max_abs() < 1e-8);
}

TEST_CASE("rate identity holds off shell for arbitrary fields") {
  const auto spec = sphere_geometry(1.0);
  const auto L = kinetic_lagrangian(spec);
  const auto curve = sample_curve(
      [](double s) { return PhaseState{vec2(1.0 + 0.2 * std::sin(s), s * s), vec2(0.2 * std::cos(s), 2.0 * s), s}; },
      [](double s) { return vec2(-0.2 * std::sin(s), 2.0); }, 0.0, 1.5, 1500);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double a = n(rng), b = n(rng), c = n(rng);
    SymmetryField sym;
    sym.name = "random";
    sym.omega = [=](const Point& q, const Vec& v) { return vec2(a * std::sin(q[1]) + c * v[0], b * q[0] * q[0]); };
    sym.phi = [=](const Point& q, const Vec&, double s) { return c * q[0] * s; };
    CHECK(rate_identity_residual(L, sym, curve).max_abs() < 1e-6);
  }
}

TEST_CASE("torsion integrals in the plane") {
  const Vec gamma = vec2(1.0, 0.0);
  const auto [a1, a2] = torsion_integrals_2d(gamma, {vec2(0, 0), vec2(0.3, -0.4), 0.0});
  CHECK(a1 == 0.3);
  CHECK(a2 == -0.4);

  const auto spec = constant_torsion_2d(0.7, 0.4);
  const Vec g = vec2(0.7, 0.4);
  const auto traj = autoparallel(spec, {vec2(0.2, -0.3), vec2(0.5, 1.1), 0.0}, 10.0);
  REQUIRE(traj.ok());
  const auto [i10, i20] = torsion_integrals_2d(g, traj.state(0));
  double drift = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto [i1, i2] = torsion_integrals_2d(g, traj.state(k));
    drift = std::max({drift, std::abs(i1 - i10), std::abs(i2 - i20)});
    norm = std::max(norm, std::abs(i1 * i1 + i2 * i2 - traj.v[k].squaredNorm()));
  }
  CHECK(drift < 1e-8);
  CHECK(norm < 1e-14);
  CHECK(torsion_integrals_rank(g, {vec2(0.1, 0.2), vec2(0.3, 0.4), 0.0}) == 2);
}

TEST_CASE("torsion-rotated translations satisfy the modified symmetry condition") {
  const Vec g = vec2(0.6, -0.3);
  const auto spec = constant_torsion_2d(g[0], g[1]);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0.1, 0.1), vec2(0.9, -0.2), 0.0}, 4.0);
  for (const Vec& a : {vec2(1, 0), vec2(0, 1)}) {
    const auto sym = torsion_symmetry_2d(g, a);
    const auto check = modified_symmetry_check(spec, L, sym, traj);
    CHECK(check.invariance < 1e-6);
    CHECK(check.charge_drift < 1e-8);
  }
  const auto [i1, i2] = torsion_integrals_2d(g, traj.state(17));
  CHECK(charge(L, torsion_symmetry_2d(g, vec2(1, 0)), traj.state(17)) == doctest::Approx(i1).epsilon(1e-14));
  CHECK(charge(L, torsion_symmetry_2d(g, vec2(0, 1)), traj.state(17)) == doctest::Approx(i2).epsilon(1e-14));
  // A plain translation fails the same check.
  CHECK(modified_symmetry_check(spec, L, translation_symmetry(2, 0), traj).charge_drift > 1e-2);
}

TEST_CASE("teleparallel frame velocities are integrals of autoparallel motion") {
  const auto emb = weitzenboeck_2d(0.8, -0.5);
  const auto spec = induced_geometry(emb);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0.3, 0.2), vec2(-0.4, 1.0), 0.0}, 10.0);
  REQUIRE(traj.ok());
  const Vec i0 = teleparallel_integrals(emb.field, traj.state(0));
  double drift = 0.0, cross = 0.0;
  for (std::size_t k = 0; k < traj.size(); k += 7) {
    const Vec ik = teleparallel_integrals(emb.field, traj.state(k));
    drift = std::max(drift, (ik - i0).cwiseAbs().maxCoeff());
    const auto [i1, i2] = torsion_integrals_2d(vec2(0.8, -0.5), traj.state(k));
    cross = std::max({cross, std::abs(ik[0] - i1), std::abs(ik[1] - i2)});
  }
  CHECK(drift < 1e-8);
  CHECK(cross < 1e-13);

  for (const Vec& a : {vec2(1, 0), vec2(0, 1)}) {
    const auto sym = teleparallel_symmetry(emb.field, a);
    const auto check = modified_symmetry_check(spec, L, sym, traj);
    CHECK(check.invariance < 1e-6);
    CHECK(check.charge_drift < 1e-8);
    CHECK(charge(L, sym, traj.state(5)) == doctest::Approx(a.dot(teleparallel_integrals(emb.field, traj.state(5)))));
  }
}

TEST_CASE("frame velocities drift on the sphere") {
  const auto emb = sphere_holonomic(1.0);
  const auto spec = induced_geometry(emb);
  const auto traj = autoparallel(spec, {vec2(1.0, 0.0), vec2(0.5, 0.7), 0.0}, 1.0);
  REQUIRE(traj.ok());
  const Vec i0 = frame_velocity(emb.field, traj.state(0));
  const Vec i1 = frame_velocity(emb.field, traj.state(traj.size() - 1));
  CHECK((i1 - i0).cwiseAbs().maxCoeff() > 1e-3);
  CHECK_THROWS_AS(teleparallel_integrals(emb.field, traj.state(0)), ConfigError);
}

TEST_CASE("both transformation laws agree without torsion") {
  const auto spec = sphere_geometry(1.0);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0.9, 0.0), vec2(0.3, 0.6), 0.0}, 1.0);
  SymmetryField classical = translation_symmetry(2, 1);
  SymmetryField modified = classical;
  modified.law = TransformationLaw::Modified;
  const auto a = modified_symmetry_check(spec, L, classical, traj);
  const auto b = modified_symmetry_check(spec, L, modified, traj);
  CHECK(a.invariance < 1e-8);
  CHECK(std::abs(a.invariance - b.invariance) < 1e-12);
}

TEST_CASE("conservation report") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0, 0), vec2(0, 1), 0.0}, 2.0);
  const auto report = conservation_report(spec, L, preset_symmetries(spec, L), traj);
  REQUIRE(report.size() == 4);
  CHECK(report.back().name == "time");
  for (const auto& r : report) {
    CHECK(r.rate_residual < 1e-6);
    CHECK(r.identity_residual < 1e-6);
    CHECK(r.mean_drift <= r.max_drift);
  }
}

TEST_CASE("on-shell rate covers symmetries of either condition") {
  const Vec g = vec2(0.5, 0.5);
  const auto spec = constant_torsion_2d(g[0], g[1]);
  const auto L = kinetic_lagrangian(spec);
  const auto traj = autoparallel(spec, {vec2(0.0, 0.3), vec2(0.7, -0.6), 0.0}, 2.0);
  for (const auto& sym : {translation_symmetry(2, 1), rotation_symmetry(2, 0, 1), torsion_symmetry_2d(g, vec2(1, 0))})
    CHECK(on_shell_rate_residual(spec, L, sym, traj).max_abs() < 1e-6);
  // For a classical symmetry the prediction is the torsion rate itself.
  const auto p2 = translation_symmetry(2, 1);
  const auto st = traj.state(40);
  CHECK(predicted_rate(spec, L, p2, st, traj.a[40]) == doctest::Approx(torsion_rate(spec, L, p2, st)).epsilon(1e-9));
  CHECK(std::abs(predicted_rate(spec, L, torsion_symmetry_2d(g, vec2(0, 1)), st, traj.a[40])) < 1e-8);
}
