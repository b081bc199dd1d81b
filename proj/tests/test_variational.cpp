#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"

#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/errors.hpp"
#include "cartan/presets.hpp"
#include "cartan/variational.hpp"

using namespace cartan;

namespace {

Vec vec2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

IntegratorConfig rk4(double span, double step) {
  IntegratorConfig c;
  c.span = span;
  c.step = step;
  return c;
}

LagrangianField value_only(const LagrangianField& L) {
  LagrangianField out;
  out.d = L.d;
  out.value = L.value;
  return out;
}

// Central differences of a scalar function over all components of x.
Vec numeric_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

ExtendedPath jittered(const ExtendedPath& p, double scale, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec x = pack(p);
  for (int i = 0; i < x.size(); ++i) x[i] += u(rng);
  return unpack(p, x);
}

}  // namespace

TEST_CASE("modified Euler-Lagrange with the kinetic Lagrangian is the autoparallel equation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& spec : {constant_torsion_2d(1.0, 0.5), sphere_geometry(1.3), poly_metric_2d(0.7),
                           weitzenboeck_geometry(0.4, -0.9)}) {
    const LagrangianField L = kinetic_lagrangian(spec);
    const LagrangianField Lfd = value_only(L);
    for (int i = 0; i < 40; ++i) {
      const PhaseState st{vec2(1.0 + 0.5 * u(rng), u(rng)), vec2(u(rng), u(rng)), 0.0};
      const Vec ref = autoparallel_rhs(spec, st);
      CHECK((modified_el_rhs(spec, L, st) - ref).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((modified_el_rhs(spec, Lfd, st) - ref).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("torsion-free Euler-Lagrange is the geodesic equation") {
  const auto spec = sphere_geometry(1.0);
  const LagrangianField L = kinetic_lagrangian(spec);
  const PhaseState st{vec2(0.8, 0.3), vec2(0.2, -1.1), 0.0};
  CHECK((classical_el_rhs(L, st) - geodesic_rhs(spec, st)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((modified_el_rhs(spec, L, st) - classical_el_rhs(L, st)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("potential enters as minus its gradient") {
  const auto spec = flat_geometry(2);
  const auto L = with_potential(kinetic_lagrangian(spec), [](const Point& q) { return 0.5 * 3.0 * q.squaredNorm(); });
  const PhaseState st{vec2(0.4, -0.2), vec2(1.0, 2.0), 0.0};
  CHECK((modified_el_rhs(spec, L, st) + 3.0 * st.q).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("singular velocity Hessian is rejected") {
  const auto spec = flat_geometry(2);
  LagrangianField L;
  L.d = 2;
  L.value = [](const Vec& v, const Point&) { return 0.5 * v[0] * v[0]; };
  CHECK_THROWS_AS(modified_el_rhs(spec, L, {vec2(0, 0), vec2(1, 1), 0.0}), DegenerateLagrangianError);
}

TEST_CASE("covariant variation vanishes on autoparallels and the two routes agree") {
  const auto spec = constant_torsion_2d(1.0, 0.3);
  const auto L = kinetic_lagrangian(spec);
  const double T = 2.0;
  const auto traj = integrate(spec, {vec2(0.1, 0.2), vec2(0.6, 0.9), 0.0}, rk4(T, 1e-3), EquationKind::Autoparallel);
  REQUIRE(traj.ok());

  const double pi = std::acos(-1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_field = [&]() {
    const Vec c = vec2(n(rng), n(rng));
    const Mat m = Mat::Random(2, 2);
    const int mode = 1 + static_cast<int>(rng() % 3);
    return VariationField([=](double s, const Point& q) -> TangentVector {
      return std::sin(mode * pi * s / T) * (c + m * q);
    });
  };

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto r = covariant_variation(spec, traj, random_field(), L);
    worst = std::max(worst, std::abs(r.force_form));
    CHECK(std::abs(r.force_form - r.direct_form) < 1e-8);
  }
  CHECK(worst < 1e-6);

  // Arbitrary path: both routes agree, and the torsion term is what separates
  // them from the classical variation.
  const auto curve = sample_curve(
      [](double s) { return PhaseState{vec2(s + 0.3 * s * s, std::sin(s)), vec2(1.0 + 0.6 * s, std::cos(s)), s}; },
      [](double s) { return vec2(0.6, -std::sin(s)); }, 0.0, T, 2000);
  const auto w = random_field();
  const auto r = covariant_variation(spec, curve, w, L);
  CHECK(std::abs(r.force_form - r.direct_form) < 1e-8);
  CHECK(std::abs(r.force_form) > 1e-3);
  CHECK(std::abs(r.direct_form - r.classical) > 1e-3);

  CHECK_THROWS_AS(covariant_variation(spec, curve, [](double, const Point&) { return vec2(1, 0); }, L), ConfigError);
}

TEST_CASE("discrete action of a straight chord") {
  const auto spec = flat_geometry(2);
  const auto path = DiscretePath::chord(vec2(0, 0), vec2(3, 4), 10, 2.0);
  CHECK(path.ds == doctest::Approx(0.2));
  CHECK(discrete_action(spec, path) == doctest::Approx(0.5 * 25.0 / 2.0).epsilon(1e-14));
  CHECK(discrete_action_gradient(spec, path).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(discrete_autoparallel_residual(spec, path) < 1e-12);
  CHECK_THROWS_AS(DiscretePath::chord(vec2(0, 0), vec2(1, 1), 1, 1.0), ConfigError);
}

TEST_CASE("discrete action gradient matches differences") {
  const auto spec = sphere_geometry(1.2);
  DiscretePath path = DiscretePath::chord(vec2(0.7, 0.1), vec2(1.3, 1.0), 8, 1.0);
  for (int k = 1; k < 8; ++k) path.nodes[k][0] += 0.05 * std::sin(k);
  Vec x(14);
  for (int k = 1; k < 8; ++k) x.segment(2 * (k - 1), 2) = path.nodes[k];
  auto f = [&](const Vec& xx) {
    DiscretePath p = path;
    for (int k = 1; k < 8; ++k) p.nodes[k] = xx.segment(2 * (k - 1), 2);
    return discrete_action(spec, p);
  };
  CHECK((discrete_action_gradient(spec, path) - numeric_gradient(f, x, 1e-6)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("extended gradient matches differences of the extended action") {
  for (const auto& spec : {constant_torsion_2d(0.8, -0.4), sphere_geometry(1.0), poly_metric_2d(0.5)}) {
    ExtendedPath p = ExtendedPath::from_path(DiscretePath::chord(vec2(0.6, 0.2), vec2(1.2, 0.9), 9, 1.0));
    p = jittered(p, 0.1, 5);
    const Vec x = pack(p);
    auto f = [&](const Vec& xx) { return extended_action(spec, unpack(p, xx)); };
    const Vec analytic = extended_gradient(spec, p);
    const Vec numeric = numeric_gradient(f, x, 1e-4);
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, numeric.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("pack and unpack round trip and enforce boundary values") {
  ExtendedPath p = ExtendedPath::from_path(DiscretePath::chord(vec2(0, 0), vec2(1, 1), 4, 1.0));
  p = jittered(p, 0.3, 2);
  const ExtendedPath back = unpack(p, pack(p));
  CHECK((pack(back) - pack(p)).norm() == 0.0);
  CHECK(back.y.front().norm() == 0.0);
  CHECK(back.lambda.back().norm() == 0.0);
  CHECK_THROWS_AS(unpack(p, Vec::Zero(3)), ConfigError);
}

TEST_CASE("extended action stationary point recovers a torsion autoparallel") {
  const auto spec = constant_torsion_2d(1.0, 0.5);
  const auto ref = integrate(spec, {vec2(0.0, 0.0), vec2(0.8, 0.6), 0.0}, rk4(1.0, 1e-3), EquationKind::Autoparallel);
  REQUIRE(ref.ok());
  const int N = 200;
  const auto chord = DiscretePath::chord(ref.q.front(), ref.q.back(), N, 1.0);

  const auto start = std::chrono::steady_clock::now();
  const auto sol = stationary_point_solve(spec, ExtendedPath::from_path(chord));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(sol.report.converged);
  CHECK(sol.report.gradient_norm < 1e-8);
  CHECK(sol.report.autoparallel_residual < 1e-4);
  CHECK(sol.report.y_norm < 1e-5);
  CHECK(seconds < 60.0);

  // Discrete solution tracks the continuous autoparallel to O(ds^2).
  const auto sampled = DiscretePath::from_trajectory(ref, N);
  double err = 0.0;
  for (int k = 0; k <= N; ++k) err = std::max(err, (sol.path.q.nodes[k] - sampled.nodes[k]).norm());
  CHECK(err < 1e-4);
  CHECK(hessian_nondegeneracy(spec, sol.path) > 1e-8);
}

TEST_CASE("without torsion the extended solve is the discrete geodesic") {
  const auto spec = sphere_geometry(1.0);
  const auto ref = integrate(spec, {vec2(1.0, 0.0), vec2(0.3, 0.8), 0.0}, rk4(1.0, 1e-3), EquationKind::Geodesic);
  REQUIRE(ref.ok());
  const int N = 60;
  const auto chord = DiscretePath::chord(ref.q.front(), ref.q.back(), N, 1.0);
  const auto geo = discrete_geodesic(spec, chord);
  REQUIRE(geo.report.converged);
  CHECK(geo.report.gradient_norm < 1e-8);

  const auto ext = stationary_point_solve(spec, jittered(ExtendedPath::from_path(chord), 1e-3, 9));
  REQUIRE(ext.report.converged);
  double err = 0.0;
  for (int k = 0; k <= N; ++k) err = std::max(err, (ext.path.q.nodes[k] - geo.path.nodes[k]).norm());
  CHECK(err < 1e-6);
  CHECK(ext.report.lambda_norm < 1e-8);
  CHECK(ext.report.y_norm < 1e-3);
}

TEST_CASE("iteration cap reports non-convergence with the best iterate") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const auto chord = DiscretePath::chord(vec2(0, 0), vec2(0.5, 0.8), 40, 1.0);
  SolverConfig cfg;
  cfg.max_iterations = 1;
  const auto sol = stationary_point_solve(spec, jittered(ExtendedPath::from_path(chord), 0.05, 1), cfg);
  CHECK_FALSE(sol.report.converged);
  CHECK(sol.report.iterations <= 1);
  CHECK(sol.report.gradient_norms.size() >= 1);
  CHECK(sol.report.gradient_norm <= sol.report.gradient_norms.front());
}

TEST_CASE("Hessian nondegeneracy on a flat torsion-free path") {
  // Per node the Hessian in (v, y', lambda') is [[1,0,1],[0,0,-1],[1,-1,0]] per axis;
  // its smallest singular value is 0.445041867912629.
  const auto spec = flat_geometry(2);
  const auto p = ExtendedPath::from_path(DiscretePath::chord(vec2(0, 0), vec2(1, 2), 10, 1.0));
  CHECK(hessian_nondegeneracy(spec, p) == doctest::Approx(0.445041867912629).epsilon(1e-7));
}

TEST_CASE("Poincare equations in a rotating frame give straight lines") {
  const auto spec = flat_geometry(2);
  const auto frame = rotating_frame([](const Point& q) { return 0.7 * q[0] + 0.3 * q[1] * q[1]; });
  const auto quasi = quasi_lagrangian(kinetic_lagrangian(spec), frame);
  const Point q0 = vec2(0.2, -0.1);
  const Vec v0 = vec2(0.9, 0.4);
  const Vec u0 = frame.inverse_at(q0) * v0;
  const auto tr = integrate_poincare(frame, quasi, q0, u0, 2.0, 1e-3);
  double err = 0.0;
  for (std::size_t k = 0; k < tr.s.size(); ++k) err = std::max(err, (tr.q[k] - (q0 + tr.s[k] * v0)).norm());
  CHECK(err < 1e-10);
  // C is nonzero for this frame.
  CHECK(anholonomity(frame, q0).max_abs() > 0.1);
}

TEST_CASE("Poincare equations in the coordinate frame are Euler-Lagrange") {
  const auto spec = sphere_geometry(1.0);
  const auto L = kinetic_lagrangian(spec);
  const auto quasi = quasi_lagrangian(L, coordinate_frame(2));
  const Point q = vec2(0.9, 0.4);
  const Vec u = vec2(0.3, -0.7);
  CHECK((poincare_rhs(coordinate_frame(2), quasi, q, u) - classical_el_rhs(L, {q, u, 0.0})).cwiseAbs().maxCoeff() <
        1e-6);
  CHECK(anholonomity(coordinate_frame(2), q).max_abs() == 0.0);
}

TEST_CASE("frame torsion transforms as a tensor") {
  const auto emb = weitzenboeck_2d(0.6, -0.3);
  const auto frame = rotating_frame([](const Point& q) { return 0.5 * q[0] - 0.2 * q[1]; });
  for (const Point& q : {vec2(0.1, 0.2), vec2(-0.4, 0.7)}) {
    const Tensor3 s = induced_torsion(emb.field, q);
    CHECK(max_abs_diff(induced_torsion_in_frame(emb.field, frame, q), transform_torsion(s, frame, q)) < 1e-8);
  }
}
