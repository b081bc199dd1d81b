#include <cmath>
#include <random>

#include "doctest.h"

#include "cartan/dynamics.hpp"
#include "cartan/errors.hpp"
#include "cartan/presets.hpp"

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

// -K^mu_{nu sigma} v^nu v^sigma summed straight from the contorsion definition (g = identity).
Vec torsion_force_by_index_sum(const Tensor3& s, const Vec& v) {
  const int d = static_cast<int>(v.size());
  Vec out = Vec::Zero(d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      for (int k = 0; k < d; ++k) out[m] -= (s(m, n, k) - s(n, k, m) + s(k, m, n)) * v[n] * v[k];
  return out;
}

}  // namespace

TEST_CASE("flat autoparallel is a straight line") {
  const auto spec = flat_geometry(2);
  const auto traj = integrate(spec, {vec2(0.5, -1.0), vec2(1.0, 0.0)}, rk4(1.0, 1e-2), EquationKind::Autoparallel);
  REQUIRE(traj.ok());
  CHECK((traj.q.back() - vec2(1.5, -1.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(traj.s.back() == 1.0);
  CHECK(autoparallel_rhs(spec, traj.state(3)).norm() == 0.0);
}

TEST_CASE("autoparallel rhs against an index-sum oracle") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const Tensor3 s = spec.torsion().at(vec2(0, 0));
  CHECK(autoparallel_rhs(spec, {vec2(0.2, 0.1), vec2(0.0, 1.0)}).norm() < 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec v = vec2(n(rng), n(rng));
    const Vec a = autoparallel_rhs(spec, {vec2(n(rng), n(rng)), v});
    CHECK((a - torsion_force_by_index_sum(s, v)).norm() < 1e-13);
    CHECK(std::abs(a.dot(v)) < 1e-13);  // the torsion force does no work
  }
  // gamma = (1, 0): a = -2 (gamma . v) T v.
  const Vec v = vec2(0.6, 0.8);
  const Vec a = autoparallel_rhs(spec, {vec2(0, 0), v});
  CHECK(a[0] == doctest::Approx(-2.0 * 0.6 * 0.8));
  CHECK(a[1] == doctest::Approx(2.0 * 0.6 * 0.6));
}

TEST_CASE("speed is conserved along autoparallels and geodesics") {
  const auto torsion = constant_torsion_2d(1.0, 0.0);
  const auto traj = integrate(torsion, {vec2(0, 0), vec2(0.6, 0.8)}, rk4(10.0, 1e-3), EquationKind::Autoparallel);
  REQUIRE(traj.ok());
  const auto sp = speeds(torsion, traj);
  double drift = 0.0;
  for (double x : sp) drift = std::max(drift, std::abs(x - sp.front()));
  CHECK(drift < 1e-10);

  for (const auto& spec : {sphere_geometry(1.0), poly_metric_2d(1.0), weitzenboeck_geometry(0.5, 0.2)}) {
    for (EquationKind kind : {EquationKind::Autoparallel, EquationKind::Geodesic}) {
      const auto t = integrate(spec, {vec2(1.0, 0.3), vec2(0.4, -0.7)}, rk4(10.0, 1e-3), kind);
      REQUIRE(t.ok());
      const auto s2 = speeds(spec, t);
      double worst = 0.0;
      for (double x : s2) worst = std::max(worst, std::abs(x - s2.front()));
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("sphere geodesic along the equator has period 2 pi") {
  const auto spec = sphere_geometry(1.0);
  const auto traj =
      integrate(spec, {vec2(M_PI / 2, 0.0), vec2(0.0, 1.0)}, rk4(2.0 * M_PI, 1e-3), EquationKind::Geodesic);
  REQUIRE(traj.ok());
  CHECK(std::abs(traj.q.back()[0] - M_PI / 2) < 1e-12);
  CHECK(std::abs(traj.q.back()[1] - 2.0 * M_PI) < 1e-6);
  for (std::size_t k = 0; k < traj.size(); k += 500) CHECK(std::abs(traj.q[k][1] - traj.s[k]) < 1e-9);
}

TEST_CASE("zero torsion: autoparallels coincide with geodesics") {
  for (const auto& spec : {sphere_geometry(1.0), flat_geometry(2), poly_metric_2d(0.5)}) {
    const PhaseState st{vec2(1.1, 0.2), vec2(0.3, 0.9)};
    const auto a = integrate(spec, st, rk4(3.0, 1e-3), EquationKind::Autoparallel);
    const auto g = integrate(spec, st, rk4(3.0, 1e-3), EquationKind::Geodesic);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a.q[k] - g.q[k]).norm());
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("torsion separates autoparallels from geodesics") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const PhaseState st{vec2(0, 0), vec2(0.6, 0.8)};
  const auto a = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Autoparallel);
  const auto g = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Geodesic);
  CHECK((g.q.back() - vec2(1.2, 1.6)).norm() < 1e-12);
  CHECK((a.q.back() - g.q.back()).norm() > 0.1);
}

TEST_CASE("adaptive rk45 matches rk4") {
  const auto spec = sphere_geometry(1.0);
  const PhaseState st{vec2(1.0, 0.0), vec2(0.5, 0.7)};
  IntegratorConfig c = rk4(4.0, 0.1);
  c.method = Method::RK45;
  const auto adaptive = integrate(spec, st, c, EquationKind::Geodesic);
  const auto fixed = integrate(spec, st, rk4(4.0, 1e-3), EquationKind::Geodesic);
  REQUIRE(adaptive.ok());
  CHECK(adaptive.s.back() == 4.0);
  CHECK(adaptive.size() < fixed.size());
  CHECK((adaptive.q.back() - fixed.q.back()).norm() < 1e-7);
}

TEST_CASE("divergence keeps the partial trajectory") {
  AccelerationFn bad = [](const PhaseState& st) -> Vec {
    if (st.s > 0.5) return Vec::Constant(2, std::nan(""));
    return Vec::Zero(2);
  };
  const auto traj = integrate(bad, {vec2(0, 0), vec2(1, 0)}, rk4(1.0, 0.01));
  CHECK(traj.status == IntegrationStatus::Diverged);
  CHECK(traj.size() > 10);
  CHECK(traj.s.back() <= 0.5 + 1e-12);

  AccelerationFn degenerate = [](const PhaseState& st) -> Vec {
    if (st.s > 0.3) throw DegenerateMetricError("pole");
    return Vec::Zero(2);
  };
  CHECK(integrate(degenerate, {vec2(0, 0), vec2(1, 0)}, rk4(1.0, 0.01)).status == IntegrationStatus::Diverged);
  CHECK_THROWS_AS(integrate(degenerate, {vec2(0, 0), vec2(1, 0)}, rk4(-1.0, 0.01)), ConfigError);
}

TEST_CASE("hermite interpolation") {
  const auto spec = sphere_geometry(1.0);
  const auto coarse = integrate(spec, {vec2(M_PI / 2, 0.0), vec2(0.0, 1.0)}, rk4(1.0, 0.05), EquationKind::Geodesic);
  const PhaseState mid = coarse.interpolate(0.4321);
  CHECK(std::abs(mid.q[1] - 0.4321) < 1e-8);
  CHECK(std::abs(mid.v[1] - 1.0) < 1e-8);
  CHECK_THROWS_AS(coarse.interpolate(1.5), InterpolationRangeError);
}

TEST_CASE("gauss deviation is minimized by the autoparallel acceleration") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const auto& spec : {constant_torsion_2d(1.0, 0.0), sphere_geometry(1.0), weitzenboeck_geometry(0.3, 0.6)}) {
    for (int i = 0; i < 10; ++i) {
      const PhaseState st{vec2(1.0 + 0.3 * n(rng), 0.3 * n(rng)), vec2(n(rng), n(rng))};
      const Vec a = autoparallel_rhs(spec, st);
      CHECK(gauss_deviation(spec, st, a) < 1e-24);
      CHECK(gauss_deviation(spec, st, a, 0.8) == doctest::Approx(0.4));
      // Shrinking random search, independent of any closed form.
      Vec best = Vec::Zero(2);
      double best_value = gauss_deviation(spec, st, best);
      double radius = 10.0;
      for (int round = 0; round < 40; ++round) {
        const Vec center = best;
        for (int j = 0; j < 100; ++j) {
          const Vec cand = center + radius * vec2(n(rng), n(rng));
          const double value = gauss_deviation(spec, st, cand);
          if (value < best_value) {
            best_value = value;
            best = cand;
          }
        }
        radius *= 0.5;
      }
      CHECK((best - a).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("d'Alembert-Lagrange residual") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  auto w = [](const Point&) { return vec2(1.0, 0.0); };
  const PhaseState st{vec2(0, 0), vec2(0.6, 0.8)};
  const auto auto_traj = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Autoparallel);
  CHECK(dalembert_residual(spec, auto_traj, w).max_abs() < 1e-6);

  const auto geo = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Geodesic);
  const auto r = dalembert_residual(spec, geo, w);
  // Straight line: D_v v = K v v = -autoparallel_rhs.
  const double expected = autoparallel_rhs(spec, st).dot(vec2(1.0, 0.0));
  CHECK(std::abs(expected) > 0.5);
  for (double x : r.value) CHECK(std::abs(x - expected) < 1e-10);

  const auto flat = integrate(flat_geometry(2), st, rk4(1.0, 1e-2), EquationKind::Autoparallel);
  CHECK(dalembert_residual(flat_geometry(2), flat, w).max_abs() == 0.0);
}

TEST_CASE("auxiliary equation") {
  const auto spec = constant_torsion_2d(1.0, 0.0);
  const PhaseState st{vec2(0, 0), vec2(0.6, 0.8)};
  const AuxiliaryState zero{Vec::Zero(2), Vec::Zero(2)};

  const auto auto_traj = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Autoparallel);
  CHECK(integrate_auxiliary_y(spec, auto_traj, zero, rk4(2.0, 1e-2)).max_norm() < 1e-10);

  const auto flat = integrate(flat_geometry(2), st, rk4(2.0, 1e-2), EquationKind::Autoparallel);
  const auto lin = integrate_auxiliary_y(flat_geometry(2), flat, {Vec::Zero(2), vec2(1.0, 0.0)}, rk4(2.0, 0.1));
  for (std::size_t k = 0; k < lin.s.size(); ++k) CHECK((lin.y[k] - lin.s[k] * vec2(1.0, 0.0)).norm() < 1e-13);

  // Straight line in a torsion space is not an autoparallel: y is driven.
  const auto line = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Geodesic);
  const auto ref = integrate_auxiliary_y(spec, line, zero, rk4(2.0, 1e-3));
  CHECK(ref.max_norm() > 0.1);
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto y = integrate_auxiliary_y(spec, line, zero, rk4(2.0, h));
    const double err = (y.y.back() - ref.y.back()).norm();
    if (prev > 0.0) CHECK(std::log2(prev / err) > 2.0);
    prev = err;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("simpson quadrature") {
  for (int n : {5, 6, 11, 12}) {
    std::vector<double> s(n), f(n);
    for (int k = 0; k < n; ++k) {
      s[k] = 2.0 * k / (n - 1);
      f[k] = s[k] * s[k] * s[k] - s[k];
    }
    CHECK(integrate_samples(s, f) == doctest::Approx(2.0).epsilon(1e-13));
  }
}
