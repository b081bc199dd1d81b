// Acceptance runner: one PASS/FAIL line per criterion, sub-checks with --verbose.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cartan/checks.hpp"
#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/geometry.hpp"
#include "cartan/noether.hpp"
#include "cartan/presets.hpp"
#include "cartan/variational.hpp"

using namespace cartan;

namespace {

struct Sub {
  std::string name;
  double value;
  double bound;
  bool below;  // pass iff value < bound (or value > bound when false)
  bool gating = true;

  bool passed() const { return std::isfinite(value) && (below ? value < bound : value > bound); }
};

struct Criterion {
  int id;
  std::string title;
  std::function<std::vector<Sub>()> run;
};

const double kPi = std::acos(-1.0);

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

std::vector<GeometrySpec> all_presets() {
  std::vector<GeometrySpec> out;
  for (const auto& name : geometry_preset_names()) out.push_back(make_geometry(name));
  return out;
}

PhaseState random_state(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhaseState st{sample_points(d, 1, rng).front(), Vec(d), 0.0};
  for (int i = 0; i < d; ++i) st.v[i] = u(rng);
  return st;
}

double fitted_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Great circle on the sphere of radius R in (theta, phi) coordinates, from the embedded
// position and velocity: x(s) = cos(w s) x0 + sin(w s) u0 / w.
struct GreatCircle {
  double R;
  Vec x0, u0;
  double w;

  GreatCircle(double radius, const PhaseState& st) : R(radius) {
    const double th = st.q[0], ph = st.q[1];
    x0 = Vec(3);
    x0 << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
    x0 *= R;
    Mat J(3, 2);
    J << std::cos(th) * std::cos(ph), -std::sin(th) * std::sin(ph), std::cos(th) * std::sin(ph),
        std::sin(th) * std::cos(ph), -std::sin(th), 0.0;
    u0 = R * J * st.v;
    w = u0.norm() / R;
  }

  Point at(double s) const {
    const Vec x = std::cos(w * s) * x0 + std::sin(w * s) / w * u0;
    return vec2(std::acos(x[2] / R), std::atan2(x[1], x[0]));
  }
};

double chart_distance(const Point& a, const Point& b) {
  double dphi = std::remainder(a[1] - b[1], 2.0 * kPi);
  return std::hypot(a[0] - b[0], dphi);
}

// 1: constant-torsion example.
std::vector<Sub> torsion_example() {
  const Vec gamma = vec2(1.0, 0.0);
  const auto spec = constant_torsion_2d(gamma[0], gamma[1]);
  const auto traj = integrate(spec, {vec2(0.0, 0.0), vec2(0.0, 1.0), 0.0}, rk4(10.0, 1e-3), EquationKind::Autoparallel);
  double d1 = 0, d2 = 0, norm = 0, v1 = 0;
  const auto [i10, i20] = torsion_integrals_2d(gamma, traj.state(0));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto st = traj.state(k);
    const auto [i1, i2] = torsion_integrals_2d(gamma, st);
    d1 = std::max(d1, std::abs(i1 - i10));
    d2 = std::max(d2, std::abs(i2 - i20));
    norm = std::max(norm, std::abs(i1 * i1 + i2 * i2 - st.v.squaredNorm()));
    v1 = std::max(v1, std::abs(st.v[0] - traj.v.front()[0]));
  }
  const auto tilted = integrate(spec, {vec2(0.0, 0.0), vec2(0.6, 0.8), 0.0}, rk4(10.0, 1e-3), EquationKind::Autoparallel);
  double tilted_drift = 0;
  for (const auto& v : tilted.v) tilted_drift = std::max(tilted_drift, std::abs(v[0] - 0.6));
  return {{"integration ok", traj.ok() ? 1.0 : 0.0, 0.5, false},
          {"I1 drift", d1, 1e-8, true},
          {"I2 drift", d2, 1e-8, true},
          {"I1^2 + I2^2 - 2E", norm, 1e-14, true},
          {"classical momentum v1 drift", v1, 1e-2, false},
          // gamma . v0 = 0 above keeps the path straight; a tilted start shows the violation.
          {"v1 drift with v0 = (0.6, 0.8)", tilted_drift, 1e-2, false, false}};
}

// 2: torsion-free collapse.
std::vector<Sub> zero_torsion() {
  double path = 0, el = 0;
  std::mt19937_64 rng(2);
  for (const auto& spec : {flat_geometry(2), flat_geometry(3), sphere_geometry(1.0), sphere_geometry(2.5)}) {
    const int d = spec.dim();
    for (int trial = 0; trial < 5; ++trial) {
      const auto st = random_state(d, rng);
      const auto a = integrate(spec, st, rk4(3.0, 1e-3), EquationKind::Autoparallel);
      const auto g = integrate(spec, st, rk4(3.0, 1e-3), EquationKind::Geodesic);
      for (std::size_t k = 0; k < std::min(a.size(), g.size()); ++k)
        path = std::max(path, std::max((a.q[k] - g.q[k]).cwiseAbs().maxCoeff(), (a.v[k] - g.v[k]).cwiseAbs().maxCoeff()));
      if (a.size() != g.size()) path = INFINITY;
    }
    const auto L = kinetic_lagrangian(spec);
    for (int trial = 0; trial < 200; ++trial) {
      const auto st = random_state(d, rng);
      el = std::max(el, (modified_el_rhs(spec, L, st) - classical_el_rhs(L, st)).cwiseAbs().maxCoeff());
    }
  }
  return {{"autoparallel vs geodesic", path, 1e-10, true}, {"modified vs classical EL", el, 1e-10, true}};
}

// 3: modified EL with the kinetic Lagrangian equals the autoparallel equation.
std::vector<Sub> oracle_equivalence() {
  std::vector<Sub> out;
  std::mt19937_64 rng(3);
  for (const auto& spec : all_presets()) {
    const auto L = kinetic_lagrangian(spec);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto st = random_state(spec.dim(), rng);
      worst = std::max(worst, (modified_el_rhs(spec, L, st) - autoparallel_rhs(spec, st)).cwiseAbs().maxCoeff());
    }
    out.push_back({spec.name(), worst, 1e-10, true});
  }
  return out;
}

// 4: embedding consistency.
std::vector<Sub> embedding_consistency() {
  std::mt19937_64 rng(4);
  const Vec gamma = vec2(0.7, -0.3);
  const auto w = weitzenboeck_2d(gamma[0], gamma[1]);
  const auto wspec = induced_geometry(w);
  double torsion = 0, curv = 0, compat = 0;
  for (const auto& q : sample_points(2, 20, rng)) {
    const Tensor3 s = induced_torsion(w.field, q);
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        for (int k = 0; k < 2; ++k) {
          const double eps = (n == 0 && k == 1) ? 1.0 : (n == 1 && k == 0) ? -1.0 : 0.0;
          torsion = std::max(torsion, std::abs(s(m, n, k) - gamma[m] * eps));
        }
    curv = std::max(curv, curvature(wspec, q).mixed.max_abs());
    compat = std::max(compat, metric_compatibility_residual(wspec, q));
  }
  const auto sh = shear_2d(1.0);
  const auto sphere = sphere_holonomic(1.0);
  for (const auto& spec : {induced_geometry(sh), induced_geometry(sphere)})
    for (const auto& q : sample_points(2, 10, rng)) compat = std::max(compat, metric_compatibility_residual(spec, q));

  const std::vector<Point> square = {vec2(0, 0), vec2(1, 0), vec2(1, 1), vec2(0, 1), vec2(0, 0)};
  const Vec loop4 = anholonomy_loop(w.field, square, 4);
  const Vec loop8 = anholonomy_loop(w.field, square, 8);
  const Vec shear4 = anholonomy_loop(sh.field, square, 4);
  const Vec shear8 = anholonomy_loop(sh.field, square, 8);

  double sph = 0;
  const auto sspec = induced_geometry(sphere);
  for (const auto& q : sample_points(2, 10, rng))
    sph = std::max(sph, max_abs_diff(curvature_from_f(sphere.field, q),
                                     curvature(sspec, q).lowered(induced_metric(sphere.field, q))));
  return {{"weitzenboeck torsion vs gamma^mu eps_{nu sigma}", torsion, 1e-10, true},
          {"weitzenboeck curvature", curv, 1e-6, true},
          {"metric compatibility", compat, 1e-6, true},
          {"weitzenboeck loop |gap|", loop8.norm(), 1e-6, false},
          {"weitzenboeck loop quadrature 4 vs 8", (loop4 - loop8).norm(), 1e-8, true},
          {"shear loop |gap|", shear8.norm(), 1e-6, false},
          {"shear loop quadrature 4 vs 8", (shear4 - shear8).norm(), 1e-8, true},
          {"sphere curvature from f vs coordinates", sph, 1e-5, true}};
}

// 5: covariant variational principle.
std::vector<Sub> covariant_principle() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const double T = 2.0;
  auto random_field = [&]() {
    const Vec c = vec2(n(rng), n(rng));
    Mat m(2, 2);
    m << n(rng), n(rng), n(rng), n(rng);
    const int mode = 1 + static_cast<int>(rng() % 3);
    return VariationField([=](double s, const Point& q) -> TangentVector {
      return std::sin(mode * kPi * s / T) * (c + m * q);
    });
  };
  double on_shell = 0, routes = 0;
  for (const auto& spec : {constant_torsion_2d(1.0, 0.3), weitzenboeck_geometry(0.5, -0.8), sphere_geometry(1.0),
                           poly_metric_2d(0.6)}) {
    const auto L = kinetic_lagrangian(spec);
    const auto traj = integrate(spec, {vec2(1.0, 0.2), vec2(0.6, 0.5), 0.0}, rk4(T, 1e-3), EquationKind::Autoparallel);
    if (!traj.ok()) return {{spec.name() + " integration", INFINITY, 0.0, true}};
    for (int i = 0; i < 20; ++i) {
      const auto r = covariant_variation(spec, traj, random_field(), L);
      on_shell = std::max(on_shell, std::abs(r.force_form));
      routes = std::max(routes, std::abs(r.force_form - r.direct_form));
    }
    for (int i = 0; i < 5; ++i) {
      const double a = 0.3 * n(rng), b = 0.3 * n(rng);
      const auto curve = sample_curve(
          [=](double s) {
            return PhaseState{vec2(1.0 + a * std::sin(s), 0.2 + s + b * s * s), vec2(a * std::cos(s), 1.0 + 2 * b * s), s};
          },
          [=](double s) { return vec2(-a * std::sin(s), 2 * b); }, 0.0, T, 2000);
      const auto r = covariant_variation(spec, curve, random_field(), L);
      routes = std::max(routes, std::abs(r.force_form - r.direct_form));
    }
  }
  return {{"delta_w S on autoparallels", on_shell, 1e-6, true}, {"force vs direct route", routes, 1e-8, true}};
}

// 6: extended action stationary point.
std::vector<Sub> extended_action_solve() {
  const auto spec = constant_torsion_2d(1.0, 0.5);
  const auto ref = integrate(spec, {vec2(0.0, 0.0), vec2(0.8, 0.6), 0.0}, rk4(1.0, 1e-3), EquationKind::Autoparallel);
  const int N = 200;
  const auto start = std::chrono::steady_clock::now();
  const auto sol = stationary_point_solve(spec, ExtendedPath::from_path(DiscretePath::chord(ref.q.front(), ref.q.back(), N, 1.0)));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double hess = hessian_nondegeneracy(spec, sol.path);

  const auto sphere = sphere_geometry(1.0);
  const auto gref = integrate(sphere, {vec2(1.0, 0.0), vec2(0.3, 0.8), 0.0}, rk4(1.0, 1e-3), EquationKind::Geodesic);
  const int M = 60;
  const auto chord = DiscretePath::chord(gref.q.front(), gref.q.back(), M, 1.0);
  const auto geo = discrete_geodesic(sphere, chord);
  ExtendedPath init = ExtendedPath::from_path(chord);
  for (int k = 1; k < M; ++k) init.q.nodes[k] += 1e-3 * vec2(std::sin(k), std::cos(3.0 * k));
  const auto ext = stationary_point_solve(sphere, init);
  double dev = 0;
  for (int k = 0; k <= M; ++k) dev = std::max(dev, (ext.path.q.nodes[k] - geo.path.nodes[k]).norm());

  return {{"converged", sol.report.converged ? 1.0 : 0.0, 0.5, false},
          {"autoparallel residual", sol.report.autoparallel_residual, 1e-4, true},
          {"|y|", sol.report.y_norm, 1e-5, true},
          {"gradient norm", sol.report.gradient_norm, 1e-8, true},
          {"smallest Hessian singular value", hess, 1e-8, false},
          {"runtime seconds", seconds, 60.0, true},
          {"torsion off: converged", (ext.report.converged && geo.report.converged) ? 1.0 : 0.0, 0.5, false},
          {"torsion off: deviation from discrete geodesic", dev, 1e-6, true},
          {"torsion off: gradient norm", ext.report.gradient_norm, 1e-8, true}};
}

// 7: auxiliary equation.
std::vector<Sub> auxiliary_equation() {
  std::vector<Sub> out;
  const AuxiliaryState zero{Vec::Zero(2), Vec::Zero(2)};
  const PhaseState st{vec2(1.0, 0.1), vec2(0.6, 0.8), 0.0};
  double on_base = 0;
  for (const auto& spec : all_presets()) {
    if (spec.dim() != 2) continue;
    const auto base = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Autoparallel);
    on_base = std::max(on_base, integrate_auxiliary_y(spec, base, zero, rk4(2.0, 1e-2)).max_norm());
  }
  out.push_back({"zero data on autoparallels", on_base, 1e-10, true});

  auto order = [&](const GeometrySpec& spec, const Trajectory& base) {
    std::vector<Vec> ends;
    for (double h : {0.1, 0.05, 0.025}) ends.push_back(integrate_auxiliary_y(spec, base, zero, rk4(2.0, h)).y.back());
    return std::log2((ends[0] - ends[1]).norm() / (ends[1] - ends[2]).norm());
  };
  for (const auto& spec : {constant_torsion_2d(1.0, 0.0), weitzenboeck_geometry(0.4, 0.9)}) {
    const auto line = integrate(spec, st, rk4(2.0, 1e-3), EquationKind::Geodesic);
    out.push_back({spec.name() + " geodesic base: order", order(spec, line), 2.0, false});
  }
  const auto sphere = sphere_geometry(1.0);
  const auto curve = sample_curve(
      [](double s) { return PhaseState{vec2(1.0 + 0.2 * std::sin(s), s), vec2(0.2 * std::cos(s), 1.0), s}; },
      [](double s) { return vec2(-0.2 * std::sin(s), 0.0); }, 0.0, 2.0, 2000);
  out.push_back({"sphere off-shell base: order", order(sphere, curve), 2.0, false});
  return out;
}

// 8: Gauss principle.
std::vector<Sub> gauss_principle() {
  std::vector<Sub> out;
  std::mt19937_64 rng(8);
  for (const auto& spec : all_presets()) {
    double gap = -INFINITY, dist = 0;
    for (int i = 0; i < 100; ++i) {
      const auto st = random_state(spec.dim(), rng);
      const auto scan = gauss_scan(spec, st, 1000, rng);
      gap = std::max(gap, scan.at_rhs - scan.best_candidate);
      dist = std::max(dist, scan.best_distance);
    }
    out.push_back({spec.name() + ": best candidate below rhs value", gap, 0.0, true});
    out.push_back({spec.name() + ": minimizer distance to rhs", dist, 1e-6, true});
  }
  return out;
}

// 9: Noether rates.
std::vector<Sub> noether_rates() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  double torsion_form = 0, general = 0, identity = 0;
  for (const auto& spec : all_presets()) {
    const int d = spec.dim();
    const auto L = kinetic_lagrangian(spec);
    const auto traj = integrate(spec, random_state(d, rng), rk4(2.0, 1e-3), EquationKind::Autoparallel);
    if (!traj.ok()) return {{spec.name() + " integration", INFINITY, 0.0, true}};

    std::vector<std::string> symmetric;
    for (const auto& s : preset_symmetries(spec, L)) symmetric.push_back(s.name);
    std::vector<SymmetryField> fields;
    for (int i = 0; i < d; ++i) fields.push_back(translation_symmetry(d, i));
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) fields.push_back(rotation_symmetry(d, i, j));
    fields.push_back(time_translation(L));
    for (const auto& f : fields) {
      general = std::max(general, on_shell_rate_residual(spec, L, f, traj).max_abs());
      if (std::find(symmetric.begin(), symmetric.end(), f.name) != symmetric.end())
        torsion_form = std::max(torsion_form, modified_rate_residual(spec, L, f, traj).max_abs());
    }
    for (int i = 0; i < 10; ++i) {
      Vec a(d), b(d);
      for (int k = 0; k < d; ++k) {
        a[k] = n(rng);
        b[k] = n(rng);
      }
      const double c = n(rng);
      SymmetryField f;
      f.name = "random";
      f.omega = [=](const Point& q, const Vec& v) {
        Vec w(d);
        for (int k = 0; k < d; ++k) w[k] = a[k] * std::sin(q[(k + 1) % d]) + b[k] * q[0] * q[0] + c * v[k];
        return w;
      };
      f.phi = [=](const Point& q, const Vec&, double s) { return c * q[0] * s; };
      identity = std::max(identity, rate_identity_residual(L, f, traj).max_abs());
    }
  }
  return {{"dI/ds vs torsion pairing (symmetries)", torsion_form, 1e-6, true},
          {"dI/ds vs on-shell rate (all fields)", general, 1e-6, true},
          {"rate identity, random fields", identity, 1e-6, true}};
}

// 10: convergence orders.
std::vector<Sub> convergence_orders() {
  const double R = 1.3;
  const auto spec = sphere_geometry(R);
  const PhaseState st{vec2(1.1, 0.3), vec2(0.7, 0.9), 0.0};
  const GreatCircle exact(R, st);
  const double T = 2.0;
  std::vector<double> hs, errs;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    const auto traj = integrate(spec, st, rk4(T, h), EquationKind::Geodesic);
    hs.push_back(h);
    errs.push_back(chart_distance(traj.q.back(), exact.at(T)));
  }
  std::vector<double> dss, derrs;
  for (int N : {10, 20, 40, 80}) {
    const auto geo = discrete_geodesic(spec, DiscretePath::chord(exact.at(0.0), exact.at(T), N, T));
    double err = 0;
    for (int k = 0; k <= N; ++k) err = std::max(err, chart_distance(geo.path.nodes[k], exact.at(k * geo.path.ds)));
    dss.push_back(geo.path.ds);
    derrs.push_back(err);
  }
  const double rk = fitted_slope(hs, errs);
  const double da = fitted_slope(dss, derrs);
  return {{"rk4 slope - 4", std::abs(rk - 4.0), 0.2, true}, {"discrete action slope - 2", std::abs(da - 2.0), 0.3, true}};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "constant-torsion example", torsion_example},
      {2, "zero-torsion collapse", zero_torsion},
      {3, "modified Euler-Lagrange oracle", oracle_equivalence},
      {4, "embedding consistency", embedding_consistency},
      {5, "covariant variational principle", covariant_principle},
      {6, "extended action stationary point", extended_action_solve},
      {7, "auxiliary equation", auxiliary_equation},
      {8, "Gauss principle", gauss_principle},
      {9, "Noether rates", noether_rates},
      {10, "convergence orders", convergence_orders},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  bool verbose = false;
  app.add_option("-c,--criterion", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  app.add_flag("-v,--verbose", verbose, "Print every sub-check");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::vector<Sub> subs;
    std::string error;
    try {
      subs = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    bool ok = error.empty() && !subs.empty();
    std::string failed;
    for (const auto& s : subs)
      if (s.gating && !s.passed()) {
        ok = false;
        if (failed.empty()) failed = s.name;
      }
    all = all && ok;
    std::printf("criterion %2d %s  %s%s%s\n", c.id, ok ? "PASS" : "FAIL", c.title.c_str(),
                failed.empty() ? "" : "  (failed: ", failed.empty() ? "" : (failed + ")").c_str());
    if (!error.empty()) std::printf("    error: %s\n", error.c_str());
    if (verbose || !ok)
      for (const auto& s : subs)
        std::printf("    %s %-48s %.3e %s %.1e\n", !s.gating ? "info" : s.passed() ? "ok  " : "FAIL", s.name.c_str(), s.value,
                    s.below ? "<" : ">", s.bound);
  }
  return all ? 0 : 1;
}
