#include "cartan/checks.hpp"

#include <algorithm>
#include <cmath>

#include "cartan/errors.hpp"
#include "cartan/noether.hpp"
#include "cartan/presets.hpp"
#include "cartan/variational.hpp"

namespace cartan {

namespace {

CheckResult below(const std::string& suite, const std::string& name, double value, double tol,
                  std::string detail = {}) {
  return {suite, name, value, tol, value < tol, std::move(detail)};
}

CheckResult above(const std::string& suite, const std::string& name, double value, double tol,
                  std::string detail = {}) {
  return {suite, name, value, tol, value > tol, std::move(detail)};
}

double torsion_size(const GeometrySpec& spec, const std::vector<Point>& pts) {
  double m = 0.0;
  for (const auto& q : pts) m = std::max(m, spec.torsion().at(q).max_abs());
  return m;
}

Vec random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec u(d);
  for (int i = 0; i < d; ++i) u[i] = n(rng);
  return u / u.norm();
}

PhaseState random_state(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhaseState st;
  st.q = sample_points(d, 1, rng).front();
  st.v = Vec(d);
  for (int i = 0; i < d; ++i) st.v[i] = u(rng);
  return st;
}

Trajectory run(const GeometrySpec& spec, const PhaseState& st, double span, EquationKind kind) {
  IntegratorConfig c;
  c.span = span;
  c.step = 1e-3;
  Trajectory t = integrate(spec, st, c, kind);
  if (!t.ok()) throw IntegrationError("check trajectory failed: " + t.message);
  return t;
}

// The sphere's chart is singular at theta = 0; keep its sample paths near the equator.
PhaseState path_start(const GeometrySpec& spec) {
  PhaseState st;
  st.q = Vec::Constant(spec.dim(), 0.2);
  st.v = Vec::Constant(spec.dim(), 0.3);
  st.v[0] = 0.7;
  if (spec.name() == "sphere" || spec.name() == "sphere-holonomic") st.q[0] = 1.2;
  return st;
}

}  // namespace

std::vector<std::string> suite_names() { return {"geometry", "dynamics", "noether", "embedding", "all"}; }

std::vector<Point> sample_points(int d, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    Point q(d);
    for (int i = 0; i < d; ++i) q[i] = 1.0 + 0.3 * u(rng);
    out.push_back(q);
  }
  return out;
}

GaussScan gauss_scan(const GeometrySpec& spec, const PhaseState& state, int candidates, std::mt19937_64& rng) {
  const int d = spec.dim();
  const Vec a = autoparallel_rhs(spec, state);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> expo(-7.0, 0.0);
  GaussScan out;
  out.at_rhs = gauss_deviation(spec, state, a);
  out.best_candidate = std::numeric_limits<double>::infinity();
  for (int k = 0; k < candidates; ++k) {
    Vec cand(d);
    if (k % 2 == 0) {
      for (int i = 0; i < d; ++i) cand[i] = box(rng);
    } else {
      cand = a + std::pow(10.0, expo(rng)) * random_unit(d, rng);
    }
    const double value = gauss_deviation(spec, state, cand);
    if (value < out.best_candidate) {
      out.best_candidate = value;
      out.best_distance = (cand - a).norm();
    }
  }
  return out;
}

std::vector<CheckResult> geometry_checks(const CheckContext& ctx) {
  const std::string S = "geometry";
  const GeometrySpec& spec = ctx.spec;
  std::mt19937_64 rng(ctx.seed);
  const auto pts = sample_points(spec.dim(), 10, rng);
  double compat = 0.0, comm = 0.0, recovery = 0.0;
  auto scalar = [](const Point& q) {
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) s += std::sin((i + 1.0) * q[i]) * q[(i + 1) % q.size()];
    return s;
  };
  for (const auto& q : pts) {
    compat = std::max(compat, metric_compatibility_residual(spec, q));
    comm = std::max(comm, scalar_commutator_residual(spec, scalar, q));
    recovery = std::max(recovery, max_abs_diff(antisymmetric_part(full_connection(spec, q)), spec.torsion().at(q)));
  }
  std::vector<CheckResult> out{below(S, "compatibility", compat, 1e-6), below(S, "commutator-4.8", comm, 1e-5),
                               below(S, "torsion-recovery", recovery, 1e-10)};
  if (spec.name() == "weitzenboeck-2d" || spec.name() == "flat") {
    double curv = 0.0;
    for (const auto& q : pts) curv = std::max(curv, curvature(spec, q).mixed.max_abs());
    out.push_back(below(S, "teleparallel-curvature", curv, 1e-6));
  }
  return out;
}

std::vector<CheckResult> dynamics_checks(const CheckContext& ctx) {
  const std::string S = "dynamics";
  const GeometrySpec& spec = ctx.spec;
  const int d = spec.dim();
  std::mt19937_64 rng(ctx.seed);
  std::vector<CheckResult> out;

  double gap = 0.0, at_rhs = 0.0, dist = 0.0;
  for (int k = 0; k < 20; ++k) {
    const GaussScan g = gauss_scan(spec, random_state(d, rng), 1000, rng);
    gap = std::max(gap, g.at_rhs - g.best_candidate);
    at_rhs = std::max(at_rhs, g.at_rhs);
    dist = std::max(dist, g.best_distance);
  }
  out.push_back({S, "gauss-scan", dist, 1e-6, gap <= 0.0 && at_rhs < 1e-20 && dist < 1e-6,
                 "distance of the best of 1000 candidates to autoparallel_rhs"});

  const LagrangianField L = kinetic_lagrangian(spec);
  double oracle = 0.0;
  for (int k = 0; k < 200; ++k) {
    const PhaseState st = random_state(d, rng);
    oracle = std::max(oracle, (modified_el_rhs(spec, L, st) - autoparallel_rhs(spec, st)).cwiseAbs().maxCoeff());
  }
  out.push_back(below(S, "modified-el-oracle", oracle, 1e-10));

  const PhaseState st = path_start(spec);
  const auto bare = spec.without_torsion();
  const Trajectory ap = run(bare, st, 2.0, EquationKind::Autoparallel);
  const Trajectory geo = run(bare, st, 2.0, EquationKind::Geodesic);
  double collapse = 0.0;
  for (std::size_t k = 0; k < ap.size(); ++k) collapse = std::max(collapse, (ap.q[k] - geo.q[k]).norm());
  out.push_back(below(S, "zero-torsion-collapse", collapse, 1e-10));

  const Trajectory traj = run(spec, st, 5.0, EquationKind::Autoparallel);
  const auto sp = speeds(spec, traj);
  double drift = 0.0;
  for (double x : sp) drift = std::max(drift, std::abs(x - sp.front()));
  out.push_back(below(S, "speed-conservation", drift, 1e-9));

  const Vec w = random_unit(d, rng);
  out.push_back(below(S, "dalembert", dalembert_residual(spec, traj, [&](const Point&) { return w; }).max_abs(), 1e-6));

  const AuxiliaryTrajectory y = integrate_auxiliary_y(spec, traj, {Vec::Zero(d), Vec::Zero(d)}, IntegratorConfig{});
  out.push_back(below(S, "auxiliary-zero", y.max_norm(), 1e-10));
  return out;
}

std::vector<CheckResult> noether_checks(const CheckContext& ctx) {
  const std::string S = "noether";
  const GeometrySpec& spec = ctx.spec;
  const int d = spec.dim();
  std::mt19937_64 rng(ctx.seed);
  const LagrangianField L = kinetic_lagrangian(spec);
  const Trajectory traj = run(spec, path_start(spec), 3.0, EquationKind::Autoparallel);
  std::vector<CheckResult> out;

  const auto syms = preset_symmetries(spec, L);
  double rates = 0.0;
  for (const auto& sym : syms) rates = std::max(rates, modified_rate_residual(spec, L, sym, traj).max_abs());
  out.push_back(below(S, "noether-rates", rates, 1e-6));

  std::normal_distribution<double> n(0.0, 1.0);
  double identity = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Mat m = Mat::NullaryExpr(d, d, [&]() { return n(rng); });
    const Vec c = Vec::NullaryExpr(d, [&]() { return n(rng); });
    SymmetryField sym;
    sym.name = "random";
    sym.omega = [m, c](const Point& q, const Vec&) -> Vec { return c + m * q.array().sin().matrix(); };
    identity = std::max(identity, rate_identity_residual(L, sym, traj).max_abs());
  }
  out.push_back(below(S, "rate-identity", identity, 1e-6));

  const auto energy = charge_series(L, time_translation(L), traj);
  double e_drift = 0.0;
  for (double x : energy.value) e_drift = std::max(e_drift, std::abs(x - energy.value.front()));
  out.push_back(below(S, "energy-drift", e_drift, 1e-10));

  // Coordinate-symmetry charges: violated under torsion, conserved without it.
  std::vector<SymmetryField> coord(syms.begin(), syms.end() - 1);
  if (!coord.empty()) {
    double drift = 0.0;
    for (const auto& sym : coord) {
      const auto series = charge_series(L, sym, traj);
      for (double x : series.value) drift = std::max(drift, std::abs(x - series.value.front()));
    }
    std::vector<Point> pts(traj.q.begin(), traj.q.end());
    if (torsion_size(spec, pts) > 0.0)
      out.push_back(above(S, "momentum-drift", drift, 1e-3, "violation expected under torsion"));
    else
      out.push_back(below(S, "momentum-drift", drift, 1e-8, "conservation expected without torsion"));
  }

  if (spec.name() == "constant-torsion-2d") {
    Vec gamma(2);
    gamma << spec.params().at("gamma1"), spec.params().at("gamma2");
    const Trajectory longer = run(spec, path_start(spec), 10.0, EquationKind::Autoparallel);
    const auto [a, b] = torsion_integrals_2d(gamma, longer.state(0));
    double drift = 0.0;
    for (std::size_t k = 0; k < longer.size(); ++k) {
      const auto [i1, i2] = torsion_integrals_2d(gamma, longer.state(k));
      drift = std::max({drift, std::abs(i1 - a), std::abs(i2 - b)});
    }
    out.push_back(below(S, "teleparallel-integrals", drift, 1e-8, "torsion integrals I1, I2"));
  } else if (spec.name() == "weitzenboeck-2d") {
    const auto emb = make_embedding("weitzenboeck-2d", spec.params());
    const Trajectory longer = run(spec, path_start(spec), 10.0, EquationKind::Autoparallel);
    const Vec i0 = teleparallel_integrals(emb.field, longer.state(0));
    double drift = 0.0;
    for (std::size_t k = 0; k < longer.size(); ++k)
      drift = std::max(drift, (teleparallel_integrals(emb.field, longer.state(k)) - i0).cwiseAbs().maxCoeff());
    out.push_back(below(S, "teleparallel-integrals", drift, 1e-8, "frame velocities"));
  }
  return out;
}

std::vector<CheckResult> embedding_checks(const CheckContext& ctx) {
  const std::string S = "embedding";
  if (!ctx.embedding) return {{S, "embedding", 0.0, 0.0, true, "skipped: no embedding preset"}};
  const EmbeddingPreset& emb = *ctx.embedding;
  const GeometrySpec spec = induced_geometry(emb);
  std::mt19937_64 rng(ctx.seed);
  const auto pts = sample_points(emb.field.d, 6, rng);
  std::vector<CheckResult> out;

  double compat = 0.0, curv = 0.0, ortho = 0.0, r = 0.0;
  for (const auto& q : pts) {
    compat = std::max(compat, metric_compatibility_residual(spec, q));
    const Tensor4 coord = curvature(spec, q).lowered(induced_metric(emb.field, q));
    curv = std::max(curv, max_abs_diff(curvature_from_f(emb.field, q), coord));
    ortho = std::max(ortho, f_orthogonality_residual(emb.field, q));
    r = std::max(r, coord.max_abs());
  }
  out.push_back(below(S, "compatibility", compat, 1e-6));
  out.push_back(below(S, "curvature-from-f", curv, 1e-5));
  out.push_back(below(S, "f-orthogonality", ortho, 1e-8));
  if (emb.teleparallel) out.push_back(below(S, "teleparallel-curvature", r, 1e-6));

  if (emb.name == "weitzenboeck-2d") {
    const double g1 = emb.params.at("gamma1"), g2 = emb.params.at("gamma2");
    double err = 0.0;
    for (const auto& q : pts) {
      Tensor3 expected(2);
      expected(0, 0, 1) = g1;
      expected(0, 1, 0) = -g1;
      expected(1, 0, 1) = g2;
      expected(1, 1, 0) = -g2;
      err = std::max(err, max_abs_diff(induced_torsion(emb.field, q), expected));
    }
    out.push_back(below(S, "induced-torsion", err, 1e-10));
  }

  if (emb.field.d == 2) {
    const Point o = pts.front();
    Vec ex(2), ey(2);
    ex << 1, 0;
    ey << 0, 1;
    const std::vector<Point> loop{o, o + ex, o + ex + ey, o + ey, o};
    const Vec coarse = anholonomy_loop(emb.field, loop, 4);
    const Vec fine = anholonomy_loop(emb.field, loop, 8);
    out.push_back(below(S, "anholonomy-quadrature", (fine - coarse).cwiseAbs().maxCoeff(), 1e-8));
    if (emb.integrable)
      out.push_back(below(S, "anholonomy-loop", fine.cwiseAbs().maxCoeff(), 1e-10, "integrable: loop closes"));
    else
      out.push_back(above(S, "anholonomy-loop", fine.cwiseAbs().maxCoeff(), 1e-6, "non-integrable: loop gap"));
  }
  return out;
}

std::vector<CheckResult> run_suite(const std::string& suite, const CheckContext& ctx) {
  if (suite == "geometry") return geometry_checks(ctx);
  if (suite == "dynamics") return dynamics_checks(ctx);
  if (suite == "noether") return noether_checks(ctx);
  if (suite == "embedding") return embedding_checks(ctx);
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (const auto& s : {"geometry", "dynamics", "noether", "embedding"}) {
      auto part = run_suite(s, ctx);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw ConfigError(suite.empty() ? "empty suite name" : "unknown suite '" + suite + "'");
}

}  // namespace cartan
