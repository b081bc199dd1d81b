#include <algorithm>
#include <cmath>

#include "cartan/errors.hpp"
#include "cartan/variational.hpp"
#include "newton.hpp"

namespace cartan {

namespace {

constexpr double kGeometryStep = 1e-4;

// Connection, its derivative and the contorsion at a node, plus their q-derivatives.
struct NodeGeometry {
  Tensor3 gamma;
  Tensor4 dgamma;
  Tensor3 k;
  std::vector<Tensor3> gamma_q;
  std::vector<Tensor4> dgamma_q;
  std::vector<Tensor3> k_q;
};

struct GeometryTriple {
  Tensor3 gamma;
  Tensor4 dgamma;
  Tensor3 k;
};

GeometryTriple triple(const GeometrySpec& spec, const Point& q) {
  return {full_connection(spec, q), connection_derivative(spec, q), contorsion(spec.torsion(), spec.metric(), q)};
}

Tensor4 combine(double a, const Tensor4& x, double b, const Tensor4& y) {
  const int d = x.dim();
  Tensor4 out(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) out(i, j, k, l) = a * x(i, j, k, l) + b * y(i, j, k, l);
  return out;
}

NodeGeometry node_geometry(const GeometrySpec& spec, const Point& q) {
  const int d = spec.dim();
  NodeGeometry g;
  const GeometryTriple base = triple(spec, q);
  g.gamma = base.gamma;
  g.dgamma = base.dgamma;
  g.k = base.k;
  for (int i = 0; i < d; ++i) {
    const double h = kGeometryStep * std::max(1.0, std::abs(q[i]));
    Point p = q;
    p[i] = q[i] + h;
    const GeometryTriple p1 = triple(spec, p);
    p[i] = q[i] - h;
    const GeometryTriple m1 = triple(spec, p);
    p[i] = q[i] + 2 * h;
    const GeometryTriple p2 = triple(spec, p);
    p[i] = q[i] - 2 * h;
    const GeometryTriple m2 = triple(spec, p);
    const double w = 1.0 / (12.0 * h);
    g.gamma_q.push_back(w * (8.0 * (p1.gamma - m1.gamma) - (p2.gamma - m2.gamma)));
    g.k_q.push_back(w * (8.0 * (p1.k - m1.k) - (p2.k - m2.k)));
    g.dgamma_q.push_back(combine(8.0 * w, combine(1.0, p1.dgamma, -1.0, m1.dgamma), -w,
                                 combine(1.0, p2.dgamma, -1.0, m2.dgamma)));
  }
  return g;
}

struct NodeVars {
  Vec v, a, y, yd, ydd, lam;
};

NodeVars node_vars(const ExtendedPath& p, int k) {
  const double h = p.q.ds;
  const auto& q = p.q.nodes;
  return {(q[k + 1] - q[k - 1]) / (2.0 * h), (q[k + 1] - 2.0 * q[k] + q[k - 1]) / (h * h),
          p.y[k],                            (p.y[k + 1] - p.y[k - 1]) / (2.0 * h),
          (p.y[k + 1] - 2.0 * p.y[k] + p.y[k - 1]) / (h * h), p.lambda[k]};
}

// B y' + C y - Gamma v v
Vec omega_part(const Tensor3& gamma, const Tensor4& dgamma, const NodeVars& n) {
  const int d = static_cast<int>(n.v.size());
  Vec out = Vec::Zero(d);
  for (int m = 0; m < d; ++m)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        out[m] += (gamma(m, a, b) + gamma(m, b, a)) * n.v[b] * n.yd[a] - gamma(m, a, b) * n.v[a] * n.v[b];
        for (int c = 0; c < d; ++c) out[m] += n.y[a] * dgamma(a, m, b, c) * n.v[b] * n.v[c];
      }
  return out;
}

// -K(y; v, v) + lambda . (B y' + C y - Gamma v v)
double coupling_density(const Tensor3& gamma, const Tensor4& dgamma, const Tensor3& k, const NodeVars& n) {
  const int d = static_cast<int>(n.v.size());
  double kvv = 0.0;
  for (int m = 0; m < d; ++m)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) kvv += k(m, a, b) * n.v[a] * n.v[b] * n.y[m];
  return -kvv + n.lam.dot(omega_part(gamma, dgamma, n));
}

double node_density(const NodeGeometry& g, const NodeVars& n) {
  return coupling_density(g.gamma, g.dgamma, g.k, n) + n.lam.dot(n.ydd - n.a);
}

struct NodePartials {
  Vec q, v, a, y, yd, ydd, lam;
};

NodePartials node_partials(const NodeGeometry& g, const NodeVars& n) {
  const int d = static_cast<int>(n.v.size());
  NodePartials p;
  p.a = -n.lam;
  p.ydd = n.lam;
  p.lam = n.ydd - n.a + omega_part(g.gamma, g.dgamma, n);
  p.v = Vec::Zero(d);
  p.y = Vec::Zero(d);
  p.yd = Vec::Zero(d);
  p.q = Vec::Zero(d);
  for (int s = 0; s < d; ++s) {
    for (int m = 0; m < d; ++m)
      for (int b = 0; b < d; ++b) {
        p.v[s] -= (g.k(m, s, b) + g.k(m, b, s)) * n.v[b] * n.y[m];
        p.v[s] -= n.lam[m] * (g.gamma(m, s, b) + g.gamma(m, b, s)) * n.v[b];
        p.v[s] += n.lam[m] * (g.gamma(m, b, s) + g.gamma(m, s, b)) * n.yd[b];
        for (int c = 0; c < d; ++c) p.v[s] += n.lam[m] * (g.dgamma(c, m, s, b) + g.dgamma(c, m, b, s)) * n.v[b] * n.y[c];
      }
    for (int m = 0; m < d; ++m)
      for (int b = 0; b < d; ++b) {
        p.yd[s] += n.lam[m] * (g.gamma(m, s, b) + g.gamma(m, b, s)) * n.v[b];
        p.y[s] -= g.k(s, m, b) * n.v[m] * n.v[b];
        for (int c = 0; c < d; ++c) p.y[s] += n.lam[m] * g.dgamma(s, m, b, c) * n.v[b] * n.v[c];
      }
    p.q[s] = coupling_density(g.gamma_q[s], g.dgamma_q[s], g.k_q[s], n);
  }
  return p;
}

void check_shape(const ExtendedPath& p) {
  const int n = p.q.segments();
  if (n < 2) throw ConfigError("extended path needs N >= 2");
  if (static_cast<int>(p.y.size()) != n + 1 || static_cast<int>(p.lambda.size()) != n + 1)
    throw ConfigError("extended path arrays must have N+1 nodes");
}

// Gradient of the extended action given per-node geometry for interior nodes 1..N-1
// (cache index k-1).
Vec assemble_gradient(const GeometrySpec& spec, const ExtendedPath& p, const std::vector<NodeGeometry>& cache) {
  const int n = p.q.segments();
  const int d = p.q.dim();
  const int m = 3 * d;
  const double h = p.q.ds;
  Vec grad = Vec::Zero((n - 1) * m);
  const Vec sg = discrete_action_gradient(spec, p.q);
  for (int k = 1; k < n; ++k) grad.segment((k - 1) * m, d) = sg.segment((k - 1) * d, d);

  auto add = [&](int node, int offset, const Vec& value) {
    if (node >= 1 && node <= n - 1) grad.segment((node - 1) * m + offset, d) += value;
  };
  for (int k = 1; k < n; ++k) {
    const NodePartials pt = node_partials(cache[k - 1], node_vars(p, k));
    // Every node term carries the quadrature weight h.
    add(k, 0, h * pt.q);
    add(k + 1, 0, h * (pt.v / (2.0 * h) + pt.a / (h * h)));
    add(k - 1, 0, h * (-pt.v / (2.0 * h) + pt.a / (h * h)));
    add(k, 0, h * (-2.0 * pt.a / (h * h)));
    add(k, d, h * (pt.y - 2.0 * pt.ydd / (h * h)));
    add(k + 1, d, h * (pt.yd / (2.0 * h) + pt.ydd / (h * h)));
    add(k - 1, d, h * (-pt.yd / (2.0 * h) + pt.ydd / (h * h)));
    add(k, 2 * d, h * pt.lam);
  }
  return grad;
}

std::vector<NodeGeometry> build_cache(const GeometrySpec& spec, const ExtendedPath& p) {
  std::vector<NodeGeometry> cache;
  cache.reserve(p.q.segments() - 1);
  for (int k = 1; k < p.q.segments(); ++k) cache.push_back(node_geometry(spec, p.q.nodes[k]));
  return cache;
}

SolveReport make_report(const detail::NewtonOutcome& outcome) {
  SolveReport r;
  r.converged = outcome.converged;
  r.iterations = outcome.iterations;
  r.gradient_norms = outcome.norms;
  r.message = outcome.message;
  return r;
}

}  // namespace

ExtendedPath ExtendedPath::from_path(const DiscretePath& path) {
  ExtendedPath p;
  p.q = path;
  p.y.assign(path.nodes.size(), Vec::Zero(path.dim()));
  p.lambda.assign(path.nodes.size(), Vec::Zero(path.dim()));
  return p;
}

double ExtendedPath::y_norm() const {
  double m = 0.0;
  for (const auto& x : y) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

double ExtendedPath::lambda_norm() const {
  double m = 0.0;
  for (const auto& x : lambda) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

double extended_action(const GeometrySpec& spec, const ExtendedPath& path) {
  return discrete_action(spec, path.q) + coupling_terms(spec, path);
}

double coupling_terms(const GeometrySpec& spec, const ExtendedPath& path) {
  check_shape(path);
  double total = 0.0;
  for (int k = 1; k < path.q.segments(); ++k) {
    const Point& q = path.q.nodes[k];
    NodeGeometry g;
    g.gamma = full_connection(spec, q);
    g.dgamma = connection_derivative(spec, q);
    g.k = contorsion(spec.torsion(), spec.metric(), q);
    total += path.q.ds * node_density(g, node_vars(path, k));
  }
  return total;
}

Vec pack(const ExtendedPath& path) {
  check_shape(path);
  const int n = path.q.segments();
  const int d = path.q.dim();
  Vec x((n - 1) * 3 * d);
  for (int k = 1; k < n; ++k) {
    x.segment((k - 1) * 3 * d, d) = path.q.nodes[k];
    x.segment((k - 1) * 3 * d + d, d) = path.y[k];
    x.segment((k - 1) * 3 * d + 2 * d, d) = path.lambda[k];
  }
  return x;
}

ExtendedPath unpack(const ExtendedPath& shape, const Vec& x) {
  ExtendedPath p = shape;
  const int n = p.q.segments();
  const int d = p.q.dim();
  if (x.size() != (n - 1) * 3 * d) throw ConfigError("unknown vector has wrong size");
  for (int k = 1; k < n; ++k) {
    p.q.nodes[k] = x.segment((k - 1) * 3 * d, d);
    p.y[k] = x.segment((k - 1) * 3 * d + d, d);
    p.lambda[k] = x.segment((k - 1) * 3 * d + 2 * d, d);
  }
  p.y.front().setZero();
  p.y.back().setZero();
  p.lambda.front().setZero();
  p.lambda.back().setZero();
  return p;
}

Vec extended_gradient(const GeometrySpec& spec, const ExtendedPath& path) {
  check_shape(path);
  return assemble_gradient(spec, path, build_cache(spec, path));
}

ExtendedSolution stationary_point_solve(const GeometrySpec& spec, const ExtendedPath& initial,
                                        const SolverConfig& config) {
  check_shape(initial);
  const ExtendedPath shape = unpack(initial, pack(initial));
  const int n = shape.q.segments();
  const int d = shape.q.dim();

  detail::NewtonProblem problem;
  problem.gradient = [&](const Vec& x) { return extended_gradient(spec, unpack(shape, x)); };
  problem.jacobian = [&](const Vec& x) {
    const std::vector<NodeGeometry> base = build_cache(spec, unpack(shape, x));
    detail::PerturbedGradient grad = [&](const Vec& xp, const std::vector<int>& nodes, int component) {
      const ExtendedPath p = unpack(shape, xp);
      if (component >= d) return assemble_gradient(spec, p, base);
      std::vector<NodeGeometry> cache = base;
      for (int node : nodes) cache[node] = node_geometry(spec, p.q.nodes[node + 1]);
      return assemble_gradient(spec, p, cache);
    };
    return detail::banded_jacobian(n - 1, 3 * d, 2, x, config.jacobian_step, grad);
  };

  const detail::NewtonOutcome outcome = detail::newton_solve(problem, pack(shape), config);
  ExtendedSolution out;
  out.path = unpack(shape, outcome.x);
  out.report = make_report(outcome);
  out.report.gradient_norm = extended_gradient(spec, out.path).cwiseAbs().maxCoeff();
  out.report.autoparallel_residual = discrete_autoparallel_residual(spec, out.path.q);
  out.report.y_norm = out.path.y_norm();
  out.report.lambda_norm = out.path.lambda_norm();
  return out;
}

PathSolution discrete_geodesic(const GeometrySpec& spec, const DiscretePath& initial, const SolverConfig& config) {
  const int n = initial.segments();
  const int d = initial.dim();
  if (n < 2) throw ConfigError("discrete path needs N >= 2");
  auto to_path = [&](const Vec& x) {
    DiscretePath p = initial;
    for (int k = 1; k < n; ++k) p.nodes[k] = x.segment((k - 1) * d, d);
    return p;
  };
  Vec x0((n - 1) * d);
  for (int k = 1; k < n; ++k) x0.segment((k - 1) * d, d) = initial.nodes[k];

  detail::NewtonProblem problem;
  problem.gradient = [&](const Vec& x) { return discrete_action_gradient(spec, to_path(x)); };
  problem.jacobian = [&](const Vec& x) {
    detail::PerturbedGradient grad = [&](const Vec& xp, const std::vector<int>&, int) {
      return discrete_action_gradient(spec, to_path(xp));
    };
    return detail::banded_jacobian(n - 1, d, 1, x, config.jacobian_step, grad);
  };
  const detail::NewtonOutcome outcome = detail::newton_solve(problem, x0, config);
  PathSolution out;
  out.path = to_path(outcome.x);
  out.report = make_report(outcome);
  out.report.gradient_norm = discrete_action_gradient(spec, out.path).cwiseAbs().maxCoeff();
  out.report.autoparallel_residual = discrete_autoparallel_residual(spec, out.path);
  return out;
}

double hessian_nondegeneracy(const GeometrySpec& spec, const ExtendedPath& path) {
  check_shape(path);
  const int n = path.q.segments();
  const int d = path.q.dim();
  const double h = path.q.ds;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    const Point& q = path.q.nodes[k];
    const Mat g = spec.metric().at(q);
    const Tensor3 gamma = full_connection(spec, q);
    const Tensor4 dgamma = connection_derivative(spec, q);
    const Tensor3 kt = contorsion(spec.torsion(), spec.metric(), q);
    NodeVars base = node_vars(path, k);
    const Vec lam_dot = (path.lambda[k + 1] - path.lambda[k - 1]) / (2.0 * h);

    // z = (v, y', lambda')
    auto local = [&](const Vec& z) {
      NodeVars nv = base;
      nv.v = z.segment(0, d);
      nv.yd = z.segment(d, d);
      const Vec ld = z.segment(2 * d, d);
      return 0.5 * nv.v.dot(g * nv.v) + coupling_density(gamma, dgamma, kt, nv) + ld.dot(nv.v) - ld.dot(nv.yd);
    };
    Vec z(3 * d);
    z << base.v, base.yd, lam_dot;
    const int m = 3 * d;
    Mat hess(m, m);
    const double e = 1e-4;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Vec pp = z, pm = z, mp = z, mm = z;
        pp[i] += e, pp[j] += e;
        pm[i] += e, pm[j] -= e;
        mp[i] -= e, mp[j] += e;
        mm[i] -= e, mm[j] -= e;
        hess(i, j) = hess(j, i) = (local(pp) - local(pm) - local(mp) + local(mm)) / (4.0 * e * e);
      }
    Eigen::JacobiSVD<Mat> svd(hess);
    worst = std::min(worst, svd.singularValues().minCoeff());
  }
  return worst;
}

}  // namespace cartan
