#include "cartan/variational.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cartan/errors.hpp"
#include "cartan/finite_difference.hpp"

namespace cartan {

namespace {

constexpr double kGradientStep = 1e-6;
constexpr double kNestedStep = 1e-3;

double scaled(double base, double x) { return base * std::max(1.0, std::abs(x)); }

// Second derivative matrix d^2 f / dx_i dy_j by nested 4th-order differences.
template <class F>
Mat nested_second(const F& f, const Vec& x, const Vec& y) {
  Mat out(x.size(), y.size());
  for (int i = 0; i < x.size(); ++i) {
    auto di = [&](const Vec& yy) {
      return fd::derivative([&](const Vec& xx) { return f(xx, yy); }, x, i, scaled(kNestedStep, x[i]));
    };
    for (int j = 0; j < y.size(); ++j) out(i, j) = fd::derivative(di, y, j, scaled(kNestedStep, y[j]));
  }
  return out;
}

void check_uniform(const std::vector<double>& s) {
  if (s.size() < 3) throw ConfigError("path needs at least 3 samples");
  const double h = (s.back() - s.front()) / static_cast<double>(s.size() - 1);
  for (std::size_t k = 0; k + 1 < s.size(); ++k)
    if (std::abs(s[k + 1] - s[k] - h) > 1e-9 * h) throw ConfigError("path samples are not uniformly spaced");
}

Vec solve_nondegenerate(const Mat& h, const Vec& rhs) {
  Eigen::JacobiSVD<Mat> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * std::max(1.0, sv.maxCoeff())))
    throw DegenerateLagrangianError("velocity Hessian of the Lagrangian is singular");
  return svd.solve(rhs);
}

}  // namespace

Vec LagrangianField::grad_v(const Vec& v, const Point& q) const {
  if (dv) return dv(v, q);
  Vec out(v.size());
  auto f = [&](const Vec& vv) { return value(vv, q); };
  for (int i = 0; i < v.size(); ++i) out[i] = fd::derivative(f, v, i);
  return out;
}

Vec LagrangianField::grad_q(const Vec& v, const Point& q) const {
  if (dq) return dq(v, q);
  Vec out(q.size());
  auto f = [&](const Point& qq) { return value(v, qq); };
  for (int i = 0; i < q.size(); ++i) out[i] = fd::derivative(f, q, i);
  return out;
}

Mat LagrangianField::hess_vv(const Vec& v, const Point& q) const {
  if (dvdv) return dvdv(v, q);
  Mat h(v.size(), v.size());
  if (dv) {
    auto f = [&](const Vec& vv) { return dv(vv, q); };
    for (int j = 0; j < v.size(); ++j) h.col(j) = fd::derivative(f, v, j, scaled(kGradientStep, v[j]));
  } else {
    h = nested_second([&](const Vec& a, const Vec& b) { return value(a + b - v, q); }, v, v);
  }
  return 0.5 * (h + h.transpose());
}

Mat LagrangianField::hess_vq(const Vec& v, const Point& q) const {
  if (dvdq) return dvdq(v, q);
  Mat h(v.size(), q.size());
  if (dv) {
    auto f = [&](const Point& qq) { return dv(v, qq); };
    for (int j = 0; j < q.size(); ++j) h.col(j) = fd::derivative(f, q, j, scaled(kGradientStep, q[j]));
  } else {
    h = nested_second([&](const Vec& vv, const Point& qq) { return value(vv, qq); }, v, q);
  }
  return h;
}

LagrangianField kinetic_lagrangian(const GeometrySpec& spec) {
  LagrangianField L;
  L.d = spec.dim();
  const MetricField metric = spec.metric();
  L.value = [metric](const Vec& v, const Point& q) { return 0.5 * v.dot(metric.at(q) * v); };
  L.dv = [metric](const Vec& v, const Point& q) -> Vec { return metric.at(q) * v; };
  L.dq = [metric](const Vec& v, const Point& q) -> Vec {
    const Tensor3 dg = metric.d(q);
    const int d = static_cast<int>(q.size());
    Vec out = Vec::Zero(d);
    for (int s = 0; s < d; ++s)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) out[s] += 0.5 * dg(s, m, n) * v[m] * v[n];
    return out;
  };
  L.dvdv = [metric](const Vec&, const Point& q) { return metric.at(q); };
  L.dvdq = [metric](const Vec& v, const Point& q) -> Mat {
    const Tensor3 dg = metric.d(q);
    const int d = static_cast<int>(q.size());
    Mat out = Mat::Zero(d, d);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        for (int l = 0; l < d; ++l) out(m, n) += dg(n, m, l) * v[l];
    return out;
  };
  return L;
}

LagrangianField with_potential(LagrangianField L, std::function<double(const Point&)> potential,
                               std::function<Vec(const Point&)> gradient) {
  if (!gradient) {
    gradient = [potential](const Point& q) {
      Vec g(q.size());
      for (int i = 0; i < q.size(); ++i) g[i] = fd::derivative(potential, q, i);
      return g;
    };
  }
  auto base_value = L.value;
  auto base = L;
  L.value = [base_value, potential](const Vec& v, const Point& q) { return base_value(v, q) - potential(q); };
  L.dq = [base, gradient](const Vec& v, const Point& q) -> Vec { return base.grad_q(v, q) - gradient(q); };
  return L;
}

TangentVector modified_el_rhs(const GeometrySpec& spec, const LagrangianField& L, const PhaseState& state) {
  const int d = spec.dim();
  const Vec& v = state.v;
  const Point& q = state.q;
  const Vec p = L.grad_v(v, q);
  const Tensor3 s = spec.torsion().at(q);
  Vec rhs = L.grad_q(v, q) - L.hess_vq(v, q) * v;
  for (int m = 0; m < d; ++m) {
    double force = 0.0;
    for (int n = 0; n < d; ++n)
      for (int k = 0; k < d; ++k) force += s(n, m, k) * p[n] * v[k];
    rhs[m] -= 2.0 * force;
  }
  return solve_nondegenerate(L.hess_vv(v, q), rhs);
}

TangentVector classical_el_rhs(const LagrangianField& L, const PhaseState& state) {
  const Vec rhs = L.grad_q(state.v, state.q) - L.hess_vq(state.v, state.q) * state.v;
  return solve_nondegenerate(L.hess_vv(state.v, state.q), rhs);
}

AccelerationFn modified_el_equation(const GeometrySpec& spec, const LagrangianField& L) {
  return [spec, L](const PhaseState& st) { return modified_el_rhs(spec, L, st); };
}

VariationResult covariant_variation(const GeometrySpec& spec, const Trajectory& path, const VariationField& w,
                                    const LagrangianField& L) {
  check_uniform(path.s);
  const int d = spec.dim();
  const std::size_t n = path.size();
  const double scale = std::max(1.0, w(path.s.front(), path.q.front()).norm());
  if (w(path.s.front(), path.q.front()).norm() > 1e-10 * scale || w(path.s.back(), path.q.back()).norm() > 1e-10 * scale)
    throw ConfigError("variation field must vanish at both end points");

  std::vector<double> force(n), direct(n), classical(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point& q = path.q[k];
    const Vec& v = path.v[k];
    const double s = path.s[k];
    const Vec p = L.grad_v(v, q);
    const Vec dl = L.grad_q(v, q);
    const Vec pdot = L.hess_vv(v, q) * path.a[k] + L.hess_vq(v, q) * v;
    const Tensor3 tor = spec.torsion().at(q);
    const Vec wk = w(s, q);
    const Vec wdot = fd::derivative_1d([&](double t) { return Vec(w(s + t, q + t * v)); }, 0.0, 1e-4);

    Vec el = dl - pdot;
    Vec transport = wdot;
    for (int m = 0; m < d; ++m)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          el[m] -= 2.0 * tor(a, m, b) * p[a] * v[b];
          transport[m] += 2.0 * tor(m, a, b) * v[a] * wk[b];
        }
    force[k] = wk.dot(el);
    direct[k] = dl.dot(wk) + p.dot(transport);
    classical[k] = dl.dot(wk) + p.dot(wdot);
  }
  return {integrate_samples(path.s, force), integrate_samples(path.s, direct), integrate_samples(path.s, classical)};
}

DiscretePath DiscretePath::chord(const Point& a, const Point& b, int segments, double span) {
  if (segments < 2) throw ConfigError("discrete path needs N >= 2");
  if (!(span > 0.0)) throw ConfigError("discrete path span must be positive");
  DiscretePath p;
  p.ds = span / segments;
  for (int k = 0; k <= segments; ++k) p.nodes.push_back(a + (static_cast<double>(k) / segments) * (b - a));
  return p;
}

DiscretePath DiscretePath::from_trajectory(const Trajectory& traj, int segments) {
  if (segments < 2) throw ConfigError("discrete path needs N >= 2");
  const double s0 = traj.s.front(), s1 = traj.s.back();
  DiscretePath p;
  p.ds = (s1 - s0) / segments;
  for (int k = 0; k <= segments; ++k) p.nodes.push_back(traj.interpolate(k == segments ? s1 : s0 + k * p.ds).q);
  return p;
}

double discrete_action(const GeometrySpec& spec, const DiscretePath& path) {
  if (path.segments() < 2) throw ConfigError("discrete path needs N >= 2");
  double total = 0.0;
  for (int k = 0; k < path.segments(); ++k) {
    const Vec dq = path.nodes[k + 1] - path.nodes[k];
    const Point mid = 0.5 * (path.nodes[k + 1] + path.nodes[k]);
    total += 0.5 * dq.dot(spec.metric().at(mid) * dq) / path.ds;
  }
  return total;
}

Vec discrete_action_gradient(const GeometrySpec& spec, const DiscretePath& path) {
  const int n = path.segments();
  const int d = path.dim();
  if (n < 2) throw ConfigError("discrete path needs N >= 2");
  Vec grad = Vec::Zero((n - 1) * d);
  for (int k = 0; k < n; ++k) {
    const Vec dq = path.nodes[k + 1] - path.nodes[k];
    const Point mid = 0.5 * (path.nodes[k + 1] + path.nodes[k]);
    const Vec gdq = spec.metric().at(mid) * dq / path.ds;
    const Tensor3 dg = spec.metric().d(mid);
    Vec half = Vec::Zero(d);
    for (int s = 0; s < d; ++s)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) half[s] += 0.25 * dg(s, a, b) * dq[a] * dq[b] / path.ds;
    if (k >= 1) grad.segment((k - 1) * d, d) += -gdq + half;
    if (k + 1 <= n - 1) grad.segment(k * d, d) += gdq + half;
  }
  return grad;
}

double discrete_autoparallel_residual(const GeometrySpec& spec, const DiscretePath& path) {
  double worst = 0.0;
  for (int k = 1; k < path.segments(); ++k) {
    const Vec v = (path.nodes[k + 1] - path.nodes[k - 1]) / (2.0 * path.ds);
    const Vec a = (path.nodes[k + 1] - 2.0 * path.nodes[k] + path.nodes[k - 1]) / (path.ds * path.ds);
    worst = std::max(worst, (a + contract(full_connection(spec, path.nodes[k]), v, v)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Mat AnholonomicFrame::at(const Point& q) const {
  Mat e = basis(q);
  if (e.rows() != e.cols() || e.rows() != q.size()) throw DegenerateEmbeddingError("frame has wrong shape");
  Eigen::JacobiSVD<Mat> svd(e);
  const auto& sv = svd.singularValues();
  if (!e.allFinite() || !(sv.minCoeff() > 1e-12 * std::max(1.0, sv.maxCoeff())))
    throw DegenerateEmbeddingError("frame is not invertible");
  return e;
}

Mat AnholonomicFrame::inverse_at(const Point& q) const { return at(q).inverse(); }

Tensor3 AnholonomicFrame::d_at(const Point& q) const {
  if (derivative) return derivative(q);
  const int d = static_cast<int>(q.size());
  Tensor3 out(d);
  for (int r = 0; r < d; ++r) {
    const Mat de = fd::derivative(basis, q, r);
    for (int m = 0; m < d; ++m)
      for (int a = 0; a < d; ++a) out(r, m, a) = de(m, a);
  }
  return out;
}

AnholonomicFrame coordinate_frame(int d) {
  AnholonomicFrame f;
  f.basis = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  f.derivative = [d](const Point&) { return Tensor3(d); };
  return f;
}

AnholonomicFrame rotating_frame(std::function<double(const Point&)> angle) {
  AnholonomicFrame f;
  f.basis = [angle](const Point& q) -> Mat {
    const double t = angle(q);
    Mat e(2, 2);
    e << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return e;
  };
  return f;
}

Tensor3 anholonomity(const AnholonomicFrame& frame, const Point& q) {
  const Mat e = frame.at(q);
  const Mat inv = e.inverse();
  const Tensor3 de = frame.d_at(q);
  const int d = static_cast<int>(q.size());
  Tensor3 c(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Vec bracket = Vec::Zero(d);
      for (int m = 0; m < d; ++m)
        for (int r = 0; r < d; ++r) bracket[m] += e(r, a) * de(r, m, b) - e(r, b) * de(r, m, a);
      const Vec coeff = 0.5 * (inv * bracket);
      for (int k = 0; k < d; ++k) c(k, a, b) = coeff[k];
    }
  return c;
}

LagrangianField quasi_lagrangian(const LagrangianField& L, const AnholonomicFrame& frame) {
  LagrangianField out;
  out.d = L.d;
  out.value = [L, frame](const Vec& u, const Point& q) { return L.value(frame.at(q) * u, q); };
  out.dv = [L, frame](const Vec& u, const Point& q) -> Vec {
    const Mat e = frame.at(q);
    return e.transpose() * L.grad_v(e * u, q);
  };
  out.dvdv = [L, frame](const Vec& u, const Point& q) -> Mat {
    const Mat e = frame.at(q);
    return e.transpose() * L.hess_vv(e * u, q) * e;
  };
  return out;
}

Vec poincare_rhs(const AnholonomicFrame& frame, const LagrangianField& quasi, const Point& q, const Vec& u) {
  const int d = static_cast<int>(q.size());
  const Mat e = frame.at(q);
  const Tensor3 c = anholonomity(frame, q);
  const Vec p = quasi.grad_v(u, q);
  Vec rhs = e.transpose() * quasi.grad_q(u, q) - quasi.hess_vq(u, q) * (e * u);
  for (int a = 0; a < d; ++a) {
    double force = 0.0;
    for (int k = 0; k < d; ++k)
      for (int b = 0; b < d; ++b) force += c(k, a, b) * p[k] * u[b];
    rhs[a] -= 2.0 * force;
  }
  return solve_nondegenerate(quasi.hess_vv(u, q), rhs);
}

PoincareTrajectory integrate_poincare(const AnholonomicFrame& frame, const LagrangianField& quasi, const Point& q0,
                                      const Vec& u0, double span, double step) {
  if (!(span > 0.0) || !(step > 0.0)) throw ConfigError("span and step must be positive");
  const long n = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
  const double h = span / static_cast<double>(n);
  auto qdot = [&](const Point& q, const Vec& u) -> Vec { return frame.at(q) * u; };
  auto udot = [&](const Point& q, const Vec& u) { return poincare_rhs(frame, quasi, q, u); };
  PoincareTrajectory out;
  Point q = q0;
  Vec u = u0;
  out.s.push_back(0.0);
  out.q.push_back(q);
  out.u.push_back(u);
  for (long i = 0; i < n; ++i) {
    const Vec k1q = qdot(q, u), k1u = udot(q, u);
    const Vec k2q = qdot(q + 0.5 * h * k1q, u + 0.5 * h * k1u), k2u = udot(q + 0.5 * h * k1q, u + 0.5 * h * k1u);
    const Vec k3q = qdot(q + 0.5 * h * k2q, u + 0.5 * h * k2u), k3u = udot(q + 0.5 * h * k2q, u + 0.5 * h * k2u);
    const Vec k4q = qdot(q + h * k3q, u + h * k3u), k4u = udot(q + h * k3q, u + h * k3u);
    q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    if (!q.allFinite() || !u.allFinite()) throw IntegrationError("Poincare integration diverged");
    out.s.push_back(i + 1 == n ? span : h * static_cast<double>(i + 1));
    out.q.push_back(q);
    out.u.push_back(u);
  }
  return out;
}

Tensor3 transform_torsion(const Tensor3& torsion, const AnholonomicFrame& frame, const Point& q) {
  const Mat e = frame.at(q);
  const Mat inv = e.inverse();
  const int d = static_cast<int>(q.size());
  Tensor3 out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int m = 0; m < d; ++m)
          for (int n = 0; n < d; ++n)
            for (int s = 0; s < d; ++s) acc += inv(a, m) * torsion(m, n, s) * e(n, b) * e(s, c);
        out(a, b, c) = acc;
      }
  return out;
}

Tensor3 induced_torsion_in_frame(const VielbeinField& field, const AnholonomicFrame& frame, const Point& q) {
  const int d = field.d;
  const int n = field.n;
  const Mat eps = field.at(q);
  const Tensor3 deps = field.d_at(q);
  const Mat e = frame.at(q);
  const Tensor3 de = frame.d_at(q);
  const Mat eps_frame = eps * e;

  // e_b(eps'^i_c)
  Tensor3 deriv(n, d, d);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int r = 0; r < d; ++r)
          for (int m = 0; m < d; ++m) acc += e(r, b) * (deps(i, r, m) * e(m, c) + eps(i, m) * de(r, m, c));
        deriv(i, b, c) = acc;
      }
  const Mat g = eps_frame.transpose() * eps_frame;
  const Mat g_inv = g.inverse();
  Tensor3 lowered(d);
  for (int l = 0; l < d; ++l)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += eps_frame(i, l) * deriv(i, b, c);
        lowered(l, b, c) = acc;
      }
  Tensor3 out = antisymmetric_part(raise_first(lowered, g_inv));
  out -= anholonomity(frame, q);
  return out;
}

}  // namespace cartan
