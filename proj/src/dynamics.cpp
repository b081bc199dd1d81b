#include "cartan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cartan/errors.hpp"
#include "cartan/finite_difference.hpp"

namespace cartan {

namespace {

bool finite_state(const Vec& q, const Vec& v) { return q.allFinite() && v.allFinite(); }

// Hermite basis on [0, 1] and its derivative.
void hermite(double t, double& h00, double& h10, double& h01, double& h11) {
  const double t2 = t * t, t3 = t2 * t;
  h00 = 2 * t3 - 3 * t2 + 1;
  h10 = t3 - 2 * t2 + t;
  h01 = -2 * t3 + 3 * t2;
  h11 = t3 - t2;
}

void hermite_prime(double t, double& d00, double& d10, double& d01, double& d11) {
  const double t2 = t * t;
  d00 = 6 * t2 - 6 * t;
  d10 = 3 * t2 - 4 * t + 1;
  d01 = -6 * t2 + 6 * t;
  d11 = 3 * t2 - 2 * t;
}

Trajectory start(const AccelerationFn& rhs, const IntegratorConfig& config) {
  Trajectory traj;
  traj.rhs = rhs;
  traj.method = config.method;
  traj.step = config.step;
  traj.rel_tol = config.method == Method::RK45 ? config.rel_tol : 0.0;
  traj.abs_tol = config.method == Method::RK45 ? config.abs_tol : 0.0;
  return traj;
}

// Evaluates rhs, converting library errors and non-finite output into a stop reason.
bool safe_rhs(const AccelerationFn& rhs, const PhaseState& st, Vec& out, std::string& why) {
  try {
    out = rhs(st);
  } catch (const Error& e) {
    why = e.what();
    return false;
  }
  if (!out.allFinite()) {
    why = "non-finite acceleration";
    return false;
  }
  return true;
}

Trajectory integrate_rk4(const AccelerationFn& rhs, const PhaseState& state0, const IntegratorConfig& config) {
  Trajectory traj = start(rhs, config);
  const long n = std::max(1L, static_cast<long>(std::ceil(config.span / config.step - 1e-9)));
  if (n > config.max_steps) {
    traj.status = IntegrationStatus::MaxSteps;
    traj.message = "span/step exceeds max-steps";
    return traj;
  }
  const double h = config.span / static_cast<double>(n);
  traj.step = h;

  Vec q = state0.q, v = state0.v, a;
  std::string why;
  if (!finite_state(q, v) || !safe_rhs(rhs, {q, v, state0.s}, a, why)) {
    traj.status = IntegrationStatus::Diverged;
    traj.message = why.empty() ? "non-finite initial state" : why;
    return traj;
  }
  traj.push(state0.s, q, v, a);

  Vec k2, k3, k4;
  for (long i = 0; i < n; ++i) {
    const double s = state0.s + h * static_cast<double>(i);
    const Vec v1 = v, a1 = a;
    const Vec q2 = q + 0.5 * h * v1, v2 = v + 0.5 * h * a1;
    bool good = safe_rhs(rhs, {q2, v2, s + 0.5 * h}, k2, why);
    Vec q3, v3, q4, v4;
    if (good) {
      q3 = q + 0.5 * h * v2;
      v3 = v + 0.5 * h * k2;
      good = safe_rhs(rhs, {q3, v3, s + 0.5 * h}, k3, why);
    }
    if (good) {
      q4 = q + h * v3;
      v4 = v + h * k3;
      good = safe_rhs(rhs, {q4, v4, s + h}, k4, why);
    }
    if (good) {
      q += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
      v += (h / 6.0) * (a1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double s_next = i + 1 == n ? state0.s + config.span : s + h;
      good = finite_state(q, v) && safe_rhs(rhs, {q, v, s_next}, a, why);
      if (good) {
        traj.push(s_next, q, v, a);
        continue;
      }
    }
    traj.status = IntegrationStatus::Diverged;
    traj.message = why.empty() ? "non-finite state" : why;
    traj.message += " at s = " + std::to_string(s);
    return traj;
  }
  return traj;
}

// Dormand-Prince 5(4).
Trajectory integrate_rk45(const AccelerationFn& rhs, const PhaseState& state0, const IntegratorConfig& config) {
  static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double A[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double b4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                                   -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

  Trajectory traj = start(rhs, config);
  const int d = static_cast<int>(state0.q.size());
  Vec q = state0.q, v = state0.v, a;
  std::string why;
  if (!finite_state(q, v) || !safe_rhs(rhs, {q, v, state0.s}, a, why)) {
    traj.status = IntegrationStatus::Diverged;
    traj.message = why.empty() ? "non-finite initial state" : why;
    return traj;
  }
  traj.push(state0.s, q, v, a);

  const double s_end = state0.s + config.span;
  double s = state0.s;
  double h = std::min(config.step, config.span);
  const double h_min = 1e-14 * std::max(1.0, std::abs(s_end));
  std::vector<Vec> kq(7), kv(7);
  long steps = 0;
  while (s < s_end - h_min) {
    if (++steps > config.max_steps) {
      traj.status = IntegrationStatus::MaxSteps;
      traj.message = "max-steps reached at s = " + std::to_string(s);
      return traj;
    }
    h = std::min(h, s_end - s);
    kq[0] = v;
    kv[0] = a;
    bool good = true;
    for (int st = 1; st < 7 && good; ++st) {
      Vec qs = q, vs = v;
      for (int j = 0; j < st; ++j) {
        if (A[st][j] == 0.0) continue;
        qs += h * A[st][j] * kq[j];
        vs += h * A[st][j] * kv[j];
      }
      kq[st] = vs;
      good = finite_state(qs, vs) && safe_rhs(rhs, {qs, vs, s + c[st] * h}, kv[st], why);
    }
    if (!good) {
      // Shrink and retry; a persistent failure becomes divergence below.
      h *= 0.25;
      if (h < h_min) {
        traj.status = IntegrationStatus::Diverged;
        traj.message = (why.empty() ? std::string("non-finite state") : why) + " at s = " + std::to_string(s);
        return traj;
      }
      continue;
    }
    // Row 6 of A equals the fifth-order weights (FSAL).
    Vec q5 = q, v5 = v, eq = Vec::Zero(d), ev = Vec::Zero(d);
    for (int j = 0; j < 7; ++j) {
      const double b5 = j < 6 ? A[6][j] : 0.0;
      q5 += h * b5 * kq[j];
      v5 += h * b5 * kv[j];
      eq += h * (b5 - b4[j]) * kq[j];
      ev += h * (b5 - b4[j]) * kv[j];
    }
    double err = 0.0;
    for (int i = 0; i < d; ++i) {
      const double sq = config.abs_tol + config.rel_tol * std::max(std::abs(q[i]), std::abs(q5[i]));
      const double sv = config.abs_tol + config.rel_tol * std::max(std::abs(v[i]), std::abs(v5[i]));
      err += (eq[i] / sq) * (eq[i] / sq) + (ev[i] / sv) * (ev[i] / sv);
    }
    err = std::sqrt(err / (2.0 * d));
    if (err <= 1.0) {
      s = (s_end - (s + h) <= h_min) ? s_end : s + h;
      q = q5;
      v = v5;
      a = kv[6];
      traj.push(s, q, v, a);
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < h_min) {
      traj.status = IntegrationStatus::StepUnderflow;
      traj.message = "step size underflow at s = " + std::to_string(s);
      return traj;
    }
  }
  return traj;
}

}  // namespace

std::string to_string(Method m) { return m == Method::RK4 ? "rk4" : "rk45"; }

std::string to_string(EquationKind k) { return k == EquationKind::Autoparallel ? "autoparallel" : "geodesic"; }

std::string to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::Ok: return "ok";
    case IntegrationStatus::Diverged: return "diverged";
    case IntegrationStatus::StepUnderflow: return "step-underflow";
    case IntegrationStatus::MaxSteps: return "max-steps";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::RK4;
  if (name == "rk45" || name == "rk45-adaptive") return Method::RK45;
  throw ConfigError("unknown integration method '" + name + "'");
}

EquationKind parse_equation_kind(const std::string& name) {
  if (name == "autoparallel") return EquationKind::Autoparallel;
  if (name == "geodesic") return EquationKind::Geodesic;
  throw ConfigError("unknown equation kind '" + name + "'");
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("integrator step must be positive");
  if (!(span > 0.0) || !std::isfinite(span)) throw ConfigError("integration span must be positive");
  if (method == Method::RK45 && (!(rel_tol > 0.0) || !(abs_tol > 0.0)))
    throw ConfigError("rk45 tolerances must be positive");
  if (max_steps < 1) throw ConfigError("max-steps must be >= 1");
}

void Trajectory::push(double s_k, const Point& q_k, const TangentVector& v_k, const TangentVector& a_k) {
  s.push_back(s_k);
  q.push_back(q_k);
  v.push_back(v_k);
  a.push_back(a_k);
}

PhaseState Trajectory::interpolate(double at) const {
  if (s.empty()) throw InterpolationRangeError("empty trajectory");
  const double slack = 1e-12 * std::max(1.0, std::abs(s.back()));
  if (at < s.front() - slack || at > s.back() + slack)
    throw InterpolationRangeError("s = " + std::to_string(at) + " outside [" + std::to_string(s.front()) + ", " +
                                  std::to_string(s.back()) + "]");
  if (s.size() == 1) return state(0);
  std::size_t k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), at) - s.begin());
  k = std::clamp<std::size_t>(k, 1, s.size() - 1) - 1;
  const double h = s[k + 1] - s[k];
  const double t = std::clamp((at - s[k]) / h, 0.0, 1.0);
  double h00, h10, h01, h11;
  hermite(t, h00, h10, h01, h11);
  PhaseState out;
  out.s = at;
  out.q = h00 * q[k] + (h10 * h) * v[k] + h01 * q[k + 1] + (h11 * h) * v[k + 1];
  out.v = h00 * v[k] + (h10 * h) * a[k] + h01 * v[k + 1] + (h11 * h) * a[k + 1];
  return out;
}

TangentVector Trajectory::acceleration_at(double at) const {
  if (rhs) return rhs(interpolate(at));
  interpolate(at);  // range check
  if (s.size() == 1) return a[0];
  std::size_t k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), at) - s.begin());
  k = std::clamp<std::size_t>(k, 1, s.size() - 1) - 1;
  const double h = s[k + 1] - s[k];
  const double t = std::clamp((at - s[k]) / h, 0.0, 1.0);
  double d00, d10, d01, d11;
  hermite_prime(t, d00, d10, d01, d11);
  return (d00 / h) * v[k] + d10 * a[k] + (d01 / h) * v[k + 1] + d11 * a[k + 1];
}

TangentVector autoparallel_rhs(const GeometrySpec& spec, const PhaseState& state) {
  return -contract(full_connection(spec, state.q), state.v, state.v);
}

TangentVector geodesic_rhs(const GeometrySpec& spec, const PhaseState& state) {
  return -contract(christoffel(spec.metric(), state.q), state.v, state.v);
}

AccelerationFn equation_rhs(const GeometrySpec& spec, EquationKind kind) {
  if (kind == EquationKind::Autoparallel)
    return [spec](const PhaseState& st) { return autoparallel_rhs(spec, st); };
  return [spec](const PhaseState& st) { return geodesic_rhs(spec, st); };
}

Trajectory integrate(const AccelerationFn& rhs, const PhaseState& state0, const IntegratorConfig& config) {
  config.validate();
  if (state0.q.size() != state0.v.size()) throw ConfigError("q and v dimensions differ");
  return config.method == Method::RK4 ? integrate_rk4(rhs, state0, config) : integrate_rk45(rhs, state0, config);
}

Trajectory integrate(const GeometrySpec& spec, const PhaseState& state0, const IntegratorConfig& config,
                     EquationKind kind) {
  if (state0.q.size() != spec.dim()) throw ConfigError("initial state dimension does not match the geometry");
  return integrate(equation_rhs(spec, kind), state0, config);
}

Trajectory sample_curve(const std::function<PhaseState(double)>& qv,
                        const std::function<TangentVector(double)>& accel, double s0, double s1, int steps) {
  if (steps < 1) throw ConfigError("sample_curve needs at least one step");
  Trajectory traj;
  traj.step = (s1 - s0) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double s = k == steps ? s1 : s0 + k * traj.step;
    const PhaseState st = qv(s);
    traj.push(s, st.q, st.v, accel(s));
  }
  return traj;
}

double speed(const GeometrySpec& spec, const Point& q, const TangentVector& v) {
  return std::sqrt(v.dot(spec.metric().at(q) * v));
}

std::vector<double> speeds(const GeometrySpec& spec, const Trajectory& traj) {
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) out[k] = speed(spec, traj.q[k], traj.v[k]);
  return out;
}

double gauss_deviation(const GeometrySpec& spec, const PhaseState& state, const TangentVector& candidate,
                       double f2) {
  const Vec dv = candidate + contract(full_connection(spec, state.q), state.v, state.v);
  return 0.5 * dv.dot(spec.metric().at(state.q) * dv) + 0.5 * f2;
}

double SeriesResult::max_abs() const {
  double m = 0.0;
  for (double x : value) m = std::max(m, std::abs(x));
  return m;
}

SeriesResult dalembert_residual(const GeometrySpec& spec, const Trajectory& traj,
                                const std::function<TangentVector(const Point&)>& w) {
  if (traj.size() < 5) throw ConfigError("d'Alembert residual needs at least 5 samples");
  const double h = traj.s[1] - traj.s[0];
  SeriesResult out;
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    const Vec vdot = fd::sampled_derivative(traj.v, k, h);
    const Vec dv = vdot + contract(full_connection(spec, traj.q[k]), traj.v[k], traj.v[k]);
    out.s.push_back(traj.s[k]);
    out.value.push_back(-w(traj.q[k]).dot(spec.metric().at(traj.q[k]) * dv));
  }
  return out;
}

double AuxiliaryTrajectory::max_norm() const {
  double m = 0.0;
  for (const auto& x : y) m = std::max(m, x.norm());
  return m;
}

AuxiliaryTrajectory integrate_auxiliary_y(const GeometrySpec& spec, const Trajectory& base,
                                          const AuxiliaryState& y0, const IntegratorConfig& config) {
  if (base.size() < 2) throw ConfigError("auxiliary equation needs a base trajectory with >= 2 samples");
  if (!(config.step > 0.0)) throw ConfigError("auxiliary step must be positive");
  const int d = spec.dim();
  if (y0.y.size() != d || y0.ydot.size() != d) throw ConfigError("auxiliary initial data has wrong dimension");

  auto field = [&](double s, const Vec& y, const Vec& yd) -> Vec {
    const PhaseState st = base.interpolate(s);
    const Vec vdot = base.acceleration_at(s);
    const Tensor3 gamma = full_connection(spec, st.q);
    const Tensor4 dgamma = connection_derivative(spec, st.q);
    Vec rhs = vdot + contract(gamma, st.v, st.v);
    for (int m = 0; m < d; ++m) {
      double acc = 0.0;
      for (int n = 0; n < d; ++n)
        for (int s2 = 0; s2 < d; ++s2) {
          acc += (gamma(m, n, s2) + gamma(m, s2, n)) * st.v[s2] * yd[n];
          for (int l = 0; l < d; ++l) acc += y[n] * dgamma(n, m, s2, l) * st.v[s2] * st.v[l];
        }
      rhs[m] -= acc;
    }
    return rhs;
  };

  const double s0 = base.s.front();
  const double span = base.s.back() - s0;
  const long n = std::max(1L, static_cast<long>(std::ceil(span / config.step - 1e-9)));
  const double h = span / static_cast<double>(n);
  AuxiliaryTrajectory out;
  Vec y = y0.y, yd = y0.ydot;
  out.s.push_back(s0);
  out.y.push_back(y);
  out.ydot.push_back(yd);
  for (long i = 0; i < n; ++i) {
    const double s = s0 + h * static_cast<double>(i);
    const double s_next = i + 1 == n ? base.s.back() : s + h;
    const Vec k1y = yd, k1v = field(s, y, yd);
    const Vec k2y = yd + 0.5 * h * k1v, k2v = field(s + 0.5 * h, y + 0.5 * h * k1y, k2y);
    const Vec k3y = yd + 0.5 * h * k2v, k3v = field(s + 0.5 * h, y + 0.5 * h * k2y, k3y);
    const Vec k4y = yd + h * k3v, k4v = field(s_next, y + h * k3y, k4y);
    y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    yd += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!y.allFinite() || !yd.allFinite()) throw IntegrationError("auxiliary solution diverged");
    out.s.push_back(s_next);
    out.y.push_back(y);
    out.ydot.push_back(yd);
  }
  return out;
}

double integrate_samples(const std::vector<double>& s, const std::vector<double>& f) {
  const std::size_t n = s.size();
  if (n != f.size()) throw ConfigError("sample sizes differ");
  if (n < 2) return 0.0;
  const double h = (s.back() - s.front()) / static_cast<double>(n - 1);
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  if (n == 3) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
  std::size_t m = n - 1;  // intervals
  double total = 0.0;
  std::size_t end = m;
  if (m % 2 == 1) {
    end = m - 3;
    total += 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
  }
  for (std::size_t k = 0; k + 2 <= end; k += 2) total += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  return total;
}

}  // namespace cartan
