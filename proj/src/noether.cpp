#include "cartan/noether.hpp"

#include <algorithm>
#include <cmath>

#include "cartan/errors.hpp"
#include "cartan/finite_difference.hpp"

namespace cartan {

namespace {

constexpr double kChainStep = 1e-4;
constexpr double kTeleparallelTolerance = 1e-8;

// d/ds of f(q(s), v(s), s) from the first-order jet (q, v, a).
template <class F>
auto along(const F& f, const PhaseState& st, const TangentVector& a) {
  return fd::derivative_1d([&](double t) { return f(Point(st.q + t * st.v), Vec(st.v + t * a), st.s + t); }, 0.0,
                           kChainStep);
}

Vec omega_dot(const SymmetryField& sym, const PhaseState& st, const TangentVector& a) {
  return along([&](const Point& q, const Vec& v, double) { return Vec(sym.omega(q, v)); }, st, a);
}

double phi_dot(const SymmetryField& sym, const PhaseState& st, const TangentVector& a) {
  if (!sym.phi) return 0.0;
  return along([&](const Point& q, const Vec& v, double s) { return sym.phi(q, v, s); }, st, a);
}

// 2 S^nu_{mu sigma} p_nu v^sigma w^mu
double torsion_pairing(const Tensor3& s, const Vec& p, const Vec& v, const Vec& w) {
  const int d = static_cast<int>(v.size());
  double out = 0.0;
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      for (int k = 0; k < d; ++k) out += s(n, m, k) * p[n] * v[k] * w[m];
  return 2.0 * out;
}

void require_samples(const Trajectory& traj) {
  if (traj.size() < 5) throw ConfigError("charge rates need at least 5 samples");
}

Mat rotation(double phi) {
  Mat r(2, 2);
  r << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
  return r;
}

}  // namespace

std::string to_string(TransformationLaw law) { return law == TransformationLaw::Classical ? "classical" : "modified"; }

SymmetryField translation_symmetry(int d, int axis) {
  if (axis < 0 || axis >= d) throw ConfigError("translation axis out of range");
  SymmetryField sym;
  sym.name = "translation-q" + std::to_string(axis + 1);
  sym.omega = [d, axis](const Point&, const Vec&) {
    Vec w = Vec::Zero(d);
    w[axis] = 1.0;
    return w;
  };
  return sym;
}

SymmetryField rotation_symmetry(int d, int i, int j) {
  if (i < 0 || j < 0 || i >= d || j >= d || i == j) throw ConfigError("rotation plane out of range");
  SymmetryField sym;
  sym.name = "rotation-q" + std::to_string(i + 1) + "q" + std::to_string(j + 1);
  sym.omega = [d, i, j](const Point& q, const Vec&) {
    Vec w = Vec::Zero(d);
    w[j] = q[i];
    w[i] = -q[j];
    return w;
  };
  return sym;
}

SymmetryField time_translation(const LagrangianField& L) {
  SymmetryField sym;
  sym.name = "time";
  sym.omega = [](const Point&, const Vec& v) { return v; };
  sym.phi = [L](const Point& q, const Vec& v, double) { return L(v, q); };
  return sym;
}

SymmetryField torsion_symmetry_2d(const Vec& gamma, const Vec& a) {
  if (gamma.size() != 2 || a.size() != 2) throw ConfigError("torsion symmetry needs 2-vectors");
  SymmetryField sym;
  sym.name = "torsion-rotated-translation";
  sym.omega = [gamma, a](const Point& q, const Vec&) -> Vec { return rotation(-2.0 * gamma.dot(q)) * a; };
  return sym;
}

SymmetryField teleparallel_symmetry(const VielbeinField& e, const Vec& a) {
  if (e.n != e.d || a.size() != e.n) throw ConfigError("teleparallel symmetry needs a square vielbein");
  SymmetryField sym;
  sym.name = "teleparallel-frame";
  sym.law = TransformationLaw::Modified;
  sym.omega = [e, a](const Point& q, const Vec&) -> Vec { return e.at(q).partialPivLu().solve(a); };
  return sym;
}

std::vector<SymmetryField> preset_symmetries(const GeometrySpec& spec, const LagrangianField& L) {
  const std::string& name = spec.name();
  const int d = spec.dim();
  std::vector<SymmetryField> out;
  if (name == "flat" || name == "identity" || name == "constant-torsion-2d" || name == "weitzenboeck-2d") {
    for (int i = 0; i < d; ++i) out.push_back(translation_symmetry(d, i));
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) out.push_back(rotation_symmetry(d, i, j));
  } else if (name == "sphere" || name == "sphere-holonomic" || name == "poly-metric-2d") {
    out.push_back(translation_symmetry(d, 1));
  } else if (name == "shear-2d") {
    out.push_back(translation_symmetry(d, 0));
  }
  out.push_back(time_translation(L));
  return out;
}

double charge(const LagrangianField& L, const SymmetryField& sym, const PhaseState& state) {
  return L.grad_v(state.v, state.q).dot(sym.omega(state.q, state.v)) - sym.phi_at(state);
}

NoetherCharge noether_charge(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj) {
  return {sym.name, [L, sym, traj](double s) { return charge(L, sym, traj.interpolate(s)); }};
}

SeriesResult charge_series(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj) {
  SeriesResult out;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.s.push_back(traj.s[k]);
    out.value.push_back(charge(L, sym, traj.state(k)));
  }
  return out;
}

double torsion_rate(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                    const PhaseState& state) {
  const Vec p = L.grad_v(state.v, state.q);
  return -torsion_pairing(spec.torsion().at(state.q), p, state.v, sym.omega(state.q, state.v));
}

SeriesResult charge_rate(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj) {
  require_samples(traj);
  const SeriesResult series = charge_series(L, sym, traj);
  const double h = traj.s[1] - traj.s[0];
  SeriesResult out;
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    out.s.push_back(traj.s[k]);
    out.value.push_back(fd::sampled_derivative(series.value, k, h));
  }
  return out;
}

SeriesResult modified_rate_residual(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                    const Trajectory& traj) {
  SeriesResult rate = charge_rate(L, sym, traj);
  for (std::size_t k = 0; k < rate.s.size(); ++k)
    rate.value[k] = std::abs(rate.value[k] - torsion_rate(spec, L, sym, traj.state(k + 2)));
  return rate;
}

SeriesResult rate_identity_residual(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj) {
  SeriesResult rate = charge_rate(L, sym, traj);
  for (std::size_t k = 0; k < rate.s.size(); ++k) {
    const PhaseState st = traj.state(k + 2);
    const Vec& a = traj.a[k + 2];
    const Vec dq = L.grad_q(st.v, st.q);
    const Vec pdot = L.hess_vv(st.v, st.q) * a + L.hess_vq(st.v, st.q) * st.v;
    const Vec w = sym.omega(st.q, st.v);
    const double bracket = (dq - pdot).dot(w);
    const double variation = dq.dot(w) + L.grad_v(st.v, st.q).dot(omega_dot(sym, st, a));
    rate.value[k] = std::abs(rate.value[k] + bracket - (variation - phi_dot(sym, st, a)));
  }
  return rate;
}

double predicted_rate(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                      const PhaseState& state, const TangentVector& accel) {
  SymmetryField classical = sym;
  classical.law = TransformationLaw::Classical;
  return symmetry_variation(spec, L, classical, state, accel) - phi_dot(sym, state, accel) +
         torsion_rate(spec, L, sym, state);
}

SeriesResult on_shell_rate_residual(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                    const Trajectory& traj) {
  SeriesResult rate = charge_rate(L, sym, traj);
  for (std::size_t k = 0; k < rate.s.size(); ++k)
    rate.value[k] = std::abs(rate.value[k] - predicted_rate(spec, L, sym, traj.state(k + 2), traj.a[k + 2]));
  return rate;
}

double symmetry_variation(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                          const PhaseState& state, const TangentVector& accel) {
  const int d = spec.dim();
  const Vec w = sym.omega(state.q, state.v);
  Vec dv = omega_dot(sym, state, accel);
  if (sym.law == TransformationLaw::Modified) {
    const Tensor3 s = spec.torsion().at(state.q);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        for (int k = 0; k < d; ++k) dv[m] -= 2.0 * s(m, n, k) * w[n] * state.v[k];
  }
  return L.grad_q(state.v, state.q).dot(w) + L.grad_v(state.v, state.q).dot(dv);
}

SymmetryCheck modified_symmetry_check(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                      const Trajectory& traj) {
  if (traj.size() == 0) throw ConfigError("empty trajectory");
  SymmetryCheck out;
  const double i0 = charge(L, sym, traj.state(0));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PhaseState st = traj.state(k);
    const Vec& a = traj.a[k];
    double defect = symmetry_variation(spec, L, sym, st, a) - phi_dot(sym, st, a);
    if (sym.law == TransformationLaw::Classical)
      defect -= torsion_pairing(spec.torsion().at(st.q), L.grad_v(st.v, st.q), st.v, sym.omega(st.q, st.v));
    out.invariance = std::max(out.invariance, std::abs(defect));
    out.charge_drift = std::max(out.charge_drift, std::abs(charge(L, sym, st) - i0));
  }
  return out;
}

std::pair<double, double> torsion_integrals_2d(const Vec& gamma, const PhaseState& state) {
  if (gamma.size() != 2 || state.q.size() != 2 || state.v.size() != 2)
    throw ConfigError("torsion integrals need a 2D chart");
  const double phi = -2.0 * gamma.dot(state.q);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {state.v[0] * c - state.v[1] * s, state.v[0] * s + state.v[1] * c};
}

int torsion_integrals_rank(const Vec& gamma, const PhaseState& state) {
  Vec z(4);
  z << state.q, state.v;
  auto f = [&](const Vec& x) {
    const auto [i1, i2] = torsion_integrals_2d(gamma, {x.head(2), x.tail(2), state.s});
    Vec out(2);
    out << i1, i2;
    return out;
  };
  Mat jac(2, 4);
  for (int j = 0; j < 4; ++j) jac.col(j) = fd::derivative(f, z, j);
  Eigen::JacobiSVD<Mat> svd(jac);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-8 * std::max(1.0, sv[0])) ++rank;
  return rank;
}

Vec frame_velocity(const VielbeinField& e, const PhaseState& state) { return e.at(state.q) * state.v; }

Vec teleparallel_integrals(const VielbeinField& e, const PhaseState& state) {
  if (f_tensor(e, state.q).max_abs() > kTeleparallelTolerance)
    throw ConfigError("teleparallel integrals need f = 0 at the state");
  return frame_velocity(e, state);
}

std::vector<ChargeReport> conservation_report(const GeometrySpec& spec, const LagrangianField& L,
                                              const std::vector<SymmetryField>& symmetries, const Trajectory& traj) {
  std::vector<ChargeReport> out;
  for (const auto& sym : symmetries) {
    ChargeReport r;
    r.name = sym.name;
    r.law = to_string(sym.law);
    const SeriesResult series = charge_series(L, sym, traj);
    r.initial = series.value.front();
    double total = 0.0;
    for (double x : series.value) {
      const double drift = std::abs(x - r.initial);
      r.max_drift = std::max(r.max_drift, drift);
      total += drift;
    }
    r.mean_drift = total / static_cast<double>(series.value.size());
    r.max_rate = charge_rate(L, sym, traj).max_abs();
    r.rate_residual = on_shell_rate_residual(spec, L, sym, traj).max_abs();
    r.symmetry_defect = modified_symmetry_check(spec, L, sym, traj).invariance;
    r.identity_residual = rate_identity_residual(L, sym, traj).max_abs();
    out.push_back(r);
  }
  return out;
}

}  // namespace cartan
