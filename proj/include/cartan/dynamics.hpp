#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

struct PhaseState {
  Point q;
  TangentVector v;
  double s = 0.0;
};

enum class Method { RK4, RK45 };
enum class EquationKind { Autoparallel, Geodesic };
enum class IntegrationStatus { Ok, Diverged, StepUnderflow, MaxSteps };

std::string to_string(Method m);
std::string to_string(EquationKind k);
std::string to_string(IntegrationStatus s);
Method parse_method(const std::string& name);
EquationKind parse_equation_kind(const std::string& name);

struct IntegratorConfig {
  Method method = Method::RK4;
  double step = 1e-3;  // rk4 step; initial step for rk45
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double span = 1.0;
  long max_steps = 10'000'000;

  void validate() const;
};

/// Acceleration field a(q, v, s) of a second-order system.
using AccelerationFn = std::function<Vec(const PhaseState&)>;

/// Sampled solution of q'' = a(q, q', s). Accelerations are stored alongside
/// (q, v) so that interpolation and derived quantities use the known rhs.
struct Trajectory {
  std::vector<double> s;
  std::vector<Point> q;
  std::vector<TangentVector> v;
  std::vector<TangentVector> a;
  // Generating right-hand side, when known; used to reconstruct v' between samples.
  AccelerationFn rhs;

  Method method = Method::RK4;
  double step = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  IntegrationStatus status = IntegrationStatus::Ok;
  std::string message;

  std::size_t size() const { return s.size(); }
  int dim() const { return q.empty() ? 0 : static_cast<int>(q.front().size()); }
  bool ok() const { return status == IntegrationStatus::Ok; }
  PhaseState state(std::size_t k) const { return {q[k], v[k], s[k]}; }

  void push(double s_k, const Point& q_k, const TangentVector& v_k, const TangentVector& a_k);

  /// Cubic Hermite interpolation of q (slopes v) and v (slopes a).
  /// Throws InterpolationRangeError outside [s.front(), s.back()].
  PhaseState interpolate(double at) const;
  /// v' at `at`: the generating rhs at the interpolated state when available,
  /// otherwise the derivative of the Hermite interpolant of v.
  TangentVector acceleration_at(double at) const;
};

/// -Gamma^mu_{nu sigma} v^nu v^sigma with the full connection.
TangentVector autoparallel_rhs(const GeometrySpec& spec, const PhaseState& state);
/// -Gamma-bar^mu_{nu sigma} v^nu v^sigma.
TangentVector geodesic_rhs(const GeometrySpec& spec, const PhaseState& state);

AccelerationFn equation_rhs(const GeometrySpec& spec, EquationKind kind);

/// Integrates q'' = rhs from state0. Divergence (non-finite state or a failed
/// geometry evaluation) and step underflow stop the run and are reported
/// through Trajectory::status; the partial trajectory is kept.
Trajectory integrate(const AccelerationFn& rhs, const PhaseState& state0, const IntegratorConfig& config);
Trajectory integrate(const GeometrySpec& spec, const PhaseState& state0, const IntegratorConfig& config,
                     EquationKind kind);

/// Trajectory of a closed-form curve, with q, v and a supplied by the caller.
Trajectory sample_curve(const std::function<PhaseState(double)>& qv,
                        const std::function<TangentVector(double)>& accel, double s0, double s1, int steps);

/// sqrt(g_{mu nu} v^mu v^nu).
double speed(const GeometrySpec& spec, const Point& q, const TangentVector& v);
std::vector<double> speeds(const GeometrySpec& spec, const Trajectory& traj);

/// 1/2 g(Dv, Dv) + 1/2 f2 with Dv = candidate + Gamma v v. f2 stands for (f_v, f_v),
/// which does not depend on the acceleration; with the default 0 the minimum value
/// shifts by a constant but the minimizer is unchanged.
double gauss_deviation(const GeometrySpec& spec, const PhaseState& state, const TangentVector& candidate,
                       double f2 = 0.0);

struct SeriesResult {
  std::vector<double> s;
  std::vector<double> value;

  double max_abs() const;
};

/// s -> -g_{mu nu} w^nu D_v v^mu, with v' from 4th-order differences of the stored
/// velocities (the first and last two samples are skipped).
SeriesResult dalembert_residual(const GeometrySpec& spec, const Trajectory& traj,
                                const std::function<TangentVector(const Point&)>& w);

struct AuxiliaryState {
  TangentVector y;
  TangentVector ydot;
};

struct AuxiliaryTrajectory {
  std::vector<double> s;
  std::vector<TangentVector> y;
  std::vector<TangentVector> ydot;

  double max_norm() const;
};

/// Linear second-order system along a base trajectory:
///   y'' + (Gamma^mu_{nu sigma} + Gamma^mu_{sigma nu}) v^sigma y'^nu + y^nu d_nu Gamma^mu_{sigma lambda} v^sigma v^lambda
///     = D_v v^mu,
/// integrated with fixed-step rk4 of size config.step over the base's parameter range.
AuxiliaryTrajectory integrate_auxiliary_y(const GeometrySpec& spec, const Trajectory& base,
                                          const AuxiliaryState& y0, const IntegratorConfig& config);

/// Composite Simpson rule on uniform samples (3/8 rule on the last three intervals
/// when the interval count is odd).
double integrate_samples(const std::vector<double>& s, const std::vector<double>& f);

}  // namespace cartan
