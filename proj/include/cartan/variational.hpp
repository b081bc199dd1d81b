#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

/// L(v, q) with optional analytic derivatives. Missing derivatives are taken by
/// 4th-order central differences: first derivatives of the value with a relative
/// step of 1e-5, second derivatives from analytic gradients with step 1e-6, or by
/// nested differences of step 1e-3 when only the value is known.
struct LagrangianField {
  int d = 0;
  std::function<double(const Vec& v, const Point& q)> value;
  std::function<Vec(const Vec& v, const Point& q)> dv;
  std::function<Vec(const Vec& v, const Point& q)> dq;
  std::function<Mat(const Vec& v, const Point& q)> dvdv;
  /// (mu, nu) = d^2 L / dv^mu dq^nu
  std::function<Mat(const Vec& v, const Point& q)> dvdq;

  double operator()(const Vec& v, const Point& q) const { return value(v, q); }
  Vec grad_v(const Vec& v, const Point& q) const;
  Vec grad_q(const Vec& v, const Point& q) const;
  Mat hess_vv(const Vec& v, const Point& q) const;
  Mat hess_vq(const Vec& v, const Point& q) const;
};

/// L = 1/2 g_{mu nu}(q) v^mu v^nu with analytic derivatives.
LagrangianField kinetic_lagrangian(const GeometrySpec& spec);
/// L - U(q); the gradient of U is differenced when not supplied.
LagrangianField with_potential(LagrangianField L, std::function<double(const Point&)> potential,
                               std::function<Vec(const Point&)> gradient = {});

/// Solves H a = dL/dq - (d^2L/dv dq) v - 2 S^nu_{mu sigma} (dL/dv^nu) v^sigma for the
/// acceleration; H = d^2L/dv dv. Throws DegenerateLagrangianError when H is singular.
TangentVector modified_el_rhs(const GeometrySpec& spec, const LagrangianField& L, const PhaseState& state);
/// Ordinary Euler-Lagrange acceleration (no torsion term).
TangentVector classical_el_rhs(const LagrangianField& L, const PhaseState& state);
AccelerationFn modified_el_equation(const GeometrySpec& spec, const LagrangianField& L);

/// Variation field w(s, q) along a path.
using VariationField = std::function<TangentVector(double s, const Point& q)>;

struct VariationResult {
  /// int w^mu ([L]_mu - 2 S^nu_{mu sigma} p_nu v^sigma) ds
  double force_form = 0.0;
  /// int (dL/dq . w + p . d_w v) ds with d_w v^mu = w'^mu + 2 S^mu_{nu sigma} v^nu w^sigma
  double direct_form = 0.0;
  /// int (dL/dq . w + p . w') ds, the torsion-free first variation
  double classical = 0.0;
};

/// First variation of the action along a sampled path under a variation that
/// vanishes at both ends. Both routes use composite Simpson quadrature, so the
/// path must be uniformly sampled. p' uses the stored accelerations.
VariationResult covariant_variation(const GeometrySpec& spec, const Trajectory& path, const VariationField& w,
                                    const LagrangianField& L);

/// Nodes q_0..q_N with uniform spacing ds; q_0 and q_N are held fixed.
struct DiscretePath {
  std::vector<Point> nodes;
  double ds = 0.0;

  int segments() const { return static_cast<int>(nodes.size()) - 1; }
  int dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().size()); }
  double span() const { return ds * segments(); }

  static DiscretePath chord(const Point& a, const Point& b, int segments, double span);
  /// Samples a trajectory at segments+1 uniform parameter values.
  static DiscretePath from_trajectory(const Trajectory& traj, int segments);
};

/// sum_k 1/2 g(q_{k+1/2}) dq_k dq_k / ds.
double discrete_action(const GeometrySpec& spec, const DiscretePath& path);
/// Gradient with respect to interior nodes, stacked node by node.
Vec discrete_action_gradient(const GeometrySpec& spec, const DiscretePath& path);

/// max over interior nodes of |a_k + Gamma(q_k)[v_k, v_k]| with central differences.
double discrete_autoparallel_residual(const GeometrySpec& spec, const DiscretePath& path);

/// q path plus auxiliary y and multiplier lambda at every node. Boundary values:
/// y_0 = y_N = 0 and lambda_0 = lambda_N = 0.
struct ExtendedPath {
  DiscretePath q;
  std::vector<Vec> y;
  std::vector<Vec> lambda;

  static ExtendedPath from_path(const DiscretePath& path);
  double y_norm() const;
  double lambda_norm() const;
};

/// Extended local action
///   S = S_g + sum_k ds [ -K_{mu nu sigma} v^nu v^sigma y^mu + lambda_mu (Omega y - D_v v)^mu ]
/// over interior nodes, with
///   Omega y = y'' + (Gamma^mu_{nu sigma} + Gamma^mu_{sigma nu}) v^sigma y'^nu + y^nu d_nu Gamma^mu_{sigma lambda} v^sigma v^lambda,
///   D_v v   = v' + Gamma^mu_{nu sigma} v^nu v^sigma,
/// central first and second differences for v, v', y', y''.
double extended_action(const GeometrySpec& spec, const ExtendedPath& path);
/// extended_action - discrete_action.
double coupling_terms(const GeometrySpec& spec, const ExtendedPath& path);

/// Interior unknowns stacked per node as [q_k, y_k, lambda_k].
Vec pack(const ExtendedPath& path);
ExtendedPath unpack(const ExtendedPath& shape, const Vec& x);

/// Gradient of extended_action with respect to pack(path): analytic in all
/// difference-stencil variables, 4th-order differences (step 1e-4) for the
/// explicit dependence of Gamma, d Gamma and K on q_k.
Vec extended_gradient(const GeometrySpec& spec, const ExtendedPath& path);

struct SolverConfig {
  double tolerance = 1e-8;  // gradient max-norm
  int max_iterations = 500;
  int descent_iterations = 10;
  double jacobian_step = 1e-6;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> gradient_norms;
  double gradient_norm = 0.0;
  double autoparallel_residual = 0.0;
  double y_norm = 0.0;
  double lambda_norm = 0.0;
  std::string message;
};

struct ExtendedSolution {
  ExtendedPath path;
  SolveReport report;
};

struct PathSolution {
  DiscretePath path;
  SolveReport report;
};

/// Damped Newton on the gradient of extended_action over all interior unknowns.
/// The Jacobian is a banded finite-difference matrix (colored columns); steps are
/// backtracked on the gradient 2-norm and, during the first descent_iterations
/// iterations, a failed Newton search falls back to steepest descent on
/// 1/2 |gradient|^2. A non-converged result carries the best iterate.
ExtendedSolution stationary_point_solve(const GeometrySpec& spec, const ExtendedPath& initial,
                                        const SolverConfig& config = {});

/// Stationary point of discrete_action with fixed endpoints (same Newton scheme).
PathSolution discrete_geodesic(const GeometrySpec& spec, const DiscretePath& initial,
                               const SolverConfig& config = {});

/// Smallest singular value, over interior nodes, of the Hessian of the
/// integrated-by-parts local Lagrangian
///   1/2 g v v - K v v . y + lambda' . v - lambda' . y' + lambda . (B y' + C y - Gamma v v)
/// with respect to the velocity-like unknowns (v, y', lambda').
double hessian_nondegeneracy(const GeometrySpec& spec, const ExtendedPath& path);

/// Frame fields e_a = e^mu_a (column a of the basis matrix).
struct AnholonomicFrame {
  std::function<Mat(const Point&)> basis;
  /// (rho, mu, a) = d_rho e^mu_a; differenced when absent.
  std::function<Tensor3(const Point&)> derivative;

  Mat at(const Point& q) const;
  Mat inverse_at(const Point& q) const;
  Tensor3 d_at(const Point& q) const;
};

AnholonomicFrame coordinate_frame(int d);
/// Orthonormal frame of the flat plane rotated by angle(q).
AnholonomicFrame rotating_frame(std::function<double(const Point&)> angle);

/// C^c_{ab} with [e_a, e_b] = 2 C^c_{ab} e_c.
Tensor3 anholonomity(const AnholonomicFrame& frame, const Point& q);

/// L~(u, q) = L(E(q) u, q).
LagrangianField quasi_lagrangian(const LagrangianField& L, const AnholonomicFrame& frame);

/// Quasi-acceleration u' from Poincare's equations
///   d/ds (dL~/du^a) - e_a(L~) + 2 C^c_{ab} (dL~/du^c) u^b = 0.
Vec poincare_rhs(const AnholonomicFrame& frame, const LagrangianField& quasi, const Point& q, const Vec& u);

struct PoincareTrajectory {
  std::vector<double> s;
  std::vector<Point> q;
  std::vector<Vec> u;
};

/// rk4 for q' = E(q) u, u' = poincare_rhs.
PoincareTrajectory integrate_poincare(const AnholonomicFrame& frame, const LagrangianField& quasi, const Point& q0,
                                      const Vec& u0, double span, double step);

/// Tensor rule: S'^a_{bc} = (E^-1)^a_mu S^mu_{nu sigma} e^nu_b e^sigma_c.
Tensor3 transform_torsion(const Tensor3& torsion, const AnholonomicFrame& frame, const Point& q);

/// Torsion in the frame computed directly from the vielbein: the frame connection
/// Gamma'^a_{bc} = g'^{ad} (eps'_d, e_b(eps'_c)) with eps'_c = eps e_c, antisymmetrized,
/// minus the anholonomity of the frame.
Tensor3 induced_torsion_in_frame(const VielbeinField& e, const AnholonomicFrame& frame, const Point& q);

}  // namespace cartan
