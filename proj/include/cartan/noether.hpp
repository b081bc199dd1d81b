#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/geometry.hpp"
#include "cartan/variational.hpp"

namespace cartan {

/// How a symmetry acts on velocities:
///   Classical: d_w v = w'
///   Modified:  d_w v = w' - 2 S^mu_{nu sigma} w^nu v^sigma
enum class TransformationLaw { Classical, Modified };

std::string to_string(TransformationLaw law);

struct SymmetryField {
  std::string name;
  std::function<TangentVector(const Point& q, const Vec& v)> omega;
  /// Phi(q, v, s); treated as 0 when empty.
  std::function<double(const Point& q, const Vec& v, double s)> phi;
  TransformationLaw law = TransformationLaw::Classical;

  double phi_at(const PhaseState& st) const { return phi ? phi(st.q, st.v, st.s) : 0.0; }
};

SymmetryField translation_symmetry(int d, int axis);
/// Rotation generator in the (i, j) coordinate plane: w = q_i e_j - q_j e_i.
SymmetryField rotation_symmetry(int d, int i, int j);
/// w = v, Phi = L.
SymmetryField time_translation(const LagrangianField& L);
/// w = exp(phi T) a with phi = -2 gamma . q, T_12 = 1; Phi = 0.
SymmetryField torsion_symmetry_2d(const Vec& gamma, const Vec& a);
/// w^mu = eps^mu_i a^i (inverse vielbein) under the modified law; Phi = 0.
SymmetryField teleparallel_symmetry(const VielbeinField& e, const Vec& a);

/// Symmetries of L = 1/2 g v v for the named presets: translations and rotations of
/// the flat-metric presets, the azimuthal shift of the sphere, the q2 shift of
/// poly-metric-2d, plus time translation everywhere.
std::vector<SymmetryField> preset_symmetries(const GeometrySpec& spec, const LagrangianField& L);

/// I = dL/dv^mu w^mu - Phi.
double charge(const LagrangianField& L, const SymmetryField& sym, const PhaseState& state);

/// Charge along a trajectory, evaluated on the Hermite interpolant.
struct NoetherCharge {
  std::string name;
  std::function<double(double s)> value;

  double operator()(double s) const { return value(s); }
};

NoetherCharge noether_charge(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj);
SeriesResult charge_series(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj);

/// -2 S^nu_{mu sigma} (dL/dv^nu) v^sigma w^mu: the rate of I along modified
/// Euler-Lagrange motion when L is invariant under the classical law.
double torsion_rate(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                    const PhaseState& state);

/// dI/ds by 4th-order differences of the sampled charge, first and last two samples skipped.
SeriesResult charge_rate(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj);

/// |dI/ds - torsion_rate| at interior samples.
SeriesResult modified_rate_residual(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                    const Trajectory& traj);

/// Off-shell rate identity dI/ds + [L]_mu w^mu = d_w L - dPhi/ds under the classical law,
/// with [L] = dL/dq - d/ds dL/dv from the stored accelerations. Returns the absolute
/// violation at interior samples; holds for any w and any path.
SeriesResult rate_identity_residual(const LagrangianField& L, const SymmetryField& sym, const Trajectory& traj);

/// On-shell rate of I along modified Euler-Lagrange motion for any field w:
///   dI/ds = d_w L - dPhi/ds - 2 S^nu_{mu sigma} p_nu v^sigma w^mu   (classical d_w L)
/// which reduces to torsion_rate for symmetries and to 0 under the modified condition.
double predicted_rate(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                      const PhaseState& state, const TangentVector& accel);
/// |dI/ds - predicted_rate| at interior samples.
SeriesResult on_shell_rate_residual(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                    const Trajectory& traj);

/// d_w L at a state, using the symmetry's transformation law. `accel` is v'.
double symmetry_variation(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                          const PhaseState& state, const TangentVector& accel);

struct SymmetryCheck {
  /// max |d_w L - dPhi/ds - 2 S p v w| (classical law) or max |d_w L - dPhi/ds| (modified law)
  double invariance = 0.0;
  /// max |I(s) - I(s_0)|
  double charge_drift = 0.0;

  double max() const { return std::max(invariance, charge_drift); }
};

SymmetryCheck modified_symmetry_check(const GeometrySpec& spec, const LagrangianField& L, const SymmetryField& sym,
                                      const Trajectory& traj);

/// (I1, I2) = (v1 cos phi - v2 sin phi, v1 sin phi + v2 cos phi), phi = -2 gamma . q.
std::pair<double, double> torsion_integrals_2d(const Vec& gamma, const PhaseState& state);
/// Rank of d(I1, I2)/d(q, v) at the state.
int torsion_integrals_rank(const Vec& gamma, const PhaseState& state);

/// eps^i_mu(q) v^mu for any vielbein.
Vec frame_velocity(const VielbeinField& e, const PhaseState& state);
/// frame_velocity, requiring f = 0 at the state (ConfigError otherwise).
Vec teleparallel_integrals(const VielbeinField& e, const PhaseState& state);

struct ChargeReport {
  std::string name;
  std::string law;
  double initial = 0.0;
  double max_drift = 0.0;
  double mean_drift = 0.0;
  double max_rate = 0.0;
  /// on_shell_rate_residual
  double rate_residual = 0.0;
  /// modified_symmetry_check invariance: 0 iff the charge is conserved
  double symmetry_defect = 0.0;
  /// rate_identity_residual
  double identity_residual = 0.0;
};

/// Drift and rate statistics for each symmetry along a trajectory.
std::vector<ChargeReport> conservation_report(const GeometrySpec& spec, const LagrangianField& L,
                                              const std::vector<SymmetryField>& symmetries, const Trajectory& traj);

}  // namespace cartan
