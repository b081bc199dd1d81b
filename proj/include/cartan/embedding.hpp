#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cartan/geometry.hpp"
#include "cartan/tensor.hpp"

namespace cartan {

/// Embedding functions eps^i_mu(q): linear maps of T_qM into R^n.
///
/// value(q) is n x d with (i, mu) = eps^i_mu; derivative(q) is n x d x d with
/// (i, mu, nu) = d_mu eps^i_nu. Without an analytic derivative the field is
/// differentiated with 4th-order central differences.
struct VielbeinField {
  int n = 0;
  int d = 0;
  std::function<Mat(const Point&)> value;
  std::function<Tensor3(const Point&)> derivative;

  Mat at(const Point& q) const;
  Tensor3 d_at(const Point& q) const;
};

/// A named vielbein with the flags it is known to satisfy.
struct EmbeddingPreset {
  VielbeinField field;
  std::string name;
  PresetParams params;
  bool integrable = false;
  bool teleparallel = false;
  bool claims_general = false;
};

/// Throws ConfigError when a preset claims to realize a general (g, S) pair
/// with too few ambient dimensions (requires 2n > 1 + d^2).
void check_dimension_count(const EmbeddingPreset& preset);

EmbeddingPreset identity_embedding(int d);
/// eps = exp(psi T), psi = 2 (gamma1 q1 + gamma2 q2), T = [[0, 1], [-1, 0]].
EmbeddingPreset weitzenboeck_2d(double gamma1, double gamma2);
/// Jacobian of the radius-R sphere in R^3, q = (theta, phi).
EmbeddingPreset sphere_holonomic(double radius);
/// eps^1 = dq1, eps^2 = a q2 dq1 + dq2.
EmbeddingPreset shear_2d(double a);

/// g_{mu nu} = (eps_mu, eps_nu).
Mat induced_metric(const VielbeinField& e, const Point& q);

/// Gamma^mu_{nu sigma} = g^{mu lambda} (eps_lambda, d_nu eps_sigma).
Tensor3 induced_connection(const VielbeinField& e, const Point& q);

/// S^mu_{nu sigma} = g^{mu lambda} [(eps_lambda, d_nu eps_sigma) - (eps_lambda, d_sigma eps_nu)] / 2.
Tensor3 induced_torsion(const VielbeinField& e, const Point& q);

/// f^i_{mu nu} = D_mu eps^i_nu with the induced connection; layout (i, mu, nu).
Tensor3 f_tensor(const VielbeinField& e, const Point& q);

/// max |(eps_sigma, f_{mu nu})|.
double f_orthogonality_residual(const VielbeinField& e, const Point& q);

/// Curvature assembled from f:
///   out(lambda, sigma, mu, nu) = (f_{mu lambda}, f_{nu sigma}) - (f_{nu lambda}, f_{mu sigma}).
///
/// This combination equals the coordinate Riemann-Cartan tensor R_{lambda sigma mu nu}
/// (same layout as CurvatureTensor::lowered). Curvature normalized by the
/// antisymmetric generator sum is one half of it.
Tensor4 curvature_from_f(const VielbeinField& e, const Point& q);

/// GeometrySpec whose metric and torsion are induced by the vielbein.
GeometrySpec induced_geometry(const EmbeddingPreset& preset);

/// Closed-loop integral of the one-forms eps^i_mu dq^mu along a polyline,
/// using `steps` subintervals of 8-point Gauss-Legendre per segment.
Vec anholonomy_loop(const VielbeinField& e, const std::vector<Point>& loop, int steps = 1);

}  // namespace cartan
