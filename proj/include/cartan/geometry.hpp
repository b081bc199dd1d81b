#pragma once

#include <functional>
#include <map>
#include <string>

#include "cartan/tensor.hpp"

namespace cartan {

/// Index conventions used throughout the library.
///
///  - Connection coefficients Gamma(mu, nu, sigma) = Gamma^mu_{nu sigma}. The first
///    lower index nu is the transport direction: D_v w^mu = v^nu d_nu w^mu +
///    Gamma^mu_{nu sigma} v^nu w^sigma, matching the induced connection
///    Gamma^mu_{nu sigma} = g^{mu lambda} (eps_lambda, d_nu eps_sigma).
///  - Torsion S(mu, nu, sigma) = S^mu_{nu sigma} = (Gamma^mu_{nu sigma} - Gamma^mu_{sigma nu}) / 2.
///  - Contorsion K(sigma, mu, nu) = K_{sigma mu nu}, all indices lowered.
///  - Metric derivative dg(sigma, mu, nu) = d_sigma g_{mu nu}.
///  - Connection derivative dGamma(rho, mu, nu, sigma) = d_rho Gamma^mu_{nu sigma}.
///  - Curvature R(sigma, lambda, mu, nu) = R^sigma_{lambda mu nu}, antisymmetric in (mu, nu).

using PresetParams = std::map<std::string, double>;

/// Metric g_{mu nu}(q) with optional analytic first derivatives.
struct MetricField {
  std::function<Mat(const Point&)> value;
  std::function<Tensor3(const Point&)> derivative;

  bool has_analytic_derivative() const { return static_cast<bool>(derivative); }

  /// g at q; throws DegenerateMetricError unless symmetric positive definite.
  Mat at(const Point& q) const;
  /// d_sigma g_{mu nu}: analytic when available, otherwise 4th-order central differences.
  Tensor3 d(const Point& q) const;
  Mat inverse_at(const Point& q) const;
};

/// Torsion S^mu_{nu sigma}(q).
struct TorsionField {
  std::function<Tensor3(const Point&)> value;

  Tensor3 at(const Point& q) const { return value(q); }
};

/// Chart-local geometry: metric and torsion on a single coordinate chart.
class GeometrySpec {
 public:
  GeometrySpec(int dim, MetricField metric, TorsionField torsion, std::string name = "custom",
               PresetParams params = {});

  int dim() const { return dim_; }
  const MetricField& metric() const { return metric_; }
  const TorsionField& torsion() const { return torsion_; }
  const std::string& name() const { return name_; }
  const PresetParams& params() const { return params_; }

  /// Returns a copy with the torsion field replaced by zero.
  GeometrySpec without_torsion() const;

 private:
  int dim_;
  MetricField metric_;
  TorsionField torsion_;
  std::string name_;
  PresetParams params_;
};

Tensor3 zero_tensor3(int d);

/// Christoffel symbols of the second kind, Gamma-bar^mu_{nu sigma}.
Tensor3 christoffel(const MetricField& g, const Point& q);

/// K_{sigma mu nu} = S_{sigma mu nu} - S_{mu nu sigma} + S_{nu sigma mu}, indices lowered by g.
Tensor3 contorsion(const TorsionField& s, const MetricField& g, const Point& q);

/// Metric-compatible connection Gamma = Gamma-bar + g^{-1} K.
Tensor3 full_connection(const GeometrySpec& spec, const Point& q);

/// (Gamma^s_{mn} - Gamma^s_{nm}) / 2.
Tensor3 antisymmetric_part(const Tensor3& gamma);

/// max |D_mu g_{nu sigma}| with the full connection.
double metric_compatibility_residual(const GeometrySpec& spec, const Point& q);

/// d_rho Gamma^mu_{nu sigma} by 4th-order central differences of full_connection.
Tensor4 connection_derivative(const GeometrySpec& spec, const Point& q);

/// Riemann-Cartan curvature of the full connection.
struct CurvatureTensor {
  Tensor4 mixed;  // R^sigma_{lambda mu nu}

  /// R_{sigma lambda mu nu} = g_{sigma alpha} R^alpha_{lambda mu nu}.
  Tensor4 lowered(const Mat& g) const;
};

CurvatureTensor curvature(const GeometrySpec& spec, const Point& q);

/// max over (mu, nu) of |[D_mu, D_nu] F + 2 S^sigma_{mu nu} D_sigma F| for a scalar F,
/// with all derivatives taken by nested central differences of step h.
double scalar_commutator_residual(const GeometrySpec& spec,
                                  const std::function<double(const Point&)>& scalar,
                                  const Point& q, double h = 1e-4);

/// Index gymnastics.
Tensor3 lower_first(const Tensor3& t, const Mat& g);
Tensor3 raise_first(const Tensor3& t, const Mat& g_inv);

}  // namespace cartan
