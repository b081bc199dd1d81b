#include "cartan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "cartan/errors.hpp"
#include "cartan/finite_difference.hpp"

namespace cartan {

namespace {

std::string describe(const Point& q) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ")";
  return os.str();
}

}  // namespace

Mat MetricField::at(const Point& q) const {
  Mat g = value(q);
  if (g.rows() != g.cols() || g.rows() != q.size())
    throw DegenerateMetricError("metric has wrong shape at " + describe(q));
  if (!g.allFinite()) throw DegenerateMetricError("metric is not finite at " + describe(q));
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DegenerateMetricError("metric is not symmetric at " + describe(q));
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw DegenerateMetricError("metric is not positive definite at " + describe(q));
  // A Cholesky pivot this small means g is singular to working precision.
  const double min_pivot = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
  if (min_pivot * min_pivot < 1e-14 * scale)
    throw DegenerateMetricError("metric is numerically singular at " + describe(q));
  return g;
}

Tensor3 MetricField::d(const Point& q) const {
  if (derivative) return derivative(q);
  const int dim = static_cast<int>(q.size());
  Tensor3 out(dim);
  for (int s = 0; s < dim; ++s) {
    const Mat dg = fd::derivative(value, q, s);
    for (int m = 0; m < dim; ++m)
      for (int n = 0; n < dim; ++n) out(s, m, n) = dg(m, n);
  }
  return out;
}

Mat MetricField::inverse_at(const Point& q) const {
  const Mat g = at(q);
  return g.llt().solve(Mat::Identity(g.rows(), g.cols()));
}

GeometrySpec::GeometrySpec(int dim, MetricField metric, TorsionField torsion, std::string name,
                           PresetParams params)
    : dim_(dim),
      metric_(std::move(metric)),
      torsion_(std::move(torsion)),
      name_(std::move(name)),
      params_(std::move(params)) {
  if (dim_ < 1) throw ConfigError("geometry dimension must be >= 1");
  if (!metric_.value) throw ConfigError("geometry requires a metric evaluator");
  if (!torsion_.value) {
    const int d = dim_;
    torsion_.value = [d](const Point&) { return Tensor3(d); };
  }
}

GeometrySpec GeometrySpec::without_torsion() const {
  const int d = dim_;
  return GeometrySpec(dim_, metric_, TorsionField{[d](const Point&) { return Tensor3(d); }},
                      name_ + "/torsion-free", params_);
}

Tensor3 zero_tensor3(int d) { return Tensor3(d); }

Tensor3 lower_first(const Tensor3& t, const Mat& g) {
  const int d = t.extent(0);
  Tensor3 out(d, t.extent(1), t.extent(2));
  for (int s = 0; s < d; ++s)
    for (int l = 0; l < d; ++l) {
      const double gsl = g(s, l);
      if (gsl == 0.0) continue;
      for (int m = 0; m < t.extent(1); ++m)
        for (int n = 0; n < t.extent(2); ++n) out(s, m, n) += gsl * t(l, m, n);
    }
  return out;
}

Tensor3 raise_first(const Tensor3& t, const Mat& g_inv) { return lower_first(t, g_inv); }

Tensor3 christoffel(const MetricField& g, const Point& q) {
  const int d = static_cast<int>(q.size());
  const Mat g_inv = g.inverse_at(q);
  const Tensor3 dg = g.d(q);
  // first kind: Gamma_{l n s} = (d_n g_{l s} + d_s g_{l n} - d_l g_{n s}) / 2
  Tensor3 first(d);
  for (int l = 0; l < d; ++l)
    for (int n = 0; n < d; ++n)
      for (int s = 0; s < d; ++s) first(l, n, s) = 0.5 * (dg(n, l, s) + dg(s, l, n) - dg(l, n, s));
  return raise_first(first, g_inv);
}

Tensor3 contorsion(const TorsionField& s, const MetricField& g, const Point& q) {
  const int d = static_cast<int>(q.size());
  const Tensor3 lowered = lower_first(s.at(q), g.at(q));
  Tensor3 k(d);
  for (int a = 0; a < d; ++a)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) k(a, m, n) = lowered(a, m, n) - lowered(m, n, a) + lowered(n, a, m);
  return k;
}

Tensor3 full_connection(const GeometrySpec& spec, const Point& q) {
  Tensor3 gamma = christoffel(spec.metric(), q);
  gamma += raise_first(contorsion(spec.torsion(), spec.metric(), q), spec.metric().inverse_at(q));
  return gamma;
}

Tensor3 antisymmetric_part(const Tensor3& gamma) {
  const int d = gamma.extent(0);
  Tensor3 out(d);
  for (int s = 0; s < d; ++s)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) out(s, m, n) = 0.5 * (gamma(s, m, n) - gamma(s, n, m));
  return out;
}

double metric_compatibility_residual(const GeometrySpec& spec, const Point& q) {
  const int d = spec.dim();
  const Mat g = spec.metric().at(q);
  const Tensor3 dg = spec.metric().d(q);
  const Tensor3 gamma = full_connection(spec, q);
  double worst = 0.0;
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      for (int s = 0; s < d; ++s) {
        double r = dg(m, n, s);
        for (int l = 0; l < d; ++l) r -= gamma(l, m, n) * g(l, s) + gamma(l, m, s) * g(n, l);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

Tensor4 connection_derivative(const GeometrySpec& spec, const Point& q) {
  const int d = spec.dim();
  Tensor4 out(d);
  auto gamma_at = [&spec](const Point& p) { return full_connection(spec, p); };
  for (int r = 0; r < d; ++r) {
    const Tensor3 dgamma = fd::derivative(gamma_at, q, r);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        for (int s = 0; s < d; ++s) out(r, m, n, s) = dgamma(m, n, s);
  }
  return out;
}

Tensor4 CurvatureTensor::lowered(const Mat& g) const {
  const int d = mixed.dim();
  Tensor4 out(d);
  for (int s = 0; s < d; ++s)
    for (int a = 0; a < d; ++a) {
      if (g(s, a) == 0.0) continue;
      for (int l = 0; l < d; ++l)
        for (int m = 0; m < d; ++m)
          for (int n = 0; n < d; ++n) out(s, l, m, n) += g(s, a) * mixed(a, l, m, n);
    }
  return out;
}

CurvatureTensor curvature(const GeometrySpec& spec, const Point& q) {
  const int d = spec.dim();
  const Tensor4 dgamma = connection_derivative(spec, q);
  const Tensor3 gamma = full_connection(spec, q);
  CurvatureTensor r{Tensor4(d)};
  for (int s = 0; s < d; ++s)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          double v = dgamma(m, s, n, l) - dgamma(n, s, m, l);
          for (int p = 0; p < d; ++p) v += gamma(s, m, p) * gamma(p, n, l) - gamma(s, n, p) * gamma(p, m, l);
          r.mixed(s, l, m, n) = v;
        }
  return r;
}

double scalar_commutator_residual(const GeometrySpec& spec,
                                  const std::function<double(const Point&)>& scalar,
                                  const Point& q, double h) {
  const int d = spec.dim();
  auto gradient = [&](const Point& p) {
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = fd::derivative(scalar, p, i, h);
    return g;
  };
  // D_mu D_nu F = d_mu d_nu F - Gamma^rho_{mu nu} d_rho F
  Mat second(d, d);
  for (int m = 0; m < d; ++m) {
    const Vec dm = fd::derivative(gradient, q, m, h);
    for (int n = 0; n < d; ++n) second(m, n) = dm[n];
  }
  const Vec grad = gradient(q);
  const Tensor3 gamma = full_connection(spec, q);
  const Tensor3 torsion = spec.torsion().at(q);
  double worst = 0.0;
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) {
      double commutator = second(m, n) - second(n, m);
      double torsion_term = 0.0;
      for (int r = 0; r < d; ++r) {
        commutator -= (gamma(r, m, n) - gamma(r, n, m)) * grad[r];
        torsion_term += 2.0 * torsion(r, m, n) * grad[r];
      }
      worst = std::max(worst, std::abs(commutator + torsion_term));
    }
  return worst;
}

}  // namespace cartan
