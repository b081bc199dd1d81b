#include "cartan/embedding.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "cartan/errors.hpp"
#include "cartan/finite_difference.hpp"

namespace cartan {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// (eps_lambda, d_nu eps_sigma) with layout (lambda, nu, sigma).
Tensor3 frame_derivative_products(const Mat& eps, const Tensor3& deps) {
  const int n = static_cast<int>(eps.rows());
  const int d = static_cast<int>(eps.cols());
  Tensor3 out(d);
  for (int l = 0; l < d; ++l)
    for (int nu = 0; nu < d; ++nu)
      for (int s = 0; s < d; ++s) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += eps(i, l) * deps(i, nu, s);
        out(l, nu, s) = acc;
      }
  return out;
}

}  // namespace

Mat VielbeinField::at(const Point& q) const {
  Mat eps = value(q);
  if (eps.rows() != n || eps.cols() != d) throw DegenerateEmbeddingError("vielbein has wrong shape");
  if (!eps.allFinite()) throw DegenerateEmbeddingError("vielbein is not finite");
  Eigen::ColPivHouseholderQR<Mat> qr(eps);
  qr.setThreshold(1e-12);
  if (qr.rank() < d) throw DegenerateEmbeddingError("vielbein does not have full column rank");
  return eps;
}

Tensor3 VielbeinField::d_at(const Point& q) const {
  if (derivative) return derivative(q);
  Tensor3 out(n, d, d);
  for (int m = 0; m < d; ++m) {
    const Mat de = fd::derivative(value, q, m);
    for (int i = 0; i < n; ++i)
      for (int nu = 0; nu < d; ++nu) out(i, m, nu) = de(i, nu);
  }
  return out;
}

void check_dimension_count(const EmbeddingPreset& preset) {
  const int n = preset.field.n;
  const int d = preset.field.d;
  if (preset.claims_general && !(2 * n > 1 + d * d))
    throw ConfigError("embedding '" + preset.name + "' claims a general (g, S) pair but 2n = " +
                      std::to_string(2 * n) + " <= 1 + d^2 = " + std::to_string(1 + d * d));
}

EmbeddingPreset identity_embedding(int d) {
  if (d < 1) throw ConfigError("identity embedding needs d >= 1");
  EmbeddingPreset p;
  p.field.n = d;
  p.field.d = d;
  p.field.value = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  p.field.derivative = [d](const Point&) { return Tensor3(d, d, d); };
  p.name = "identity";
  p.params = {{"d", static_cast<double>(d)}};
  p.integrable = true;
  p.teleparallel = true;
  return p;
}

EmbeddingPreset weitzenboeck_2d(double gamma1, double gamma2) {
  EmbeddingPreset p;
  p.field.n = 2;
  p.field.d = 2;
  p.field.value = [gamma1, gamma2](const Point& q) -> Mat {
    const double psi = 2.0 * (gamma1 * q[0] + gamma2 * q[1]);
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    Mat e(2, 2);
    e << c, s, -s, c;
    return e;
  };
  p.field.derivative = [gamma1, gamma2](const Point& q) {
    const double psi = 2.0 * (gamma1 * q[0] + gamma2 * q[1]);
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    const double gamma[2] = {gamma1, gamma2};
    Tensor3 out(2, 2, 2);
    for (int m = 0; m < 2; ++m) {
      const double k = 2.0 * gamma[m];
      out(0, m, 0) = -k * s;
      out(0, m, 1) = k * c;
      out(1, m, 0) = -k * c;
      out(1, m, 1) = -k * s;
    }
    return out;
  };
  p.name = "weitzenboeck-2d";
  p.params = {{"gamma1", gamma1}, {"gamma2", gamma2}};
  p.integrable = gamma1 == 0.0 && gamma2 == 0.0;
  p.teleparallel = true;
  return p;
}

EmbeddingPreset sphere_holonomic(double radius) {
  if (!(radius > 0.0)) throw ConfigError("sphere-holonomic needs R > 0");
  const double r = radius;
  EmbeddingPreset p;
  p.field.n = 3;
  p.field.d = 2;
  p.field.value = [r](const Point& q) -> Mat {
    const double ct = std::cos(q[0]), st = std::sin(q[0]);
    const double cp = std::cos(q[1]), sp = std::sin(q[1]);
    Mat e(3, 2);
    e << r * ct * cp, -r * st * sp,
         r * ct * sp,  r * st * cp,
        -r * st,       0.0;
    return e;
  };
  p.field.derivative = [r](const Point& q) {
    const double ct = std::cos(q[0]), st = std::sin(q[0]);
    const double cp = std::cos(q[1]), sp = std::sin(q[1]);
    Tensor3 out(3, 2, 2);
    // d_theta eps_theta
    out(0, 0, 0) = -r * st * cp;
    out(1, 0, 0) = -r * st * sp;
    out(2, 0, 0) = -r * ct;
    // d_theta eps_phi = d_phi eps_theta
    for (int m = 0; m < 2; ++m) {
      const int nu = 1 - m;
      out(0, m, nu) = -r * ct * sp;
      out(1, m, nu) = r * ct * cp;
      out(2, m, nu) = 0.0;
    }
    // d_phi eps_phi
    out(0, 1, 1) = -r * st * cp;
    out(1, 1, 1) = -r * st * sp;
    out(2, 1, 1) = 0.0;
    return out;
  };
  p.name = "sphere-holonomic";
  p.params = {{"R", radius}};
  p.integrable = true;
  p.teleparallel = false;
  return p;
}

EmbeddingPreset shear_2d(double a) {
  EmbeddingPreset p;
  p.field.n = 2;
  p.field.d = 2;
  p.field.value = [a](const Point& q) -> Mat {
    Mat e(2, 2);
    e << 1.0, 0.0, a * q[1], 1.0;
    return e;
  };
  p.field.derivative = [a](const Point&) {
    Tensor3 out(2, 2, 2);
    out(1, 1, 0) = a;  // d_2 eps^2_1
    return out;
  };
  p.name = "shear-2d";
  p.params = {{"a", a}};
  p.integrable = a == 0.0;
  p.teleparallel = true;
  return p;
}

Mat induced_metric(const VielbeinField& e, const Point& q) {
  const Mat eps = e.at(q);
  return eps.transpose() * eps;
}

Tensor3 induced_connection(const VielbeinField& e, const Point& q) {
  const Mat eps = e.at(q);
  const Mat g = eps.transpose() * eps;
  const Mat g_inv = g.llt().solve(Mat::Identity(e.d, e.d));
  return raise_first(frame_derivative_products(eps, e.d_at(q)), g_inv);
}

Tensor3 induced_torsion(const VielbeinField& e, const Point& q) {
  return antisymmetric_part(induced_connection(e, q));
}

Tensor3 f_tensor(const VielbeinField& e, const Point& q) {
  const Mat eps = e.at(q);
  const Tensor3 deps = e.d_at(q);
  const Tensor3 gamma = induced_connection(e, q);
  Tensor3 f = deps;
  for (int i = 0; i < e.n; ++i)
    for (int m = 0; m < e.d; ++m)
      for (int nu = 0; nu < e.d; ++nu)
        for (int l = 0; l < e.d; ++l) f(i, m, nu) -= gamma(l, m, nu) * eps(i, l);
  return f;
}

double f_orthogonality_residual(const VielbeinField& e, const Point& q) {
  const Mat eps = e.at(q);
  const Tensor3 f = f_tensor(e, q);
  double worst = 0.0;
  for (int s = 0; s < e.d; ++s)
    for (int m = 0; m < e.d; ++m)
      for (int nu = 0; nu < e.d; ++nu) {
        double acc = 0.0;
        for (int i = 0; i < e.n; ++i) acc += eps(i, s) * f(i, m, nu);
        worst = std::max(worst, std::abs(acc));
      }
  return worst;
}

Tensor4 curvature_from_f(const VielbeinField& e, const Point& q) {
  const Tensor3 f = f_tensor(e, q);
  const int d = e.d;
  auto dot = [&](int a, int b, int c, int dd) {
    double acc = 0.0;
    for (int i = 0; i < e.n; ++i) acc += f(i, a, b) * f(i, c, dd);
    return acc;
  };
  Tensor4 out(d);
  for (int l = 0; l < d; ++l)
    for (int s = 0; s < d; ++s)
      for (int m = 0; m < d; ++m)
        for (int nu = 0; nu < d; ++nu) out(l, s, m, nu) = dot(m, l, nu, s) - dot(nu, l, m, s);
  return out;
}

GeometrySpec induced_geometry(const EmbeddingPreset& preset) {
  const VielbeinField field = preset.field;
  MetricField metric;
  metric.value = [field](const Point& q) { return induced_metric(field, q); };
  metric.derivative = [field](const Point& q) {
    const Mat eps = field.at(q);
    const Tensor3 deps = field.d_at(q);
    const Tensor3 products = frame_derivative_products(eps, deps);  // (l, s, m)
    Tensor3 dg(field.d);
    for (int s = 0; s < field.d; ++s)
      for (int m = 0; m < field.d; ++m)
        for (int nu = 0; nu < field.d; ++nu) dg(s, m, nu) = products(nu, s, m) + products(m, s, nu);
    return dg;
  };
  TorsionField torsion{[field](const Point& q) { return induced_torsion(field, q); }};
  return GeometrySpec(field.d, std::move(metric), std::move(torsion), preset.name, preset.params);
}

Vec anholonomy_loop(const VielbeinField& e, const std::vector<Point>& loop, int steps) {
  if (loop.size() < 2) throw ConfigError("loop needs at least two points");
  if ((loop.front() - loop.back()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("loop is not closed (first point != last point)");
  if (steps < 1) throw ConfigError("quadrature steps must be >= 1");
  Vec total = Vec::Zero(e.n);
  for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
    const Point& a = loop[k];
    const Vec delta = loop[k + 1] - a;
    const double width = 1.0 / steps;
    for (int j = 0; j < steps; ++j) {
      const double t0 = j * width;
      for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
        const double t = t0 + 0.5 * width * (kGaussNodes[g] + 1.0);
        const Point p = a + t * delta;
        total += (0.5 * width * kGaussWeights[g]) * (e.at(p) * delta);
      }
    }
  }
  return total;
}

}  // namespace cartan
