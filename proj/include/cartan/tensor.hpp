#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cartan {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Chart coordinates q^mu and tangent components v^mu share the vector type;
// the aliases only document intent at call sites.
using Point = Vec;
using TangentVector = Vec;

/// Dense rank-3 array with independent extents, row-major in (i, j, k).
///
/// Used for connection coefficients Gamma^mu_{nu sigma}, torsion S^mu_{nu sigma},
/// metric derivatives d_sigma g_{mu nu} and the n x d x d embedding arrays.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n0, int n1, int n2)
      : n0_(n0), n1_(n1), n2_(n2), data_(static_cast<std::size_t>(n0) * n1 * n2, 0.0) {}
  explicit Tensor3(int d) : Tensor3(d, d, d) {}

  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  int extent(int axis) const { return axis == 0 ? n0_ : (axis == 1 ? n1_ : n2_); }
  int dim() const { return n0_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  Tensor3& operator+=(const Tensor3& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor3& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Slice (i, :, :) as a matrix.
  Mat slice(int i) const {
    Mat m(n1_, n2_);
    for (int j = 0; j < n1_; ++j)
      for (int k = 0; k < n2_; ++k) m(j, k) = (*this)(i, j, k);
    return m;
  }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n1_ + j) * n2_ + k;
  }

  int n0_ = 0;
  int n1_ = 0;
  int n2_ = 0;
  std::vector<double> data_;
};

/// Dense rank-4 array with all extents equal to d.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int d) : d_(d), data_(static_cast<std::size_t>(d) * d * d * d, 0.0) {}

  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  int dim() const { return d_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  friend double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data_.size(); ++i) m = std::max(m, std::abs(a.data_[i] - b.data_[i]));
    return m;
  }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * d_ + j) * d_ + k) * d_ + l;
  }

  int d_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

/// c^mu = T^mu_{nu sigma} a^nu b^sigma
inline Vec contract(const Tensor3& t, const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(t.extent(0));
  for (int m = 0; m < t.extent(0); ++m)
    for (int n = 0; n < t.extent(1); ++n) {
      if (a[n] == 0.0) continue;
      for (int s = 0; s < t.extent(2); ++s) out[m] += t(m, n, s) * a[n] * b[s];
    }
  return out;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace cartan
