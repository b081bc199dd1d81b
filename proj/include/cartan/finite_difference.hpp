#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>

#include "cartan/tensor.hpp"

namespace cartan::fd {

inline constexpr double kRelativeStep = 1e-5;

/// Step used for coordinate derivatives: max(1e-5, 1e-5 |q_i|).
inline double step_for(double coordinate) {
  return std::max(kRelativeStep, kRelativeStep * std::abs(coordinate));
}

/// Fourth-order central difference of f along coordinate `axis`.
///
/// Works for any value type with operator+, operator- and scalar operator*
/// (double, Vec, Mat, Tensor3).
template <class F>
auto derivative(const F& f, const Point& q, int axis, double h) -> std::decay_t<decltype(f(q))> {
  Point p = q;
  p[axis] = q[axis] + 2.0 * h;
  auto fp2 = f(p);
  p[axis] = q[axis] + h;
  auto fp1 = f(p);
  p[axis] = q[axis] - h;
  auto fm1 = f(p);
  p[axis] = q[axis] - 2.0 * h;
  auto fm2 = f(p);
  return (1.0 / (12.0 * h)) * ((8.0 * (fp1 - fm1)) - (fp2 - fm2));
}

template <class F>
auto derivative(const F& f, const Point& q, int axis) -> std::decay_t<decltype(f(q))> {
  return derivative(f, q, axis, step_for(q[axis]));
}

/// Fourth-order central difference of a function of one variable.
template <class F>
auto derivative_1d(const F& f, double x, double h) -> std::decay_t<decltype(f(x))> {
  using T = std::decay_t<decltype(f(x))>;
  return T((1.0 / (12.0 * h)) * ((8.0 * (f(x + h) - f(x - h))) - (f(x + 2.0 * h) - f(x - 2.0 * h))));
}

/// Fourth-order central derivative of uniformly sampled data at interior index k
/// (requires 2 <= k <= size-3).
template <class Seq>
auto sampled_derivative(const Seq& samples, std::size_t k, double h)
    -> std::decay_t<decltype(samples[k])> {
  return (1.0 / (12.0 * h)) *
         ((8.0 * (samples[k + 1] - samples[k - 1])) - (samples[k + 2] - samples[k - 2]));
}

}  // namespace cartan::fd
