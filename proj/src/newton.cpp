#include "newton.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

namespace cartan::detail {

namespace {

double max_norm(const Vec& g) { return g.size() ? g.cwiseAbs().maxCoeff() : 0.0; }

// Backtracking on the gradient 2-norm. Returns true and updates x, g on success.
bool backtrack(const NewtonProblem& problem, const Vec& direction, Vec& x, Vec& g) {
  const double g0 = g.norm();
  for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
    const Vec trial = x + alpha * direction;
    const Vec gt = problem.gradient(trial);
    if (gt.allFinite() && gt.norm() <= (1.0 - 1e-4 * alpha) * g0) {
      x = trial;
      g = gt;
      return true;
    }
  }
  return false;
}

}  // namespace

SparseMat banded_jacobian(int nodes, int m, int bandwidth, const Vec& x, double step, const PerturbedGradient& grad) {
  const int colors = 2 * bandwidth + 1;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nodes) * m * m * colors);
  for (int color = 0; color < colors; ++color) {
    std::vector<int> group;
    for (int k = color; k < nodes; k += colors) group.push_back(k);
    if (group.empty()) continue;
    for (int j = 0; j < m; ++j) {
      Vec xp = x, xm = x;
      std::vector<double> h(group.size());
      for (std::size_t g = 0; g < group.size(); ++g) {
        const int idx = group[g] * m + j;
        h[g] = step * std::max(1.0, std::abs(x[idx]));
        xp[idx] += h[g];
        xm[idx] -= h[g];
      }
      const Vec gp = grad(xp, group, j);
      const Vec gm = grad(xm, group, j);
      for (std::size_t g = 0; g < group.size(); ++g) {
        const int k = group[g];
        const int col = k * m + j;
        for (int r = std::max(0, k - bandwidth); r <= std::min(nodes - 1, k + bandwidth); ++r)
          for (int i = 0; i < m; ++i) {
            const int row = r * m + i;
            const double value = (gp[row] - gm[row]) / (2.0 * h[g]);
            if (value != 0.0) triplets.emplace_back(row, col, value);
          }
      }
    }
  }
  SparseMat jac(nodes * m, nodes * m);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

NewtonOutcome newton_solve(const NewtonProblem& problem, const Vec& x0, const SolverConfig& config) {
  NewtonOutcome out;
  Vec x = x0;
  Vec g = problem.gradient(x);
  Vec best = x;
  double best_norm = max_norm(g);
  out.norms.push_back(best_norm);

  for (int it = 0; it < config.max_iterations; ++it) {
    if (max_norm(g) < config.tolerance) {
      out.converged = true;
      break;
    }
    SparseMat jac = problem.jacobian(x);
    const SparseMat jt = jac.transpose();
    jac = 0.5 * (jac + jt);
    jac.makeCompressed();

    Vec step;
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(jac);
    if (lu.info() == Eigen::Success) step = lu.solve(-g);
    bool moved = false;
    if (step.size() == g.size() && step.allFinite()) moved = backtrack(problem, step, x, g);
    if (!moved && it < config.descent_iterations) moved = backtrack(problem, -(jac.transpose() * g), x, g);
    out.iterations = it + 1;
    if (!moved) {
      out.message = "line search failed";
      break;
    }
    const double norm = max_norm(g);
    out.norms.push_back(norm);
    if (norm < best_norm) {
      best_norm = norm;
      best = x;
    }
  }
  if (!out.converged && max_norm(g) < config.tolerance) out.converged = true;
  if (out.converged) {
    out.x = x;
    out.message = "converged";
  } else {
    out.x = best;
    if (out.message.empty()) out.message = "maximum iterations reached";
  }
  return out;
}

}  // namespace cartan::detail
