#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cartan/tensor.hpp"
#include "cartan/variational.hpp"

namespace cartan::detail {

using SparseMat = Eigen::SparseMatrix<double>;

/// Gradient at a perturbed point. `nodes` lists the perturbed nodes and
/// `component` the perturbed unknown within each node block, so callers can
/// refresh cached per-node data only where it changed.
using PerturbedGradient = std::function<Vec(const Vec& x, const std::vector<int>& nodes, int component)>;

/// Finite-difference Jacobian of a gradient whose node blocks of size m couple
/// only to nodes within `bandwidth`. Columns are grouped into 2*bandwidth+1
/// colors per component and differenced centrally.
SparseMat banded_jacobian(int nodes, int m, int bandwidth, const Vec& x, double step, const PerturbedGradient& grad);

struct NewtonProblem {
  std::function<Vec(const Vec&)> gradient;
  std::function<SparseMat(const Vec&)> jacobian;
};

struct NewtonOutcome {
  Vec x;
  bool converged = false;
  int iterations = 0;
  std::vector<double> norms;
  std::string message;
};

NewtonOutcome newton_solve(const NewtonProblem& problem, const Vec& x0, const SolverConfig& config);

}  // namespace cartan::detail
