#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cartan/dynamics.hpp"
#include "cartan/embedding.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct CheckContext {
  GeometrySpec spec;
  std::optional<EmbeddingPreset> embedding;
  std::uint64_t seed = 1;
};

std::vector<std::string> suite_names();
/// "geometry", "dynamics", "noether", "embedding" or "all"; anything else is a ConfigError.
std::vector<CheckResult> run_suite(const std::string& suite, const CheckContext& ctx);

std::vector<CheckResult> geometry_checks(const CheckContext& ctx);
std::vector<CheckResult> dynamics_checks(const CheckContext& ctx);
std::vector<CheckResult> noether_checks(const CheckContext& ctx);
std::vector<CheckResult> embedding_checks(const CheckContext& ctx);

/// Chart points inside every preset's domain: 1 + 0.3 u per coordinate, u uniform in [-1, 1].
std::vector<Point> sample_points(int d, int count, std::mt19937_64& rng);

struct GaussScan {
  /// gauss_deviation at autoparallel_rhs
  double at_rhs = 0.0;
  /// smallest deviation among the candidates
  double best_candidate = 0.0;
  /// distance from the best candidate to autoparallel_rhs
  double best_distance = 0.0;
};

/// Evaluates gauss_deviation at `candidates` random accelerations: half uniform in
/// [-10, 10]^d, half autoparallel_rhs + r u with |u| = 1 and log-uniform r in [1e-7, 1].
GaussScan gauss_scan(const GeometrySpec& spec, const PhaseState& state, int candidates, std::mt19937_64& rng);

}  // namespace cartan
