#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cartan/embedding.hpp"
#include "cartan/geometry.hpp"

namespace cartan {

/// g = identity in d dimensions, S = 0.
GeometrySpec flat_geometry(int d);
/// g = identity, S^mu_{nu sigma} = gamma^mu T_{nu sigma} with T_12 = -T_21 = 1.
GeometrySpec constant_torsion_2d(double gamma1, double gamma2);
/// g = diag(R^2, R^2 sin^2 theta), q = (theta, phi), analytic derivatives.
GeometrySpec sphere_geometry(double radius);
/// g = diag(1 + a q1^2, 1); derivatives by finite differences only.
GeometrySpec poly_metric_2d(double a);
/// Geometry induced by the weitzenboeck-2d vielbein.
GeometrySpec weitzenboeck_geometry(double gamma1, double gamma2);

std::vector<std::string> geometry_preset_names();
std::vector<std::string> embedding_preset_names();

/// Builds a preset by name. Missing parameters take defaults; unknown names or
/// parameters raise ConfigError.
GeometrySpec make_geometry(const std::string& name, const PresetParams& params = {});
EmbeddingPreset make_embedding(const std::string& name, const PresetParams& params = {});

/// Parameters of a preset with their defaults filled in.
PresetParams geometry_defaults(const std::string& name);
PresetParams embedding_defaults(const std::string& name);

/// {"preset": name, "params": {...}}
nlohmann::json geometry_to_json(const GeometrySpec& spec);
GeometrySpec geometry_from_json(const nlohmann::json& j);

/// {"embedding": name, "params": {...}}
nlohmann::json embedding_to_json(const EmbeddingPreset& preset);
EmbeddingPreset embedding_from_json(const nlohmann::json& j);

}  // namespace cartan
