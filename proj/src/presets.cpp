#include "cartan/presets.hpp"

#include <cmath>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

const std::vector<std::pair<std::string, PresetParams>>& geometry_table() {
  static const std::vector<std::pair<std::string, PresetParams>> table = {
      {"flat", {{"d", 2.0}}},
      {"constant-torsion-2d", {{"gamma1", 1.0}, {"gamma2", 0.0}}},
      {"sphere", {{"R", 1.0}}},
      {"poly-metric-2d", {{"a", 1.0}}},
      {"weitzenboeck-2d", {{"gamma1", 1.0}, {"gamma2", 0.0}}},
  };
  return table;
}

const std::vector<std::pair<std::string, PresetParams>>& embedding_table() {
  static const std::vector<std::pair<std::string, PresetParams>> table = {
      {"identity", {{"d", 2.0}}},
      {"weitzenboeck-2d", {{"gamma1", 1.0}, {"gamma2", 0.0}}},
      {"sphere-holonomic", {{"R", 1.0}}},
      {"shear-2d", {{"a", 1.0}}},
  };
  return table;
}

PresetParams merge(const std::string& kind,
                   const std::vector<std::pair<std::string, PresetParams>>& table,
                   const std::string& name, const PresetParams& params) {
  for (const auto& [entry, defaults] : table) {
    if (entry != name) continue;
    PresetParams out = defaults;
    for (const auto& [key, value] : params) {
      if (!defaults.count(key))
        throw ConfigError("unknown parameter '" + key + "' for " + kind + " preset '" + name + "'");
      if (!std::isfinite(value))
        throw ConfigError("parameter '" + key + "' of preset '" + name + "' is not finite");
      out[key] = value;
    }
    return out;
  }
  throw ConfigError("unknown " + kind + " preset '" + name + "'");
}

int dimension_param(double d) {
  if (d < 1.0 || d != std::floor(d)) throw ConfigError("dimension parameter d must be a positive integer");
  return static_cast<int>(d);
}

PresetParams params_from_json(const nlohmann::json& j) {
  PresetParams out;
  if (!j.contains("params")) return out;
  const auto& p = j.at("params");
  if (!p.is_object()) throw ConfigError("\"params\" must be an object");
  for (auto it = p.begin(); it != p.end(); ++it) {
    if (!it.value().is_number()) throw ConfigError("parameter '" + it.key() + "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

void reject_extra_keys(const nlohmann::json& j, const std::string& name_key) {
  if (!j.is_object()) throw ConfigError("preset description must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != name_key && it.key() != "params") throw ConfigError("unknown key '" + it.key() + "'");
  if (!j.contains(name_key) || !j.at(name_key).is_string())
    throw ConfigError("missing string key '" + name_key + "'");
}

}  // namespace

GeometrySpec flat_geometry(int d) {
  MetricField g;
  g.value = [d](const Point&) -> Mat { return Mat::Identity(d, d); };
  g.derivative = [d](const Point&) { return Tensor3(d); };
  return GeometrySpec(d, std::move(g), TorsionField{}, "flat", {{"d", static_cast<double>(d)}});
}

GeometrySpec constant_torsion_2d(double gamma1, double gamma2) {
  MetricField g;
  g.value = [](const Point&) -> Mat { return Mat::Identity(2, 2); };
  g.derivative = [](const Point&) { return Tensor3(2); };
  TorsionField s{[gamma1, gamma2](const Point&) {
    Tensor3 t(2);
    t(0, 0, 1) = gamma1;
    t(0, 1, 0) = -gamma1;
    t(1, 0, 1) = gamma2;
    t(1, 1, 0) = -gamma2;
    return t;
  }};
  return GeometrySpec(2, std::move(g), std::move(s), "constant-torsion-2d",
                      {{"gamma1", gamma1}, {"gamma2", gamma2}});
}

GeometrySpec sphere_geometry(double radius) {
  if (!(radius > 0.0)) throw ConfigError("sphere needs R > 0");
  const double r2 = radius * radius;
  MetricField g;
  g.value = [r2](const Point& q) -> Mat {
    const double s = std::sin(q[0]);
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = r2;
    m(1, 1) = r2 * s * s;
    return m;
  };
  g.derivative = [r2](const Point& q) {
    Tensor3 dg(2);
    dg(0, 1, 1) = 2.0 * r2 * std::sin(q[0]) * std::cos(q[0]);
    return dg;
  };
  return GeometrySpec(2, std::move(g), TorsionField{}, "sphere", {{"R", radius}});
}

GeometrySpec poly_metric_2d(double a) {
  MetricField g;
  g.value = [a](const Point& q) -> Mat {
    Mat m = Mat::Identity(2, 2);
    m(0, 0) = 1.0 + a * q[0] * q[0];
    return m;
  };
  return GeometrySpec(2, std::move(g), TorsionField{}, "poly-metric-2d", {{"a", a}});
}

GeometrySpec weitzenboeck_geometry(double gamma1, double gamma2) {
  return induced_geometry(weitzenboeck_2d(gamma1, gamma2));
}

std::vector<std::string> geometry_preset_names() {
  std::vector<std::string> out;
  for (const auto& entry : geometry_table()) out.push_back(entry.first);
  return out;
}

std::vector<std::string> embedding_preset_names() {
  std::vector<std::string> out;
  for (const auto& entry : embedding_table()) out.push_back(entry.first);
  return out;
}

PresetParams geometry_defaults(const std::string& name) { return merge("geometry", geometry_table(), name, {}); }

PresetParams embedding_defaults(const std::string& name) {
  return merge("embedding", embedding_table(), name, {});
}

GeometrySpec make_geometry(const std::string& name, const PresetParams& params) {
  const PresetParams p = merge("geometry", geometry_table(), name, params);
  if (name == "flat") return flat_geometry(dimension_param(p.at("d")));
  if (name == "constant-torsion-2d") return constant_torsion_2d(p.at("gamma1"), p.at("gamma2"));
  if (name == "sphere") return sphere_geometry(p.at("R"));
  if (name == "poly-metric-2d") return poly_metric_2d(p.at("a"));
  return weitzenboeck_geometry(p.at("gamma1"), p.at("gamma2"));
}

EmbeddingPreset make_embedding(const std::string& name, const PresetParams& params) {
  const PresetParams p = merge("embedding", embedding_table(), name, params);
  EmbeddingPreset out;
  if (name == "identity")
    out = identity_embedding(dimension_param(p.at("d")));
  else if (name == "weitzenboeck-2d")
    out = weitzenboeck_2d(p.at("gamma1"), p.at("gamma2"));
  else if (name == "sphere-holonomic")
    out = sphere_holonomic(p.at("R"));
  else
    out = shear_2d(p.at("a"));
  check_dimension_count(out);
  return out;
}

nlohmann::json geometry_to_json(const GeometrySpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : spec.params()) params[k] = v;
  return {{"preset", spec.name()}, {"params", params}};
}

GeometrySpec geometry_from_json(const nlohmann::json& j) {
  reject_extra_keys(j, "preset");
  return make_geometry(j.at("preset").get<std::string>(), params_from_json(j));
}

nlohmann::json embedding_to_json(const EmbeddingPreset& preset) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : preset.params) params[k] = v;
  return {{"embedding", preset.name}, {"params", params}};
}

EmbeddingPreset embedding_from_json(const nlohmann::json& j) {
  reject_extra_keys(j, "embedding");
  return make_embedding(j.at("embedding").get<std::string>(), params_from_json(j));
}

}  // namespace cartan
