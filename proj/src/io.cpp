#include "cartan/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

std::string comment_line(const std::string& config_hash) {
  return std::string("# cartan ") + kVersion + " config=" + config_hash + "\n";
}

void append_indexed(std::ostringstream& out, const std::string& prefix, int d) {
  for (int i = 1; i <= d; ++i) out << ',' << prefix << i;
}

void append_values(std::ostringstream& out, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) out << ',' << format_double(v[i]);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<double>& speed, const InvariantColumns& extra,
                           const std::string& config_hash) {
  std::ostringstream out;
  const int d = traj.dim();
  out << comment_line(config_hash) << 's';
  append_indexed(out, "q", d);
  append_indexed(out, "v", d);
  out << ",speed";
  for (const auto& n : extra.names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.s[k]);
    append_values(out, traj.q[k]);
    append_values(out, traj.v[k]);
    out << ',' << format_double(speed[k]);
    for (const auto& col : extra.values) out << ',' << format_double(col[k]);
    out << '\n';
  }
  return out.str();
}

std::string extended_path_csv(const ExtendedPath& path, const std::string& config_hash) {
  std::ostringstream out;
  const int d = path.q.dim();
  out << comment_line(config_hash) << 's';
  append_indexed(out, "q", d);
  append_indexed(out, "y", d);
  append_indexed(out, "lambda", d);
  out << '\n';
  for (std::size_t k = 0; k < path.q.nodes.size(); ++k) {
    out << format_double(static_cast<double>(k) * path.q.ds);
    append_values(out, path.q.nodes[k]);
    append_values(out, path.y[k]);
    append_values(out, path.lambda[k]);
    out << '\n';
  }
  return out.str();
}

std::string charge_csv(const std::vector<std::string>& names, const std::vector<SeriesResult>& series,
                       const std::string& config_hash) {
  std::ostringstream out;
  out << comment_line(config_hash) << 's';
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  if (series.empty()) return out.str();
  for (std::size_t k = 0; k < series.front().s.size(); ++k) {
    out << format_double(series.front().s[k]);
    for (const auto& sr : series) out << ',' << format_double(sr.value[k]);
    out << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"gradient_norms", r.gradient_norms},
          {"gradient_norm", r.gradient_norm},
          {"autoparallel_residual", r.autoparallel_residual},
          {"y_norm", r.y_norm},
          {"lambda_norm", r.lambda_norm},
          {"message", r.message}};
}

nlohmann::json to_json(const ChargeReport& r) {
  return {{"name", r.name},
          {"law", r.law},
          {"initial", r.initial},
          {"max_drift", r.max_drift},
          {"mean_drift", r.mean_drift},
          {"max_rate", r.max_rate},
          {"rate_residual", r.rate_residual},
          {"symmetry_defect", r.symmetry_defect},
          {"identity_residual", r.identity_residual}};
}

nlohmann::json vector_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vector_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace cartan
