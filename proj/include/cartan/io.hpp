#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cartan/dynamics.hpp"
#include "cartan/noether.hpp"
#include "cartan/variational.hpp"

namespace cartan {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& data);
/// 16 lowercase hex digits of fnv1a64.
std::string hash_hex(const std::string& data);

/// %.17g
std::string format_double(double x);

/// Named per-sample columns appended after speed.
struct InvariantColumns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[column][sample]
};

/// "# cartan <version> config=<hash>" then s,q1..qd,v1..vd,speed[,names...].
std::string trajectory_csv(const Trajectory& traj, const std::vector<double>& speed, const InvariantColumns& extra,
                           const std::string& config_hash);

/// s,q1..qd,y1..yd,lambda1..lambdad with the same comment line.
std::string extended_path_csv(const ExtendedPath& path, const std::string& config_hash);

/// s,<charge names...>
std::string charge_csv(const std::vector<std::string>& names, const std::vector<SeriesResult>& series,
                       const std::string& config_hash);

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const ChargeReport& report);
nlohmann::json vector_json(const Vec& v);
Vec vector_from_json(const nlohmann::json& j, const std::string& key);

void write_text(const std::string& path, const std::string& text);

}  // namespace cartan
