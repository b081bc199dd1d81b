#include "cartan/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "cartan/checks.hpp"
#include "cartan/errors.hpp"
#include "cartan/io.hpp"
#include "cartan/noether.hpp"
#include "cartan/presets.hpp"

namespace cartan {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "preset",    "embedding",  "params",         "q0",     "v0",           "kind",
      "method",    "step",       "span",           "rel_tol", "abs_tol",     "max_steps",
      "suite",     "segments",   "max_iterations", "tolerance", "descent_iterations", "jacobian_step",
      "residual_threshold", "q_end", "output_dir", "name",   "seed",         "sweep",
      "jobs"};
  return keys;
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
    throw ConfigError("'" + key + "' must be an integer");
  return static_cast<long>(j.get<double>());
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("cannot parse " + what + " '" + s + "'");
  return x;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(item, what));
  if (out.empty()) throw ConfigError("empty list for " + what);
  return out;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string output_dir(const RunConfig& c) { return c.output_dir.empty() ? "." : c.output_dir; }

std::string artifact(const RunConfig& c, const std::string& suffix) {
  return (std::filesystem::path(output_dir(c)) / (c.name + suffix)).string();
}

json manifest_head(const RunConfig& c, const std::string& command) {
  return {{"version", kVersion}, {"command", command}, {"config_hash", config_hash(c)}, {"config", to_json(c)}};
}

std::optional<EmbeddingPreset> embedding_of(const RunConfig& c) {
  if (!c.embedding.empty()) return make_embedding(c.embedding, c.params);
  const auto names = embedding_preset_names();
  if (std::find(names.begin(), names.end(), c.preset) != names.end()) return make_embedding(c.preset, c.params);
  return std::nullopt;
}

const std::string& preset_name(const RunConfig& c) { return c.embedding.empty() ? c.preset : c.embedding; }

AccelerationFn equation(const RunConfig& c, const GeometrySpec& spec) {
  if (c.kind == "modified-el") return modified_el_equation(spec, kinetic_lagrangian(spec));
  return equation_rhs(spec, parse_equation_kind(c.kind));
}

// Invariant columns for the presets that have closed-form integrals.
InvariantColumns invariants(const RunConfig& c, const GeometrySpec& spec, const Trajectory& traj) {
  InvariantColumns cols;
  if (spec.name() == "constant-torsion-2d") {
    Vec gamma(2);
    gamma << spec.params().at("gamma1"), spec.params().at("gamma2");
    cols.names = {"I1", "I2"};
    cols.values.assign(2, {});
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto [a, b] = torsion_integrals_2d(gamma, traj.state(k));
      cols.values[0].push_back(a);
      cols.values[1].push_back(b);
    }
    return cols;
  }
  const auto emb = embedding_of(c);
  if (emb && emb->teleparallel) {
    for (int i = 0; i < emb->field.n; ++i) cols.names.push_back("I" + std::to_string(i + 1));
    cols.values.assign(emb->field.n, {});
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const Vec v = frame_velocity(emb->field, traj.state(k));
      for (int i = 0; i < v.size(); ++i) cols.values[i].push_back(v[i]);
    }
  }
  return cols;
}

json drift_stats(const std::vector<double>& x) {
  double max = 0.0, total = 0.0;
  for (double v : x) {
    const double d = std::abs(v - x.front());
    max = std::max(max, d);
    total += d;
  }
  return {{"max_drift", max}, {"mean_drift", x.empty() ? 0.0 : total / static_cast<double>(x.size())}};
}

int integrate_once(const RunConfig& c, std::ostream& out) {
  const GeometrySpec spec = c.geometry();
  const PhaseState st{c.initial_q(), c.initial_v(), 0.0};
  const Trajectory traj = integrate(equation(c, spec), st, c.integrator);
  const auto sp = speeds(spec, traj);
  const InvariantColumns cols = invariants(c, spec, traj);
  const std::string hash = config_hash(c);
  const std::string csv = artifact(c, ".csv");
  write_text(csv, trajectory_csv(traj, sp, cols, hash));

  json m = manifest_head(c, "integrate");
  m["status"] = to_string(traj.status);
  m["message"] = traj.message;
  m["samples"] = traj.size();
  m["s_end"] = traj.s.empty() ? 0.0 : traj.s.back();
  m["csv"] = csv;
  m["speed"] = drift_stats(sp);
  json inv = json::object();
  for (std::size_t i = 0; i < cols.names.size(); ++i) inv[cols.names[i]] = drift_stats(cols.values[i]);
  m["invariants"] = inv;
  write_text(artifact(c, ".json"), m.dump(2) + "\n");

  out << c.name << ": " << to_string(traj.status) << ", " << traj.size() << " samples";
  for (std::size_t i = 0; i < cols.names.size(); ++i)
    out << ", " << cols.names[i] << " drift " << short_number(inv[cols.names[i]]["max_drift"].get<double>());
  out << '\n';
  return traj.ok() ? kExitOk : kExitDiverged;
}

struct CliFlags {
  std::string config;
  std::vector<std::string> params;
};

}  // namespace

GeometrySpec RunConfig::geometry() const {
  if (!preset.empty() && !embedding.empty()) throw ConfigError("give either 'preset' or 'embedding', not both");
  if (!embedding.empty()) return induced_geometry(make_embedding(embedding, params));
  if (preset.empty()) throw ConfigError("missing 'preset' or 'embedding'");
  return make_geometry(preset, params);
}

Point RunConfig::initial_q() const {
  const int d = geometry().dim();
  if (q0) {
    if (q0->size() != d) throw ConfigError("'q0' must have " + std::to_string(d) + " entries");
    return *q0;
  }
  Point q = Point::Zero(d);
  if (preset_name(*this) == "sphere" || preset_name(*this) == "sphere-holonomic") q[0] = std::acos(-1.0) / 2.0;
  return q;
}

TangentVector RunConfig::initial_v() const {
  const int d = geometry().dim();
  if (v0) {
    if (v0->size() != d) throw ConfigError("'v0' must have " + std::to_string(d) + " entries");
    return *v0;
  }
  TangentVector v = TangentVector::Zero(d);
  v[d - 1] = 1.0;
  return v;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

  RunConfig c;
  if (j.contains("preset")) c.preset = text(j["preset"], "preset");
  if (j.contains("embedding")) c.embedding = text(j["embedding"], "embedding");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("'params' must be an object");
    for (const auto& [key, value] : j["params"].items()) c.params[key] = number(value, "params." + key);
  }
  if (j.contains("q0")) c.q0 = vector_from_json(j["q0"], "q0");
  if (j.contains("v0")) c.v0 = vector_from_json(j["v0"], "v0");
  if (j.contains("q_end")) c.q_end = vector_from_json(j["q_end"], "q_end");
  if (j.contains("kind")) c.kind = text(j["kind"], "kind");
  if (c.kind != "autoparallel" && c.kind != "geodesic" && c.kind != "modified-el")
    throw ConfigError("unknown kind '" + c.kind + "' (autoparallel, geodesic, modified-el)");
  if (j.contains("method")) c.integrator.method = parse_method(text(j["method"], "method"));
  if (j.contains("step")) c.integrator.step = number(j["step"], "step");
  if (j.contains("span")) c.integrator.span = number(j["span"], "span");
  if (j.contains("rel_tol")) c.integrator.rel_tol = number(j["rel_tol"], "rel_tol");
  if (j.contains("abs_tol")) c.integrator.abs_tol = number(j["abs_tol"], "abs_tol");
  if (j.contains("max_steps")) c.integrator.max_steps = integer(j["max_steps"], "max_steps");
  c.integrator.validate();
  if (j.contains("suite")) c.suite = text(j["suite"], "suite");
  if (j.contains("segments")) c.segments = static_cast<int>(integer(j["segments"], "segments"));
  if (j.contains("max_iterations"))
    c.solver.max_iterations = static_cast<int>(integer(j["max_iterations"], "max_iterations"));
  if (j.contains("tolerance")) c.solver.tolerance = number(j["tolerance"], "tolerance");
  if (j.contains("descent_iterations"))
    c.solver.descent_iterations = static_cast<int>(integer(j["descent_iterations"], "descent_iterations"));
  if (j.contains("jacobian_step")) c.solver.jacobian_step = number(j["jacobian_step"], "jacobian_step");
  if (j.contains("residual_threshold")) c.residual_threshold = number(j["residual_threshold"], "residual_threshold");
  if (j.contains("output_dir")) c.output_dir = text(j["output_dir"], "output_dir");
  if (j.contains("name")) c.name = text(j["name"], "name");
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(integer(j["seed"], "seed"));
  if (j.contains("jobs")) c.jobs = static_cast<int>(integer(j["jobs"], "jobs"));
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object()) throw ConfigError("'sweep' must be an object");
    for (const auto& [key, value] : s.items())
      if (key != "param" && key != "values") throw ConfigError("unknown config key 'sweep." + key + "'");
    if (!s.contains("param") || !s.contains("values")) throw ConfigError("'sweep' needs 'param' and 'values'");
    SweepConfig sw;
    sw.param = text(s["param"], "sweep.param");
    const Vec values = vector_from_json(s["values"], "sweep.values");
    sw.values.assign(values.data(), values.data() + values.size());
    if (sw.values.empty()) throw ConfigError("'sweep.values' is empty");
    c.sweep = sw;
  }

  if (c.segments < 2) throw ConfigError("'segments' must be at least 2");
  if (c.solver.max_iterations < 0) throw ConfigError("'max_iterations' must be non-negative");
  if (!(c.solver.tolerance > 0.0)) throw ConfigError("'tolerance' must be positive");
  if (c.jobs < 1) throw ConfigError("'jobs' must be at least 1");
  if (c.name.empty() || c.name.find('/') != std::string::npos) throw ConfigError("'name' must be a plain file stem");
  // Validates preset names and parameters up front.
  const GeometrySpec spec = c.geometry();
  c.params = spec.params();
  if (!c.embedding.empty()) c.params = make_embedding(c.embedding, c.params).params;
  c.initial_q();
  c.initial_v();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  if (!c.embedding.empty()) j["embedding"] = c.embedding;
  j["params"] = c.params;
  j["q0"] = vector_json(c.initial_q());
  j["v0"] = vector_json(c.initial_v());
  j["kind"] = c.kind;
  j["method"] = to_string(c.integrator.method);
  j["step"] = c.integrator.step;
  j["span"] = c.integrator.span;
  j["rel_tol"] = c.integrator.rel_tol;
  j["abs_tol"] = c.integrator.abs_tol;
  j["max_steps"] = c.integrator.max_steps;
  j["suite"] = c.suite;
  j["segments"] = c.segments;
  j["max_iterations"] = c.solver.max_iterations;
  j["tolerance"] = c.solver.tolerance;
  j["descent_iterations"] = c.solver.descent_iterations;
  j["jacobian_step"] = c.solver.jacobian_step;
  j["residual_threshold"] = c.residual_threshold;
  if (c.q_end) j["q_end"] = vector_json(*c.q_end);
  j["output_dir"] = c.output_dir;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  if (c.sweep) j["sweep"] = {{"param", c.sweep->param}, {"values", c.sweep->values}};
  return j;
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("name");
  j.erase("jobs");
  return hash_hex(j.dump());
}

int cmd_integrate(const RunConfig& config, std::ostream& out) {
  if (!config.sweep) return integrate_once(config, out);

  const auto& sw = *config.sweep;
  std::vector<RunConfig> runs;
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    RunConfig r = config;
    r.sweep.reset();
    r.params[sw.param] = sw.values[i];
    r.name = config.name + "-" + std::to_string(i);
    r.geometry();  // rejects unknown sweep parameters before any work starts
    runs.push_back(std::move(r));
  }
  std::vector<int> codes(runs.size(), kExitOk);
  std::vector<std::string> logs(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      std::ostringstream log;
      try {
        codes[i] = integrate_once(runs[i], log);
      } catch (const ConfigError& e) {
        log << runs[i].name << ": error: " << e.what() << '\n';
        codes[i] = kExitConfig;
      } catch (const Error& e) {
        log << runs[i].name << ": error: " << e.what() << '\n';
        codes[i] = kExitDiverged;
      }
      logs[i] = log.str();
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(runs.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json m = manifest_head(config, "integrate-sweep");
  m["runs"] = json::array();
  int code = kExitOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out << logs[i];
    m["runs"].push_back({{"name", runs[i].name}, {sw.param, sw.values[i]}, {"exit_code", codes[i]}});
    code = std::max(code, codes[i]);
  }
  write_text(artifact(config, "-sweep.json"), m.dump(2) + "\n");
  return code;
}

int cmd_check(const RunConfig& config, std::ostream& out) {
  CheckContext ctx{config.geometry(), embedding_of(config), config.seed};
  const auto results = run_suite(config.suite, ctx);
  json m = manifest_head(config, "check");
  m["checks"] = json::array();
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << '/' << r.name << " value=" << short_number(r.value)
        << " tol=" << short_number(r.tolerance);
    if (!r.detail.empty()) out << " (" << r.detail << ')';
    out << '\n';
    m["checks"].push_back({{"suite", r.suite},
                           {"name", r.name},
                           {"value", r.value},
                           {"tolerance", r.tolerance},
                           {"passed", r.passed},
                           {"detail", r.detail}});
    all = all && r.passed;
  }
  m["passed"] = all;
  write_text(artifact(config, "-check.json"), m.dump(2) + "\n");
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_extremum(const RunConfig& config, std::ostream& out) {
  const GeometrySpec spec = config.geometry();
  const Point q0 = config.initial_q();
  const double span = config.integrator.span;
  json m = manifest_head(config, "extremum");

  Point q1;
  std::optional<Trajectory> reference;
  if (config.q_end) {
    if (config.q_end->size() != spec.dim()) throw ConfigError("'q_end' has the wrong dimension");
    q1 = *config.q_end;
  } else {
    reference = integrate(equation(config, spec), {q0, config.initial_v(), 0.0}, config.integrator);
    if (!reference->ok()) {
      out << config.name << ": reference trajectory " << to_string(reference->status) << '\n';
      return kExitDiverged;
    }
    q1 = reference->q.back();
  }

  const DiscretePath chord = DiscretePath::chord(q0, q1, config.segments, span);
  const ExtendedSolution sol = stationary_point_solve(spec, ExtendedPath::from_path(chord), config.solver);
  m["report"] = to_json(sol.report);
  if (reference) {
    const DiscretePath sampled = DiscretePath::from_trajectory(*reference, config.segments);
    double err = 0.0;
    for (std::size_t k = 0; k < sampled.nodes.size(); ++k)
      err = std::max(err, (sampled.nodes[k] - sol.path.q.nodes[k]).norm());
    m["reference_deviation"] = err;
  }
  const bool ok = sol.report.converged && sol.report.autoparallel_residual < config.residual_threshold;
  m["accepted"] = ok;
  const std::string csv = artifact(config, "-path.csv");
  write_text(csv, extended_path_csv(sol.path, config_hash(config)));
  m["csv"] = csv;
  write_text(artifact(config, "-extremum.json"), m.dump(2) + "\n");

  out << config.name << ": " << (sol.report.converged ? "converged" : "not converged") << " after "
      << sol.report.iterations << " iterations, gradient " << short_number(sol.report.gradient_norm)
      << ", autoparallel residual " << short_number(sol.report.autoparallel_residual) << ", |y| "
      << short_number(sol.report.y_norm) << '\n';
  return ok ? kExitOk : kExitNotConverged;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  const GeometrySpec spec = config.geometry();
  const LagrangianField L = kinetic_lagrangian(spec);
  const Trajectory traj = integrate(equation(config, spec), {config.initial_q(), config.initial_v(), 0.0},
                                    config.integrator);
  if (!traj.ok() || traj.size() < 5) {
    out << config.name << ": trajectory " << to_string(traj.status) << '\n';
    return kExitDiverged;
  }
  std::vector<SymmetryField> syms = preset_symmetries(spec, L);
  if (spec.name() == "constant-torsion-2d") {
    Vec gamma(2), e1(2), e2(2);
    gamma << spec.params().at("gamma1"), spec.params().at("gamma2");
    e1 << 1, 0;
    e2 << 0, 1;
    syms.push_back(torsion_symmetry_2d(gamma, e1));
    syms.push_back(torsion_symmetry_2d(gamma, e2));
    syms[syms.size() - 2].name = "I1";
    syms.back().name = "I2";
  }
  const auto emb = embedding_of(config);
  if (emb && emb->teleparallel && emb->field.n == emb->field.d) {
    for (int i = 0; i < emb->field.n; ++i) {
      SymmetryField s = teleparallel_symmetry(emb->field, Vec::Unit(emb->field.n, i));
      s.name = "frame-I" + std::to_string(i + 1);
      syms.push_back(s);
    }
  }
  const auto reports = conservation_report(spec, L, syms, traj);
  json m = manifest_head(config, "report");
  m["charges"] = json::array();
  std::vector<std::string> names;
  std::vector<SeriesResult> series;
  for (std::size_t i = 0; i < syms.size(); ++i) {
    m["charges"].push_back(to_json(reports[i]));
    names.push_back(syms[i].name);
    series.push_back(charge_series(L, syms[i], traj));
    out << reports[i].name << " (" << reports[i].law << "): max drift " << short_number(reports[i].max_drift)
        << ", rate residual " << short_number(reports[i].rate_residual) << ", symmetry defect "
        << short_number(reports[i].symmetry_defect) << '\n';
  }
  const std::string csv = artifact(config, "-charges.csv");
  write_text(csv, charge_csv(names, series, config_hash(config)));
  m["csv"] = csv;
  write_text(artifact(config, "-conservation.json"), m.dump(2) + "\n");
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamics on manifolds with torsion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CliFlags flags;
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> list_values;
  std::string gamma;

  struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
    bool list;
  };
  const std::vector<FlagSpec> table{
      {"--preset", "preset", "geometry preset", false},
      {"--embedding", "embedding", "embedding preset", false},
      {"--kind", "kind", "autoparallel, geodesic or modified-el", false},
      {"--method", "method", "rk4 or rk45", false},
      {"--step", "step", "rk4 step (initial step for rk45)", false},
      {"--span", "span", "parameter span", false},
      {"--rel-tol", "rel_tol", "rk45 relative tolerance", false},
      {"--abs-tol", "abs_tol", "rk45 absolute tolerance", false},
      {"--max-steps", "max_steps", "step limit", false},
      {"--suite", "suite", "check suite", false},
      {"--segments", "segments", "extremum segments N", false},
      {"--max-iterations", "max_iterations", "Newton iteration limit", false},
      {"--tolerance", "tolerance", "gradient tolerance", false},
      {"--residual-threshold", "residual_threshold", "accepted autoparallel residual", false},
      {"--out", "output_dir", "output directory", false},
      {"--name", "name", "artifact file stem", false},
      {"--seed", "seed", "random seed", false},
      {"--jobs", "jobs", "parallel sweep runs", false},
      {"--q0", "q0", "initial position, comma separated", true},
      {"--v0", "v0", "initial velocity, comma separated", true},
      {"--q-end", "q_end", "extremum end point, comma separated", true},
  };
  std::string sweep_param, sweep_values, radius, poly_a, dim;

  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"integrate", "integrate a trajectory and write CSV + manifest"},
           {"check", "run an invariant suite"},
           {"extremum", "solve the extended action for a stationary path"},
           {"report", "Noether charge conservation report"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file");
    for (const auto& f : table) sub->add_option(f.flag, f.list ? list_values[f.key] : values[f.key], f.help);
    sub->add_option("--param", flags.params, "preset parameter key=value (repeatable)");
    sub->add_option("--gamma", gamma, "gamma1,gamma2");
    sub->add_option("--R", radius, "sphere radius");
    sub->add_option("--a", poly_a, "poly-metric-2d / shear-2d parameter");
    sub->add_option("--d", dim, "flat dimension");
    sub->add_option("--sweep-param", sweep_param, "parameter to sweep");
    sub->add_option("--sweep-values", sweep_values, "comma separated sweep values");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }
  CLI::App* sub = nullptr;
  for (auto* s : subs)
    if (s->parsed()) sub = s;
  for (auto* s : subs)
    if (s->parsed() && s->get_subcommands().empty()) sub = s;

  try {
    json j = json::object();
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) throw ConfigError("cannot read config file " + flags.config);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + flags.config + ": " + e.what());
      }
      if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    for (const auto& f : table) {
      if (sub->get_option(f.flag)->count() == 0) continue;
      const std::string key = f.key;
      const std::string& raw = f.list ? list_values[key] : values[key];
      if (f.list) {
        j[key] = parse_list(raw, key);
      } else if (key == "preset" || key == "embedding" || key == "kind" || key == "method" || key == "suite" ||
                 key == "output_dir" || key == "name") {
        j[key] = raw;
      } else {
        const double x = parse_number(raw, key);
        if (key == "max_steps" || key == "segments" || key == "max_iterations" || key == "seed" || key == "jobs")
          j[key] = static_cast<long long>(x);
        else
          j[key] = x;
      }
    }
    // A preset flag replaces the config's choice of geometry source.
    if (sub->get_option("--preset")->count()) j.erase("embedding");
    if (sub->get_option("--embedding")->count()) j.erase("preset");
    if (!j.contains("params")) j["params"] = json::object();
    if (!gamma.empty()) {
      const auto g = parse_list(gamma, "gamma");
      if (g.size() != 2) throw ConfigError("--gamma needs two values");
      j["params"]["gamma1"] = g[0];
      j["params"]["gamma2"] = g[1];
    }
    if (!radius.empty()) j["params"]["R"] = parse_number(radius, "R");
    if (!poly_a.empty()) j["params"]["a"] = parse_number(poly_a, "a");
    if (!dim.empty()) j["params"]["d"] = parse_number(dim, "d");
    for (const auto& kv : flags.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
      j["params"][kv.substr(0, eq)] = parse_number(kv.substr(eq + 1), kv.substr(0, eq));
    }
    if (!sweep_param.empty() || !sweep_values.empty()) {
      if (sweep_param.empty() || sweep_values.empty()) throw ConfigError("sweeps need --sweep-param and --sweep-values");
      j["sweep"] = {{"param", sweep_param}, {"values", parse_list(sweep_values, "sweep values")}};
    }
    if (!j.contains("output_dir") || j["output_dir"] == "") {
      const char* env = std::getenv("CARTAN_OUTPUT_DIR");
      if (env && *env) j["output_dir"] = env;
    }

    const RunConfig config = config_from_json(j);
    const std::string cmd = sub->get_name();
    if (cmd == "integrate") return cmd_integrate(config, out);
    if (cmd == "check") return cmd_check(config, out);
    if (cmd == "extremum") return cmd_extremum(config, out);
    return cmd_report(config, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace cartan
