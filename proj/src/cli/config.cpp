#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resilient/cli.hpp"

namespace resilient::cli {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + "." + key + ": missing");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field + ": not finite");
  return d;
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, where + "." + key);
}

std::vector<double> vector_of(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix_of(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field + ": expected a non-empty array of rows");
  std::vector<double> entries;
  std::size_t cols = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row = vector_of(v[i], field + "[" + std::to_string(i) + "]");
    if (i == 0) cols = row.size();
    if (row.size() != cols || cols == 0)
      throw ConfigError(field + "[" + std::to_string(i) + "]: rows must be non-empty and equal length");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix::from_row_major(static_cast<Index>(v.size()), static_cast<Index>(cols), entries);
}

// Channel keys: sensors use alpha/beta, actuators gamma/delta.
AttackChannel channel_of(const json& v, const std::string& where, const char* bern,
                         const char* inj) {
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
  const std::string mean_key = std::string(bern) + "_mean";
  const std::string inj_mean = std::string(inj) + "_mean";
  const std::string inj_var = std::string(inj) + "_var";
  const std::string inj_dist = std::string(inj) + "_dist";

  AttackChannel ch;
  ch.bernoulli_mean = number(require(v, mean_key, where), where + "." + mean_key);
  if (ch.bernoulli_mean < 0.0 || ch.bernoulli_mean > 1.0)
    throw ConfigError(where + "." + mean_key + ": " + format_number(ch.bernoulli_mean) +
                      " is outside [0, 1]");
  ch.injection_mean = number(require(v, inj_mean, where), where + "." + inj_mean);
  ch.injection_variance = number_or(v, inj_var, 0.0, where);
  if (ch.injection_variance < 0.0) throw ConfigError(where + "." + inj_var + ": must be >= 0");
  if (const auto it = v.find(inj_dist); it != v.end()) {
    if (!it->is_string()) throw ConfigError(where + "." + inj_dist + ": expected a string");
    try {
      ch.injection_distribution = parse_distribution(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + "." + inj_dist + ": " + e.what());
    }
  }
  if (ch.injection_distribution == InjectionDistribution::constant && ch.injection_variance != 0.0)
    throw ConfigError(where + "." + inj_var + ": constant distribution requires zero variance");
  return ch;
}

std::vector<AttackChannel> channels_of(const json& root, const char* key, const char* bern,
                                       const char* inj) {
  const auto& arr = require(root, key, "config");
  if (!arr.is_array()) throw ConfigError(std::string(key) + ": expected an array");
  std::vector<AttackChannel> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(channel_of(arr[i], std::string(key) + "[" + std::to_string(i) + "]", bern, inj));
  return out;
}

void append_matrix(std::ostringstream& os, const Matrix& m) {
  os << "[";
  for (Index i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << format_number(m(i, j));
    os << "]";
  }
  os << "]";
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string digest_bytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

ConfigFile parse_config(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");

  ConfigFile cfg;
  cfg.digest = digest_bytes(text);
  const auto& plant = require(root, "plant", "config");
  cfg.system.plant.A = matrix_of(require(plant, "A", "plant"), "plant.A");
  cfg.system.plant.B = matrix_of(require(plant, "B", "plant"), "plant.B");
  cfg.system.plant.C = matrix_of(require(plant, "C", "plant"), "plant.C");
  cfg.system.sensor_channels = channels_of(root, "sensors", "alpha", "beta");
  cfg.system.actuator_channels = channels_of(root, "actuators", "gamma", "delta");
  if (const auto it = root.find("x0"); it != root.end()) cfg.x0 = vector_of(*it, "x0");
  if (const auto it = root.find("xhat0"); it != root.end()) cfg.xhat0 = vector_of(*it, "xhat0");

  if (const auto it = root.find("solver"); it != root.end()) {
    const json& s = *it;
    if (!s.is_object()) throw ConfigError("solver: expected an object");
    auto& ns = cfg.settings;
    ns.eps_strict = number_or(s, "eps_strict", ns.eps_strict, "solver");
    ns.duality_tol = number_or(s, "duality_tol", ns.duality_tol, "solver");
    ns.variable_bound = number_or(s, "variable_bound", ns.variable_bound, "solver");
    ns.stability_margin = number_or(s, "stability_margin", ns.stability_margin, "solver");
    const double max_iter = number_or(s, "max_iter", ns.max_iter, "solver");
    const double max_stall = number_or(s, "max_stall", ns.max_stall, "solver");
    if (max_iter < 1 || max_iter != std::floor(max_iter))
      throw ConfigError("solver.max_iter: expected a positive integer");
    if (max_stall < 1 || max_stall != std::floor(max_stall))
      throw ConfigError("solver.max_stall: expected a positive integer");
    ns.max_iter = static_cast<int>(max_iter);
    ns.max_stall = static_cast<int>(max_stall);
    if (ns.eps_strict <= 0.0) throw ConfigError("solver.eps_strict: must be > 0");
    if (ns.duality_tol <= 0.0) throw ConfigError("solver.duality_tol: must be > 0");
    if (ns.variable_bound <= 0.0) throw ConfigError("solver.variable_bound: must be > 0");
  }

  try {
    cfg.system = validate(cfg.system, cfg.settings);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  const auto n = static_cast<std::size_t>(cfg.system.plant.states());
  if (cfg.x0 && cfg.x0->size() != n)
    throw ConfigError("x0: expected " + std::to_string(n) + " entries");
  if (cfg.xhat0 && cfg.xhat0->size() != n)
    throw ConfigError("xhat0: expected " + std::to_string(n) + " entries");
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const LinalgError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

GainsFile parse_gains(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ConfigError("gains: expected a JSON object");
  GainsFile g;
  g.gains.K = matrix_of(require(root, "K", "gains"), "K");
  g.gains.L = matrix_of(require(root, "L", "gains"), "L");
  if (const auto it = root.find("Q1"); it != root.end()) g.Q1 = matrix_of(*it, "Q1");
  if (const auto it = root.find("Q2"); it != root.end()) g.Q2 = matrix_of(*it, "Q2");
  if (const auto it = root.find("lmi_margin"); it != root.end() && !it->is_null())
    g.lmi_margin = number(*it, "lmi_margin");
  if (const auto it = root.find("oracle_rho"); it != root.end() && !it->is_null())
    g.oracle_rho = number(*it, "oracle_rho");
  return g;
}

GainsFile load_gains(const std::filesystem::path& path) {
  try {
    return parse_gains(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_gains(const GainsFile& g) {
  std::ostringstream os;
  os << "{\n  \"K\": ";
  append_matrix(os, g.gains.K);
  os << ",\n  \"L\": ";
  append_matrix(os, g.gains.L);
  if (g.Q1) {
    os << ",\n  \"Q1\": ";
    append_matrix(os, *g.Q1);
  }
  if (g.Q2) {
    os << ",\n  \"Q2\": ";
    append_matrix(os, *g.Q2);
  }
  if (g.lmi_margin) os << ",\n  \"lmi_margin\": " << format_number(*g.lmi_margin);
  if (g.oracle_rho) os << ",\n  \"oracle_rho\": " << format_number(*g.oracle_rho);
  os << "\n}\n";
  return os.str();
}

}  // namespace resilient::cli
