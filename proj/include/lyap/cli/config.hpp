#pragma once

// Run configuration: a JSON document whose keys are checked against the
// subcommand's key table, with per-key flag overrides. Unknown keys and
// type mismatches raise BadConfig.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../matrix.hpp"

namespace lyap::cli {

using Json = nlohmann::json;

struct KeySpec {
  std::string key;
  Json default_value;  // null: optional, type checked when read
  std::string help;
};

inline bool type_compatible(const Json& def, const Json& value) {
  if (value.is_null()) return def.is_null();
  if (def.is_null()) return true;  // optional: checked when read
  if (def.is_number()) return value.is_number();
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_array()) return value.is_array();
  if (def.is_object()) return value.is_object();
  return false;
}

/// Validated parameters of one run.
class Params {
 public:
  Params() = default;
  explicit Params(Json values) : values_(std::move(values)) {}

  const Json& json() const { return values_; }
  const Json& raw(const std::string& key) const {
    const auto it = values_.find(key);
    require(it != values_.end(), ErrorKind::BadConfig, "missing key '" + key + "'");
    return *it;
  }
  bool has(const std::string& key) const { return !raw(key).is_null(); }

  double number(const std::string& key) const {
    const auto& v = raw(key);
    require(v.is_number(), ErrorKind::BadConfig, "'" + key + "' must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::size_t count(const std::string& key) const {
    const auto& v = raw(key);
    require(v.is_number_integer() && v.get<long long>() >= 0, ErrorKind::BadConfig,
            "'" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::string text(const std::string& key) const {
    const auto& v = raw(key);
    require(v.is_string(), ErrorKind::BadConfig, "'" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& x : raw(key)) {
      require(x.is_number(), ErrorKind::BadConfig, "'" + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  Json values_;
};

struct RunConfig {
  std::string command;
  Params params;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::optional<std::string> out;

  /// Echoed into the report header: parameters, seed and format.
  Json echo() const {
    Json j = params.json();
    j["seed"] = seed;
    return j;
  }
};

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::BadConfig, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::BadConfig, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

/// A flag value is read as JSON when it parses (numbers, arrays, booleans,
/// null), otherwise as a plain string.
inline Json parse_flag_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);
  }
}

/// Merges defaults, the config document and flag overrides, in that order.
inline RunConfig resolve(const std::string& command, const std::vector<KeySpec>& keys,
                         const std::optional<Json>& document,
                         const std::map<std::string, std::string>& flags,
                         std::optional<std::uint64_t> seed_flag,
                         std::optional<std::string> format_flag) {
  RunConfig rc;
  rc.command = command;
  Json values = Json::object();
  for (const auto& k : keys) values[k.key] = k.default_value;
  auto find_spec = [&](const std::string& key) -> const KeySpec* {
    for (const auto& k : keys)
      if (k.key == key) return &k;
    return nullptr;
  };
  auto assign = [&](const std::string& key, const Json& value, const std::string& origin) {
    const auto* spec = find_spec(key);
    require(spec != nullptr, ErrorKind::BadConfig,
            "unknown key '" + key + "' for command '" + command + "' (" + origin + ")");
    require(type_compatible(spec->default_value, value), ErrorKind::BadConfig,
            "key '" + key + "' has the wrong type (" + origin + ")");
    values[key] = value;
  };

  if (document) {
    require(document->is_object(), ErrorKind::BadConfig, "config must be a JSON object");
    for (const auto& [key, value] : document->items()) {
      if (key == "command") {
        require(value.is_string() && value.get<std::string>() == command, ErrorKind::BadConfig,
                "config is for command " + value.dump() + ", not '" + command + "'");
      } else if (key == "seed") {
        require(value.is_number_unsigned(), ErrorKind::BadConfig, "seed must be an unsigned integer");
        rc.seed = value.get<std::uint64_t>();
      } else if (key == "format") {
        require(value.is_string(), ErrorKind::BadConfig, "format must be a string");
        rc.format = value.get<std::string>();
      } else {
        assign(key, value, "config");
      }
    }
  }
  for (const auto& [key, text] : flags) assign(key, parse_flag_value(text), "flag");
  if (seed_flag) rc.seed = *seed_flag;
  if (format_flag) rc.format = *format_flag;
  require(rc.format == "csv" || rc.format == "json", ErrorKind::BadConfig,
          "format must be csv or json");
  rc.params = Params(std::move(values));
  return rc;
}

// ---------------------------------------------------------------------------
// Structured values.

inline RealSquareMatrix parse_matrix(const Json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::BadConfig, "matrix must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) {
    require(row.is_array(), ErrorKind::BadConfig, "matrix rows must be arrays");
    std::vector<double> r;
    for (const auto& x : row) {
      require(x.is_number(), ErrorKind::BadConfig, "matrix entries must be numbers");
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  try {
    return RealSquareMatrix::from_rows(rows);
  } catch (const Error& e) {
    fail(ErrorKind::BadConfig, e.what());
  }
}

inline std::vector<RealSquareMatrix> parse_matrices(const Json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::BadConfig, "matrices must be a nonempty array");
  std::vector<RealSquareMatrix> out;
  for (const auto& m : j) out.push_back(parse_matrix(m));
  return out;
}

namespace detail {

inline void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorKind::BadConfig, "unknown key '" + key + "' in " + what);
  }
}

inline double num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number(), ErrorKind::BadConfig, std::string(key) + " must be a number");
  return j[key].get<double>();
}

inline std::optional<double> opt_num(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return num(j, key, 0.0);
}

}  // namespace detail

/// {"kind": "bernoulli" | "markov" | "rotation" | "skew_shift" | "doubling" | "explicit", ...}
inline DynSystem parse_sampler(const Json& j, std::uint64_t seed) {
  require(j.is_object() && j.contains("kind") && j["kind"].is_string(), ErrorKind::BadConfig,
          "sampler needs a string 'kind'");
  const auto kind = j["kind"].get<std::string>();
  DynSystem sys;
  sys.seed = seed;
  if (kind == "bernoulli") {
    detail::only_keys(j, {"kind", "p"}, "bernoulli sampler");
    sys.kind = Bernoulli{detail::num(j, "p", 0.5)};
  } else if (kind == "markov") {
    if (j.contains("transition")) {
      detail::only_keys(j, {"kind", "transition", "initial"}, "markov sampler");
      Markov m;
      try {
        m.transition = j["transition"].get<std::vector<std::vector<double>>>();
        if (j.contains("initial")) {
          m.initial = j["initial"].get<std::vector<double>>();
        } else {
          m.initial = stationary_distribution(m);
        }
      } catch (const Json::exception& e) {
        fail(ErrorKind::BadConfig, std::string("markov sampler: ") + e.what());
      }
      sys.kind = std::move(m);
    } else {
      detail::only_keys(j, {"kind", "p", "rho"}, "markov sampler");
      sys.kind = markov_with_correlation(detail::num(j, "p", 0.5), detail::num(j, "rho", 0.0));
    }
  } else if (kind == "rotation") {
    detail::only_keys(j, {"kind", "alpha", "threshold", "x0"}, "rotation sampler");
    sys.kind = Rotation{detail::num(j, "alpha", 0.6180339887498949), detail::num(j, "threshold", 0.5),
                        detail::opt_num(j, "x0")};
  } else if (kind == "skew_shift") {
    detail::only_keys(j, {"kind", "alpha", "beta", "threshold", "x0"}, "skew shift sampler");
    sys.kind = SkewShift{detail::num(j, "alpha", 0.6180339887498949), detail::opt_num(j, "beta"),
                         detail::num(j, "threshold", 0.5), detail::opt_num(j, "x0")};
  } else if (kind == "doubling") {
    detail::only_keys(j, {"kind", "threshold"}, "doubling sampler");
    sys.kind = Doubling{detail::num(j, "threshold", 0.5)};
  } else if (kind == "explicit") {
    detail::only_keys(j, {"kind", "symbols"}, "explicit sampler");
    require(j.contains("symbols") && j["symbols"].is_string(), ErrorKind::BadConfig,
            "explicit sampler needs a 'symbols' string");
    sys.kind = Explicit{parse_symbols(j["symbols"].get<std::string>())};
  } else {
    fail(ErrorKind::BadConfig, "unknown sampler kind '" + kind + "'");
  }
  try {
    validate(sys);
  } catch (const Error& e) {
    fail(ErrorKind::BadConfig, e.what());
  }
  return sys;
}

}  // namespace lyap::cli
