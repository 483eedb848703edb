#pragma once

// Run reports: ordered (name, value, provenance) rows rendered as CSV or
// JSON behind a header that echoes the version, command and configuration.
// Rendering is byte-for-byte deterministic.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "../bound.hpp"
#include "../errors.hpp"

namespace lyap::cli {

/// Provenance labels. The CSV column order is name,value,provenance.
namespace prov {
inline constexpr const char* kInput = "input";
inline constexpr const char* kCertified = "certified";
inline constexpr const char* kMeasured = "measured";
inline constexpr const char* kMc = "mc";
inline constexpr const char* kFormula = "formula";
inline constexpr const char* kConditional = "conditional";
inline constexpr const char* kVerdict = "verdict";
}  // namespace prov

struct Row {
  std::string name;
  double value = 0.0;
  std::string provenance;
};

struct Report {
  std::string command;
  nlohmann::json config;
  std::vector<Row> rows;
  bool pass = true;

  void add(std::string name, double value, const char* provenance) {
    rows.push_back({std::move(name), value, provenance});
  }

  /// Adds the bound value and one row per term, named prefix.term.
  void add_bound(const std::string& prefix, const CertifiedBound& b) {
    const char* p = b.conditional ? prov::kConditional : prov::kCertified;
    add(prefix, b.value, p);
    for (const auto& t : b.terms) add(prefix + "." + t.name, t.value, p);
  }

  /// Records a gating check; a false check fails the run.
  void check(const std::string& name, bool ok) {
    add(name, ok ? 1.0 : 0.0, prov::kVerdict);
    pass = pass && ok;
  }
};

inline std::string format_double(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string render_csv(const Report& r, const std::string& version) {
  std::string out = "# lyap " + version + "\n# command " + r.command + "\n# config " +
                    r.config.dump() + "\nname,value,provenance\n";
  for (const auto& row : r.rows)
    out += row.name + "," + format_double(row.value) + "," + row.provenance + "\n";
  out += "pass," + std::string(r.pass ? "1" : "0") + "," + prov::kVerdict + "\n";
  return out;
}

inline std::string render_json(const Report& r, const std::string& version) {
  nlohmann::ordered_json j;
  j["lyap"] = version;
  j["command"] = r.command;
  j["config"] = r.config;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["name"] = row.name;
    if (std::isfinite(row.value)) {
      o["value"] = row.value == 0.0 ? 0.0 : row.value;
    } else {
      o["value"] = format_double(row.value);
    }
    o["provenance"] = row.provenance;
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  j["pass"] = r.pass;
  return j.dump(2) + "\n";
}

inline std::string render(const Report& r, const std::string& format, const std::string& version) {
  if (format == "csv") return render_csv(r, version);
  if (format == "json") return render_json(r, version);
  fail(ErrorKind::BadConfig, "unknown output format '" + format + "'");
}

}  // namespace lyap::cli
