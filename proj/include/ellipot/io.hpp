#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ellipot/errors.hpp"
#include "ellipot/function_spaces.hpp"
#include "ellipot/grid.hpp"
#include "ellipot/harness.hpp"
#include "ellipot/potentials.hpp"
#include "ellipot/pucci.hpp"
#include "ellipot/report.hpp"

namespace ellipot {

using ordered_json = nlohmann::ordered_json;

/// Shortest round-trip decimal form, identical across runs.
inline std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// -------------------------------------------------------------------------
// fields: raw little-endian float64 payload next to a JSON sidecar

inline void write_field(const std::filesystem::path& base, const GridField& field,
                        const std::string& kind) {
  const Grid& g = field.grid();
  ordered_json side;
  side["schema"] = "ellipot-field";
  side["kind"] = kind;
  side["dim"] = g.dim();
  side["components"] = field.components();
  ordered_json cells = ordered_json::array(), lo = ordered_json::array(), hi = ordered_json::array();
  for (int d = 0; d < g.dim(); ++d) {
    cells.push_back(g.cells(d));
    lo.push_back(g.lo(d));
    hi.push_back(g.hi(d));
  }
  side["cells"] = cells;
  side["lo"] = lo;
  side["hi"] = hi;
  side["encoding"] = "float64-le";
  write_text(base.string() + ".json", side.dump(2) + "\n");

  std::ofstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw DomainError("cannot open " + base.string() + ".bin for writing");
  static_assert(sizeof(double) == 8);
  bin.write(reinterpret_cast<const char*>(field.raw().data()),
            static_cast<std::streamsize>(field.raw().size() * sizeof(double)));
}

struct LoadedField {
  GridField field{Grid::cube(2, 0.0, 1.0, 8), 1};
  std::string kind;
};

inline LoadedField read_field(const std::filesystem::path& base) {
  ordered_json side;
  try {
    side = ordered_json::parse(read_text(base.string() + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad field sidecar: " + std::string(e.what()));
  }
  if (side.value("schema", "") != "ellipot-field") throw ParseError("not a field sidecar");
  const int dim = side.at("dim").get<int>();
  std::vector<double> lo = side.at("lo").get<std::vector<double>>();
  std::vector<double> hi = side.at("hi").get<std::vector<double>>();
  std::vector<int> cells = side.at("cells").get<std::vector<int>>();
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim ||
      static_cast<int>(cells.size()) != dim)
    throw ParseError("field sidecar extents disagree with its dimension");
  std::array<double, kMaxDim> vlo{}, vhi{};
  std::array<int, kMaxDim> nc{};
  for (int d = 0; d < dim; ++d) {
    vlo[static_cast<std::size_t>(d)] = lo[static_cast<std::size_t>(d)];
    vhi[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)];
    nc[static_cast<std::size_t>(d)] = cells[static_cast<std::size_t>(d)];
  }
  LoadedField out{GridField(Grid::box(dim, vlo, vhi, nc), side.at("components").get<int>()),
                  side.value("kind", "")};
  std::ifstream bin(base.string() + ".bin", std::ios::binary);
  if (!bin) throw ParseError("missing field payload " + base.string() + ".bin");
  bin.read(reinterpret_cast<char*>(out.field.raw().data()),
           static_cast<std::streamsize>(out.field.raw().size() * sizeof(double)));
  if (static_cast<std::size_t>(bin.gcount()) != out.field.raw().size() * sizeof(double))
    throw ParseError("field payload truncated: " + base.string() + ".bin");
  return out;
}

inline void write_field_csv(const std::filesystem::path& path, const GridField& field) {
  const Grid& g = field.grid();
  std::string body;
  for (int d = 0; d < g.dim(); ++d) body += "x" + std::to_string(d + 1) + ",";
  for (int c = 0; c < field.components(); ++c) {
    body += "v" + std::to_string(c + 1);
    body += (c + 1 < field.components()) ? "," : "\n";
  }
  for (std::size_t f = 0; f < g.cell_count(); ++f) {
    const Vec p = g.center(f);
    for (int d = 0; d < g.dim(); ++d) body += format_double(p[d]) + ",";
    for (int c = 0; c < field.components(); ++c) {
      body += format_double(field.at(f, c));
      body += (c + 1 < field.components()) ? "," : "\n";
    }
  }
  write_text(path, body);
}

// -------------------------------------------------------------------------
// potential curves

inline void write_curve(const std::filesystem::path& base, const PotentialCurve& curve) {
  ordered_json head;
  head["schema"] = "ellipot-potential-curve";
  head["kind"] = curve.kind;
  ordered_json base_point = ordered_json::array();
  for (int d = 0; d < curve.base.n; ++d) base_point.push_back(curve.base[d]);
  head["base"] = base_point;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : curve.params) params[k] = v;
  head["params"] = params;
  head["value"] = curve.value();
  head["notes"] = curve.notes;
  write_text(base.string() + ".json", head.dump(2) + "\n");

  std::string body = "radius,value\n";
  for (std::size_t i = 0; i < curve.radii.size(); ++i)
    body += format_double(curve.radii[i]) + "," + format_double(curve.values[i]) + "\n";
  write_text(base.string() + ".csv", body);
}

// -------------------------------------------------------------------------
// reports

inline ordered_json check_to_json(const CheckRow& c) {
  ordered_json j;
  j["label"] = c.label;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  j["margin"] = c.margin;
  j["pass"] = c.pass;
  return j;
}

inline ordered_json report_to_json(const AuditReport& rep) {
  ordered_json j;
  j["schema"] = "ellipot-audit";
  j["name"] = rep.name;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : rep.params) params[k] = v;
  j["params"] = params;
  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks) checks.push_back(check_to_json(c));
  j["checks"] = checks;
  j["notes"] = rep.notes;
  j["verdict"] = rep.verdict();
  return j;
}

inline std::string checks_csv(const std::vector<CheckRow>& checks) {
  std::string body = "label,lhs,rhs,margin,pass\n";
  for (const auto& c : checks)
    body += c.label + "," + format_double(c.lhs) + "," + format_double(c.rhs) + "," +
            format_double(c.margin) + "," + (c.pass ? "1" : "0") + "\n";
  return body;
}

inline void write_report(const std::filesystem::path& base, const AuditReport& rep) {
  write_text(base.string() + ".json", report_to_json(rep).dump(2) + "\n");
  write_text(base.string() + ".csv", checks_csv(rep.checks));
}

inline ordered_json estimate_to_json(const EstimateAudit& audit) {
  ordered_json j;
  j["schema"] = "ellipot-estimate";
  j["estimate"] = audit.estimate;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : audit.params) params[k] = v;
  j["params"] = params;
  j["fitted-c"] = audit.fitted_c;
  ordered_json rows = ordered_json::array();
  for (const auto& r : audit.rows) {
    ordered_json row;
    row["label"] = r.label;
    row["lhs"] = r.lhs;
    ordered_json parts = ordered_json::object();
    for (const auto& [k, v] : r.parts) parts[k] = v;
    row["parts"] = parts;
    row["c-required"] = r.c_required;
    rows.push_back(row);
  }
  j["rows"] = rows;
  ordered_json checks = ordered_json::array();
  for (const auto& c : audit.checks) checks.push_back(check_to_json(c));
  j["checks"] = checks;
  j["notes"] = audit.notes;
  j["verdict"] = audit.passed() ? "pass" : "fail";
  return j;
}

inline void write_estimate(const std::filesystem::path& base, const EstimateAudit& audit) {
  write_text(base.string() + ".json", estimate_to_json(audit).dump(2) + "\n");
  std::string body = "label,lhs,rhs-sum,c-required\n";
  for (const auto& r : audit.rows)
    body += r.label + "," + format_double(r.lhs) + "," + format_double(r.parts_sum()) + "," +
            format_double(r.c_required) + "\n";
  write_text(base.string() + ".csv", body);
}

inline ordered_json norm_to_json(const NormReport& rep) {
  ordered_json j;
  j["schema"] = "ellipot-norm";
  j["space"] = rep.space;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : rep.params) params[k] = v;
  j["params"] = params;
  j["value"] = rep.value;
  j["infinite"] = rep.infinite;
  if (rep.tail_exponent) j["tail-exponent"] = *rep.tail_exponent;
  if (rep.attaining) {
    ordered_json ball;
    ordered_json center = ordered_json::array();
    for (int d = 0; d < rep.attaining->center.n; ++d) center.push_back(rep.attaining->center[d]);
    ball["center"] = center;
    ball["radius"] = rep.attaining->radius;
    j["attaining-ball"] = ball;
  }
  j["notes"] = rep.notes;
  return j;
}

inline ordered_json smallness_to_json(const SmallnessReport& rep) {
  ordered_json j;
  j["schema"] = "ellipot-smallness";
  j["radii"] = rep.radii;
  j["values"] = rep.m_values;
  j["classification"] = rep.classification;
  j["notes"] = rep.notes;
  return j;
}

inline ordered_json decay_to_json(const DecayScan& scan) {
  ordered_json j;
  j["schema"] = "ellipot-decay-scan";
  j["sigmas"] = scan.sigmas;
  j["fractions"] = scan.fractions;
  j["best-sigma"] = scan.best_sigma;
  j["centers-used"] = scan.centers_used;
  j["centers-skipped"] = scan.centers_skipped;
  j["notes"] = scan.notes;
  return j;
}

inline ordered_json modulus_to_json(const CoefficientModulus& mod) {
  ordered_json j;
  j["schema"] = "ellipot-coefficient-modulus";
  j["radii"] = mod.radii;
  j["omega"] = mod.omega;
  j["notes"] = mod.notes;
  return j;
}

}  // namespace ellipot
