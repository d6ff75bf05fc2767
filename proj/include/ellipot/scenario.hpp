#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellipot/expression.hpp"
#include "ellipot/harness.hpp"
#include "ellipot/io.hpp"
#include "ellipot/solver.hpp"

namespace ellipot {

/// One requested audit inside a scenario document: a kind plus its numeric
/// and textual parameters.
struct AuditRequest {
  std::string kind;
  std::map<std::string, double> params;
  std::map<std::string, std::string> sparams;

  double num(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError("audit '" + kind + "' is missing parameter " + key);
    return it->second;
  }
  double num_or(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    auto it = sparams.find(key);
    return it == sparams.end() ? fallback : it->second;
  }
};

/// Operator description: a form plus expression-valued coefficient matrices.
struct ScenarioOperator {
  std::string form;  // trace | bellman | isaacs | pucci-plus | pucci-minus
  double lambda = 1.0, Lambda = 1.0;
  std::vector<std::vector<std::vector<std::string>>> members;   // trace: one, bellman: many
  std::vector<std::vector<std::vector<std::vector<std::string>>>> families;  // isaacs
};

/// A complete scenario document: geometry, a grid ladder, either an operator
/// problem (rhs + boundary, solved per grid) or a standalone field, and the
/// audits to run on the results.
struct Scenario {
  std::string name, description;
  std::uint64_t seed = 1;
  int dim = 2;
  std::vector<double> lo, hi;
  std::vector<int> grids;
  std::optional<ScenarioOperator> op;
  std::string rhs, boundary;  // solve path
  std::string field;          // field-only path
  std::string exact;          // optional closed form for convergence rates
  double tol = 1e-10;
  int max_policy_iterations = 200;
  long max_sweeps = 200000;
  std::vector<AuditRequest> audits;
};

inline const std::vector<std::string>& known_audit_kinds() {
  static const std::vector<std::string> kinds = {
      "norm",           "potential-curve",    "potential-chain", "gradient-potential",
      "vmo-decay",      "continuity-modulus", "excess-decay",    "bmo-vmo",
      "w1q",            "mapping",            "coefficient-modulus", "ellipticity",
      "oscillation",
  };
  return kinds;
}

// -------------------------------------------------------------------------
// parsing and validation (everything throws ParseError before any output)

namespace detail {

inline std::vector<std::vector<std::string>> parse_matrix(const ordered_json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ParseError("coefficient matrix must have one row per dimension");
  std::vector<std::vector<std::string>> m;
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ParseError("coefficient matrix row has the wrong length");
    std::vector<std::string> r;
    for (const auto& e : row) {
      if (e.is_string()) r.push_back(e.get<std::string>());
      else if (e.is_number()) r.push_back(format_double(e.get<double>()));
      else throw ParseError("coefficient entries must be numbers or expressions");
    }
    m.push_back(r);
  }
  return m;
}

inline void validate_matrix(const std::vector<std::vector<std::string>>& m, int dim) {
  std::vector<std::vector<Expression>> ex;
  for (const auto& row : m) {
    std::vector<Expression> er;
    for (const auto& e : row) er.push_back(Expression::parse(e));
    ex.push_back(std::move(er));
  }
  // symmetry probed at a handful of points; asymmetric data is a doc error
  for (int k = 0; k < 5; ++k) {
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = 0.17 * (k + 1) * (d + 1) - 0.3;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j)
        if (std::fabs(ex[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(p) -
                      ex[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].eval(p)) > 1e-12)
          throw ParseError("coefficient matrix is not symmetric");
  }
}

}  // namespace detail

inline Scenario scenario_from_json(const ordered_json& doc) {
  Scenario sc;
  try {
    if (doc.value("schema", "") != "ellipot-scenario")
      throw ParseError("document schema must be ellipot-scenario");
    sc.name = doc.at("name").get<std::string>();
    sc.description = doc.value("description", "");
    sc.seed = doc.value("seed", std::uint64_t{1});
    sc.dim = doc.at("dim").get<int>();
    if (sc.dim < 2 || sc.dim > kMaxDim) throw ParseError("dimension must lie in [2, 4]");
    sc.lo = doc.at("lo").get<std::vector<double>>();
    sc.hi = doc.at("hi").get<std::vector<double>>();
    if (static_cast<int>(sc.lo.size()) != sc.dim || static_cast<int>(sc.hi.size()) != sc.dim)
      throw ParseError("lo/hi must list one bound per dimension");
    for (int d = 0; d < sc.dim; ++d)
      if (!(sc.hi[static_cast<std::size_t>(d)] > sc.lo[static_cast<std::size_t>(d)]))
        throw ParseError("box bounds must satisfy lo < hi");
    sc.grids = doc.at("grids").get<std::vector<int>>();
    if (sc.grids.empty()) throw ParseError("grid ladder is empty");
    for (std::size_t i = 0; i + 1 < sc.grids.size(); ++i)
      if (sc.grids[i] >= sc.grids[i + 1]) throw ParseError("grid ladder must strictly refine");

    const bool has_op = doc.contains("operator");
    const bool has_field = doc.contains("field");
    if (has_op == has_field)
      throw ParseError("scenario needs exactly one of: operator (solve) or field (measure)");

    if (has_op) {
      const auto& jop = doc.at("operator");
      ScenarioOperator op;
      op.form = jop.at("form").get<std::string>();
      op.lambda = jop.value("lambda", 1.0);
      op.Lambda = jop.value("Lambda", op.lambda);
      if (!(op.lambda > 0.0 && op.Lambda >= op.lambda))
        throw ParseError("ellipticity constants need 0 < lambda <= Lambda");
      if (op.form == "trace") {
        op.members.push_back(detail::parse_matrix(jop.at("matrix"), sc.dim));
      } else if (op.form == "bellman") {
        for (const auto& m : jop.at("members")) op.members.push_back(detail::parse_matrix(m, sc.dim));
        if (op.members.empty()) throw ParseError("bellman operator needs members");
      } else if (op.form == "isaacs") {
        for (const auto& fam : jop.at("families")) {
          std::vector<std::vector<std::vector<std::string>>> family;
          for (const auto& m : fam) family.push_back(detail::parse_matrix(m, sc.dim));
          if (family.empty()) throw ParseError("isaacs family is empty");
          op.families.push_back(family);
        }
        if (op.families.empty()) throw ParseError("isaacs operator needs families");
      } else if (op.form != "pucci-plus" && op.form != "pucci-minus") {
        throw ParseError("unknown operator form '" + op.form + "'");
      }
      for (const auto& m : op.members) detail::validate_matrix(m, sc.dim);
      for (const auto& fam : op.families)
        for (const auto& m : fam) detail::validate_matrix(m, sc.dim);
      sc.op = op;
      sc.rhs = doc.at("rhs").get<std::string>();
      sc.boundary = doc.at("boundary").get<std::string>();
      Expression::parse(sc.rhs);
      Expression::parse(sc.boundary);
      for (int c : sc.grids)
        if (c < 32) throw ParseError("solve scenarios need at least 32 cells per axis");
    } else {
      sc.field = doc.at("field").get<std::string>();
      Expression::parse(sc.field);
      for (int c : sc.grids)
        if (c < 8) throw ParseError("grids need at least 8 cells per axis");
    }
    if (doc.contains("exact")) {
      sc.exact = doc.at("exact").get<std::string>();
      Expression::parse(sc.exact);
    }
    if (doc.contains("solve")) {
      const auto& js = doc.at("solve");
      sc.tol = js.value("tol", 1e-10);
      sc.max_policy_iterations = js.value("max-policy-iterations", 200);
      sc.max_sweeps = js.value("max-sweeps", 200000L);
    }
    if (doc.contains("audits")) {
      for (const auto& ja : doc.at("audits")) {
        AuditRequest req;
        req.kind = ja.at("kind").get<std::string>();
        const auto& kinds = known_audit_kinds();
        if (std::find(kinds.begin(), kinds.end(), req.kind) == kinds.end())
          throw ParseError("unknown audit kind '" + req.kind + "'");
        for (auto it = ja.begin(); it != ja.end(); ++it) {
          if (it.key() == "kind") continue;
          if (it.value().is_number()) req.params[it.key()] = it.value().get<double>();
          else if (it.value().is_string()) req.sparams[it.key()] = it.value().get<std::string>();
          else throw ParseError("audit parameters must be numbers or strings");
        }
        if (req.sparams.count("field")) Expression::parse(req.sparams.at("field"));
        sc.audits.push_back(req);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed scenario document: " + std::string(e.what()));
  }
  return sc;
}

inline ordered_json scenario_to_json(const Scenario& sc) {
  ordered_json j;
  j["schema"] = "ellipot-scenario";
  j["name"] = sc.name;
  j["description"] = sc.description;
  j["seed"] = sc.seed;
  j["dim"] = sc.dim;
  j["lo"] = sc.lo;
  j["hi"] = sc.hi;
  j["grids"] = sc.grids;
  if (sc.op) {
    ordered_json jop;
    jop["form"] = sc.op->form;
    jop["lambda"] = sc.op->lambda;
    jop["Lambda"] = sc.op->Lambda;
    auto matrix_json = [](const std::vector<std::vector<std::string>>& m) {
      ordered_json rows = ordered_json::array();
      for (const auto& r : m) rows.push_back(r);
      return rows;
    };
    if (sc.op->form == "trace") jop["matrix"] = matrix_json(sc.op->members.front());
    if (sc.op->form == "bellman") {
      ordered_json ms = ordered_json::array();
      for (const auto& m : sc.op->members) ms.push_back(matrix_json(m));
      jop["members"] = ms;
    }
    if (sc.op->form == "isaacs") {
      ordered_json fams = ordered_json::array();
      for (const auto& fam : sc.op->families) {
        ordered_json ms = ordered_json::array();
        for (const auto& m : fam) ms.push_back(matrix_json(m));
        fams.push_back(ms);
      }
      jop["families"] = fams;
    }
    j["operator"] = jop;
    j["rhs"] = sc.rhs;
    j["boundary"] = sc.boundary;
  } else {
    j["field"] = sc.field;
  }
  if (!sc.exact.empty()) j["exact"] = sc.exact;
  ordered_json js;
  js["tol"] = sc.tol;
  js["max-policy-iterations"] = sc.max_policy_iterations;
  js["max-sweeps"] = sc.max_sweeps;
  j["solve"] = js;
  ordered_json audits = ordered_json::array();
  for (const auto& a : sc.audits) {
    ordered_json ja;
    ja["kind"] = a.kind;
    for (const auto& [k, v] : a.params) ja[k] = v;
    for (const auto& [k, v] : a.sparams) ja[k] = v;
    audits.push_back(ja);
  }
  j["audits"] = audits;
  return j;
}

// -------------------------------------------------------------------------
// operator construction from a document

inline OperatorSpec operator_from(const ScenarioOperator& sop, int dim) {
  const EllipticityPair ell{sop.lambda, sop.Lambda};
  auto build_coeff = [&](const std::vector<std::vector<std::string>>& m) {
    bool constant = true;
    std::vector<std::vector<Expression>> ex;
    for (const auto& row : m) {
      std::vector<Expression> er;
      for (const auto& e : row) er.push_back(Expression::parse(e));
      ex.push_back(std::move(er));
    }
    // constant iff every entry agrees across probe points
    SymMatrix probe0 = SymMatrix::identity(dim);
    for (int k = 0; k < 4; ++k) {
      Vec p(dim);
      for (int d = 0; d < dim; ++d) p[d] = 0.23 * (k) * (d + 1) - 0.4;
      SymMatrix a = SymMatrix::identity(dim);
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
          a.at(i, j) = ex[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(p);
      if (k == 0) probe0 = a;
      else if ((a - probe0).frobenius_norm() > 1e-13) constant = false;
    }
    if (constant) return MatrixCoefficient::constant(probe0);
    auto exprs = std::make_shared<std::vector<std::vector<Expression>>>(std::move(ex));
    const int n = dim;
    return MatrixCoefficient::analytic(
        dim,
        [exprs, n](const Vec& x) {
          SymMatrix a = SymMatrix::identity(n);
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
              a.at(i, j) = (*exprs)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(x);
          return a;
        },
        "expression coefficients");
  };

  if (sop.form == "trace") return make_trace_linear(dim, build_coeff(sop.members.front()), ell);
  if (sop.form == "bellman") {
    std::vector<MatrixCoefficient> coeffs;
    for (const auto& m : sop.members) coeffs.push_back(build_coeff(m));
    return make_bellman(dim, std::move(coeffs), ell);
  }
  if (sop.form == "isaacs") {
    std::vector<std::vector<MatrixCoefficient>> fams;
    for (const auto& fam : sop.families) {
      std::vector<MatrixCoefficient> coeffs;
      for (const auto& m : fam) coeffs.push_back(build_coeff(m));
      fams.push_back(std::move(coeffs));
    }
    return make_isaacs(dim, std::move(fams), ell);
  }
  return make_pucci(dim, ell, sop.form == "pucci-plus");
}

// -------------------------------------------------------------------------
// running

struct RunOptions {
  std::filesystem::path out = "out";
  std::vector<int> grid_override;
  int jobs = 1;
  bool write_fields = true;
};

namespace detail {

struct RunContext {
  const Scenario& sc;
  const Grid& grid;
  const GridField* u = nullptr;
  const GridField* du = nullptr;
  const GridField* f = nullptr;  // rhs for solve scenarios, the field otherwise
  const OperatorSpec* op = nullptr;
  std::filesystem::path dir;
  int index = 0;
};

inline GridField tabulate_expr(const Grid& g, const std::string& text) {
  const Expression ex = Expression::parse(text);
  GridField out(g, 1);
  for (std::size_t i = 0; i < g.cell_count(); ++i) out.at(i) = ex.eval(g.center(i));
  return out;
}

inline Vec parse_point(const std::string& text, int dim) {
  Vec p(dim);
  std::size_t pos = 0;
  for (int d = 0; d < dim; ++d) {
    std::size_t used = 0;
    try {
      p[d] = std::stod(text.substr(pos), &used);
    } catch (const std::exception&) {
      throw ParseError("bad point '" + text + "'");
    }
    pos += used;
    if (d + 1 < dim) {
      if (pos >= text.size() || text[pos] != ',') throw ParseError("bad point '" + text + "'");
      ++pos;
    }
  }
  return p;
}

/// Deterministic sample points: stride-lattice centers inside the inner box
/// whose r-ball stays inside the grid, capped.
inline std::vector<Vec> sample_points(const Grid& g, double r, std::size_t cap) {
  std::vector<Vec> pts;
  for (const Vec& x : lattice_in(g, omega_prime(g), 4)) {
    bool fits = true;
    for (int d = 0; d < g.dim(); ++d)
      if (x[d] - r < g.lo(d) || x[d] + r > g.hi(d)) fits = false;
    if (fits) pts.push_back(x);
    if (pts.size() == cap) break;
  }
  if (pts.empty()) throw ResolutionError("no sample point supports radius " + format_double(r));
  return pts;
}

inline ordered_json run_audit(const AuditRequest& req, const RunContext& ctx) {
  const Grid& g = ctx.grid;
  ordered_json out;
  out["kind"] = req.kind;
  const std::string tag = req.kind + "-" + std::to_string(ctx.index);

  auto field_for = [&](const AuditRequest& r) -> GridField {
    if (r.sparams.count("field")) return tabulate_expr(g, r.sparams.at("field"));
    if (!ctx.f) throw ParseError("audit '" + r.kind + "' needs a field");
    return *ctx.f;
  };
  auto need_du = [&]() -> const GridField& {
    if (!ctx.du) throw ParseError("audit '" + req.kind + "' needs a solved gradient");
    return *ctx.du;
  };

  if (req.kind == "norm") {
    const GridField f = field_for(req);
    const std::string space = req.str_or("space", "lorentz");
    NormReport rep;
    if (space == "lorentz")
      rep = lorentz_functional(f, req.num("q"), req.num("gamma"), req.num_or("fit-tail", 0) > 0);
    else if (space == "marcinkiewicz")
      rep = marcinkiewicz_functional(f, req.num("q"));
    else if (space == "lorentz-n1")
      rep = lorentz_n1_functional(f, g.dim());
    else if (space == "morrey")
      rep = morrey_functional(f, req.num("q"), req.num("s"));
    else
      throw ParseError("unknown norm space '" + space + "'");
    write_text(ctx.dir / (tag + ".json"), norm_to_json(rep).dump(2) + "\n");
    out["space"] = rep.space;
    out["value"] = rep.value;
    if (rep.tail_exponent) out["tail-exponent"] = *rep.tail_exponent;
  } else if (req.kind == "potential-curve") {
    const GridField f = field_for(req);
    const Vec x = parse_point(req.str_or("x", "0,0"), g.dim());
    const double r = req.num("r");
    const std::string kind = req.str_or("potential", "modified");
    PotentialCurve curve;
    if (kind == "truncated") curve = truncated_riesz(f, x, r);
    else if (kind == "modified") curve = modified_riesz(f, x, r, req.num("p"));
    else if (kind == "wolff") curve = wolff_potential(f, x, r, req.num("beta"), req.num("pp1"));
    else throw ParseError("unknown potential kind '" + kind + "'");
    write_curve(ctx.dir / tag, curve);
    out["value"] = curve.value();
  } else if (req.kind == "potential-chain") {
    const GridField f = field_for(req);
    const double r = req.num("r");
    const auto xs = sample_points(g, r, static_cast<std::size_t>(req.num_or("samples", 3)));
    const AuditReport rep = potential_chain_audit(f, req.num("p"), xs, r);
    write_report(ctx.dir / tag, rep);
    out["verdict"] = rep.verdict();
  } else if (req.kind == "gradient-potential") {
    const double r = req.num("r");
    const auto xs = sample_points(g, r, static_cast<std::size_t>(req.num_or("samples", 5)));
    const EstimateAudit audit =
        gradient_potential_audit(need_du(), *ctx.f, req.num("p"), req.num("q"), xs, r);
    write_estimate(ctx.dir / tag, audit);
    out["fitted-c"] = audit.fitted_c;
    out["verdict"] = audit.passed() ? "pass" : "fail";
  } else if (req.kind == "vmo-decay") {
    const double r = req.num("r");
    const auto xs = sample_points(g, 2.0 * r, static_cast<std::size_t>(req.num_or("samples", 3)));
    const EstimateAudit audit =
        vmo_decay_audit(need_du(), *ctx.f, req.num("p"), req.num("q"), xs, r,
                        req.num_or("sigma", 1.0 / 3.0), static_cast<int>(req.num_or("depth", 3)));
    write_estimate(ctx.dir / tag, audit);
    out["fitted-c"] = audit.fitted_c;
    out["alpha"] = audit.params.at("alpha");
    out["verdict"] = audit.passed() ? "pass" : "fail";
  } else if (req.kind == "continuity-modulus") {
    const auto pts = lattice_in(g, omega_prime(g), 4);
    std::vector<std::pair<Vec, Vec>> pairs;
    const std::size_t want = static_cast<std::size_t>(req.num_or("pairs", 16));
    for (std::size_t i = 0; i + 1 < pts.size() && pairs.size() < want; i += 2)
      if ((pts[i] - pts[i + 1]).norm() >= 4.0 * g.h()) pairs.emplace_back(pts[i], pts[i + 1]);
    if (pairs.empty()) throw ResolutionError("no admissible continuity pair on this grid");
    const EstimateAudit audit =
        continuity_modulus_audit(need_du(), *ctx.f, req.num("p"), pairs,
                                 req.num_or("alpha", 1.0), req.num_or("delta", 0.5));
    write_estimate(ctx.dir / tag, audit);
    out["fitted-c"] = audit.fitted_c;
    out["pairs"] = pairs.size();
    out["verdict"] = audit.passed() ? "pass" : "fail";
  } else if (req.kind == "excess-decay") {
    std::vector<double> sigmas = {0.1, 0.15, 0.2, 0.25, 0.3};
    const DecayScan scan =
        excess_decay_audit(need_du(), req.num_or("q", g.dim() + 0.5), sigmas, req.num("r"));
    write_text(ctx.dir / (tag + ".json"), decay_to_json(scan).dump(2) + "\n");
    out["best-sigma"] = scan.best_sigma;
  } else if (req.kind == "bmo-vmo") {
    const GridField f = field_for(req);
    std::vector<Vec> extra;
    if (req.sparams.count("center")) extra.push_back(parse_point(req.sparams.at("center"), g.dim()));
    const SmallnessReport rep = bmo_vmo_criteria_audit(f, req.num("p"), req.num("r"), extra);
    write_text(ctx.dir / (tag + ".json"), smallness_to_json(rep).dump(2) + "\n");
    out["classification"] = rep.classification;
    out["top-value"] = rep.m_values.back();
  } else if (req.kind == "w1q") {
    if (!ctx.u) throw ParseError("audit 'w1q' needs a solved field");
    Vec center(g.dim());
    for (int d = 0; d < g.dim(); ++d) center[d] = 0.5 * (g.lo(d) + g.hi(d));
    const EstimateAudit audit =
        w1q_bound_audit(*ctx.u, need_du(), *ctx.f, req.num("p"), req.num("q"), center, req.num("r"));
    write_estimate(ctx.dir / tag, audit);
    out["fitted-c"] = audit.fitted_c;
  } else if (req.kind == "mapping") {
    const AuditReport rep = mapping_property_audit(*ctx.f, need_du(), req.num("p"), req.num("q"),
                                                   req.num("gamma"), req.num_or("s", 0.0),
                                                   req.num_or("theta", 0.0));
    write_report(ctx.dir / tag, rep);
    for (const auto& key : {"lorentz-ratio", "lorentz-target-q"})
      if (rep.params.count(key)) out[key] = rep.params.at(key);
  } else if (req.kind == "coefficient-modulus") {
    if (!ctx.op) throw ParseError("audit 'coefficient-modulus' needs an operator");
    const CoefficientModulus mod = coefficient_bmo_modulus(*ctx.op, g, req.num("r"), ctx.sc.seed);
    write_text(ctx.dir / (tag + ".json"), modulus_to_json(mod).dump(2) + "\n");
    out["top"] = mod.top();
  } else if (req.kind == "ellipticity") {
    if (!ctx.op) throw ParseError("audit 'ellipticity' needs an operator");
    std::vector<Vec> xs = sample_points(g, 0.0, 3);
    const AuditReport rep = ellipticity_audit(*ctx.op, xs, 16, ctx.sc.seed);
    write_report(ctx.dir / tag, rep);
    out["verdict"] = rep.verdict();
  } else if (req.kind == "oscillation") {
    const GridField f = field_for(req);
    std::vector<double> radii;
    for (double rho = 2.0 * g.h(); rho <= req.num("r") * (1.0 + 1e-12); rho *= 2.0)
      radii.push_back(rho);
    const OscillationTable table = oscillation_modulus(f, radii);
    ordered_json j;
    j["schema"] = "ellipot-oscillation";
    j["radii"] = table.radii;
    j["values"] = table.values;
    j["notes"] = table.notes;
    write_text(ctx.dir / (tag + ".json"), j.dump(2) + "\n");
    out["top"] = table.values.empty() ? 0.0 : table.values.back();
  }
  return out;
}

}  // namespace detail

/// Run a validated scenario over its grid ladder. Writes per-grid artifacts
/// and a summary document; returns the summary.
inline ordered_json run_scenario(const Scenario& sc, const RunOptions& opt) {
  std::vector<int> ladder = opt.grid_override.empty() ? sc.grids : opt.grid_override;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
    if (ladder[i] >= ladder[i + 1]) throw ParseError("grid ladder must strictly refine");
  const std::filesystem::path dir = opt.out / sc.name;
  std::filesystem::create_directories(dir);

  ordered_json summary;
  summary["schema"] = "ellipot-summary";
  summary["scenario"] = sc.name;
  summary["description"] = sc.description;
  summary["seed"] = sc.seed;
  summary["grids"] = ladder;
  ordered_json runs = ordered_json::array();

  std::vector<GridField> solutions;
  std::vector<Grid> grids;

  for (int cells : ladder) {
    std::array<double, kMaxDim> vlo{}, vhi{};
    std::array<int, kMaxDim> nc{};
    for (int d = 0; d < sc.dim; ++d) {
      vlo[static_cast<std::size_t>(d)] = sc.lo[static_cast<std::size_t>(d)];
      vhi[static_cast<std::size_t>(d)] = sc.hi[static_cast<std::size_t>(d)];
      nc[static_cast<std::size_t>(d)] = cells;
    }
    const Grid g = Grid::box(sc.dim, vlo, vhi, nc);
    const std::filesystem::path gdir = dir / ("g" + std::to_string(cells));
    std::filesystem::create_directories(gdir);

    ordered_json run;
    run["cells"] = cells;
    run["h"] = g.h();

    detail::RunContext ctx{sc, g, nullptr, nullptr, nullptr, nullptr, gdir, 0};

    std::optional<OperatorSpec> op;
    std::optional<GridField> u, du, f;
    if (sc.op) {
      op = operator_from(*sc.op, sc.dim);
      f = detail::tabulate_expr(g, sc.rhs);
      GridField bnd = detail::tabulate_expr(g, sc.boundary);
      Problem prob{*op, *f, bnd};
      SolveOptions sopt;
      sopt.tol = sc.tol;
      sopt.max_policy_iterations = sc.max_policy_iterations;
      sopt.max_sweeps = sc.max_sweeps;
      sopt.jobs = opt.jobs;
      SolveResult res = solve(prob, sopt);
      run["policy-iterations"] = res.policy_iterations;
      run["sweeps"] = res.sweeps;
      run["residual"] = res.residual;
      run["converged"] = res.converged;
      run["scheme"] = res.scheme;
      u = std::move(res.u);
      du = gradient(*u);
      if (opt.write_fields) {
        write_field(gdir / "u", *u, "solution");
        write_field(gdir / "du", *du, "gradient");
        write_field(gdir / "rhs", *f, "rhs");
      }
      ctx.op = &*op;
      ctx.u = &*u;
      ctx.du = &*du;
      ctx.f = &*f;
      if (!sc.exact.empty()) {
        const GridField ex = detail::tabulate_expr(g, sc.exact);
        double err = 0.0;
        for (std::size_t i = 0; i < g.cell_count(); ++i)
          err = std::max(err, std::fabs(u->at(i) - ex.at(i)));
        run["max-error"] = err;
      }
      solutions.push_back(*u);
      grids.push_back(g);
    } else {
      f = detail::tabulate_expr(g, sc.field);
      f->check_finite();
      ctx.f = &*f;
      if (opt.write_fields) write_field(gdir / "field", *f, "field");
    }

    ordered_json audits = ordered_json::array();
    for (std::size_t a = 0; a < sc.audits.size(); ++a) {
      ctx.index = static_cast<int>(a);
      audits.push_back(detail::run_audit(sc.audits[a], ctx));
    }
    run["audits"] = audits;
    runs.push_back(run);
  }

  // convergence rates against the declared closed form, when present
  if (!sc.exact.empty() && runs.size() >= 2) {
    ordered_json rates = ordered_json::array();
    for (std::size_t i = 1; i < runs.size(); ++i) {
      const double e0 = runs[i - 1].at("max-error").get<double>();
      const double e1 = runs[i].at("max-error").get<double>();
      rates.push_back(e1 > 0.0 ? std::log2(e0 / e1) : 0.0);
    }
    summary["convergence-rates"] = rates;
  }
  summary["runs"] = runs;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

// -------------------------------------------------------------------------
// builtin scenarios

inline std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> all;

  {
    Scenario sc;
    sc.name = "poisson-radial";
    sc.description = "identity trace operator with constant source; the radial paraboloid "
                     "is reproduced exactly and feeds the potential and decay audits";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128};
    ScenarioOperator op;
    op.form = "trace";
    op.lambda = 1.0;
    op.Lambda = 1.0;
    op.members = {{{"1", "0"}, {"0", "1"}}};
    sc.op = op;
    sc.rhs = "4";
    sc.boundary = "x^2 + y^2";
    sc.exact = "x^2 + y^2";
    sc.audits = {
        {"gradient-potential", {{"p", 1.5}, {"q", 2.5}, {"r", 0.5}}, {}},
        {"vmo-decay", {{"p", 1.5}, {"q", 2.5}, {"r", 0.25}, {"depth", 3}}, {}},
        {"w1q", {{"p", 1.5}, {"q", 2.5}, {"r", 0.9}}, {}},
    };
    all.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "bellman-manufactured";
    sc.description = "two-member maximum operator with the source manufactured from a "
                     "separable wave; checks second-order accuracy and the continuity audit";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128};
    ScenarioOperator op;
    op.form = "bellman";
    op.lambda = 1.0;
    op.Lambda = 2.0;
    op.members = {{{"1", "0"}, {"0", "1"}}, {{"2", "0"}, {"0", "1"}}};
    sc.op = op;
    // members give traces -2 s and -3 s with s = sin(x) cos(y); the max picks
    // the less negative branch
    sc.rhs = "max(-2 * sin(x) * cos(y), -3 * sin(x) * cos(y))";
    sc.boundary = "sin(x) * cos(y)";
    sc.exact = "sin(x) * cos(y)";
    sc.audits = {
        {"continuity-modulus", {{"p", 1.5}, {"alpha", 1.0}, {"delta", 0.5}, {"pairs", 8}}, {}},
        {"gradient-potential", {{"p", 1.5}, {"q", 2.5}, {"r", 0.5}}, {}},
    };
    all.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "borderline-lorentz-witness";
    sc.description = "inverse-distance profiles with logarithmic corrections on either side "
                     "of the borderline space; functionals and potential growth per grid";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128, 256};
    sc.field = "1 / (r * log(e / r))";
    sc.audits = {
        {"norm", {{"q", 2.0}, {"gamma", 1.0}}, {{"space", "lorentz"}}},
        {"norm", {{"q", 2.0}, {"gamma", 1.0}},
         {{"space", "lorentz"}, {"field", "1 / (r * log(e / r)^2)"}}},
        {"norm", {{"q", 2.0}}, {{"space", "marcinkiewicz"}, {"field", "1 / r"}}},
        {"potential-curve", {{"p", 1.5}, {"r", 0.5}}, {{"potential", "modified"}, {"x", "0,0"}}},
        {"potential-curve", {{"p", 1.5}, {"r", 0.5}},
         {{"potential", "modified"}, {"x", "0,0"}, {"field", "1 / (r * log(e / r)^2)"}}},
        {"potential-chain", {{"p", 1.5}, {"r", 0.4}, {"samples", 2}},
         {{"field", "1 / (r * log(e / r)^2)"}}},
    };
    all.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "bmo-witness";
    sc.description = "smallness ladders separating vanishing from merely bounded mean "
                     "oscillation: a constant source, an inverse-distance source, and zero";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128};
    sc.field = "1";
    sc.audits = {
        {"bmo-vmo", {{"p", 1.5}, {"r", 0.5}}, {}},
        {"bmo-vmo", {{"p", 1.5}, {"r", 0.5}}, {{"field", "1 / r"}, {"center", "0,0"}}},
        {"bmo-vmo", {{"p", 1.5}, {"r", 0.5}}, {{"field", "0"}}},
        {"oscillation", {{"r", 0.25}}, {}},
    };
    all.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "mapping-sweep";
    sc.description = "identity trace problem with a power-law source; functional values of "
                     "source and gradient on both sides of the claimed scale mappings";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128};
    ScenarioOperator op;
    op.form = "trace";
    op.lambda = 1.0;
    op.Lambda = 1.0;
    op.members = {{{"1", "0"}, {"0", "1"}}};
    sc.op = op;
    sc.rhs = "r^(-0.8)";
    sc.boundary = "0";
    sc.audits = {
        {"mapping", {{"p", 1.5}, {"q", 1.8}, {"gamma", 1.8}, {"s", 1.95}, {"theta", 1.9}}, {}},
        {"norm", {{"q", 1.8}, {"gamma", 1.8}}, {{"space", "lorentz"}}},
    };
    all.push_back(sc);
  }

  {
    Scenario sc;
    sc.name = "excess-decay-search";
    sc.description = "source-free identity trace problem with harmonic cubic data; scans "
                     "ball-ratio candidates for a one-third excess decay at most centers";
    sc.dim = 2;
    sc.lo = {-1.0, -1.0};
    sc.hi = {1.0, 1.0};
    sc.grids = {64, 128};
    ScenarioOperator op;
    op.form = "trace";
    op.lambda = 1.0;
    op.Lambda = 1.0;
    op.members = {{{"1", "0"}, {"0", "1"}}};
    sc.op = op;
    sc.rhs = "0";
    sc.boundary = "x^3 - 3 * x * y^2";
    sc.exact = "x^3 - 3 * x * y^2";
    sc.audits = {
        {"excess-decay", {{"q", 2.5}, {"r", 0.32}}, {}},
    };
    all.push_back(sc);
  }

  return all;
}

inline Scenario builtin_scenario(const std::string& name) {
  for (const Scenario& sc : builtin_scenarios())
    if (sc.name == name) return sc;
  throw ParseError("no builtin scenario named '" + name + "'");
}

}  // namespace ellipot
