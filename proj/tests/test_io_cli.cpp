#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ellipot/closed_forms.hpp"
#include "ellipot/io.hpp"
#include "ellipot/scenario.hpp"

using namespace ellipot;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("ellipot-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// the tool path is baked in at configure time; the environment can override it
int run_cli(const std::string& args) {
  const char* exe = std::getenv("ELLIPOT_CLI_PATH");
#ifdef ELLIPOT_CLI_PATH
  if (exe == nullptr) exe = ELLIPOT_CLI_PATH;
#endif
  REQUIRE(exe != nullptr);
  const int rc = std::system((std::string(exe) + " " + args).c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("doubles format compactly and round trip") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(4.0) == "4");
  CHECK(format_double(-0.125) == "-0.125");
  const double v = 5.405144838559316;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("field files round trip byte for byte") {
  const fs::path dir = fresh_dir("fieldio");
  const Grid g = Grid::cube(2, -1.0, 1.0, 32);
  const GridField f = GridField::tabulate(g, [](const Vec& x) { return std::sin(3.0 * x[0]) + x[1]; });

  write_field(dir / "f", f, "scalar");
  REQUIRE(fs::exists(dir / "f.json"));
  REQUIRE(fs::exists(dir / "f.bin"));

  const LoadedField back = read_field(dir / "f");
  CHECK(back.kind == "scalar");
  REQUIRE(back.field.grid().same_layout(g));
  for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(back.field.at(i) == f.at(i));

  // a rewrite of the loaded field reproduces the payload exactly
  write_field(dir / "g", back.field, back.kind);
  CHECK(slurp(dir / "f.bin") == slurp(dir / "g.bin"));
  CHECK(slurp(dir / "f.json") == slurp(dir / "g.json"));

  // vector fields carry their component count through the sidecar
  const GridField du = gradient(f);
  write_field(dir / "du", du, "gradient");
  const LoadedField du_back = read_field(dir / "du");
  CHECK(du_back.field.components() == 2);
  CHECK(du_back.field.at(7, 1) == du.at(7, 1));

  // tampering with the payload length is caught
  {
    std::ofstream trunc(dir / "du.bin", std::ios::binary | std::ios::trunc);
    trunc << "short";
  }
  CHECK_THROWS_AS(read_field(dir / "du"), ParseError);
  CHECK_THROWS_AS(read_field(dir / "missing"), ParseError);
}

TEST_CASE("csv export lists one row per cell") {
  const fs::path dir = fresh_dir("csv");
  const Grid g = Grid::cube(2, 0.0, 1.0, 8);
  const GridField f = GridField::tabulate(g, [](const Vec& x) { return x[0]; });
  write_field_csv(dir / "f.csv", f);
  const std::string body = slurp(dir / "f.csv");
  std::size_t lines = 0;
  for (char c : body)
    if (c == '\n') ++lines;
  CHECK(lines == g.cell_count() + 1);  // header plus cells
  CHECK(body.rfind("x1,x2,v1\n", 0) == 0);
}

TEST_CASE("curve and report writers emit parseable json") {
  const fs::path dir = fresh_dir("writers");
  const Grid g = Grid::cube(2, -1.0, 1.0, 64);
  const GridField f = GridField::tabulate(g, [](const Vec&) { return 2.0; });

  const PotentialCurve curve = truncated_riesz(f, Vec(0.0, 0.0), 0.5);
  write_curve(dir / "curve", curve);
  const ordered_json cj = ordered_json::parse(slurp(dir / "curve.json"));
  CHECK(cj.at("kind") == "truncated-riesz");
  CHECK(cj.at("base").size() == 2);
  CHECK(cj.at("value").get<double>() == Catch::Approx(curve.value()));
  const std::string csv = slurp(dir / "curve.csv");
  CHECK(csv.rfind("radius,value\n", 0) == 0);
  std::size_t csv_lines = 0;
  for (char c : csv)
    if (c == '\n') ++csv_lines;
  CHECK(csv_lines == curve.radii.size() + 1);

  AuditReport rep;
  rep.name = "demo";
  rep.params["p"] = 1.5;
  rep.checks.push_back(CheckRow::leq("first", 1.0, 2.0, 0.0));
  rep.checks.push_back(CheckRow::leq("second", 3.0, 2.0, 0.0));
  rep.notes.push_back("note");
  write_report(dir / "rep", rep);
  const ordered_json rj = ordered_json::parse(slurp(dir / "rep.json"));
  CHECK(rj.at("name") == "demo");
  CHECK(rj.at("verdict") == "fail");
  CHECK(rj.at("checks").size() == 2);
  CHECK(rj.at("checks")[0].at("pass") == true);
  CHECK(rj.at("checks")[1].at("pass") == false);
  const std::string rcsv = slurp(dir / "rep.csv");
  CHECK(rcsv.rfind("label,lhs,rhs,margin,pass\n", 0) == 0);
}

TEST_CASE("estimate writer keeps named parts") {
  const fs::path dir = fresh_dir("estimate");
  EstimateAudit audit;
  audit.estimate = "demo-estimate";
  audit.params["q"] = 2.5;
  EstimateRow row;
  row.label = "x0";
  row.lhs = 1.0;
  row.parts["alpha"] = 0.5;
  row.parts["beta"] = 0.75;
  audit.rows.push_back(row);
  audit.fit();
  CHECK(audit.fitted_c == Catch::Approx(0.8));

  write_estimate(dir / "est", audit);
  const ordered_json ej = ordered_json::parse(slurp(dir / "est.json"));
  CHECK(ej.at("estimate") == "demo-estimate");
  CHECK(ej.at("fitted-c").get<double>() == Catch::Approx(0.8));
  CHECK(ej.at("rows")[0].at("parts").at("beta").get<double>() == 0.75);
}

TEST_CASE("scenario documents round trip") {
  for (const Scenario& sc : builtin_scenarios()) {
    const ordered_json doc = scenario_to_json(sc);
    const Scenario back = scenario_from_json(doc);
    CHECK(back.name == sc.name);
    CHECK(back.grids == sc.grids);
    CHECK(back.audits.size() == sc.audits.size());
    CHECK(scenario_to_json(back) == doc);
  }
}

TEST_CASE("scenario validation rejects malformed documents") {
  ordered_json doc = scenario_to_json(builtin_scenario("poisson-radial"));

  ordered_json bad = doc;
  bad["operator"]["form"] = "unheard-of";
  CHECK_THROWS_AS(scenario_from_json(bad), ParseError);

  bad = doc;
  bad["rhs"] = "4 +";
  CHECK_THROWS_AS(scenario_from_json(bad), ParseError);

  bad = doc;
  bad["grids"] = {64, 64};
  CHECK_THROWS_AS(scenario_from_json(bad), ParseError);

  bad = doc;
  bad["audits"][0]["kind"] = "unknown-audit";
  CHECK_THROWS_AS(scenario_from_json(bad), ParseError);

  bad = doc;
  bad.erase("operator");
  CHECK_THROWS_AS(scenario_from_json(bad), ParseError);  // no operator and no field
}

TEST_CASE("cli lists and shows built-in scenarios") {
  const fs::path dir = fresh_dir("clilist");
  CHECK(run_cli("list > " + (dir / "list.txt").string()) == 0);
  const std::string listing = slurp(dir / "list.txt");
  CHECK(listing.find("poisson-radial") != std::string::npos);
  CHECK(listing.find("borderline-lorentz-witness") != std::string::npos);

  CHECK(run_cli("show poisson-radial > " + (dir / "show.json").string()) == 0);
  const ordered_json doc = ordered_json::parse(slurp(dir / "show.json"));
  CHECK(doc.at("schema") == "ellipot-scenario");

  CHECK(run_cli("show no-such-scenario 2> /dev/null") == 2);
}

TEST_CASE("cli norms evaluates expression fields") {
  const fs::path dir = fresh_dir("clinorms");
  const fs::path out = dir / "norm.json";
  CHECK(run_cli("norms --field '1/r' --space marcinkiewicz:2 --cells 64 --out " + out.string() +
                " > /dev/null") == 0);
  const ordered_json doc = ordered_json::parse(slurp(out));
  CHECK(doc.at("space") == "marcinkiewicz");
  CHECK(doc.at("value").get<double>() == Catch::Approx(8.0).epsilon(0.05));

  // unparseable space spec is a usage error
  CHECK(run_cli("norms --field '1/r' --space nonsense:1 2> /dev/null") == 2);
  // a radius below the mesh is a resolution error
  CHECK(run_cli("norms --field '1' --space bmo:0.0001 --cells 64 2> /dev/null") == 4);
}

TEST_CASE("cli run writes a complete scenario output tree") {
  const fs::path dir = fresh_dir("clirun");
  const int rc = run_cli("run poisson-radial --grids 64 --out " + dir.string() + " > /dev/null");
  REQUIRE(rc == 0);
  const fs::path root = dir / "poisson-radial";
  REQUIRE(fs::exists(root / "summary.json"));
  const ordered_json summary = ordered_json::parse(slurp(root / "summary.json"));
  CHECK(summary.at("scenario") == "poisson-radial");
  CHECK(summary.at("grids").size() == 1);
  const auto& run0 = summary.at("runs")[0];
  CHECK(run0.at("cells") == 64);
  CHECK(run0.at("max-error").get<double>() < 1e-8);
  // solution, gradient, and source fields land next to the summary
  CHECK(fs::exists(root / "g64" / "u.bin"));
  CHECK(fs::exists(root / "g64" / "du.bin"));
  CHECK(fs::exists(root / "g64" / "rhs.bin"));
}

TEST_CASE("cli failure modes keep their exit codes apart") {
  const fs::path dir = fresh_dir("clifail");

  // malformed document: parse failure, and nothing written
  const fs::path badscene = dir / "bad.json";
  {
    ordered_json doc = scenario_to_json(builtin_scenario("poisson-radial"));
    doc["operator"]["form"] = "unheard-of";
    std::ofstream out(badscene);
    out << doc.dump(2);
  }
  const fs::path badout = dir / "bad-out";
  CHECK(run_cli("run " + badscene.string() + " --out " + badout.string() + " 2> /dev/null") == 2);
  CHECK_FALSE(fs::exists(badout));  // validation happens before anything is written

  // starved iteration budget: convergence failure
  const fs::path starved = dir / "starved.json";
  {
    ordered_json doc = scenario_to_json(builtin_scenario("bellman-manufactured"));
    doc["name"] = "starved";
    doc["solve"]["max-policy-iterations"] = 2;
    doc["solve"]["max-sweeps"] = 2;
    std::ofstream out(starved);
    out << doc.dump(2);
  }
  CHECK(run_cli("run " + starved.string() + " --grids 64 --out " + (dir / "starved-out").string() +
                " 2> /dev/null") == 3);

  // audit radius unreachable on a coarse mesh: resolution failure
  const fs::path tiny = dir / "tiny.json";
  {
    ordered_json doc = scenario_to_json(builtin_scenario("poisson-radial"));
    doc["name"] = "tiny";
    doc["audits"] = ordered_json::array();
    ordered_json audit;
    audit["kind"] = "gradient-potential";
    audit["p"] = 1.5;
    audit["q"] = 2.5;
    audit["r"] = 0.05;
    doc["audits"].push_back(audit);
    std::ofstream out(tiny);
    out << doc.dump(2);
  }
  CHECK(run_cli("run " + tiny.string() + " --grids 64 --out " + (dir / "tiny-out").string() +
                " 2> /dev/null") == 4);
}

TEST_CASE("scenario runs are deterministic byte for byte") {
  const fs::path a = fresh_dir("det-a");
  const fs::path b = fresh_dir("det-b");
  const std::string args = "run borderline-lorentz-witness --grids 64 ";
  REQUIRE(run_cli(args + "--out " + a.string() + " > /dev/null") == 0);
  REQUIRE(run_cli(args + "--out " + b.string() + " > /dev/null") == 0);

  const fs::path rel_summary = fs::path("borderline-lorentz-witness") / "summary.json";
  REQUIRE(fs::exists(a / rel_summary));
  CHECK(slurp(a / rel_summary) == slurp(b / rel_summary));
  // every artifact in the tree matches, not just the summary
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK(slurp(entry.path()) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared > 3);
}
