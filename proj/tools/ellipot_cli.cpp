// Command-line runner: executes scenario documents, lists the builtin ones,
// and evaluates single-field functionals on a throwaway grid.
//
// Exit codes: 0 success, 2 malformed document or usage, 3 solver failed to
// converge, 4 grid resolution cannot support a request.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ellipot/scenario.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(text.substr(pos), &used));
    } catch (const std::exception&) {
      throw ellipot::ParseError("bad numeric list '" + text + "'");
    }
    pos += used;
    if (pos < text.size()) {
      if (text[pos] != ',') throw ellipot::ParseError("bad numeric list '" + text + "'");
      ++pos;
    }
  }
  if (out.empty()) throw ellipot::ParseError("empty numeric list");
  return out;
}

ellipot::Scenario load_scenario(const std::string& ref) {
  namespace fs = std::filesystem;
  if (fs::exists(ref)) {
    ellipot::ordered_json doc;
    try {
      doc = ellipot::ordered_json::parse(ellipot::read_text(ref));
    } catch (const nlohmann::json::exception& e) {
      throw ellipot::ParseError("cannot parse scenario document: " + std::string(e.what()));
    }
    return ellipot::scenario_from_json(doc);
  }
  return ellipot::builtin_scenario(ref);
}

int cmd_list() {
  for (const auto& sc : ellipot::builtin_scenarios())
    std::cout << sc.name << "\n    " << sc.description << "\n";
  return 0;
}

int cmd_show(const std::string& ref) {
  std::cout << ellipot::scenario_to_json(load_scenario(ref)).dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& ref, const std::string& out_dir, const std::vector<int>& grids,
            int jobs, bool no_fields) {
  ellipot::Scenario sc = load_scenario(ref);
  ellipot::RunOptions opt;
  opt.out = out_dir;
  opt.grid_override = grids;
  opt.jobs = jobs;
  opt.write_fields = !no_fields;
  const ellipot::ordered_json summary = ellipot::run_scenario(sc, opt);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_norms(const std::string& expr, const std::string& space_spec, int cells,
              const std::string& lo_text, const std::string& hi_text, const std::string& out_file) {
  using namespace ellipot;
  const std::vector<double> lo = parse_list(lo_text);
  const std::vector<double> hi = parse_list(hi_text);
  if (lo.size() != hi.size()) throw ParseError("lo and hi must have the same length");
  const int dim = static_cast<int>(lo.size());
  std::array<double, kMaxDim> vlo{}, vhi{};
  std::array<int, kMaxDim> nc{};
  for (int d = 0; d < dim; ++d) {
    vlo[static_cast<std::size_t>(d)] = lo[static_cast<std::size_t>(d)];
    vhi[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)];
    nc[static_cast<std::size_t>(d)] = cells;
  }
  const Grid g = Grid::box(dim, vlo, vhi, nc);
  const Expression ex = Expression::parse(expr);
  GridField f(g, 1);
  for (std::size_t i = 0; i < g.cell_count(); ++i) f.at(i) = ex.eval(g.center(i));
  f.check_finite();

  const std::size_t colon = space_spec.find(':');
  const std::string space = space_spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) args = parse_list(space_spec.substr(colon + 1));

  ordered_json out;
  if (space == "lorentz") {
    if (args.size() != 2) throw ParseError("lorentz spec is lorentz:q,gamma");
    out = norm_to_json(lorentz_functional(f, args[0], args[1], true));
  } else if (space == "marcinkiewicz") {
    if (args.size() != 1) throw ParseError("marcinkiewicz spec is marcinkiewicz:q");
    out = norm_to_json(marcinkiewicz_functional(f, args[0]));
  } else if (space == "morrey") {
    if (args.size() != 2) throw ParseError("morrey spec is morrey:q,s");
    out = norm_to_json(morrey_functional(f, args[0], args[1]));
  } else if (space == "lorentz-n1") {
    out = norm_to_json(lorentz_n1_functional(f, dim));
  } else if (space == "bmo") {
    if (args.size() != 1) throw ParseError("bmo spec is bmo:R");
    const OscillationTable table = oscillation_modulus(f, {args[0]});
    out["schema"] = "ellipot-oscillation";
    out["radius"] = table.radii.front();
    out["value"] = table.values.front();
    out["notes"] = table.notes;
  } else {
    throw ParseError("unknown space '" + space + "'");
  }
  out["field"] = expr;
  out["cells"] = cells;
  const std::string body = out.dump(2) + "\n";
  if (!out_file.empty()) write_text(out_file, body);
  std::cout << body;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale elliptic toolbox: scenario runner and norm evaluator"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list builtin scenarios");

  std::string show_ref;
  auto* show = app.add_subcommand("show", "print a scenario document");
  show->add_option("scenario", show_ref, "builtin name or path to a document")->required();

  std::string run_ref, run_out = "out";
  std::vector<int> run_grids;
  int run_jobs = 1;
  bool run_no_fields = false;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", run_ref, "builtin name or path to a document")->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--grids", run_grids, "override the grid ladder")->delimiter(',');
  run->add_option("--jobs", run_jobs, "worker count for the linear sweeps");
  run->add_flag("--no-fields", run_no_fields, "skip writing field payloads");

  std::string norm_expr, norm_space, norm_lo = "-1,-1", norm_hi = "1,1", norm_out;
  int norm_cells = 128;
  auto* norms = app.add_subcommand("norms", "evaluate a functional of an expression field");
  norms->add_option("field,--field", norm_expr, "field expression, e.g. '1/r'")->required();
  norms->add_option("--space", norm_space,
                    "one of lorentz:q,gamma | marcinkiewicz:q | morrey:q,s | lorentz-n1 | bmo:R")
      ->required();
  norms->add_option("--cells", norm_cells, "cells per axis");
  norms->add_option("--lo", norm_lo, "lower corner, comma separated");
  norms->add_option("--hi", norm_hi, "upper corner, comma separated");
  norms->add_option("--out", norm_out, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list->parsed()) return cmd_list();
    if (show->parsed()) return cmd_show(show_ref);
    if (run->parsed()) return cmd_run(run_ref, run_out, run_grids, run_jobs, run_no_fields);
    if (norms->parsed()) return cmd_norms(norm_expr, norm_space, norm_cells, norm_lo, norm_hi, norm_out);
  } catch (const ellipot::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ellipot::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const auto& hist = e.residual_history();
    if (!hist.empty()) {
      std::cerr << "residual history tail:";
      for (std::size_t i = hist.size() > 5 ? hist.size() - 5 : 0; i < hist.size(); ++i)
        std::cerr << " " << hist[i];
      std::cerr << "\n";
    }
    return 3;
  } catch (const ellipot::ResolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
