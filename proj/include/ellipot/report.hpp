#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace ellipot {

/// One verified inequality or identity: lhs <= rhs within slack, with the
/// achieved margin (rhs - lhs) recorded either way.
struct CheckRow {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;

  static CheckRow leq(const std::string& label, double lhs, double rhs, double slack) {
    CheckRow r;
    r.label = label;
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.pass = lhs <= rhs + slack;
    return r;
  }

  static CheckRow close(const std::string& label, double a, double b, double tol) {
    CheckRow r;
    r.label = label;
    r.lhs = a;
    r.rhs = b;
    r.margin = std::fabs(a - b);
    r.pass = r.margin <= tol;
    return r;
  }
};

/// Structured result of one audit run: named checks plus free-form notes on
/// sampling choices (probe lattices, exclusions, quadrature ladders).
struct AuditReport {
  std::string name;
  std::map<std::string, double> params;
  std::vector<CheckRow> checks;
  std::vector<std::string> notes;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string verdict() const { return passed() ? "pass" : "fail"; }
};

}  // namespace ellipot
