#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/geometry.hpp"
#include "ellipot/grid.hpp"
#include "ellipot/rearrangement.hpp"
#include "ellipot/report.hpp"

namespace ellipot {

/// Scale functional evaluation: which space, the measured value, and how the
/// probe set was built. `infinite` can only be raised by callers fitting a
/// divergence trend; a single finite grid always produces a finite value.
struct NormReport {
  std::string space;
  std::map<std::string, double> params;
  double value = 0.0;
  bool infinite = false;
  std::optional<double> tail_exponent;
  std::optional<Ball> attaining;
  std::vector<std::string> notes;
};

/// Probe family shared by every sup-type scan: centers on a coarsened cell
/// lattice (every `stride`-th cell per axis), dyadic radii starting at 2h,
/// balls fully inside the box.
struct ProbeBalls {
  std::vector<Ball> balls;
  long excluded = 0;
  std::string note;
};

inline ProbeBalls probe_balls(const Grid& g, double max_radius, int stride = 4) {
  ProbeBalls out;
  std::vector<double> radii;
  for (double rho = 2.0 * g.h(); rho <= max_radius * (1.0 + 1e-12); rho *= 2.0)
    radii.push_back(rho);
  std::vector<Vec> centers;
  std::array<int, kMaxDim> idx{};
  for (int d = 0; d < g.dim(); ++d) idx[static_cast<std::size_t>(d)] = stride / 2;
  while (true) {
    centers.push_back(g.center(idx));
    int d = g.dim() - 1;
    while (d >= 0) {
      idx[static_cast<std::size_t>(d)] += stride;
      if (idx[static_cast<std::size_t>(d)] < g.cells(d)) break;
      idx[static_cast<std::size_t>(d)] = stride / 2;
      --d;
    }
    if (d < 0) break;
  }
  for (double rho : radii)
    for (const Vec& c : centers) {
      bool inside = true;
      for (int d = 0; d < g.dim(); ++d)
        if (c[d] - rho < g.lo(d) || c[d] + rho > g.hi(d)) inside = false;
      if (inside)
        out.balls.emplace_back(c, rho);
      else
        ++out.excluded;
    }
  out.note = "probe lattice: centers every " + std::to_string(stride) +
             " cells, dyadic radii from 2h; balls crossing the boundary excluded (" +
             std::to_string(out.excluded) + ")";
  return out;
}

/// Quasinorm functional of the Lorentz scale L(q, gamma): the integral of
/// (lambda^q |{|g| > lambda}|)^(gamma/q) d lambda / lambda, evaluated exactly
/// on the step distribution of the sampled field.
inline NormReport lorentz_functional(const GridField& g, double q, double gamma,
                                     bool fit_tail = false) {
  if (!(q > 1.0)) throw DomainError("lorentz functional needs q > 1");
  if (!(gamma > 0.0)) throw DomainError("lorentz functional needs gamma > 0");
  const Rearrangement r = rearrange(g);
  const auto st = r.steps();
  double sum = 0.0;
  for (std::size_t j = 0; j < st.values.size(); ++j) {
    const double vj = st.values[j];
    const double vnext = (j + 1 < st.values.size()) ? st.values[j + 1] : 0.0;
    sum += std::pow(st.measures[j], gamma / q) *
           (std::pow(vj, gamma) - std::pow(vnext, gamma)) / gamma;
  }
  NormReport rep;
  rep.space = "lorentz";
  rep.params["q"] = q;
  rep.params["gamma"] = gamma;
  rep.value = sum;
  rep.notes.push_back("exact on the cell-step distribution; no probe lattice involved");
  if (fit_tail && st.values.size() >= 4) {
    // least-squares slope of log distribution against log level over dyadic levels
    std::vector<double> xs, ys;
    for (double lam = st.values.front() * 0.5; lam > st.values.front() * 1e-6; lam *= 0.5) {
      const double d = r.distribution(lam);
      if (d <= 0.0) break;
      xs.push_back(std::log(lam));
      ys.push_back(std::log(d));
    }
    if (xs.size() >= 3) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      double num = 0, den = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
      }
      if (den > 0) rep.tail_exponent = num / den;
    }
  }
  return rep;
}

/// Weak-scale functional: sup over levels of lambda^q |{|g| > lambda}|.
inline NormReport marcinkiewicz_functional(const GridField& g, double q) {
  if (!(q >= 1.0)) throw DomainError("marcinkiewicz functional needs q >= 1");
  const auto st = rearrange(g).steps();
  double best = 0.0;
  for (std::size_t j = 0; j < st.values.size(); ++j)
    best = std::max(best, std::pow(st.values[j], q) * st.measures[j]);
  NormReport rep;
  rep.space = "marcinkiewicz";
  rep.params["q"] = q;
  rep.value = best;
  rep.notes.push_back("sup attained on the step levels of the cell distribution");
  return rep;
}

/// The borderline space of the gradient-boundedness scale: L(n, 1).
inline NormReport lorentz_n1_functional(const GridField& g, int n) {
  NormReport rep = lorentz_functional(g, static_cast<double>(n), 1.0);
  rep.space = "lorentz-n1";
  rep.params.clear();
  rep.params["n"] = static_cast<double>(n);
  return rep;
}

/// Morrey-scale functional: sup over probe balls of rho^s * (mean of |g|^q).
inline NormReport morrey_functional(const GridField& g, double q, double s, int stride = 4) {
  if (!(q >= 1.0)) throw DomainError("morrey functional needs q >= 1");
  const int n = g.grid().dim();
  if (s < 0.0 || s > static_cast<double>(n)) throw DomainError("morrey exponent s must lie in [0, n]");
  double max_radius = 0.5 * (g.grid().hi(0) - g.grid().lo(0));
  for (int d = 1; d < n; ++d)
    max_radius = std::min(max_radius, 0.5 * (g.grid().hi(d) - g.grid().lo(d)));
  const ProbeBalls probes = probe_balls(g.grid(), max_radius, stride);
  NormReport rep;
  rep.space = "morrey";
  rep.params["q"] = q;
  rep.params["s"] = s;
  double best = -1.0;
  for (const Ball& b : probes.balls) {
    const double avg = std::pow(lp_ball_average(g, b, q), q);
    const double val = std::pow(b.radius, s) * avg;
    if (val > best) {
      best = val;
      rep.attaining = b;
    }
  }
  if (best < 0.0) throw ResolutionError("no probe ball fits inside the grid");
  rep.value = best;
  rep.notes.push_back(probes.note);
  return rep;
}

/// Mean-oscillation table: for each requested radius, the sup over probe balls
/// of that radius of the average deviation from the ball mean. Works for
/// scalar and vector fields (Euclidean magnitude).
struct OscillationTable {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<std::string> notes;
};

inline OscillationTable oscillation_modulus(const GridField& g, const std::vector<double>& radii,
                                            int stride = 4) {
  OscillationTable table;
  const Grid& grid = g.grid();
  std::vector<Vec> centers;
  {
    std::array<int, kMaxDim> idx{};
    for (int d = 0; d < grid.dim(); ++d) idx[static_cast<std::size_t>(d)] = stride / 2;
    while (true) {
      centers.push_back(grid.center(idx));
      int d = grid.dim() - 1;
      while (d >= 0) {
        idx[static_cast<std::size_t>(d)] += stride;
        if (idx[static_cast<std::size_t>(d)] < grid.cells(d)) break;
        idx[static_cast<std::size_t>(d)] = stride / 2;
        --d;
      }
      if (d < 0) break;
    }
  }
  long excluded = 0;
  for (double R : radii) {
    if (R < 2.0 * grid.h()) throw ResolutionError("oscillation radius below 2h");
    double best = 0.0;
    for (const Vec& c : centers) {
      bool inside = true;
      for (int d = 0; d < grid.dim(); ++d)
        if (c[d] - R < grid.lo(d) || c[d] + R > grid.hi(d)) inside = false;
      if (!inside) {
        ++excluded;
        continue;
      }
      const Ball b(c, R);
      const Vec mean = ball_average_vec(g, b);
      best = std::max(best, ball_lq_deviation(g, b, 1.0, mean));
    }
    table.radii.push_back(R);
    table.values.push_back(best);
  }
  table.notes.push_back("sup per radius over the stride-" + std::to_string(stride) +
                        " center lattice; boundary-crossing balls excluded (" +
                        std::to_string(excluded) + " across radii)");
  return table;
}

/// One Hardy-Littlewood comparison: the ball average of |g| against the
/// maximal rearrangement at the continuum ball measure plus the lattice
/// correction 4 (h / rho) * max |g|.
inline CheckRow hardy_littlewood_check(const GridField& g, const Ball& b, const Rearrangement& r,
                                       double slack_factor = 1.05) {
  const double lhs = lp_ball_average(g, b, 1.0);
  const int n = g.grid().dim();
  double gmax = 0.0;
  for (double v : g.raw()) gmax = std::max(gmax, std::fabs(v));
  const double rhs = r.star_star(unit_ball_volume(n) * std::pow(b.radius, n)) +
                     4.0 * g.grid().h() / b.radius * gmax;
  return CheckRow::leq("hardy-littlewood", lhs, rhs * slack_factor, 0.0);
}

/// One Marcinkiewicz-Holder comparison on a ball: the integral of |f|^p against
/// the ball-local weak-L^n functional with the sharp constant
/// omega_n^(1 - p/n) * n / (n - p) * r^(n - p).
inline CheckRow marcinkiewicz_holder_check(const GridField& f, const Ball& b, double p,
                                           double slack_factor = 1.05) {
  const int n = f.grid().dim();
  if (!(p >= 1.0) || !(p < static_cast<double>(n)))
    throw DomainError("marcinkiewicz-holder comparison needs 1 <= p < n");
  std::vector<double> vals;
  visit_ball(f.grid(), b, [&](std::size_t cell, const Vec&) {
    if (cell != kOutside) vals.push_back(std::fabs(f.at(cell)));
  });
  if (vals.empty()) throw DomainError("ball does not intersect the grid");
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  const double cell = f.grid().cell_volume();
  double weak = 0.0;  // ball-local sup of lambda * measure^(1/n)
  double integral = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    weak = std::max(weak, vals[k] * std::pow(cell * static_cast<double>(k + 1), 1.0 / n));
    integral += std::pow(vals[k], p) * cell;
  }
  const double constant =
      std::pow(unit_ball_volume(n), 1.0 - p / n) * static_cast<double>(n) / (n - p);
  const double rhs = constant * std::pow(b.radius, static_cast<double>(n) - p) * std::pow(weak, p);
  return CheckRow::leq("marcinkiewicz-holder", integral, rhs * slack_factor, 0.0);
}

}  // namespace ellipot
