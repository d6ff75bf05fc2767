#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/function_spaces.hpp"
#include "ellipot/grid.hpp"
#include "ellipot/potentials.hpp"
#include "ellipot/report.hpp"

namespace ellipot {

/// Default lower edge of the admissible integrability window (n_E, n].
inline double default_integrability_floor(int n) { return 0.5 * n + 0.01 * n; }

/// Exponent tying the decay factor per chain step to a power of the radius
/// ratio: alpha = -log 3 / log sigma.
inline double decay_exponent(double sigma) { return -std::log(3.0) / std::log(sigma); }

/// Concentric sub-box with each side inset by `margin` times the half-extent.
struct Subbox {
  Vec lo, hi;
  int dim = 2;

  bool contains(const Vec& p) const {
    for (int d = 0; d < dim; ++d)
      if (p[d] < lo[d] || p[d] > hi[d]) return false;
    return true;
  }
};

inline Subbox inner_box(const Grid& g, double margin) {
  Subbox s;
  s.dim = g.dim();
  s.lo = Vec(g.dim());
  s.hi = Vec(g.dim());
  for (int d = 0; d < g.dim(); ++d) {
    const double mid = 0.5 * (g.lo(d) + g.hi(d));
    const double half = 0.5 * (g.hi(d) - g.lo(d)) * (1.0 - margin);
    s.lo[d] = mid - half;
    s.hi[d] = mid + half;
  }
  return s;
}

inline Subbox omega_prime(const Grid& g) { return inner_box(g, 0.25); }
inline Subbox omega_double_prime(const Grid& g) { return inner_box(g, 0.125); }

/// Cell centers of the stride lattice inside a sub-box.
inline std::vector<Vec> lattice_in(const Grid& g, const Subbox& box, int stride = 4) {
  std::vector<Vec> pts;
  std::array<int, kMaxDim> idx{};
  for (int d = 0; d < g.dim(); ++d) idx[static_cast<std::size_t>(d)] = stride / 2;
  while (true) {
    const Vec p = g.center(idx);
    if (box.contains(p)) pts.push_back(p);
    int d = g.dim() - 1;
    while (d >= 0) {
      idx[static_cast<std::size_t>(d)] += stride;
      if (idx[static_cast<std::size_t>(d)] < g.cells(d)) break;
      idx[static_cast<std::size_t>(d)] = stride / 2;
      --d;
    }
    if (d < 0) break;
  }
  return pts;
}

/// Gradient excess over a ball: the L^q mean deviation of the gradient field
/// from its ball average. Invariant under subtracting affine maps.
inline double excess_from_gradient(const GridField& du, const Ball& b, double q) {
  if (b.radius < 2.0 * du.grid().h()) throw ResolutionError("excess ball below 2h");
  const Vec mean = ball_average_vec(du, b);
  return ball_lq_deviation(du, b, q, mean);
}

inline double excess(const GridField& u, const Ball& b, double q) {
  return excess_from_gradient(gradient(u), b, q);
}

/// Max of |du| over cell centers inside a sub-box.
inline double sup_gradient(const GridField& du, const Subbox& box) {
  double best = 0.0;
  const Grid& g = du.grid();
  for (std::size_t f = 0; f < g.cell_count(); ++f) {
    const Vec p = g.center(f);
    if (!box.contains(p)) continue;
    double m = 0.0;
    for (int c = 0; c < du.components(); ++c) m += du.at(f, c) * du.at(f, c);
    best = std::max(best, std::sqrt(m));
  }
  return best;
}

/// One rung of a shrinking ball chain at a fixed center.
struct ChainLink {
  double radius = 0.0;
  std::size_t centers = 0;  // lattice centers inside the ball
  Vec du_avg;
  double excess_q = 0.0;
  double lp_f = 0.0;  // (ball mean of |f|^p)^(1/p)
};

/// Geometric chain B_i of radii sigma^i * start about one point, the backbone
/// of every iteration-based estimate here.
struct DyadicChain {
  Vec center;
  double sigma = 0.0, p = 0.0, q = 0.0;
  std::vector<ChainLink> links;  // radii descending

  double excess_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < links.size(); ++i) s += links[i].excess_q;
    return s;
  }
  double telescope_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < links.size(); ++i)
      s += (links[i + 1].du_avg - links[i].du_avg).norm();
    return s;
  }
  double weighted_lp_sum() const {
    double s = 0.0;
    for (const auto& l : links) s += l.radius * l.lp_f;
    return s;
  }
};

inline DyadicChain build_chain(const GridField& du, const GridField& f, const Vec& x0,
                               double start_radius, double sigma, double p, double q, int depth) {
  if (!(sigma >= 0.05 && sigma <= 0.5)) throw DomainError("chain ratio must lie in [0.05, 0.5]");
  if (depth < 2) throw DomainError("chain needs at least two balls");
  const double h = du.grid().h();
  if (start_radius * std::pow(sigma, depth - 1) < 2.0 * h)
    throw ResolutionError("chain bottoms out below 2h; reduce depth or enlarge the start radius");
  DyadicChain chain;
  chain.center = x0;
  chain.sigma = sigma;
  chain.p = p;
  chain.q = q;
  for (int i = 0; i < depth; ++i) {
    ChainLink link;
    link.radius = start_radius * std::pow(sigma, i);
    const Ball b(x0, link.radius);
    link.du_avg = ball_average_vec(du, b);
    link.excess_q = ball_lq_deviation(du, b, q, link.du_avg);
    link.lp_f = lp_ball_average(f, b, p);
    std::size_t centers = visit_ball(du.grid(), b, [](std::size_t, const Vec&) {});
    link.centers = centers;
    chain.links.push_back(link);
  }
  return chain;
}

/// Telescoping control of successive gradient averages: the jump sum is
/// bounded by sigma^(-n/q) times the excess sum. Each discrete step carries
/// the exact factor (N_i / N_{i+1})^(1/q); both forms are reported.
inline std::vector<CheckRow> chain_telescoping_checks(const DyadicChain& chain, int n) {
  std::vector<CheckRow> rows;
  double exact_rhs = 0.0;
  for (std::size_t i = 0; i + 1 < chain.links.size(); ++i) {
    const double jump = (chain.links[i + 1].du_avg - chain.links[i].du_avg).norm();
    const double factor = std::pow(static_cast<double>(chain.links[i].centers) /
                                       static_cast<double>(chain.links[i + 1].centers),
                                   1.0 / chain.q);
    rows.push_back(CheckRow::leq("telescope-step-" + std::to_string(i), jump,
                                 factor * chain.links[i].excess_q + 1e-12, 0.0));
    exact_rhs += factor * chain.links[i].excess_q;
  }
  const double aggregate = std::pow(chain.sigma, -static_cast<double>(n) / chain.q) *
                           chain.excess_sum();
  rows.push_back(CheckRow::leq("telescope-aggregate", chain.telescope_sum(), aggregate + 1e-9, 0.0));
  rows.push_back(CheckRow::leq("telescope-exact-factors", chain.telescope_sum(), exact_rhs + 1e-12, 0.0));
  return rows;
}

/// Dyadic-sum comparison: sum of r_i (ball mean of |f|^p)^(1/p) against the
/// bracketed multiple of the truncated p-power potential at twice the start
/// radius.
inline CheckRow chain_dyadic_sum_check(const DyadicChain& chain, const GridField& f, int levels = 8) {
  const int n = f.grid().dim();
  const double np = static_cast<double>(n) / chain.p;
  const double bracket = std::pow(2.0, -np) / std::log(2.0) +
                         std::pow(chain.sigma, -np) / (-std::log(chain.sigma));
  const double full_r = 2.0 * chain.links.front().radius;
  const PotentialCurve pot = modified_riesz(f, chain.center, full_r, chain.p, levels);
  return CheckRow::leq("dyadic-sum-vs-potential", chain.weighted_lp_sum(),
                       bracket * pot.value() + 1e-6, 0.0);
}

/// One sample row of a constant-fitting estimate audit: measured left side and
/// the named right-hand-side pieces it is tested against.
struct EstimateRow {
  std::string label;
  double lhs = 0.0;
  std::map<std::string, double> parts;
  double c_required = 0.0;

  double parts_sum() const {
    double s = 0.0;
    for (const auto& [k, v] : parts) s += v;
    return s;
  }
};

/// Audit of one estimate: rows across sample points, the fitted constant
/// (the smallest c making every row pass), and derived checks.
struct EstimateAudit {
  std::string estimate;
  std::map<std::string, double> params;
  std::vector<EstimateRow> rows;
  double fitted_c = 0.0;
  std::vector<CheckRow> checks;
  std::vector<std::string> notes;

  void fit() {
    fitted_c = 0.0;
    for (auto& r : rows) {
      const double denom = r.parts_sum();
      r.c_required = denom > 0.0 ? r.lhs / denom : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      fitted_c = std::max(fitted_c, r.c_required);
    }
  }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Pointwise gradient bound through the truncated potential: |Du(x)| against
/// c * [potential + (ball mean of |Du|^q)^(1/q)] at radius r.
inline EstimateAudit gradient_potential_audit(const GridField& du, const GridField& f, double p,
                                              double q, const std::vector<Vec>& xs, double r,
                                              double n_e = 0.0, int levels = 8) {
  const Grid& g = du.grid();
  const int n = g.dim();
  if (n_e <= 0.0) n_e = default_integrability_floor(n);
  if (!(q > static_cast<double>(n))) throw DomainError("gradient bound needs q > n");
  if (!(p > n_e && p <= static_cast<double>(n)))
    throw DomainError("gradient bound needs p in the configured window");
  if (!(r >= 16.0 * g.h())) throw ResolutionError("gradient bound needs r >= 16h");
  EstimateAudit audit;
  audit.estimate = "gradient-potential-bound";
  audit.params["p"] = p;
  audit.params["q"] = q;
  audit.params["r"] = r;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Vec& x = xs[k];
    auto idx = g.cell_of(x);
    if (!g.in_bounds(idx)) throw DomainError("sample point outside the grid");
    const std::size_t cell = g.flat(idx);
    double mag = 0.0;
    for (int c = 0; c < du.components(); ++c) mag += du.at(cell, c) * du.at(cell, c);
    EstimateRow row;
    row.label = "x" + std::to_string(k);
    row.lhs = std::sqrt(mag);
    row.parts["potential"] = modified_riesz(f, x, r, p, levels).value();
    row.parts["gradient-average"] = lp_ball_average(du, Ball(x, r), q);
    audit.rows.push_back(row);
  }
  audit.fit();
  for (const auto& row : audit.rows)
    audit.checks.push_back(CheckRow::leq(row.label, row.lhs,
                                         audit.fitted_c * row.parts_sum() * (1.0 + 1e-12) + 1e-12,
                                         0.0));
  audit.notes.push_back("gradient read at the cell center containing each sample point");
  return audit;
}

/// Excess decay scan: fraction of lattice centers where the excess ratio
/// between B_(sigma R) and B_R drops to 1/3, per candidate sigma.
struct DecayScan {
  std::vector<double> sigmas;
  std::vector<double> fractions;  // passing fraction per sigma
  double best_sigma = 0.0;        // largest sigma with fraction >= 0.95
  long centers_used = 0;
  long centers_skipped = 0;  // excess at round-off
  std::vector<std::string> notes;
};

inline DecayScan excess_decay_audit(const GridField& du, double q, const std::vector<double>& sigmas,
                                    double R, int stride = 4) {
  const Grid& g = du.grid();
  DecayScan scan;
  scan.sigmas = sigmas;
  const Subbox box = omega_prime(g);
  std::vector<Vec> centers;
  for (const Vec& x : lattice_in(g, box, stride)) {
    bool fits = true;
    for (int d = 0; d < g.dim(); ++d)
      if (x[d] - R < g.lo(d) || x[d] + R > g.hi(d)) fits = false;
    if (fits) centers.push_back(x);
  }
  if (centers.empty()) throw ResolutionError("no decay center supports the top radius");
  int evaluated = 0;
  for (double s : sigmas) {
    if (s * R < 2.0 * g.h()) {
      // this ratio is unreachable at the current h; reported as -1
      scan.fractions.push_back(-1.0);
      continue;
    }
    ++evaluated;
    long pass = 0, used = 0, skipped = 0;
    for (const Vec& x : centers) {
      const double top = excess_from_gradient(du, Ball(x, R), q);
      if (top < 1e-12) {
        ++skipped;
        continue;
      }
      ++used;
      const double small = excess_from_gradient(du, Ball(x, s * R), q);
      if (small <= top / 3.0) ++pass;
    }
    scan.centers_used = used;
    scan.centers_skipped = skipped;
    scan.fractions.push_back(used > 0 ? static_cast<double>(pass) / used : 1.0);
  }
  if (evaluated == 0) throw ResolutionError("every decay radius sigma R lies below 2h");
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    if (scan.fractions[i] >= 0.95) scan.best_sigma = std::max(scan.best_sigma, sigmas[i]);
  scan.notes.push_back("centers: stride lattice inside the 25 percent margin box; "
                       "top-radius excess below 1e-12 excluded; fraction -1 marks a "
                       "ratio unreachable at this resolution");
  return scan;
}

/// Oscillation decay with the rate alpha tied to sigma: excess at radius
/// sigma^i r against c * [(rho / r)^alpha * sup |Du| + potential(2r)].
inline EstimateAudit vmo_decay_audit(const GridField& du, const GridField& f, double p, double q,
                                     const std::vector<Vec>& xs, double r, double sigma, int depth,
                                     int levels = 8) {
  const Grid& g = du.grid();
  if (!(sigma >= 0.05 && sigma <= 0.5)) throw DomainError("decay ratio must lie in [0.05, 0.5]");
  const double alpha = decay_exponent(sigma);
  EstimateAudit audit;
  audit.estimate = "oscillation-decay";
  audit.params["alpha"] = alpha;
  audit.params["sigma"] = sigma;
  audit.params["r"] = r;
  audit.params["p"] = p;
  audit.params["q"] = q;
  const double supdu = sup_gradient(du, omega_double_prime(g));
  audit.params["sup-gradient"] = supdu;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double pot = modified_riesz(f, xs[k], 2.0 * r, p, levels).value();
    for (int i = 1; i <= depth; ++i) {
      const double rho = r * std::pow(sigma, i);
      if (rho < 2.0 * g.h()) break;
      EstimateRow row;
      row.label = "x" + std::to_string(k) + "-rho" + std::to_string(i);
      row.lhs = excess_from_gradient(du, Ball(xs[k], rho), q);
      row.parts["decay"] = std::pow(rho / r, alpha) * supdu;
      row.parts["potential"] = pot;
      audit.rows.push_back(row);
    }
  }
  audit.fit();
  for (const auto& row : audit.rows)
    audit.checks.push_back(CheckRow::leq(row.label, row.lhs,
                                         audit.fitted_c * row.parts_sum() * (1.0 + 1e-12) + 1e-12,
                                         0.0));
  return audit;
}

/// Two-point gradient continuity: |Du(x1) - Du(x2)| against
/// c [ sup|Du| d^(alpha (1 - delta)) + max potential at radius 4 d^delta ].
/// Also records the variant with the borderline-space functional of f on the
/// covering ball in place of the potential term.
inline EstimateAudit continuity_modulus_audit(const GridField& du, const GridField& f, double p,
                                              const std::vector<std::pair<Vec, Vec>>& pairs,
                                              double alpha, double delta, int levels = 8) {
  const Grid& g = du.grid();
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("continuity exponent delta must lie in (0, 1]");
  EstimateAudit audit;
  audit.estimate = "gradient-continuity-modulus";
  audit.params["alpha"] = alpha;
  audit.params["delta"] = delta;
  audit.params["p"] = p;
  const Subbox inner = omega_prime(g);
  const double supdu = sup_gradient(du, omega_double_prime(g));
  audit.params["sup-gradient"] = supdu;
  const int n = g.dim();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Vec& a = pairs[k].first;
    const Vec& b = pairs[k].second;
    if (!inner.contains(a) || !inner.contains(b))
      throw DomainError("continuity pair leaves the inner box");
    const double d = (a - b).norm();
    if (d < 4.0 * g.h()) throw ResolutionError("continuity pair closer than 4h");
    auto grad_at = [&](const Vec& x) {
      const auto idx = g.cell_of(x);
      const std::size_t cell = g.flat(idx);
      Vec v(du.components());
      for (int c = 0; c < du.components(); ++c) v[c] = du.at(cell, c);
      return v;
    };
    const double rad = 4.0 * std::pow(d, delta);
    EstimateRow row;
    row.label = "pair" + std::to_string(k);
    row.lhs = (grad_at(a) - grad_at(b)).norm();
    row.parts["holder"] = supdu * std::pow(d, alpha * (1.0 - delta));
    const double pa = modified_riesz(f, a, std::max(rad, 4.0 * g.h()), p, levels).value();
    const double pb = modified_riesz(f, b, std::max(rad, 4.0 * g.h()), p, levels).value();
    row.parts["potential"] = std::max(pa, pb);
    audit.rows.push_back(row);

    // borderline-space variant: the f-term replaced by the L(n,1)-type
    // functional of f restricted to the covering ball of the pair
    GridField cut(g, 1);
    const Vec mid = (a + b) * 0.5;
    visit_ball(g, Ball(mid, std::max(rad, 4.0 * g.h())), [&](std::size_t cell, const Vec&) {
      if (cell != kOutside) cut.at(cell) = f.at(cell);
    });
    audit.params["lorentz-term@" + std::to_string(k)] = lorentz_n1_functional(cut, n).value;
  }
  audit.fit();
  for (const auto& row : audit.rows)
    audit.checks.push_back(CheckRow::leq(row.label, row.lhs,
                                         audit.fitted_c * row.parts_sum() * (1.0 + 1e-12) + 1e-12,
                                         0.0));
  audit.notes.push_back("variant right-hand sides with the borderline functional recorded in params");
  return audit;
}

/// Morrey-type smallness ladder M(r) = sup over balls below r of
/// (rho^(p-n) integral of |f|^p)^(1/p), and its classification: vanishing,
/// bounded, or growing as r shrinks.
struct SmallnessReport {
  std::vector<double> radii;    // ascending dyadic tops
  std::vector<double> m_values; // M at each top radius (nondecreasing)
  std::string classification;   // "zero" | "vanishing" | "bounded" | "growing"
  std::vector<std::string> notes;
};

inline SmallnessReport bmo_vmo_criteria_audit(const GridField& f, double p, double r_max,
                                              const std::vector<Vec>& extra_centers = {},
                                              int stride = 4) {
  const Grid& g = f.grid();
  const int n = g.dim();
  if (!(p >= 1.0) || !(p < static_cast<double>(n)))
    throw DomainError("smallness ladder needs 1 <= p < n");
  SmallnessReport rep;
  const double wn = unit_ball_volume(n);
  std::vector<double> radii;
  for (double rho = 2.0 * g.h(); rho <= r_max * (1.0 + 1e-12); rho *= 2.0) radii.push_back(rho);
  if (radii.empty()) throw ResolutionError("smallness radius below 2h");
  std::vector<Vec> centers = lattice_in(g, inner_box(g, 0.0), stride);
  for (const Vec& x : extra_centers) centers.push_back(x);
  double running = 0.0;
  for (double rho : radii) {
    for (const Vec& c : centers) {
      bool fits = true;
      for (int d = 0; d < n; ++d)
        if (c[d] - rho < g.lo(d) || c[d] + rho > g.hi(d)) fits = false;
      if (!fits) continue;
      // rho^(p-n) * integral = rho^(p-n) * omega_n rho^n * ball mean of |f|^p
      const double mean_p = std::pow(lp_ball_average(f, Ball(c, rho), p), p);
      const double val = std::pow(std::pow(rho, p) * wn * mean_p, 1.0 / p);
      running = std::max(running, val);
    }
    rep.radii.push_back(rho);
    rep.m_values.push_back(running);  // sup over nested radius sets
  }
  const double lo = rep.m_values.front();
  const double hi = rep.m_values.back();
  if (hi <= 1e-14)
    rep.classification = "zero";
  else if (lo <= 0.5 * hi)
    rep.classification = "vanishing";
  else if (hi <= 1.5 * lo)
    rep.classification = "bounded";
  else
    rep.classification = "growing";
  rep.notes.push_back("ball integral measured as omega_n rho^n times the discrete ball mean");
  rep.notes.push_back("centers: stride lattice plus explicit candidates; "
                      "boundary-crossing balls excluded");
  return rep;
}

/// Interior integrability of the gradient: the B_(r/2) mean of |Du|^q against
/// c * [sup of |u| on B_r + the B_r mean of |f|^p].
inline EstimateAudit w1q_bound_audit(const GridField& u, const GridField& du, const GridField& f,
                                     double p, double q, const Vec& center, double r) {
  const Grid& g = u.grid();
  const int n = g.dim();
  if (p < static_cast<double>(n) && !(q < static_cast<double>(n) * p / (static_cast<double>(n) - p)))
    throw DomainError("gradient integrability exponent exceeds the admissible window");
  EstimateAudit audit;
  audit.estimate = "interior-gradient-integrability";
  audit.params["p"] = p;
  audit.params["q"] = q;
  audit.params["r"] = r;
  double sup_u = 0.0;
  visit_ball(g, Ball(center, r), [&](std::size_t cell, const Vec&) {
    if (cell != kOutside) sup_u = std::max(sup_u, std::fabs(u.at(cell)));
  });
  EstimateRow row;
  row.label = "half-ball";
  row.lhs = lp_ball_average(du, Ball(center, 0.5 * r), q);
  row.parts["sup-u"] = sup_u;
  row.parts["rhs-average"] = lp_ball_average(f, Ball(center, r), p);
  audit.rows.push_back(row);
  audit.fit();
  audit.checks.push_back(CheckRow::leq(row.label, row.lhs,
                                       audit.fitted_c * row.parts_sum() * (1.0 + 1e-12) + 1e-12,
                                       0.0));
  return audit;
}

/// Scale-mapping audit: functional values of f and Du on the two sides of the
/// claimed mappings, with both printed-target and composition-target exponents
/// for the Morrey-scale branch reported side by side.
inline AuditReport mapping_property_audit(const GridField& f, const GridField& du, double p,
                                          double q, double gamma, double s, double theta) {
  const int n = f.grid().dim();
  AuditReport rep;
  rep.name = "scale-mapping";
  rep.params["p"] = p;
  rep.params["q"] = q;
  rep.params["gamma"] = gamma;
  rep.params["s"] = s;
  rep.params["theta"] = theta;
  if (!(q > p && q < static_cast<double>(n)))
    throw DomainError("mapping audit needs p < q < n");

  GridField dumag(du.grid(), 1);
  for (std::size_t i = 0; i < du.grid().cell_count(); ++i) {
    double m = 0.0;
    for (int c = 0; c < du.components(); ++c) m += du.at(i, c) * du.at(i, c);
    dumag.at(i) = std::sqrt(m);
  }

  // Lorentz-scale branch: L(q, gamma) -> L(nq/(n-q), gamma)
  const double target_q = static_cast<double>(n) * q / (static_cast<double>(n) - q);
  rep.params["lorentz-target-q"] = target_q;
  const double src = lorentz_functional(f, q, gamma).value;
  const double dst = lorentz_functional(dumag, target_q, gamma).value;
  rep.params["lorentz-source"] = src;
  rep.params["lorentz-target"] = dst;
  if (src > 0.0)
    rep.params["lorentz-ratio"] = std::pow(dst, 1.0 / gamma) / std::pow(src, 1.0 / gamma);
  rep.checks.push_back(CheckRow::leq("lorentz-branch-finite", 0.0,
                                     (std::isfinite(dst) && std::isfinite(src)) ? 1.0 : -1.0, 0.0));

  // Morrey-scale branch, dual targets: printed exponents and the two-layer
  // composition exponents; disagreements are reported, not reconciled.
  if (s > q) {
    const double printed_q = theta * q / (s - q);
    const double composed_q = s * q / (s - q);
    rep.params["morrey-printed-target-q"] = printed_q;
    rep.params["morrey-printed-target-gamma"] = theta;
    rep.params["morrey-composed-target-q"] = composed_q;
    rep.params["morrey-composed-target-gamma"] = s;
    if (printed_q > 1.0)
      rep.params["morrey-printed-target"] = lorentz_functional(dumag, printed_q, theta).value;
    rep.params["morrey-composed-target"] = lorentz_functional(dumag, composed_q, s).value;
    rep.notes.push_back("printed target (theta q / (s - q), theta) kept verbatim next to the "
                        "composition target (s q / (s - q), s)");
  }
  return rep;
}

}  // namespace ellipot
