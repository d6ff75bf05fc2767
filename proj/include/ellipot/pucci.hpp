#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/grid.hpp"
#include "ellipot/random.hpp"
#include "ellipot/report.hpp"
#include "ellipot/sym_matrix.hpp"

namespace ellipot {

/// Uniform ellipticity band 0 < lambda <= Lambda.
struct EllipticityPair {
  double lambda = 1.0;
  double Lambda = 1.0;

  EllipticityPair() = default;
  EllipticityPair(double lam, double Lam) : lambda(lam), Lambda(Lam) {
    if (!(lam > 0.0) || !(Lam >= lam)) throw DomainError("need 0 < lambda <= Lambda");
  }
};

/// Minimal extremal operator: lambda * (positive eigenvalues) + Lambda * (negative ones).
inline double pucci_minus(const SymMatrix& x, const EllipticityPair& ell) {
  const EigenSym eig = eigen_sym(x);
  double s = 0.0;
  for (int i = 0; i < eig.n; ++i) {
    const double ev = eig.values[static_cast<std::size_t>(i)];
    s += (ev > 0.0) ? ell.lambda * ev : ell.Lambda * ev;
  }
  return s;
}

/// Maximal extremal operator: Lambda * (positive eigenvalues) + lambda * (negative ones).
inline double pucci_plus(const SymMatrix& x, const EllipticityPair& ell) {
  const EigenSym eig = eigen_sym(x);
  double s = 0.0;
  for (int i = 0; i < eig.n; ++i) {
    const double ev = eig.values[static_cast<std::size_t>(i)];
    s += (ev > 0.0) ? ell.Lambda * ev : ell.lambda * ev;
  }
  return s;
}

/// Coefficient matrix A(x): constant, tabulated per cell, or analytic. The
/// analytic form exists so one coefficient definition can follow a whole grid
/// ladder; it evaluates through the callback, not through samples.
class MatrixCoefficient {
 public:
  MatrixCoefficient() = default;

  static MatrixCoefficient constant(const SymMatrix& a, std::string description = "constant") {
    MatrixCoefficient c;
    c.constant_ = a;
    c.mode_ = Mode::kConstant;
    c.description_ = std::move(description);
    return c;
  }

  static MatrixCoefficient analytic(int dim, std::function<SymMatrix(const Vec&)> fn,
                                    std::string description) {
    MatrixCoefficient c;
    c.constant_ = SymMatrix::identity(dim);
    c.fn_ = std::move(fn);
    c.mode_ = Mode::kAnalytic;
    c.description_ = std::move(description);
    return c;
  }

  static MatrixCoefficient tabulated(const Grid& g, const std::function<SymMatrix(const Vec&)>& fn,
                                     std::string description = "tabulated") {
    MatrixCoefficient c;
    c.grid_ = g;
    c.table_.reserve(g.cell_count());
    for (std::size_t i = 0; i < g.cell_count(); ++i) c.table_.push_back(fn(g.center(i)));
    c.constant_ = c.table_.front();
    c.mode_ = Mode::kTabulated;
    c.description_ = std::move(description);
    return c;
  }

  SymMatrix eval(const Vec& x) const {
    switch (mode_) {
      case Mode::kConstant:
        return constant_;
      case Mode::kAnalytic:
        return fn_(x);
      case Mode::kTabulated: {
        auto idx = grid_.cell_of(x);
        for (int d = 0; d < grid_.dim(); ++d) {
          auto& i = idx[static_cast<std::size_t>(d)];
          if (i < 0) i = 0;
          if (i >= grid_.cells(d)) i = grid_.cells(d) - 1;
        }
        return table_[grid_.flat(idx)];
      }
    }
    return constant_;
  }

  bool x_dependent() const { return mode_ != Mode::kConstant; }
  const std::string& description() const { return description_; }

  /// Spectral containment lambda I <= A <= Lambda I at x, within tol.
  bool in_band(const Vec& x, const EllipticityPair& ell, double tol = 1e-9) const {
    const EigenSym eig = eigen_sym(eval(x));
    const double top = eig.values[0];
    const double bottom = eig.values[static_cast<std::size_t>(eig.n - 1)];
    return bottom >= ell.lambda - tol && top <= ell.Lambda + tol;
  }

 private:
  enum class Mode { kConstant, kAnalytic, kTabulated };
  Mode mode_ = Mode::kConstant;
  SymMatrix constant_ = SymMatrix::identity(2);
  std::function<SymMatrix(const Vec&)> fn_;
  Grid grid_;
  std::vector<SymMatrix> table_;
  std::string description_;
};

/// Operator family F(x, X), uniformly elliptic with F(x, 0) = 0. Forms:
/// a single trace-linear tr(A(x)X), a Bellman max over trace forms, an Isaacs
/// min-max over groups of trace forms, the two extremal operators, and the
/// ball average of another operator.
struct OperatorSpec {
  enum class Form { kTraceLinear, kBellman, kIsaacs, kPucciPlus, kPucciMinus, kAveraged };

  Form form = Form::kTraceLinear;
  int dim = 2;
  EllipticityPair ell;
  std::vector<MatrixCoefficient> coeffs;                 // trace-linear (1) or Bellman (>=1)
  std::vector<std::vector<MatrixCoefficient>> families;  // Isaacs: min over groups, max inside
  std::shared_ptr<const OperatorSpec> base;              // averaged form only
  std::vector<Vec> average_points;                       // frozen in-box cell centers
  std::string label;

  bool x_dependent() const {
    switch (form) {
      case Form::kPucciPlus:
      case Form::kPucciMinus:
      case Form::kAveraged:
        return false;  // the average is a fixed operator in X
      case Form::kTraceLinear:
      case Form::kBellman: {
        for (const auto& c : coeffs)
          if (c.x_dependent()) return true;
        return false;
      }
      case Form::kIsaacs: {
        for (const auto& f : families)
          for (const auto& c : f)
            if (c.x_dependent()) return true;
        return false;
      }
    }
    return false;
  }
};

inline double evaluate_operator(const OperatorSpec& op, const Vec& x, const SymMatrix& X) {
  if (X.dim() != op.dim) throw DomainError("operator/matrix dimension mismatch");
  switch (op.form) {
    case OperatorSpec::Form::kTraceLinear:
      return op.coeffs.front().eval(x).inner(X);
    case OperatorSpec::Form::kBellman: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& c : op.coeffs) best = std::max(best, c.eval(x).inner(X));
      return best;
    }
    case OperatorSpec::Form::kIsaacs: {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& fam : op.families) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& c : fam) best = std::max(best, c.eval(x).inner(X));
        worst = std::min(worst, best);
      }
      return worst;
    }
    case OperatorSpec::Form::kPucciPlus:
      return pucci_plus(X, op.ell);
    case OperatorSpec::Form::kPucciMinus:
      return pucci_minus(X, op.ell);
    case OperatorSpec::Form::kAveraged: {
      double sum = 0.0;
      for (const Vec& p : op.average_points) sum += evaluate_operator(*op.base, p, X);
      return sum / static_cast<double>(op.average_points.size());
    }
  }
  return 0.0;
}

inline OperatorSpec make_trace_linear(int dim, MatrixCoefficient a, const EllipticityPair& ell,
                                      std::string label = "trace-linear") {
  OperatorSpec op;
  op.form = OperatorSpec::Form::kTraceLinear;
  op.dim = dim;
  op.ell = ell;
  op.coeffs.push_back(std::move(a));
  op.label = std::move(label);
  return op;
}

inline OperatorSpec make_bellman(int dim, std::vector<MatrixCoefficient> as,
                                 const EllipticityPair& ell, std::string label = "bellman") {
  if (as.empty()) throw DomainError("bellman form needs at least one coefficient");
  OperatorSpec op;
  op.form = OperatorSpec::Form::kBellman;
  op.dim = dim;
  op.ell = ell;
  op.coeffs = std::move(as);
  op.label = std::move(label);
  return op;
}

inline OperatorSpec make_isaacs(int dim, std::vector<std::vector<MatrixCoefficient>> families,
                                const EllipticityPair& ell, std::string label = "isaacs") {
  if (families.empty()) throw DomainError("isaacs form needs at least one family");
  for (const auto& f : families)
    if (f.empty()) throw DomainError("isaacs families must be nonempty");
  OperatorSpec op;
  op.form = OperatorSpec::Form::kIsaacs;
  op.dim = dim;
  op.ell = ell;
  op.families = std::move(families);
  op.label = std::move(label);
  return op;
}

inline OperatorSpec make_pucci(int dim, const EllipticityPair& ell, bool plus) {
  OperatorSpec op;
  op.form = plus ? OperatorSpec::Form::kPucciPlus : OperatorSpec::Form::kPucciMinus;
  op.dim = dim;
  op.ell = ell;
  op.label = plus ? "pucci-plus" : "pucci-minus";
  return op;
}

/// Freeze the ball average (F)_B(Y) = mean of F(x, Y) over in-box cell centers
/// of B. The result is an x-independent operator with the same ellipticity band.
inline OperatorSpec averaged_operator(const OperatorSpec& op, const Grid& g, const Ball& b) {
  OperatorSpec out;
  out.form = OperatorSpec::Form::kAveraged;
  out.dim = op.dim;
  out.ell = op.ell;
  out.base = std::make_shared<OperatorSpec>(op);
  out.label = op.label + " averaged";
  visit_ball(g, b, [&](std::size_t cell, const Vec& p) {
    if (cell != kOutside) out.average_points.push_back(p);
  });
  if (out.average_points.empty()) throw DomainError("averaging ball misses the grid");
  return out;
}

/// Random symmetric probe with unit Frobenius norm.
inline SymMatrix random_unit_sym(int dim, Rng& rng) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) m.at(i, j) = rng.normal();
  const double f = m.frobenius_norm();
  if (f <= 0.0) return SymMatrix::identity(dim) * (1.0 / std::sqrt(static_cast<double>(dim)));
  return m * (1.0 / f);
}

/// Sample the two-sided extremal-operator sandwich
///   pucci_minus(X - Y) <= F(x, X) - F(x, Y) <= pucci_plus(X - Y)
/// together with F(x, 0) = 0, over canonical rank-one probes plus random
/// symmetric pairs. Any claimed band that is too narrow for the coefficients
/// produces a failing row.
inline AuditReport ellipticity_audit(const OperatorSpec& op, const std::vector<Vec>& xs,
                                     int random_pairs, std::uint64_t seed, double tol = 1e-9) {
  if (xs.empty()) throw DomainError("ellipticity audit needs sample points");
  AuditReport rep;
  rep.name = "ellipticity-sandwich";
  rep.params["lambda"] = op.ell.lambda;
  rep.params["Lambda"] = op.ell.Lambda;
  rep.params["samples"] = static_cast<double>(xs.size());
  rep.params["random_pairs"] = static_cast<double>(random_pairs);
  rep.params["tol"] = tol;

  std::vector<std::pair<SymMatrix, SymMatrix>> probes;
  const SymMatrix zero = SymMatrix::identity(op.dim) * 0.0;
  for (int i = 0; i < op.dim; ++i) {
    Vec e(op.dim);
    e[i] = 1.0;
    probes.emplace_back(SymMatrix::outer(e), zero);
    probes.emplace_back(-SymMatrix::outer(e), zero);
  }
  probes.emplace_back(SymMatrix::identity(op.dim), zero);
  Rng rng(seed);
  for (int k = 0; k < random_pairs; ++k) {
    SymMatrix a = random_unit_sym(op.dim, rng) * rng.uniform(0.5, 3.0);
    SymMatrix b = random_unit_sym(op.dim, rng) * rng.uniform(0.5, 3.0);
    probes.emplace_back(a, b);
  }

  double worst_low = std::numeric_limits<double>::infinity();
  double worst_high = std::numeric_limits<double>::infinity();
  double worst_zero = 0.0;
  long violations = 0;
  for (const Vec& x : xs) {
    worst_zero = std::max(worst_zero, std::fabs(evaluate_operator(op, x, zero)));
    for (const auto& [X, Y] : probes) {
      const double diff = evaluate_operator(op, x, X) - evaluate_operator(op, x, Y);
      const SymMatrix d = X - Y;
      const double low = pucci_minus(d, op.ell);
      const double high = pucci_plus(d, op.ell);
      worst_low = std::min(worst_low, diff - low);
      worst_high = std::min(worst_high, high - diff);
      if (diff < low - tol || diff > high + tol) ++violations;
    }
  }
  rep.checks.push_back(CheckRow::leq("lower-sandwich-margin", -worst_low, tol, 0.0));
  rep.checks.push_back(CheckRow::leq("upper-sandwich-margin", -worst_high, tol, 0.0));
  rep.checks.push_back(CheckRow::leq("zero-at-zero", worst_zero, tol, 0.0));
  rep.params["violations"] = static_cast<double>(violations);
  rep.notes.push_back("probes: rank-one +/- per axis, identity, and random unit-Frobenius pairs");
  return rep;
}

/// Mean-oscillation table of the coefficient dependence x -> F(x, .),
/// normalized per probe by the Frobenius norm of the probe matrix.
struct CoefficientModulus {
  std::vector<double> radii;  // ascending
  std::vector<double> omega;  // nondecreasing: sup over all radii <= R
  std::vector<std::string> notes;

  double top() const { return omega.empty() ? 0.0 : omega.back(); }
  double at(double radius) const {
    double best = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (radii[i] <= radius + 1e-15) best = omega[i];
    return best;
  }
};

/// Estimate omega(R) = sup over balls and unit probes of the mean deviation of
/// F(., Y) from its ball average. Probes are random with unit Frobenius norm,
/// centers run over a coarsened lattice, radii over a dyadic ladder; the result
/// is a lower bound of the true sup by construction.
inline CoefficientModulus coefficient_bmo_modulus(const OperatorSpec& op, const Grid& g, double R,
                                                  std::uint64_t seed, int probes_per_ball = 64,
                                                  int center_stride = 4, int levels = 8) {
  if (!(R > 0.0)) throw DomainError("modulus radius must be positive");
  CoefficientModulus mod;
  std::vector<double> ladder;
  for (int k = levels; k >= 0; --k) {
    const double rho = R * std::pow(0.5, k);
    if (rho >= 2.0 * g.h()) ladder.push_back(rho);
  }
  if (ladder.empty()) throw ResolutionError("no modulus radius resolves at this spacing");

  // Probe centers: cell-center lattice, every center_stride-th cell per axis,
  // keeping only balls fully inside the box (exclusions noted below).
  std::vector<Vec> centers;
  {
    std::array<int, kMaxDim> idx{};
    for (int d = 0; d < g.dim(); ++d) idx[static_cast<std::size_t>(d)] = center_stride / 2;
    while (true) {
      centers.push_back(g.center(idx));
      int d = g.dim() - 1;
      while (d >= 0) {
        idx[static_cast<std::size_t>(d)] += center_stride;
        if (idx[static_cast<std::size_t>(d)] < g.cells(d)) break;
        idx[static_cast<std::size_t>(d)] = center_stride / 2;
        --d;
      }
      if (d < 0) break;
    }
  }

  Rng rng(seed);
  double running = 0.0;
  long excluded = 0;
  for (std::size_t li = 0; li < ladder.size(); ++li) {
    const double rho = ladder[li];
    for (const Vec& y : centers) {
      bool inside = true;
      for (int d = 0; d < g.dim(); ++d)
        if (y[d] - rho < g.lo(d) || y[d] + rho > g.hi(d)) inside = false;
      if (!inside) {
        ++excluded;
        continue;
      }
      std::vector<Vec> pts;
      visit_ball(g, Ball(y, rho), [&](std::size_t cell, const Vec& p) {
        if (cell != kOutside) pts.push_back(p);
      });
      if (pts.empty()) continue;
      Rng local = rng.split(li * 1000003ULL + static_cast<std::uint64_t>(&y - centers.data()));
      for (int k = 0; k < probes_per_ball; ++k) {
        const SymMatrix probe = random_unit_sym(op.dim, local);
        double mean = 0.0;
        std::vector<double> vals;
        vals.reserve(pts.size());
        for (const Vec& p : pts) {
          vals.push_back(evaluate_operator(op, p, probe));
          mean += vals.back();
        }
        mean /= static_cast<double>(vals.size());
        double dev = 0.0;
        for (double v : vals) dev += std::fabs(v - mean);
        dev /= static_cast<double>(vals.size());
        running = std::max(running, dev);
      }
    }
    mod.radii.push_back(rho);
    mod.omega.push_back(running);  // sup over nested probe sets, so nondecreasing
  }
  mod.notes.push_back("lower bound of the oscillation sup: random unit-Frobenius probes (" +
                      std::to_string(probes_per_ball) + " per ball), centers every " +
                      std::to_string(center_stride) + " cells, dyadic radii");
  mod.notes.push_back("matrix size |Y| measured in the Frobenius norm");
  mod.notes.push_back("balls crossing the boundary excluded: " + std::to_string(excluded));
  return mod;
}

}  // namespace ellipot
