#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ellipot/closed_forms.hpp"
#include "ellipot/solver.hpp"

using namespace ellipot;

namespace {

OperatorSpec laplacian(int dim) {
  return make_trace_linear(dim, MatrixCoefficient::constant(SymMatrix::identity(dim)),
                           EllipticityPair{1.0, 1.0});
}

OperatorSpec two_member_bellman(int dim) {
  SymMatrix d(dim);
  d.at(0, 0) = 2.0;
  for (int i = 1; i < dim; ++i) d.at(i, i) = 1.0;
  std::vector<MatrixCoefficient> as = {MatrixCoefficient::constant(SymMatrix::identity(dim)),
                                       MatrixCoefficient::constant(d)};
  return make_bellman(dim, std::move(as), EllipticityPair{1.0, 2.0});
}

double max_error(const GridField& u, const ClosedForm& exact) {
  const Grid& g = u.grid();
  double err = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i)
    err = std::max(err, std::fabs(u.at(i) - exact.value(g.center(i))));
  return err;
}

}  // namespace

TEST_CASE("stencil directions cover axes and pair diagonals") {
  const auto dirs2 = stencil_directions(2);
  REQUIRE(dirs2.size() == 4);  // two axes, two signed diagonals
  const auto dirs3 = stencil_directions(3);
  REQUIRE(dirs3.size() == 9);
  for (const auto& d : dirs3) {
    int nz = 0;
    for (int k = 0; k < 3; ++k) nz += d.off[static_cast<std::size_t>(k)] != 0;
    CHECK((nz == 1 || nz == 2));
    CHECK(d.len2 == Catch::Approx(static_cast<double>(nz)));
  }
}

TEST_CASE("matrix decomposition reproduces diagonally dominant matrices") {
  // sum_d gamma_d vhat vhat^T over unit stencil directions recovers A
  // exactly when the diagonal carries the off-diagonal mass
  SymMatrix a(2);
  a.at(0, 0) = 2.0;
  a.at(1, 1) = 3.0;
  a.at(0, 1) = 0.5;
  double gamma[kMaxDirs];
  bool clamped = true;
  decompose_matrix(a, 2, gamma, &clamped);
  CHECK_FALSE(clamped);
  const auto dirs = stencil_directions(2);
  SymMatrix back(2);
  for (std::size_t d = 0; d < dirs.size(); ++d)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j)
        back.at(i, j) += gamma[d] * dirs[d].off[static_cast<std::size_t>(i)] *
                         dirs[d].off[static_cast<std::size_t>(j)] / dirs[d].len2;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) CHECK(back.at(i, j) == Catch::Approx(a.at(i, j)).margin(1e-14));

  // a matrix whose off-diagonal exceeds the diagonal gets clamped instead
  SymMatrix bad(2);
  bad.at(0, 0) = 1.0;
  bad.at(1, 1) = 1.0;
  bad.at(0, 1) = 2.0;
  decompose_matrix(bad, 2, gamma, &clamped);
  CHECK(clamped);
  for (int d = 0; d < 4; ++d) CHECK(gamma[d] >= 0.0);
}

TEST_CASE("poisson problem with a quadratic profile is solved to round-off") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 64);
  const ClosedForm exact = closed_forms::abs_square(2);
  const Problem prob = manufacture(laplacian(2), g, exact);
  // the manufactured right-hand side of the quadratic is the constant 4
  CHECK(prob.rhs.at(0) == Catch::Approx(4.0).margin(1e-13));
  CHECK(prob.rhs.at(g.cell_count() / 2) == Catch::Approx(4.0).margin(1e-13));

  const SolveResult res = solve(prob);
  REQUIRE(res.converged);
  CHECK(max_error(res.u, exact) < 1e-8);
}

TEST_CASE("affine profiles are reproduced exactly by any elliptic member") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 48);
  const ClosedForm exact = closed_forms::affine(2, Vec(2.0, -3.0), 0.7);
  for (const OperatorSpec& op : {laplacian(2), two_member_bellman(2),
                                 make_pucci(2, EllipticityPair{1.0, 2.0}, true)}) {
    const Problem prob = manufacture(op, g, exact);
    CHECK(prob.rhs.at(0) == Catch::Approx(0.0).margin(1e-13));
    const SolveResult res = solve(prob);
    REQUIRE(res.converged);
    CHECK(max_error(res.u, exact) < 1e-9);
  }
}

TEST_CASE("manufactured right-hand sides match hand computations") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 32);

  // extremal operator of a fixed-curvature saddle: 2 Lambda - 1 lambda = 3
  SymMatrix q(2);
  q.at(0, 0) = 2.0;
  q.at(1, 1) = -1.0;
  const ClosedForm saddle = closed_forms::quadratic(q, Vec::zero(2), 0.0);
  const Problem pucci_prob = manufacture(make_pucci(2, EllipticityPair{1.0, 2.0}, true), g, saddle);
  for (std::size_t i : {std::size_t{0}, g.cell_count() / 3, g.cell_count() - 1})
    CHECK(pucci_prob.rhs.at(i) == Catch::Approx(3.0).margin(1e-12));

  // laplacian of |x|^4 in two dimensions: 16 |x|^2
  const ClosedForm r4 = closed_forms::radial_fourth(2);
  const Problem r4_prob = manufacture(laplacian(2), g, r4);
  const Vec probe = g.center(g.cell_count() / 2 + 5);
  CHECK(r4_prob.rhs.at(g.cell_count() / 2 + 5) ==
        Catch::Approx(16.0 * probe.norm_sq()).margin(1e-12));
}

TEST_CASE("bellman solve converges at second order on a smooth profile") {
  const ClosedForm exact = closed_forms::sin_cos(2);
  const OperatorSpec op = two_member_bellman(2);
  std::vector<Grid> grids = {Grid::cube(2, -1.0, 1.0, 32), Grid::cube(2, -1.0, 1.0, 64),
                             Grid::cube(2, -1.0, 1.0, 128)};
  const ConvergenceStudy study =
      convergence_study(grids, [&](const Grid& g) { return manufacture(op, g, exact); }, exact);
  REQUIRE_FALSE(study.fit_skipped);
  REQUIRE(study.rows.size() == 3);
  for (const auto& row : study.rows) CHECK(row.max_error < 1e-3);
  CHECK(study.fitted_order > 1.7);
  CHECK(study.fitted_order < 2.2);
}

TEST_CASE("quadratic profiles leave the order fit skipped") {
  const ClosedForm exact = closed_forms::abs_square(2);
  std::vector<Grid> grids = {Grid::cube(2, -1.0, 1.0, 32), Grid::cube(2, -1.0, 1.0, 64)};
  const ConvergenceStudy study = convergence_study(
      grids, [&](const Grid& g) { return manufacture(laplacian(2), g, exact); }, exact);
  CHECK(study.fit_skipped);
}

TEST_CASE("raising the right-hand side lowers the solution") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 48);
  const OperatorSpec op = two_member_bellman(2);
  const ClosedForm exact = closed_forms::sin_cos(2);
  Problem p1 = manufacture(op, g, exact);
  Problem p2 = p1;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const Vec x = g.center(i);
    p2.rhs.at(i) += 1.0 + std::sin(x[0]) * std::cos(x[1]);  // nonnegative bump
  }
  const SolveResult r1 = solve(p1);
  const SolveResult r2 = solve(p2);
  REQUIRE(r1.converged);
  REQUIRE(r2.converged);
  for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(r2.u.at(i) <= r1.u.at(i) + 1e-9);
}

TEST_CASE("solver reports are well formed") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 32);
  const Problem prob = manufacture(laplacian(2), g, closed_forms::sin_cos(2));
  const SolveResult res = solve(prob);
  REQUIRE(res.converged);
  CHECK(res.policy_iterations >= 1);
  CHECK(res.sweeps >= 1);
  CHECK(res.residual <= 1e-10);
  CHECK_FALSE(res.residual_history.empty());
  CHECK(res.omega > 1.0);
  CHECK(res.omega < 2.0);
  // the reported residual agrees with an independent re-evaluation
  const DiscreteOperator dop(prob.op, g);
  CHECK(discrete_residual(dop, g, res.u, prob.rhs) == Catch::Approx(res.residual).margin(1e-13));
}

TEST_CASE("iteration budget overruns raise a convergence error") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 48);
  const Problem prob = manufacture(laplacian(2), g, closed_forms::sin_cos(2));
  SolveOptions opt;
  opt.max_policy_iterations = 2;
  opt.max_sweeps = 3;
  try {
    solve(prob, opt);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.residual_history().empty());
  }
}

TEST_CASE("frozen coefficient solve reproduces harmonic profiles") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 128);
  const ClosedForm exact = closed_forms::harmonic_cubic(2);
  const Problem prob = manufacture(laplacian(2), g, exact);
  const SolveResult res = solve(prob);
  REQUIRE(res.converged);

  // constant coefficients: the averaged operator is the operator itself and
  // the zero right-hand side matches, so the distance sits at solver accuracy
  const FrozenCompare cmp = frozen_coefficient_solve(prob, res.u, Ball(Vec(0.0, 0.0), 0.5));
  CHECK(cmp.subgrid.cells(0) >= 32);
  CHECK(cmp.distance < 1e-7);

  CHECK_THROWS_AS(frozen_coefficient_solve(prob, res.u, Ball(Vec(0.9, 0.0), 0.5)),
                  ResolutionError);  // ball leaves the grid
  CHECK_THROWS_AS(frozen_coefficient_solve(prob, res.u, Ball(Vec(0.0, 0.0), 0.2)),
                  ResolutionError);  // sub-grid too small
}

TEST_CASE("frozen coefficient distance grows with the oscillation amplitude") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 128);
  const ClosedForm bdry = closed_forms::harmonic_cubic(2);

  // the oscillation must be anisotropic: a scalar multiple of the identity
  // would divide out of the zero right-hand side equation entirely
  auto osc_operator = [&](double amp) {
    auto fn = [amp](const Vec& x) {
      SymMatrix a = SymMatrix::identity(2);
      a.at(0, 0) = 1.0 + amp * std::sin(4.0 * x[0]) * std::cos(4.0 * x[1]);
      return a;
    };
    return make_trace_linear(2, MatrixCoefficient::analytic(2, fn, "oscillating axis weight"),
                             EllipticityPair{0.5, 2.0});
  };

  auto distance_for = [&](double amp) {
    const OperatorSpec op = osc_operator(amp);
    GridField rhs(g, 1);
    GridField bd = GridField::tabulate(g, [&](const Vec& x) { return bdry.value(x); });
    const Problem prob(op, std::move(rhs), std::move(bd));
    const SolveResult res = solve(prob);
    REQUIRE(res.converged);
    return frozen_coefficient_solve(prob, res.u, Ball(Vec(0.0, 0.0), 0.5)).distance;
  };

  const double d0 = distance_for(0.0);
  const double d1 = distance_for(0.1);
  const double d3 = distance_for(0.3);
  CHECK(d0 < 1e-7);
  CHECK(d1 > 10.0 * d0);
  CHECK(d3 > d1);
}
