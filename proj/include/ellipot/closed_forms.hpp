#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "ellipot/geometry.hpp"
#include "ellipot/sym_matrix.hpp"

namespace ellipot {

/// Analytic profile with exact derivatives, used to manufacture right-hand
/// sides and to measure solver error against ground truth.
struct ClosedForm {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<SymMatrix(const Vec&)> hess;
};

namespace closed_forms {

inline ClosedForm affine(int dim, const Vec& slope, double offset) {
  ClosedForm f;
  f.name = "affine";
  f.value = [slope, offset](const Vec& x) { return slope.dot(x) + offset; };
  f.grad = [slope](const Vec&) { return slope; };
  f.hess = [dim](const Vec&) { return SymMatrix::identity(dim) * 0.0; };
  return f;
}

/// u(x) = x^T Q x / 2 + b . x + c with constant Hessian Q.
inline ClosedForm quadratic(const SymMatrix& q, const Vec& b, double c) {
  ClosedForm f;
  f.name = "quadratic";
  f.value = [q, b, c](const Vec& x) { return 0.5 * q.quad(x) + b.dot(x) + c; };
  f.grad = [q, b](const Vec& x) {
    Vec g(x.n);
    for (int i = 0; i < x.n; ++i) {
      g[i] = b[i];
      for (int j = 0; j < x.n; ++j) g[i] += q.at(i, j) * x[j];
    }
    return g;
  };
  f.hess = [q](const Vec&) { return q; };
  return f;
}

/// |x|^2, the workhorse exactness case (Hessian 2 I).
inline ClosedForm abs_square(int dim) {
  ClosedForm f = quadratic(SymMatrix::identity(dim) * 2.0, Vec::zero(dim), 0.0);
  f.name = "abs-square";
  return f;
}

/// sin(x1) cos(x2) on the first two coordinates; smooth, non-polynomial.
inline ClosedForm sin_cos(int dim) {
  ClosedForm f;
  f.name = "sin-cos";
  f.value = [](const Vec& x) { return std::sin(x[0]) * std::cos(x[1]); };
  f.grad = [](const Vec& x) {
    Vec g(x.n);
    g[0] = std::cos(x[0]) * std::cos(x[1]);
    g[1] = -std::sin(x[0]) * std::sin(x[1]);
    return g;
  };
  f.hess = [dim](const Vec& x) {
    SymMatrix h(dim);
    h.at(0, 0) = -std::sin(x[0]) * std::cos(x[1]);
    h.at(1, 1) = -std::sin(x[0]) * std::cos(x[1]);
    h.at(0, 1) = -std::cos(x[0]) * std::sin(x[1]);
    return h;
  };
  return f;
}

/// |x|^4 with Hessian 4 |x|^2 I + 8 x x^T.
inline ClosedForm radial_fourth(int dim) {
  ClosedForm f;
  f.name = "radial-fourth";
  f.value = [](const Vec& x) {
    const double t = x.norm_sq();
    return t * t;
  };
  f.grad = [](const Vec& x) { return x * (4.0 * x.norm_sq()); };
  f.hess = [dim](const Vec& x) {
    SymMatrix h = SymMatrix::identity(dim) * (4.0 * x.norm_sq());
    return h + SymMatrix::outer(x) * 8.0;
  };
  return f;
}

/// Re (x1 + i x2)^3 = x1^3 - 3 x1 x2^2: harmonic in the first two coordinates.
inline ClosedForm harmonic_cubic(int dim) {
  ClosedForm f;
  f.name = "harmonic-cubic";
  f.value = [](const Vec& x) { return x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]; };
  f.grad = [](const Vec& x) {
    Vec g(x.n);
    g[0] = 3.0 * x[0] * x[0] - 3.0 * x[1] * x[1];
    g[1] = -6.0 * x[0] * x[1];
    return g;
  };
  f.hess = [dim](const Vec& x) {
    SymMatrix h(dim);
    h.at(0, 0) = 6.0 * x[0];
    h.at(1, 1) = -6.0 * x[0];
    h.at(0, 1) = -6.0 * x[1];
    return h;
  };
  return f;
}

}  // namespace closed_forms
}  // namespace ellipot
