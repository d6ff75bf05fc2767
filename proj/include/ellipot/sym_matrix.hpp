#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>

#include "ellipot/errors.hpp"
#include "ellipot/geometry.hpp"

namespace ellipot {

/// Dense symmetric n x n matrix, 2 <= n <= 4, packed upper triangle.
class SymMatrix {
 public:
  SymMatrix() : n_(2) {}
  explicit SymMatrix(int n) : n_(n) {
    if (n < 2 || n > kMaxDim) throw DomainError("matrix dimension must be in [2,4]");
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static SymMatrix diagonal(std::initializer_list<double> d) {
    SymMatrix m(static_cast<int>(d.size()));
    int i = 0;
    for (double v : d) m.at(i, i) = v, ++i;
    return m;
  }

  /// Rank-one v v^T (not normalized).
  static SymMatrix outer(const Vec& v) {
    SymMatrix m(v.n);
    for (int i = 0; i < v.n; ++i)
      for (int j = i; j < v.n; ++j) m.at(i, j) = v[i] * v[j];
    return m;
  }

  int dim() const { return n_; }

  double& at(int i, int j) { return a_[pack(i, j)]; }
  double at(int i, int j) const { return a_[pack(i, j)]; }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += at(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += at(i, j) * at(i, j);
    return std::sqrt(s);
  }

  /// Quadratic form v^T X v.
  double quad(const Vec& v) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += v[i] * at(i, j) * v[j];
    return s;
  }

  /// Frobenius inner product tr(A X); the workhorse of trace-form operators.
  double inner(const SymMatrix& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += at(i, j) * o.at(i, j);
    return s;
  }

  SymMatrix operator+(const SymMatrix& o) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
  }
  SymMatrix operator-(const SymMatrix& o) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
  }
  SymMatrix operator*(double s) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
    return r;
  }
  SymMatrix operator-() const { return *this * -1.0; }

 private:
  std::size_t pack(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-start offsets for the packed upper triangle
    return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
  }

  int n_;
  std::array<double, kMaxDim*(kMaxDim + 1) / 2> a_{};
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

/// Spectral decomposition X = Q diag(values) Q^T; values sorted descending,
/// vectors[j] is the eigenvector column for values[j].
struct EigenSym {
  int n = 0;
  std::array<double, kMaxDim> values{};
  std::array<Vec, kMaxDim> vectors{};
};

/// Householder tridiagonalization followed by implicit-shift QL. Sizes are at
/// most 4 x 4 here, so the explicit full-matrix similarity updates below trade
/// speed for transparency.
inline EigenSym eigen_sym(const SymMatrix& x) {
  const int n = x.dim();
  double m[kMaxDim][kMaxDim] = {};
  double q[kMaxDim][kMaxDim] = {};
  for (int i = 0; i < n; ++i) {
    q[i][i] = 1.0;
    for (int j = 0; j < n; ++j) m[i][j] = x.at(i, j);
  }

  // Reduce to tridiagonal form: M <- H M H, Q <- Q H per Householder step.
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm += m[i][k] * m[i][k];
    xnorm = std::sqrt(xnorm);
    if (xnorm <= 0.0) continue;
    double v[kMaxDim] = {};
    const double alpha = (m[k + 1][k] >= 0.0) ? -xnorm : xnorm;
    for (int i = k + 1; i < n; ++i) v[i] = m[i][k];
    v[k + 1] -= alpha;
    double vnorm = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm += v[i] * v[i];
    vnorm = std::sqrt(vnorm);
    if (vnorm <= xnorm * 1e-15) continue;
    for (int i = k + 1; i < n; ++i) v[i] /= vnorm;

    double h[kMaxDim][kMaxDim] = {};
    for (int i = 0; i < n; ++i) h[i][i] = 1.0;
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) h[i][j] -= 2.0 * v[i] * v[j];

    double t[kMaxDim][kMaxDim] = {};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += h[i][l] * m[l][j];
        t[i][j] = s;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += t[i][l] * h[l][j];
        m[i][j] = s;
      }
    for (int i = 0; i < n; ++i) {
      double row[kMaxDim];
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += q[i][l] * h[l][j];
        row[j] = s;
      }
      for (int j = 0; j < n; ++j) q[i][j] = row[j];
    }
  }

  double d[kMaxDim] = {};
  double e[kMaxDim] = {};  // e[i] couples d[i] and d[i+1]; e[n-1] = 0
  for (int i = 0; i < n; ++i) d[i] = m[i][i];
  for (int i = 0; i + 1 < n; ++i) e[i] = m[i][i + 1];

  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int mm = l;
      for (; mm < n - 1; ++mm) {
        const double dd = std::fabs(d[mm]) + std::fabs(d[mm + 1]);
        if (std::fabs(e[mm]) <= eps * dd) break;
      }
      if (mm == l) break;
      if (++iter > 60) throw ConvergenceError("eigen iteration failed to settle");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = mm - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[mm] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (int k = 0; k < n; ++k) {
          f = q[k][i + 1];
          q[k][i + 1] = s * q[k][i] + c * f;
          q[k][i] = c * q[k][i] - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[mm] = 0.0;
    }
  }

  EigenSym out;
  out.n = n;
  int order[kMaxDim] = {0, 1, 2, 3};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (d[order[j]] > d[order[i]]) std::swap(order[i], order[j]);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = d[order[j]];
    Vec col(n);
    for (int i = 0; i < n; ++i) col[i] = q[i][order[j]];
    out.vectors[static_cast<std::size_t>(j)] = col;
  }
  return out;
}

}  // namespace ellipot
