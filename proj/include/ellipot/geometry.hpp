#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "ellipot/errors.hpp"

namespace ellipot {

/// Maximum spatial dimension handled by the toolkit.
inline constexpr int kMaxDim = 4;

/// Small fixed-capacity point/vector in R^n, 2 <= n <= 4.
struct Vec {
  std::array<double, kMaxDim> x{};
  int n = 2;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(double a, double b) : x{a, b, 0.0, 0.0}, n(2) {}
  Vec(double a, double b, double c) : x{a, b, c, 0.0}, n(3) {}
  Vec(double a, double b, double c, double d) : x{a, b, c, d}, n(4) {}

  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  Vec operator+(const Vec& o) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = x[static_cast<std::size_t>(i)] + o[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = x[static_cast<std::size_t>(i)] - o[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = x[static_cast<std::size_t>(i)] * s;
    return r;
  }
  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[static_cast<std::size_t>(i)] * o[i];
    return s;
  }
  double norm_sq() const { return dot(*this); }
  double norm() const { return std::sqrt(norm_sq()); }

  static Vec zero(int dim) { return Vec(dim); }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

/// Euclidean ball; averaging and potentials use cell centers strictly inside.
struct Ball {
  Vec center;
  double radius = 0.0;

  Ball() = default;
  Ball(Vec c, double r) : center(c), radius(r) {
    if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  }
  bool contains(const Vec& p) const { return (p - center).norm_sq() < radius * radius; }
};

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  // pi^{n/2} / Gamma(n/2 + 1)
  const double pi = 3.14159265358979323846;
  return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace ellipot
