#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/geometry.hpp"

namespace ellipot {

/// Sentinel index for lattice points outside the grid box (the zero extension).
inline constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();

/// Uniform Cartesian cell grid over an axis-aligned box. Values live at cell
/// centers lo + (i + 1/2) h. Flat indices are row-major with axis 0 slowest.
class Grid {
 public:
  Grid() = default;

  static Grid box(int dim, const std::array<double, kMaxDim>& lo,
                  const std::array<double, kMaxDim>& hi,
                  const std::array<int, kMaxDim>& cells) {
    Grid g;
    g.dim_ = dim;
    g.lo_ = lo;
    g.hi_ = hi;
    g.cells_ = cells;
    if (dim < 2 || dim > kMaxDim) throw DomainError("grid dimension must be in [2,4]");
    double h = 0.0;
    for (int d = 0; d < dim; ++d) {
      if (cells[static_cast<std::size_t>(d)] < 8) throw DomainError("need at least 8 cells per axis");
      const double span = hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)];
      if (!(span > 0.0)) throw DomainError("box extents must be positive");
      const double hd = span / cells[static_cast<std::size_t>(d)];
      if (d == 0)
        h = hd;
      else if (std::fabs(hd - h) > 1e-14 * std::max(1.0, std::fabs(h)))
        throw DomainError("cell spacing must be uniform across axes");
    }
    g.h_ = h;
    return g;
  }

  /// Cube [lo, hi]^dim with the same cell count on every axis.
  static Grid cube(int dim, double lo, double hi, int cells) {
    std::array<double, kMaxDim> l{}, u{};
    std::array<int, kMaxDim> c{};
    for (int d = 0; d < dim; ++d) {
      l[static_cast<std::size_t>(d)] = lo;
      u[static_cast<std::size_t>(d)] = hi;
      c[static_cast<std::size_t>(d)] = cells;
    }
    return box(dim, l, u, c);
  }

  int dim() const { return dim_; }
  double h() const { return h_; }
  double lo(int d) const { return lo_[static_cast<std::size_t>(d)]; }
  double hi(int d) const { return hi_[static_cast<std::size_t>(d)]; }
  int cells(int d) const { return cells_[static_cast<std::size_t>(d)]; }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dim_; ++d) n *= static_cast<std::size_t>(cells_[static_cast<std::size_t>(d)]);
    return n;
  }

  double cell_volume() const { return std::pow(h_, dim_); }

  std::size_t flat(const std::array<int, kMaxDim>& idx) const {
    std::size_t f = 0;
    for (int d = 0; d < dim_; ++d)
      f = f * static_cast<std::size_t>(cells_[static_cast<std::size_t>(d)]) +
          static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
    return f;
  }

  std::array<int, kMaxDim> unflat(std::size_t f) const {
    std::array<int, kMaxDim> idx{};
    for (int d = dim_ - 1; d >= 0; --d) {
      const auto c = static_cast<std::size_t>(cells_[static_cast<std::size_t>(d)]);
      idx[static_cast<std::size_t>(d)] = static_cast<int>(f % c);
      f /= c;
    }
    return idx;
  }

  bool in_bounds(const std::array<int, kMaxDim>& idx) const {
    for (int d = 0; d < dim_; ++d) {
      const int i = idx[static_cast<std::size_t>(d)];
      if (i < 0 || i >= cells_[static_cast<std::size_t>(d)]) return false;
    }
    return true;
  }

  Vec center(const std::array<int, kMaxDim>& idx) const {
    Vec p(dim_);
    for (int d = 0; d < dim_; ++d)
      p[d] = lo_[static_cast<std::size_t>(d)] + (idx[static_cast<std::size_t>(d)] + 0.5) * h_;
    return p;
  }

  Vec center(std::size_t f) const { return center(unflat(f)); }

  /// Index of the cell whose box contains p (floor convention on faces).
  std::array<int, kMaxDim> cell_of(const Vec& p) const {
    std::array<int, kMaxDim> idx{};
    for (int d = 0; d < dim_; ++d)
      idx[static_cast<std::size_t>(d)] =
          static_cast<int>(std::floor((p[d] - lo_[static_cast<std::size_t>(d)]) / h_));
    return idx;
  }

  bool same_layout(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int d = 0; d < dim_; ++d) {
      if (cells_[static_cast<std::size_t>(d)] != o.cells_[static_cast<std::size_t>(d)]) return false;
      if (std::fabs(lo_[static_cast<std::size_t>(d)] - o.lo_[static_cast<std::size_t>(d)]) > 1e-12) return false;
      if (std::fabs(hi_[static_cast<std::size_t>(d)] - o.hi_[static_cast<std::size_t>(d)]) > 1e-12) return false;
    }
    return true;
  }

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> lo_{}, hi_{};
  std::array<int, kMaxDim> cells_{};
  double h_ = 0.0;
};

/// Scalar or vector sample field over a grid; storage is cell-major with the
/// component index fastest.
class GridField {
 public:
  GridField() = default;
  GridField(const Grid& g, int components)
      : grid_(g), components_(components),
        data_(g.cell_count() * static_cast<std::size_t>(components), 0.0) {
    if (components < 1 || components > kMaxDim) throw DomainError("bad component count");
  }

  static GridField tabulate(const Grid& g, const std::function<double(const Vec&)>& f) {
    GridField out(g, 1);
    const std::size_t n = g.cell_count();
    for (std::size_t i = 0; i < n; ++i) out.data_[i] = f(g.center(i));
    out.check_finite();
    return out;
  }

  static GridField tabulate_vector(const Grid& g, const std::function<Vec(const Vec&)>& f) {
    GridField out(g, g.dim());
    const std::size_t n = g.cell_count();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec v = f(g.center(i));
      for (int c = 0; c < g.dim(); ++c) out.at(i, c) = v[c];
    }
    out.check_finite();
    return out;
  }

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  bool is_scalar() const { return components_ == 1; }
  std::string kind() const { return components_ == 1 ? "scalar" : "vector"; }

  double& at(std::size_t cell, int comp = 0) {
    return data_[cell * static_cast<std::size_t>(components_) + static_cast<std::size_t>(comp)];
  }
  double at(std::size_t cell, int comp = 0) const {
    return data_[cell * static_cast<std::size_t>(components_) + static_cast<std::size_t>(comp)];
  }

  Vec vec_at(std::size_t cell) const {
    Vec v(components_ == 1 ? grid_.dim() : components_);
    for (int c = 0; c < components_; ++c) v[c] = at(cell, c);
    return v;
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  void check_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("field contains a non-finite sample");
  }

 private:
  Grid grid_;
  int components_ = 0;
  std::vector<double> data_;
};

/// Visit every lattice cell center strictly inside the ball, including virtual
/// centers beyond the box (the zero extension); those arrive as kOutside.
/// Returns the number of visited centers.
template <class F>
std::size_t visit_ball(const Grid& g, const Ball& b, F&& f) {
  const int dim = g.dim();
  const double h = g.h();
  const double r2 = b.radius * b.radius;
  std::array<int, kMaxDim> klo{}, khi{};
  for (int d = 0; d < dim; ++d) {
    // centers lo + (k + 1/2) h within (c - r, c + r)
    klo[static_cast<std::size_t>(d)] =
        static_cast<int>(std::ceil((b.center[d] - b.radius - g.lo(d)) / h - 0.5));
    khi[static_cast<std::size_t>(d)] =
        static_cast<int>(std::floor((b.center[d] + b.radius - g.lo(d)) / h - 0.5));
  }
  std::size_t visited = 0;
  std::array<int, kMaxDim> idx = klo;
  if (dim < 2) return 0;
  while (true) {
    Vec p(dim);
    double d2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      p[d] = g.lo(d) + (idx[static_cast<std::size_t>(d)] + 0.5) * h;
      const double dd = p[d] - b.center[d];
      d2 += dd * dd;
    }
    if (d2 < r2) {
      ++visited;
      f(g.in_bounds(idx) ? g.flat(idx) : kOutside, p);
    }
    int d = dim - 1;
    while (d >= 0) {
      if (++idx[static_cast<std::size_t>(d)] <= khi[static_cast<std::size_t>(d)]) break;
      idx[static_cast<std::size_t>(d)] = klo[static_cast<std::size_t>(d)];
      --d;
    }
    if (d < 0) break;
  }
  return visited;
}

/// Lattice summary for one ball; means use the visited-center count as the
/// denominator, with out-of-box centers contributing zero.
struct BallStat {
  double mean = 0.0;
  std::size_t centers = 0;     // lattice centers inside the ball
  std::size_t real_cells = 0;  // those holding data
  bool clipped = false;        // ball leaves the grid box
};

inline BallStat ball_stats(const GridField& g, const Ball& b, int comp = 0) {
  BallStat s;
  double sum = 0.0;
  s.centers = visit_ball(g.grid(), b, [&](std::size_t cell, const Vec&) {
    if (cell == kOutside) {
      s.clipped = true;
    } else {
      ++s.real_cells;
      sum += g.at(cell, comp);
    }
  });
  if (s.centers == 0) throw DomainError("ball contains no cell centers");
  if (s.real_cells == 0) throw DomainError("ball does not intersect the grid");
  s.mean = sum / static_cast<double>(s.centers);
  return s;
}

/// Plain average over cell centers inside the ball.
inline double ball_average(const GridField& g, const Ball& b) {
  if (!g.is_scalar()) throw DomainError("ball_average expects a scalar field");
  return ball_stats(g, b).mean;
}

inline Vec ball_average_vec(const GridField& g, const Ball& b) {
  Vec mean(g.components());
  std::size_t centers = 0, real = 0;
  centers = visit_ball(g.grid(), b, [&](std::size_t cell, const Vec&) {
    if (cell == kOutside) return;
    ++real;
    for (int c = 0; c < g.components(); ++c) mean[c] += g.at(cell, c);
  });
  if (centers == 0) throw DomainError("ball contains no cell centers");
  if (real == 0) throw DomainError("ball does not intersect the grid");
  return mean * (1.0 / static_cast<double>(centers));
}

/// (mean of |g|^p over the ball)^(1/p); Euclidean magnitude for vector fields.
inline double lp_ball_average(const GridField& g, const Ball& b, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_ball_average needs p >= 1");
  double sum = 0.0;
  std::size_t centers = 0, real = 0;
  centers = visit_ball(g.grid(), b, [&](std::size_t cell, const Vec&) {
    if (cell == kOutside) return;
    ++real;
    double mag = 0.0;
    for (int c = 0; c < g.components(); ++c) mag += g.at(cell, c) * g.at(cell, c);
    sum += std::pow(std::sqrt(mag), p);
  });
  if (centers == 0) throw DomainError("ball contains no cell centers");
  if (real == 0) throw DomainError("ball does not intersect the grid");
  return std::pow(sum / static_cast<double>(centers), 1.0 / p);
}

/// Mean of |g - mean_value|^q over the ball, then the (1/q)-th power.
inline double ball_lq_deviation(const GridField& g, const Ball& b, double q, const Vec& mean_value) {
  double sum = 0.0;
  std::size_t centers = 0, real = 0;
  centers = visit_ball(g.grid(), b, [&](std::size_t cell, const Vec&) {
    if (cell == kOutside) return;
    ++real;
    double mag = 0.0;
    for (int c = 0; c < g.components(); ++c) {
      const double d = g.at(cell, c) - mean_value[c];
      mag += d * d;
    }
    sum += std::pow(std::sqrt(mag), q);
  });
  if (centers == 0) throw DomainError("ball contains no cell centers");
  if (real == 0) throw DomainError("ball does not intersect the grid");
  return std::pow(sum / static_cast<double>(centers), 1.0 / q);
}

/// Second-order finite-difference gradient: central in the interior, one-sided
/// three-point stencils on the boundary ring. Exact on affine and quadratic
/// samples.
inline GridField gradient(const GridField& u) {
  if (!u.is_scalar()) throw DomainError("gradient expects a scalar field");
  const Grid& g = u.grid();
  GridField out(g, g.dim());
  const double h = g.h();
  const std::size_t n = g.cell_count();
  for (std::size_t f = 0; f < n; ++f) {
    const auto idx = g.unflat(f);
    for (int d = 0; d < g.dim(); ++d) {
      auto at_shift = [&](int s) {
        auto j = idx;
        j[static_cast<std::size_t>(d)] += s;
        return u.at(g.flat(j));
      };
      const int i = idx[static_cast<std::size_t>(d)];
      const int c = g.cells(d);
      double v;
      if (i == 0)
        v = (-3.0 * at_shift(0) + 4.0 * at_shift(1) - at_shift(2)) / (2.0 * h);
      else if (i == c - 1)
        v = (3.0 * at_shift(0) - 4.0 * at_shift(-1) + at_shift(-2)) / (2.0 * h);
      else
        v = (at_shift(1) - at_shift(-1)) / (2.0 * h);
      out.at(f, d) = v;
    }
  }
  return out;
}

}  // namespace ellipot
