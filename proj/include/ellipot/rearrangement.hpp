#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/grid.hpp"

namespace ellipot {

/// Decreasing rearrangement of |g| as an exact step function: each cell
/// contributes its value on an interval of length h^n. g*(s) is right
/// continuous; g**(s) = (1/s) * integral of g* over (0, s).
class Rearrangement {
 public:
  static Rearrangement of(const GridField& g) {
    if (!g.is_scalar()) throw DomainError("rearrangement expects a scalar field");
    Rearrangement r;
    r.cell_measure_ = g.grid().cell_volume();
    r.sorted_.reserve(g.grid().cell_count());
    for (double v : g.raw()) r.sorted_.push_back(std::fabs(v));
    std::sort(r.sorted_.begin(), r.sorted_.end(), std::greater<double>());
    r.prefix_.resize(r.sorted_.size() + 1, 0.0);
    for (std::size_t i = 0; i < r.sorted_.size(); ++i)
      r.prefix_[i + 1] = r.prefix_[i] + r.sorted_[i];
    return r;
  }

  double cell_measure() const { return cell_measure_; }
  double total_measure() const { return cell_measure_ * static_cast<double>(sorted_.size()); }
  double total_integral() const { return prefix_.back() * cell_measure_; }

  /// g*(s) for s >= 0; zero beyond the total measure.
  double star(double s) const {
    if (s < 0.0) throw DomainError("rearrangement argument must be nonnegative");
    const auto k = static_cast<std::size_t>(std::floor(s / cell_measure_));
    if (k >= sorted_.size()) return 0.0;
    return sorted_[k];
  }

  /// Exact integral of g* over (0, s).
  double star_integral(double s) const {
    if (s <= 0.0) return 0.0;
    const double smax = total_measure();
    if (s >= smax) return total_integral();
    const auto k = static_cast<std::size_t>(std::floor(s / cell_measure_));
    return prefix_[k] * cell_measure_ + sorted_[k] * (s - static_cast<double>(k) * cell_measure_);
  }

  /// Maximal rearrangement g**(s) = (1/s) * integral of g* over (0, s).
  double star_star(double s) const {
    if (!(s > 0.0)) throw DomainError("maximal rearrangement needs s > 0");
    return star_integral(s) / s;
  }

  /// Distribution |{ |g| > level }| as an exact cell-measure count.
  double distribution(double level) const {
    // sorted_ descending: count entries strictly above level
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), level,
                               [](double a, double b) { return a > b; });
    return cell_measure_ * static_cast<double>(it - sorted_.begin());
  }

  /// Distinct value levels (descending) paired with the measure at-or-above
  /// each level: the step description both Lorentz-type functionals integrate.
  struct Steps {
    std::vector<double> values;    // v_0 > v_1 > ... > 0 (zeros dropped)
    std::vector<double> measures;  // measure of { |g| >= v_j }
  };

  Steps steps() const {
    Steps st;
    std::size_t i = 0;
    while (i < sorted_.size() && sorted_[i] > 0.0) {
      std::size_t j = i;
      while (j < sorted_.size() && sorted_[j] == sorted_[i]) ++j;
      st.values.push_back(sorted_[i]);
      st.measures.push_back(cell_measure_ * static_cast<double>(j));
      i = j;
    }
    return st;
  }

 private:
  std::vector<double> sorted_;
  std::vector<double> prefix_;
  double cell_measure_ = 0.0;
};

inline Rearrangement rearrange(const GridField& g) { return Rearrangement::of(g); }

inline double maximal_rearrangement(const GridField& g, double s) {
  return Rearrangement::of(g).star_star(s);
}

}  // namespace ellipot
