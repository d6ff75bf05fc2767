#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ellipot {

/// Deterministic random stream. Every stochastic choice in the toolkit draws
/// from one of these, seeded from the scenario seed, so identical inputs
/// reproduce identical artifacts byte for byte. Distribution shaping is done
/// by hand (not via std::*_distribution) to keep the stream independent of
/// library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Integer in [0, m), m >= 1. Desk-scale m: modulo bias is negligible and
  /// acceptable next to determinism.
  std::uint64_t index(std::uint64_t m) { return gen_() % m; }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double pi = 3.14159265358979323846;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }

  /// Independent child stream; distinct salts give distinct streams.
  Rng split(std::uint64_t salt) {
    std::uint64_t s = gen_() ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    return Rng(s);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ellipot
