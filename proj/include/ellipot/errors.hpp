#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ellipot {

/// Malformed scenario or operator document. The CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration failed to reach its tolerance. Carries the residual history so
/// callers can report how the run stalled. CLI exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// A requested radius, chain, or sub-grid cannot be resolved on the given mesh.
/// CLI exit code 4.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric query outside the data domain (e.g. a ball with no grid support).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ellipot
