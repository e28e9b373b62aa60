#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace divrisk {

/// Malformed input data (CSV cells, misaligned panels).  `row` is the
/// 1-based data row when the problem is attributable to one.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, std::size_t row = 0)
      : std::runtime_error(msg), row_(row) {}
  [[nodiscard]] std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Numerical solve failed (bracketing or iteration budget exhausted).
/// Carries the characterizing-equation residuals at the point of failure.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, std::array<double, 2> residuals)
      : std::runtime_error(msg), residuals_(residuals) {}
  [[nodiscard]] const std::array<double, 2>& residuals() const { return residuals_; }

 private:
  std::array<double, 2> residuals_;
};

/// Constraint set of an optimization problem is empty.
class InfeasibleError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A ratio statistic has a degenerate (nonpositive or zero) denominator,
/// e.g. a Beta against a market series with no risk.
class DegenerateError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace divrisk
