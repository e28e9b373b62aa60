#pragma once

#include <cassert>
#include <limits>

namespace divrisk {

/// Value on the extended real line [-inf, +inf) plus +inf: either a finite
/// double or positive infinity.  Divergence generators and their conjugates
/// take the value +inf at domain boundaries, and we want that to be an
/// explicit, typed state rather than a sentinel that can leak into arithmetic
/// unnoticed.  Negative infinity never arises in this codebase.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : v_(v) {}  // NOLINT: implicit by design

  static constexpr ExtReal inf() { return ExtReal(0.0, true); }

  [[nodiscard]] constexpr bool finite() const { return !inf_; }
  [[nodiscard]] constexpr bool infinite() const { return inf_; }

  /// Finite payload; calling this on +inf is a logic error.
  [[nodiscard]] constexpr double value() const {
    assert(!inf_);
    return v_;
  }

  /// Lossy conversion for printing and comparisons against plain doubles.
  [[nodiscard]] constexpr double as_double() const {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  friend constexpr ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return inf();
    return ExtReal(a.v_ + b.v_);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  /// Scaling by a nonnegative finite factor; 0 * inf is not a meaningful
  /// quantity here, callers skip zero-weight terms instead.
  friend constexpr ExtReal operator*(double c, ExtReal a) {
    assert(c >= 0.0);
    if (a.inf_) return inf();
    return ExtReal(c * a.v_);
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.v_ == b.v_;
  }
  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a < b || a == b; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return b <= a; }

 private:
  constexpr ExtReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_ = 0.0;
  bool inf_ = false;
};

}  // namespace divrisk
