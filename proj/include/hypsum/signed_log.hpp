#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace hypsum {

/// A real number stored as sign * exp(log_abs).
///
/// sign == 0 marks an exact zero; log_abs is then meaningless and kept at
/// -infinity so that accidental exponentiation still yields zero.
template <class Real = double>
struct SignedLog {
  Real log_abs = -std::numeric_limits<Real>::infinity();
  int sign = 0;

  static SignedLog zero() { return {}; }
  static SignedLog one() { return {Real(0), 1}; }

  static SignedLog from_real(const Real& x) {
    using std::abs;
    using std::log;
    if (x == 0) return zero();
    return {log(abs(x)), x > 0 ? 1 : -1};
  }

  bool is_zero() const { return sign == 0; }

  Real to_real() const {
    using std::exp;
    if (sign == 0) return Real(0);
    return sign > 0 ? exp(log_abs) : -exp(log_abs);
  }

  SignedLog operator-() const { return {log_abs, -sign}; }

  friend SignedLog operator*(const SignedLog& x, const SignedLog& y) {
    if (x.sign == 0 || y.sign == 0) return zero();
    return {x.log_abs + y.log_abs, x.sign * y.sign};
  }

  // Division by an exact zero is a caller bug; the result is +-inf.
  friend SignedLog operator/(const SignedLog& x, const SignedLog& y) {
    if (x.sign == 0) return zero();
    if (y.sign == 0) return {std::numeric_limits<Real>::infinity(), x.sign};
    return {x.log_abs - y.log_abs, x.sign * y.sign};
  }

  SignedLog& operator*=(const SignedLog& y) { return *this = *this * y; }
  SignedLog& operator/=(const SignedLog& y) { return *this = *this / y; }

  friend std::ostream& operator<<(std::ostream& os, const SignedLog& x) {
    return os << (x.sign < 0 ? "-" : x.sign > 0 ? "+" : "0") << "exp(" << x.log_abs << ")";
  }
};

}  // namespace hypsum
