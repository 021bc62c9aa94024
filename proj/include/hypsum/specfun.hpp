#pragma once

// Real-argument gamma-family kernels: signed log-gamma, digamma, Pochhammer
// symbols and gamma ratios.
//
// Every kernel is a template over the floating type so that the same code
// serves double as well as extended types (long double, boost
// multiprecision quad).  Positive arguments are shifted up by the
// recurrence until Stirling's series converges to working precision;
// negative arguments go through the reflection formula.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>

#include "hypsum/errors.hpp"
#include "hypsum/signed_log.hpp"

namespace hypsum {

/// Arguments within this distance of a non-positive integer are poles.
inline constexpr double kPoleTolerance = 1e-12;

namespace detail {

// B_{2k} for k = 1..15 as exact rationals.
struct Rational {
  std::int64_t num;
  std::int64_t den;
};
inline constexpr std::array<Rational, 15> kBernoulli2k{{
    {1, 6},
    {-1, 30},
    {1, 42},
    {-1, 30},
    {5, 66},
    {-691, 2730},
    {7, 6},
    {-3617, 510},
    {43867, 798},
    {-174611, 330},
    {854513, 138},
    {-236364091, 2730},
    {8553103, 6},
    {-23749461029, 870},
    {8615841276005, 14322},
}};

template <class Real>
Real bernoulli2k(std::size_t k) {
  const auto& r = kBernoulli2k[k - 1];
  return Real(r.num) / Real(r.den);
}

// Shift threshold and number of Stirling terms that reach working precision.
template <class Real>
struct StirlingPlan {
  static constexpr int digits = std::numeric_limits<Real>::digits10;
  static_assert(digits <= 50, "Stirling plan only tuned up to 50 digits");
  static constexpr int shift = digits <= 19 ? 20 : digits <= 36 ? 40 : 90;
  static constexpr std::size_t terms = digits <= 19 ? 10 : 15;
};

template <class Real>
Real pi() {
  using std::atan;
  return 4 * atan(Real(1));
}

template <class Real>
Real nearest_integer(const Real& x) {
  using std::floor;
  return floor(x + Real(0.5));
}

// lnGamma(z) by Stirling's series, z >= shift.
template <class Real>
Real stirling_ln_gamma(const Real& z) {
  using std::log;
  const Real inv = 1 / z;
  const Real inv2 = inv * inv;
  Real series = 0;
  Real power = inv;
  for (std::size_t k = 1; k <= StirlingPlan<Real>::terms; ++k) {
    series += bernoulli2k<Real>(k) / Real(2 * k * (2 * k - 1)) * power;
    power *= inv2;
  }
  return (z - Real(0.5)) * log(z) - z + log(2 * pi<Real>()) / 2 + series;
}

// psi(z) by its asymptotic series, z >= shift.
template <class Real>
Real asymptotic_digamma(const Real& z) {
  using std::log;
  const Real inv2 = 1 / (z * z);
  Real series = 0;
  Real power = inv2;
  for (std::size_t k = 1; k <= StirlingPlan<Real>::terms; ++k) {
    series += bernoulli2k<Real>(k) / Real(2 * k) * power;
    power *= inv2;
  }
  return log(z) - 1 / (2 * z) - series;
}

template <class Real>
[[noreturn]] void throw_pole(const char* where, const Real& x) {
  std::ostringstream msg;
  msg.precision(17);
  msg << where << ": argument " << static_cast<double>(x) << " is a gamma pole";
  throw PoleError(msg.str());
}

}  // namespace detail

/// True when x is within kPoleTolerance of 0, -1, -2, ...
template <class Real>
bool is_nonpositive_integer(const Real& x, double tol = kPoleTolerance) {
  using std::abs;
  if (x > Real(tol)) return false;
  return abs(x - detail::nearest_integer(x)) <= Real(tol);
}

/// sin(pi x) with exact argument reduction.
template <class Real>
Real sin_pi(const Real& x) {
  using std::abs;
  using std::cos;
  using std::sin;
  const Real pi = detail::pi<Real>();
  Real r = x - 2 * detail::nearest_integer(x / 2);  // r in [-1, 1]
  const bool negative = r < 0;
  if (negative) r = -r;
  Real v;
  if (r <= Real(0.25)) {
    v = sin(pi * r);
  } else if (r <= Real(0.75)) {
    v = cos(pi * (Real(0.5) - r));
  } else {
    v = sin(pi * (1 - r));
  }
  return negative ? -v : v;
}

/// cos(pi x) with exact argument reduction.
template <class Real>
Real cos_pi(const Real& x) {
  using std::abs;
  using std::cos;
  using std::sin;
  const Real pi = detail::pi<Real>();
  const Real r = abs(x - 2 * detail::nearest_integer(x / 2));  // r in [0, 1]
  if (r <= Real(0.25)) return cos(pi * r);
  if (r <= Real(0.75)) return sin(pi * (Real(0.5) - r));
  return -cos(pi * (1 - r));
}

/// ln|Gamma(x)| together with the sign of Gamma(x).
template <class Real>
SignedLog<Real> ln_gamma_signed(const Real& x) {
  using std::abs;
  using std::log;
  if (is_nonpositive_integer(x)) detail::throw_pole("ln_gamma_signed", x);

  if (x < 0) {
    // Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    const Real s = sin_pi(x);
    const SignedLog<Real> reflected = ln_gamma_signed(Real(1) - x);
    return {log(detail::pi<Real>()) - log(abs(s)) - reflected.log_abs, s > 0 ? 1 : -1};
  }

  Real z = x;
  Real product = 1;
  while (z < Real(detail::StirlingPlan<Real>::shift)) {
    product *= z;
    z += 1;
  }
  return {detail::stirling_ln_gamma(z) - log(product), 1};
}

/// The digamma function psi(x) = Gamma'(x) / Gamma(x).
template <class Real>
Real digamma(const Real& x) {
  if (is_nonpositive_integer(x)) detail::throw_pole("digamma", x);

  if (x < 0) {
    // psi(1 - x) - psi(x) = pi cot(pi x)
    return digamma(Real(1) - x) - detail::pi<Real>() * cos_pi(x) / sin_pi(x);
  }

  Real z = x;
  Real shifted = 0;
  while (z < Real(detail::StirlingPlan<Real>::shift)) {
    shifted += 1 / z;
    z += 1;
  }
  return detail::asymptotic_digamma(z) - shifted;
}

/// Gamma(z + x) / Gamma(z) in signed-log form.
///
/// When z and z + x are both positive the two gammas are shifted to large
/// argument together and the difference of their Stirling series is formed
/// analytically, so the result keeps full relative accuracy even for
/// z ~ 1e6 where ln Gamma(z) itself is ~1e7.
template <class Real>
SignedLog<Real> log_gamma_ratio(const Real& z, const Real& x) {
  using std::log;
  using std::log1p;
  using std::pow;
  if (x == 0) return SignedLog<Real>::one();
  const Real w = z + x;
  if (is_nonpositive_integer(w)) detail::throw_pole("log_gamma_ratio", w);
  if (is_nonpositive_integer(z)) detail::throw_pole("log_gamma_ratio", z);

  if (!(z > 0 && w > 0)) {
    const auto num = ln_gamma_signed(w);
    const auto den = ln_gamma_signed(z);
    return {num.log_abs - den.log_abs, num.sign * den.sign};
  }

  const Real threshold(detail::StirlingPlan<Real>::shift);
  Real lo = z;
  Real hi = w;
  Real factor = 1;  // Gamma(w)/Gamma(z) = factor * Gamma(hi)/Gamma(lo)
  while (lo < threshold || hi < threshold) {
    factor *= lo / hi;
    lo += 1;
    hi += 1;
  }

  // lnGamma(hi) - lnGamma(lo), hi = lo + x
  const Real inv_lo = 1 / lo;
  const Real inv_hi = 1 / hi;
  Real series = 0;
  Real p_lo = inv_lo;
  Real p_hi = inv_hi;
  for (std::size_t k = 1; k <= detail::StirlingPlan<Real>::terms; ++k) {
    series += detail::bernoulli2k<Real>(k) / Real(2 * k * (2 * k - 1)) * (p_hi - p_lo);
    p_lo *= inv_lo * inv_lo;
    p_hi *= inv_hi * inv_hi;
  }
  const Real diff = (lo - Real(0.5)) * log1p(x / lo) + x * log(hi) - x + series;
  return {diff + log(factor), 1};
}

/// The Pochhammer symbol (x)_n = x (x+1) ... (x+n-1).
///
/// Exact zero (sign 0) when one of the factors is a zero, i.e. x is a
/// non-positive integer -j with j < n.
template <class Real>
SignedLog<Real> pochhammer(const Real& x, std::uint64_t n) {
  using std::abs;
  using std::log;
  if (n == 0) return SignedLog<Real>::one();
  if (is_nonpositive_integer(x)) {
    const Real j = -detail::nearest_integer(x);
    if (Real(n) > j) return SignedLog<Real>::zero();
  }

  constexpr std::uint64_t kDirectLimit = 64;
  if (n <= kDirectLimit || is_nonpositive_integer(x)) {
    Real log_abs = 0;
    Real running = 1;
    int sign = 1;
    for (std::uint64_t i = 0; i < n; ++i) {
      const Real f = x + Real(i);
      if (f < 0) sign = -sign;
      running *= abs(f);
      if (running > Real(1e100) || running < Real(1e-100)) {
        log_abs += log(running);
        running = 1;
      }
    }
    return {log_abs + log(running), sign};
  }
  return log_gamma_ratio(x, Real(n));
}

/// Product of Gamma(num_i) over product of Gamma(den_j).
template <class Real>
SignedLog<Real> gamma_ratio(std::span<const Real> num, std::span<const Real> den) {
  SignedLog<Real> result = SignedLog<Real>::one();
  for (const Real& x : num) result *= ln_gamma_signed(x);
  for (const Real& x : den) result /= ln_gamma_signed(x);
  return result;
}

template <class Real>
SignedLog<Real> gamma_ratio(std::initializer_list<Real> num, std::initializer_list<Real> den) {
  return gamma_ratio<Real>(std::span<const Real>(num.begin(), num.size()),
                           std::span<const Real>(den.begin(), den.size()));
}

/// Gamma(x) as a plain number.
template <class Real>
Real gamma(const Real& x) {
  return ln_gamma_signed(x).to_real();
}

}  // namespace hypsum
