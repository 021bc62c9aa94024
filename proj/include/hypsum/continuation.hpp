#pragma once

// Coefficients of the continuation formulas around z = 1 that the partial
// sum asymptotics need: g_0(0), g_n(s_p), e_n, d_0, q_n, l_0, h_n, v_n, u_0.
//
// Finite inner sums are written with (x)_n / (x)_k folded into
// (x + k)_{n - k}, which is the same number but never divides by a
// vanishing Pochhammer symbol.  Infinite sums over k decay algebraically
// (terms ~ k^{-1-a_j}, j >= 3) and are summed by Richardson extrapolation
// on a doubling grid with the known exponents a_j + n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hypsum/coefficients.hpp"
#include "hypsum/errors.hpp"
#include "hypsum/extrapolation.hpp"
#include "hypsum/params.hpp"
#include "hypsum/specfun.hpp"

namespace hypsum {

/// Truncation policy for the infinite sums over k.
template <class Real = double>
struct TailControl {
  Real rel_tol = Real(1e-14);
  std::size_t k_max = 200000;
  std::size_t min_decay_window = 8;
  // Richardson extrapolation of the partial sums; plain truncation if false.
  bool accelerate = true;
  // First sample of the doubling grid.
  std::size_t k_first_sample = 32;

  void validate() const {
    if (!(rel_tol > 0 && rel_tol < 1)) throw DomainError("TailControl: rel_tol must lie in (0, 1)");
    if (k_max < 1) throw DomainError("TailControl: k_max must be >= 1");
  }
};

template <class Real = double>
struct SeriesEstimate {
  Real value = 0;
  Real error = 0;  // tail bound (plain) or extrapolation error estimate
  std::size_t terms = 0;
};

namespace detail {

// Compensated (Neumaier) running sum.
template <class Real>
class CompensatedSum {
 public:
  void add(const Real& x) {
    using std::abs;
    const Real t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + carry_; }

 private:
  Real sum_ = 0;
  Real carry_ = 0;
};

// Terms R_k * scaled(k + shift) for k = k_first, k_first + 1, ... with
// R_{k+1} = R_k * ratio(k); the A_k table is grown on demand.
template <class Real>
class KSeriesTerms {
 public:
  using Ratio = std::function<Real(std::size_t)>;

  KSeriesTerms(const SeriesParams<Real>& params, std::size_t k_first, std::size_t shift, Real r_first, Ratio ratio)
      : params_(params), k_(k_first), shift_(shift), r_(std::move(r_first)), ratio_(std::move(ratio)) {}

  void reserve(std::size_t terms) { ensure(k_ + terms + shift_); }

  Real next() {
    ensure(k_ + shift_);
    const Real term = r_ * table_->scaled(k_ + shift_);
    r_ *= ratio_(k_);
    ++k_;
    return term;
  }

  const AkTable<Real>& table() {
    ensure(shift_);
    return *table_;
  }

 private:
  void ensure(std::size_t index) {
    if (!table_ || table_->K() < index) {
      const std::size_t want = table_ ? std::max(index, 2 * table_->K()) : std::max<std::size_t>(index, 64);
      table_ = default_ak_cache<Real>().get(params_, want);
    }
  }

  SeriesParams<Real> params_;
  std::size_t k_;
  std::size_t shift_;
  Real r_;
  Ratio ratio_;
  std::shared_ptr<const AkTable<Real>> table_;
};

template <class Real>
SeriesEstimate<Real> sum_plain(const std::string& name, KSeriesTerms<Real>& terms, const std::vector<Real>& families,
                               const TailControl<Real>& ctl) {
  using std::abs;
  const Real delta = families.empty() ? Real(1) : *std::min_element(families.begin(), families.end());
  CompensatedSum<Real> sum;
  std::size_t quiet = 0;
  for (std::size_t k = 0; k < ctl.k_max; ++k) {
    const Real term = terms.next();
    sum.add(term);
    const Real s = sum.value();
    quiet = abs(term) <= ctl.rel_tol * abs(s) ? quiet + 1 : 0;
    if (quiet >= ctl.min_decay_window) {
      const Real bound = term == 0 ? Real(0) : abs(term) * Real(k + 1) / delta;
      if (bound > 100 * ctl.rel_tol * abs(s)) {
        throw TailError(name, "algebraic tail bound " + std::to_string(static_cast<double>(bound)) +
                                  " exceeds 100*rel_tol*|sum| after " + std::to_string(k + 1) + " terms");
      }
      return {s, bound, k + 1};
    }
  }
  throw TailError(name, "k_max = " + std::to_string(ctl.k_max) + " reached without meeting rel_tol");
}

template <class Real>
SeriesEstimate<Real> sum_extrapolated(const std::string& name, KSeriesTerms<Real>& terms,
                                      const std::vector<Real>& families, const TailControl<Real>& ctl) {
  using std::abs;
  CompensatedSum<Real> sum;
  std::vector<Real> samples;
  std::size_t done = 0;
  std::size_t target = std::max<std::size_t>(ctl.k_first_sample, 1);
  SeriesEstimate<Real> best{0, std::numeric_limits<Real>::infinity(), 0};
  std::size_t stalled = 0;

  while (target <= ctl.k_max) {
    terms.reserve(target - done);
    for (; done < target; ++done) sum.add(terms.next());
    samples.push_back(sum.value());

    if (samples.size() >= 2) {
      const auto ladder = exponent_ladder<Real>(families, samples.size() - 1);
      const auto est = richardson<Real>(samples, ladder);
      const Real scale = abs(est.value);
      // Rounding in the samples, amplified by the extrapolation, is not
      // resolvable; stop once the estimate is down to that level.
      Real magnitude = 0;
      for (const Real& x : samples) magnitude = std::max<Real>(magnitude, abs(x));
      const Real floor = 4 * std::numeric_limits<Real>::epsilon() * magnitude *
                         richardson_noise_gain<Real>(ladder, ladder.size());
      if (est.error <= ctl.rel_tol * scale || (est.error <= floor && floor <= 100 * ctl.rel_tol * scale)) {
        return {est.value, est.error, done};
      }
      if (est.error < best.error) {
        stalled = est.error < best.error / 2 ? 0 : stalled + 1;
        best = {est.value, est.error, done};
      } else {
        ++stalled;
      }
      // Rounding noise floor: accept once the estimate stops improving.
      if (stalled >= 2 && best.error <= 100 * ctl.rel_tol * abs(best.value)) return best;
    }
    target *= 2;
  }
  if (best.error <= 100 * ctl.rel_tol * abs(best.value)) return best;
  throw TailError(name, "extrapolation error " + std::to_string(static_cast<double>(best.error)) +
                            " still above 100*rel_tol*|sum| at k_max = " + std::to_string(ctl.k_max));
}

template <class Real>
SeriesEstimate<Real> sum_k_series(const std::string& name, KSeriesTerms<Real>& terms,
                                  const SeriesParams<Real>& params, const TailControl<Real>& ctl) {
  ctl.validate();
  const auto tails = params.k_tail_exponents();
  if (ctl.accelerate && !tails.empty()) return sum_extrapolated(name, terms, tails, ctl);
  return sum_plain(name, terms, params.k_decay_exponents(), ctl);
}

// sum_{k=0}^{n} (-n)_k (x1 + k)_{n-k} (x2 + k)_{n-k} A_k weight(k)
template <class Real, class Weight>
Real folded_sum(const AkTable<Real>& table, const Real& x1, const Real& x2, std::size_t n, Weight&& weight) {
  Real total = 0;
  Real minus_n_k = 1;  // (-n)_k
  for (std::size_t k = 0; k <= n; ++k) {
    if (k > 0) minus_n_k *= Real(k) - 1 - Real(n);
    const Real ak = table.value_real(k);
    if (ak != 0) {
      const auto poch = pochhammer(x1 + Real(k), n - k) * pochhammer(x2 + Real(k), n - k);
      total += minus_n_k * poch.to_real() * ak * weight(k);
    }
  }
  return total;
}

template <class Real>
Real folded_sum(const AkTable<Real>& table, const Real& x1, const Real& x2, std::size_t n) {
  return folded_sum(table, x1, x2, n, [](std::size_t) { return Real(1); });
}

template <class Real>
std::shared_ptr<const AkTable<Real>> table_for(const SeriesParams<Real>& params, std::size_t K) {
  return default_ak_cache<Real>().get(params, std::max<std::size_t>(K, 64));
}

template <class Real>
Real factorial(std::size_t n) {
  Real f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= Real(i);
  return f;
}

template <class Real>
Real sign_pow(std::size_t n) {
  return n % 2 == 0 ? Real(1) : Real(-1);
}

template <class Real>
SpClass<Real> require_class(const SeriesParams<Real>& params, SpTag tag, unsigned t, const char* what,
                            double eps_int) {
  const auto cls = classify(params.s(), eps_int);
  if (cls.tag != tag || (t != 0 && cls.t != t)) {
    std::string want = to_string(tag);
    if (t != 0) want += " t=" + std::to_string(t);
    throw DomainError(std::string(what) + ": needs s_p " + want + ", got s_p = " +
                      std::to_string(static_cast<double>(params.s())));
  }
  return cls;
}

}  // namespace detail

/// sum_{k>=0} (s)_k / ((a_1+s)_k (a_2+s)_k) A_k for an arbitrary s, i.e. the
/// series in g_0(0) (s = s_p) and in l_0 (s = t).
template <class Real>
SeriesEstimate<Real> g0_series(const SeriesParams<Real>& params, const Real& s, const TailControl<Real>& ctl = {}) {
  require_convergent_k_sums(params, "g0 series");
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, 64);
  const Real beta = table->beta();
  detail::KSeriesTerms<Real> terms(params, 0, 0, Real(1), [=](std::size_t k) {
    const Real kk(k);
    return (s + kk) * (beta + kk) / ((a1 + s + kk) * (a2 + s + kk));
  });
  return detail::sum_k_series<Real>("g0 series", terms, params, ctl);
}

template <class Real>
Real g0_at(const SeriesParams<Real>& params, const Real& s, const TailControl<Real>& ctl = {}) {
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  const auto prefactor = gamma_ratio<Real>({a1, a2, s}, {a1 + s, a2 + s});
  return prefactor.to_real() * g0_series(params, s, ctl).value;
}

/// g_0(0): the limit of the partial sums when s_p > 0, and the constant of
/// the non-integer expansion in general.
template <class Real>
Real g0_const(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {}) {
  return g0_at(params, params.s(), ctl);
}

/// g_n(s_p), the coefficients of the singular part (1-z)^{s_p+n}.
template <class Real>
Real g_singular(const SeriesParams<Real>& params, std::size_t n, double eps_int = kDefaultIntegerTolerance) {
  const Real s = params.s();
  if (classify(s, eps_int).tag != SpTag::NonInteger) {
    throw PoleError("g_singular: Gamma(-s_p-n) has a pole for integer s_p");
  }
  auto table = detail::table_for(params, n);
  const Real inner = detail::folded_sum(*table, params.a(1) + s, params.a(2) + s, n);
  return detail::sign_pow<Real>(n) * gamma(-s - Real(n)) / detail::factorial<Real>(n) * inner;
}

/// e_n, the coefficients of (1-z)^n ln(1-z) for zero-balanced series.
template <class Real>
Real e_coeff(const SeriesParams<Real>& params, std::size_t n, double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::Zero, 0, "e_coeff", eps_int);
  auto table = detail::table_for(params, n);
  const Real f = detail::factorial<Real>(n);
  return -detail::folded_sum(*table, params.a(1), params.a(2), n) / (f * f);
}

/// sum_{k>=1} Gamma(k) / ((a_1)_k (a_2)_k) A_k, the series shared by d_0 and
/// the constant of the zero-balanced expansion.
template <class Real>
SeriesEstimate<Real> d0_series(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {}) {
  require_convergent_k_sums(params, "d0 series");
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, 64);
  const Real beta = table->beta();
  // R_k = Gamma(k) (beta)_k / ((a_1)_k (a_2)_k)
  detail::KSeriesTerms<Real> terms(params, 1, 0, beta / (a1 * a2), [=](std::size_t k) {
    const Real kk(k);
    return kk * (beta + kk) / ((a1 + kk) * (a2 + kk));
  });
  return detail::sum_k_series<Real>("d0 series", terms, params, ctl);
}

/// d_0 = 2 psi(1) - psi(a_1) - psi(a_2) + sum_{k>=1} Gamma(k) A_k / ((a_1)_k (a_2)_k).
template <class Real>
Real d0_const(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {},
              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::Zero, 0, "d0_const", eps_int);
  return 2 * digamma(Real(1)) - digamma(params.a(1)) - digamma(params.a(2)) + d0_series(params, ctl).value;
}

/// q_n for s_p = t >= 1, coefficients of (1-z)^{t+n} ln(1-z).
template <class Real>
Real q_coeff(const SeriesParams<Real>& params, unsigned t, std::size_t n, double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::PositiveInteger, t, "q_coeff", eps_int);
  auto table = detail::table_for(params, n);
  const Real T(t);
  const Real inner = detail::folded_sum(*table, params.a(1) + T, params.a(2) + T, n);
  return -detail::sign_pow<Real>(t) * inner / detail::factorial<Real>(t + n);
}

/// l_0 for s_p = t >= 1; the same series as g_0(0) evaluated at s = t.
template <class Real>
Real l0_const(const SeriesParams<Real>& params, unsigned t, const TailControl<Real>& ctl = {},
              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::PositiveInteger, t, "l0_const", eps_int);
  return g0_at(params, Real(t), ctl);
}

/// h_n for s_p = -t, 0 <= n <= t-1, coefficients of (1-z)^{n-t}.
template <class Real>
Real h_coeff(const SeriesParams<Real>& params, unsigned t, std::size_t n, double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::NegativeInteger, t, "h_coeff", eps_int);
  if (n >= t) throw DomainError("h_coeff: n must lie in [0, t-1]");
  auto table = detail::table_for(params, n);
  const Real T(t);
  const Real inner = detail::folded_sum(*table, params.a(1) - T, params.a(2) - T, n);
  return detail::sign_pow<Real>(n) * gamma(T - Real(n)) / detail::factorial<Real>(n) * inner;
}

/// v_n for s_p = -t, coefficients of (1-z)^n ln(1-z).
template <class Real>
Real v_coeff(const SeriesParams<Real>& params, unsigned t, std::size_t n, double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::NegativeInteger, t, "v_coeff", eps_int);
  auto table = detail::table_for(params, t + n);
  const Real T(t);
  const Real inner = detail::folded_sum(*table, params.a(1) - T, params.a(2) - T, t + n);
  return -detail::sign_pow<Real>(t) * inner / (detail::factorial<Real>(n) * detail::factorial<Real>(t + n));
}

/// sum_{k>=1} Gamma(k) / ((a_1)_k (a_2)_k) A_{t+k}.
template <class Real>
SeriesEstimate<Real> u0_series(const SeriesParams<Real>& params, unsigned t, const TailControl<Real>& ctl = {}) {
  using std::abs;
  require_convergent_k_sums(params, "u0 series");
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, 64 + t);
  const Real beta = table->beta();
  const Real bt = beta + Real(t);
  // A_{t+k} = (beta)_t (beta+t)_k scaled(t+k)
  detail::KSeriesTerms<Real> terms(params, 1, t, bt / (a1 * a2), [=](std::size_t k) {
    const Real kk(k);
    return kk * (bt + kk) / ((a1 + kk) * (a2 + kk));
  });
  auto est = detail::sum_k_series<Real>("u0 series", terms, params, ctl);
  const Real lead = pochhammer(beta, t).to_real();
  return {est.value * lead, est.error * abs(lead), est.terms};
}

/// The finite block of u_0: (-1)^t / t! sum_{k<=t} (-t)_k (a_1-t+k)_{t-k}
/// (a_2-t+k)_{t-k} A_k weight(k).
template <class Real, class Weight>
Real u0_finite_block(const SeriesParams<Real>& params, unsigned t, Weight&& weight) {
  auto table = detail::table_for(params, t);
  const Real T(t);
  return detail::sign_pow<Real>(t) / detail::factorial<Real>(t) *
         detail::folded_sum(*table, params.a(1) - T, params.a(2) - T, t, std::forward<Weight>(weight));
}

/// u_0 for s_p = -t.
template <class Real>
Real u0_const(const SeriesParams<Real>& params, unsigned t, const TailControl<Real>& ctl = {},
              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::NegativeInteger, t, "u0_const", eps_int);
  const Real base = digamma(Real(1)) - digamma(params.a(1)) - digamma(params.a(2));
  const Real finite = u0_finite_block(params, t, [&](std::size_t k) { return digamma(Real(1 + t - k)) + base; });
  return u0_series(params, t, ctl).value + finite;
}

}  // namespace hypsum
