#pragma once

// Partial sums of the series and their large-m expansions.
//
// An Expansion holds the m-independent data of one asymptotic formula (the
// constant and the coefficients of each correction) so that a sweep over
// many m pays for the infinite k-sums once.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypsum/continuation.hpp"
#include "hypsum/errors.hpp"
#include "hypsum/extrapolation.hpp"
#include "hypsum/params.hpp"
#include "hypsum/specfun.hpp"

namespace hypsum {

// ---------------------------------------------------------------------------
// Direct summation

namespace detail {

template <class Real>
std::vector<Real> partial_sums(const SeriesParams<Real>& params, std::span<const std::size_t> ms, Real first_term) {
  std::vector<Real> out;
  out.reserve(ms.size());
  CompensatedSum<Real> sum;
  Real term = std::move(first_term);
  std::size_t l = 0;
  for (std::size_t m : ms) {
    if (m < 1) throw DomainError("partial sum: m must be >= 1");
    if (m < l) throw DomainError("partial sum: m values must be non-decreasing");
    for (; l < m; ++l) {
      sum.add(term);
      const Real ll(l);
      Real num = 1;
      Real den = ll + 1;
      for (const Real& a : params.a()) num *= a + ll;
      for (const Real& b : params.b()) den *= b + ll;
      term *= num / den;
    }
    out.push_back(sum.value());
  }
  return out;
}

}  // namespace detail

/// Partial sums sum_{l<m} prod Gamma(a_i+l) / (prod Gamma(b_j+l) Gamma(1+l))
/// for a non-decreasing list of m, in one pass.
template <class Real>
std::vector<Real> direct_partial_sums(const SeriesParams<Real>& params, std::span<const std::size_t> ms) {
  const Real first = gamma_ratio<Real>(params.a(), params.b()).to_real();
  return detail::partial_sums(params, ms, first);
}

template <class Real>
Real direct_partial_sum(const SeriesParams<Real>& params, std::size_t m) {
  const std::size_t ms[] = {m};
  return direct_partial_sums(params, std::span<const std::size_t>(ms)).front();
}

/// Partial sums of the bare hypergeometric series,
/// sum_{l<m} prod (a_i)_l / (prod (b_j)_l l!).
template <class Real>
std::vector<Real> hypergeometric_partial_sums(const SeriesParams<Real>& params, std::span<const std::size_t> ms) {
  return detail::partial_sums(params, ms, Real(1));
}

template <class Real>
Real hypergeometric_partial_sum(const SeriesParams<Real>& params, std::size_t m) {
  const std::size_t ms[] = {m};
  return hypergeometric_partial_sums(params, std::span<const std::size_t>(ms)).front();
}

/// The l-th term of the series, computed from gamma functions directly.
template <class Real>
Real series_term(const SeriesParams<Real>& params, std::size_t l) {
  if (l == 0) return gamma_ratio<Real>(params.a(), params.b()).to_real();
  // Gamma(l + x) / Gamma(l) per parameter; the Gamma(l) factors cancel.
  const Real ll(l);
  SignedLog<Real> t = SignedLog<Real>::one();
  for (const Real& a : params.a()) t *= log_gamma_ratio(ll, a);
  for (const Real& b : params.b()) t /= log_gamma_ratio(ll, b);
  return (t / SignedLog<Real>::from_real(ll)).to_real();
}

// ---------------------------------------------------------------------------
// Auxiliary partial-sum identities

/// sum_{l<m} (-x)_l / l! in closed form, -(1/x) (-x)_m / Gamma(m).
template <class Real>
Real binomial_partial_sum(const Real& x, std::size_t m) {
  using std::abs;
  if (abs(x) < Real(1e-14)) throw DomainError("binomial_partial_sum: x must be non-zero");
  if (m < 1) throw DomainError("binomial_partial_sum: m must be >= 1");
  SignedLog<Real> ratio;  // (-x)_m / Gamma(m)
  if (is_nonpositive_integer(Real(-x))) {
    ratio = pochhammer(Real(-x), m) / ln_gamma_signed(Real(m));
  } else {
    ratio = log_gamma_ratio(Real(m), Real(-x)) / ln_gamma_signed(Real(-x));
  }
  return -ratio.to_real() / x;
}

/// sum_{l=1}^{m-1} c_l^(n), the partial sums of (1-z)^n ln(1-z) at z = 1,
/// for n = 0, 1, 2.
template <class Real>
Real log_term_partial_sum(unsigned n, std::size_t m) {
  const Real mm(m);
  switch (n) {
    case 0:
      if (m < 1) throw DomainError("log_term_partial_sum: n = 0 needs m >= 1");
      return digamma(Real(1)) - digamma(mm);
    case 1:
      if (m < 2) throw DomainError("log_term_partial_sum: n = 1 needs m >= 2");
      return -1 / (mm - 1);
    case 2:
      if (m < 3) throw DomainError("log_term_partial_sum: n = 2 needs m >= 3");
      return 1 / ((mm - 1) * (mm - 2));
    default:
      throw DomainError("log_term_partial_sum: only n <= 2 is available");
  }
}

/// ln m - 1/(2m) - 1/(12 m^2).
template <class Real>
Real psi_expansion(std::size_t m) {
  using std::log;
  const Real mm(m);
  return log(mm) - 1 / (2 * mm) - 1 / (12 * mm * mm);
}

// ---------------------------------------------------------------------------
// Expansions

enum class Theorem { T2, T3, T4, T5, T6, T7 };

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::T2: return "T2";
    case Theorem::T3: return "T3";
    case Theorem::T4: return "T4";
    case Theorem::T5: return "T5";
    case Theorem::T6: return "T6";
    case Theorem::T7: return "T7";
  }
  return "?";
}

inline std::optional<Theorem> theorem_from_string(const std::string& s) {
  for (Theorem t : {Theorem::T2, Theorem::T3, Theorem::T4, Theorem::T5, Theorem::T6, Theorem::T7}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

/// m-dependence of one correction term.
enum class MBasis {
  GammaShift,  // Gamma(m + shift) / Gamma(m)
  Rising,      // (m)_shift, shift a non-negative integer
  Psi,         // psi(m)
  InvM1,       // 1 / (m - 1)
  InvM1M2,     // 1 / ((m - 1)(m - 2))
};

template <class Real = double>
struct CorrectionTerm {
  std::string label;
  Real coefficient;
  MBasis basis;
  Real shift = 0;

  Real basis_at(std::size_t m) const {
    const Real mm(m);
    switch (basis) {
      case MBasis::GammaShift: return log_gamma_ratio(mm, shift).to_real();
      case MBasis::Rising: return pochhammer(mm, static_cast<std::uint64_t>(static_cast<long long>(shift))).to_real();
      case MBasis::Psi: return digamma(mm);
      case MBasis::InvM1: return 1 / (mm - 1);
      case MBasis::InvM1M2: return 1 / ((mm - 1) * (mm - 2));
    }
    return Real(0);
  }
};

template <class Real = double>
struct AsymptoticResult {
  Real value = 0;
  Real constant_term = 0;
  std::vector<std::pair<std::string, Real>> corrections;
  Real predicted_order = 0;
  Theorem theorem = Theorem::T3;
};

template <class Real = double>
struct Expansion {
  Theorem theorem = Theorem::T3;
  Real constant = 0;
  std::vector<CorrectionTerm<Real>> terms;
  // residual = O(m^{-predicted_order})
  Real predicted_order = 0;
  // Coefficient of the leading neglected term; ~0 means the measured
  // residual order will exceed predicted_order.
  Real next_order_coefficient = 0;
  std::size_t min_m = 1;

  AsymptoticResult<Real> at(std::size_t m) const {
    if (m < min_m) {
      throw DomainError(std::string(to_string(theorem)) + " expansion needs m >= " + std::to_string(min_m));
    }
    AsymptoticResult<Real> r;
    r.constant_term = constant;
    r.predicted_order = predicted_order;
    r.theorem = theorem;
    detail::CompensatedSum<Real> sum;
    sum.add(constant);
    for (const auto& term : terms) {
      const Real v = term.coefficient * term.basis_at(m);
      r.corrections.emplace_back(term.label, v);
      sum.add(v);
    }
    r.value = sum.value();
    return r;
  }
};

namespace detail {

template <class Real>
void require_k_sums(const SeriesParams<Real>& params, const char* what) {
  if (!params.k_sums_converge()) {
    throw ConvergenceError(std::string(what) + ": the constant term needs a_j > 0 for j = 3..p+1");
  }
}

// Coefficient of Gamma(m - s - n)/Gamma(m) in the non-integer expansion.
template <class Real>
Real singular_correction_coefficient(const SeriesParams<Real>& params, const AkTable<Real>& table, const Real& s,
                                     std::size_t n) {
  const Real inner = folded_sum(table, params.a(1) + s, params.a(2) + s, n);
  return -sign_pow<Real>(n) / ((s + Real(n)) * factorial<Real>(n)) * inner;
}

}  // namespace detail

/// T2: the partial sums tend to g_0(0) with error O(m^{-s_p}).
template <class Real>
Expansion<Real> make_theorem2(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {}) {
  const Real s = params.s();
  if (!(s > 0)) throw DomainError("T2 needs s_p > 0");
  detail::require_k_sums(params, "T2");
  Expansion<Real> e;
  e.theorem = Theorem::T2;
  e.constant = g0_const(params, ctl);
  e.predicted_order = s;
  auto table = detail::table_for(params, 1);
  e.next_order_coefficient = detail::singular_correction_coefficient(params, *table, s, 0);
  return e;
}

/// Default truncation order for the non-integer expansion.
template <class Real>
int default_theorem3_order(const Real& s) {
  using std::ceil;
  const Real c = ceil(-s);
  return (c > 0 ? static_cast<int>(static_cast<long long>(c)) : 0) + 1;
}

/// T3: s_p not a non-positive integer, N > -s_p.
template <class Real>
Expansion<Real> make_theorem3(const SeriesParams<Real>& params, int N, const TailControl<Real>& ctl = {},
                              double eps_int = kDefaultIntegerTolerance) {
  const Real s = params.s();
  const auto cls = classify(s, eps_int);
  if (cls.tag == SpTag::Zero || cls.tag == SpTag::NegativeInteger) {
    throw PoleError("T3: s_p is a non-positive integer");
  }
  if (N < 0 || !(Real(N) > -s)) throw DomainError("T3 needs N >= 0 and N > -s_p");
  detail::require_k_sums(params, "T3");

  Expansion<Real> e;
  e.theorem = Theorem::T3;
  e.constant = g0_const(params, ctl);
  auto table = detail::table_for(params, static_cast<std::size_t>(N) + 1);
  for (int n = 0; n <= N; ++n) {
    e.terms.push_back({"Gamma(m-s-" + std::to_string(n) + ")/Gamma(m)",
                       detail::singular_correction_coefficient(params, *table, s, n), MBasis::GammaShift,
                       -s - Real(n)});
  }
  e.predicted_order = s + Real(N) + 1;
  e.next_order_coefficient = detail::singular_correction_coefficient(params, *table, s, static_cast<std::size_t>(N) + 1);
  // Integer s_p = t: Gamma(m - t - n) needs m > t + N.
  e.min_m = cls.tag == SpTag::PositiveInteger ? cls.t + static_cast<std::size_t>(N) + 1 : 1;
  return e;
}

/// T4: zero-balanced series.
template <class Real>
Expansion<Real> make_theorem4(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {},
                              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::Zero, 0, "T4", eps_int);
  detail::require_k_sums(params, "T4");
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, 3);
  const Real A1 = table->value_real(1);
  const Real A2 = table->value_real(2);

  Expansion<Real> e;
  e.theorem = Theorem::T4;
  e.constant = d0_series(params, ctl).value + digamma(Real(1)) - digamma(a1) - digamma(a2);
  e.terms.push_back({"psi(m)", Real(1), MBasis::Psi});
  e.terms.push_back({"1/(m-1)", a1 * a2 - A1, MBasis::InvM1});
  e.terms.push_back({"1/((m-1)(m-2))",
                     -(a1 * (a1 + 1) * a2 * (a2 + 1) - 2 * (a1 + 1) * (a2 + 1) * A1 + 2 * A2) / 4, MBasis::InvM1M2});
  e.predicted_order = 3;
  e.next_order_coefficient = -2 * e_coeff(params, 3, eps_int);
  e.min_m = 3;
  return e;
}

/// T5: s_p = 1.
template <class Real>
Expansion<Real> make_theorem5(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {},
                              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::PositiveInteger, 1, "T5", eps_int);
  detail::require_k_sums(params, "T5");
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, 2);
  const Real A1 = table->value_real(1);

  Expansion<Real> e;
  e.theorem = Theorem::T5;
  e.constant = l0_const(params, 1, ctl, eps_int);
  e.terms.push_back({"1/(m-1)", Real(-1), MBasis::InvM1});
  e.terms.push_back({"1/((m-1)(m-2))", ((a1 + 1) * (a2 + 1) - A1) / 2, MBasis::InvM1M2});
  e.predicted_order = 3;
  e.next_order_coefficient = -2 * q_coeff(params, 1, 2, eps_int);
  e.min_m = 3;
  return e;
}

/// T6: s_p = 2.
template <class Real>
Expansion<Real> make_theorem6(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {},
                              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::PositiveInteger, 2, "T6", eps_int);
  detail::require_k_sums(params, "T6");
  Expansion<Real> e;
  e.theorem = Theorem::T6;
  e.constant = l0_const(params, 2, ctl, eps_int);
  e.terms.push_back({"1/((m-1)(m-2))", Real(-0.5), MBasis::InvM1M2});
  e.predicted_order = 3;
  e.next_order_coefficient = -2 * q_coeff(params, 2, 1, eps_int);
  e.min_m = 3;
  return e;
}

/// T7: s_p = -t.
///
/// The growing block carries (m)_{t-n} = Gamma(t-n+m)/Gamma(m) with
/// coefficient h_n / ((t-n) Gamma(t-n)), which is what the partial-sum
/// identity for (1-z)^{n-t} produces.
template <class Real>
Expansion<Real> make_theorem7(const SeriesParams<Real>& params, unsigned t, const TailControl<Real>& ctl = {},
                              double eps_int = kDefaultIntegerTolerance) {
  detail::require_class(params, SpTag::NegativeInteger, t, "T7", eps_int);
  detail::require_k_sums(params, "T7");
  const Real T(t);
  const Real a1 = params.a(1);
  const Real a2 = params.a(2);
  auto table = detail::table_for(params, t + 3);

  Expansion<Real> e;
  e.theorem = Theorem::T7;
  for (unsigned n = 0; n < t; ++n) {
    const Real inner = detail::folded_sum(*table, a1 - T, a2 - T, n);
    const Real coeff = detail::sign_pow<Real>(n) / ((T - Real(n)) * detail::factorial<Real>(n)) * inner;
    e.terms.push_back({"(m)_" + std::to_string(t - n), coeff, MBasis::Rising, Real(t - n)});
  }

  const Real base = -digamma(a1) - digamma(a2);
  const Real psi_weight = u0_finite_block(params, t, [](std::size_t) { return Real(1); });
  const Real finite = u0_finite_block(params, t, [&](std::size_t k) { return digamma(Real(1 + t - k)) + base; });
  e.constant = u0_series(params, t, ctl).value + finite;
  e.terms.push_back({"psi(m)", psi_weight, MBasis::Psi});

  const Real v1 = v_coeff(params, t, 1, eps_int);
  const Real v2 = v_coeff(params, t, 2, eps_int);
  e.terms.push_back({"1/(m-1)", -v1, MBasis::InvM1});
  e.terms.push_back({"1/((m-1)(m-2))", v2, MBasis::InvM1M2});
  e.predicted_order = 3;
  e.next_order_coefficient = -2 * v_coeff(params, t, 3, eps_int);
  e.min_m = 3;
  return e;
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem2(const SeriesParams<Real>& params, const TailControl<Real>& ctl = {}) {
  return make_theorem2(params, ctl).at(1);
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem3(const SeriesParams<Real>& params, int N, std::size_t m,
                                           const TailControl<Real>& ctl = {}) {
  return make_theorem3(params, N, ctl).at(m);
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem4(const SeriesParams<Real>& params, std::size_t m,
                                           const TailControl<Real>& ctl = {}) {
  return make_theorem4(params, ctl).at(m);
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem5(const SeriesParams<Real>& params, std::size_t m,
                                           const TailControl<Real>& ctl = {}) {
  return make_theorem5(params, ctl).at(m);
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem6(const SeriesParams<Real>& params, std::size_t m,
                                           const TailControl<Real>& ctl = {}) {
  return make_theorem6(params, ctl).at(m);
}

template <class Real>
AsymptoticResult<Real> asymptotic_theorem7(const SeriesParams<Real>& params, unsigned t, std::size_t m,
                                           const TailControl<Real>& ctl = {}) {
  return make_theorem7(params, t, ctl).at(m);
}

// ---------------------------------------------------------------------------
// Dispatch

template <class Real = double>
struct EvalOptions {
  std::optional<int> N;
  std::optional<Theorem> force_theorem;
  TailControl<Real> ctl;
  double eps_int = kDefaultIntegerTolerance;
};

template <class Real = double>
struct EvalReport {
  std::size_t m = 0;
  Real direct = 0;
  Real asymptotic = 0;
  Real residual = 0;  // direct - asymptotic
  Real predicted_order = 0;
  Theorem theorem = Theorem::T3;
};

/// Picks the expansion for the class of s_p: T4 for zero, T5/T6 for 1 and 2,
/// T7 for negative integers and T3 otherwise (including s_p = 3, 4, ...).
/// T2 is only used when forced.
template <class Real>
Expansion<Real> make_expansion(const SeriesParams<Real>& params, const EvalOptions<Real>& opts = {}) {
  const auto cls = classify(params.s(), opts.eps_int);
  Theorem pick;
  if (opts.force_theorem) {
    pick = *opts.force_theorem;
  } else {
    switch (cls.tag) {
      case SpTag::Zero: pick = Theorem::T4; break;
      case SpTag::NegativeInteger: pick = Theorem::T7; break;
      case SpTag::PositiveInteger: pick = cls.t == 1 ? Theorem::T5 : cls.t == 2 ? Theorem::T6 : Theorem::T3; break;
      default: pick = Theorem::T3; break;
    }
  }
  switch (pick) {
    case Theorem::T2: return make_theorem2(params, opts.ctl);
    case Theorem::T3: {
      const int N = opts.N.value_or(default_theorem3_order(params.s()));
      return make_theorem3(params, N, opts.ctl, opts.eps_int);
    }
    case Theorem::T4: return make_theorem4(params, opts.ctl, opts.eps_int);
    case Theorem::T5: return make_theorem5(params, opts.ctl, opts.eps_int);
    case Theorem::T6: return make_theorem6(params, opts.ctl, opts.eps_int);
    case Theorem::T7:
      if (cls.tag != SpTag::NegativeInteger) throw DomainError("T7 needs s_p to be a negative integer");
      return make_theorem7(params, cls.t, opts.ctl, opts.eps_int);
  }
  throw DomainError("unknown theorem");
}

/// Direct sum, expansion and residual for each m (non-decreasing).
template <class Real>
std::vector<EvalReport<Real>> evaluate_many(const SeriesParams<Real>& params, std::span<const std::size_t> ms,
                                            const EvalOptions<Real>& opts = {}) {
  const auto expansion = make_expansion(params, opts);
  const auto direct = direct_partial_sums(params, ms);
  std::vector<EvalReport<Real>> rows;
  rows.reserve(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto asym = expansion.at(ms[i]);
    rows.push_back({ms[i], direct[i], asym.value, direct[i] - asym.value, asym.predicted_order, asym.theorem});
  }
  return rows;
}

template <class Real>
EvalReport<Real> evaluate(const SeriesParams<Real>& params, std::size_t m, const EvalOptions<Real>& opts = {}) {
  const std::size_t ms[] = {m};
  return evaluate_many(params, std::span<const std::size_t>(ms), opts).front();
}

/// Least-squares slope of log|residual| against log m.
template <class Real>
Real fit_residual_order(std::span<const EvalReport<Real>> rows) {
  std::vector<Real> x, y;
  for (const auto& r : rows) {
    x.push_back(Real(r.m));
    y.push_back(r.residual);
  }
  return loglog_slope<Real>(x, y);
}

/// m_0, 2 m_0, 4 m_0, ... (count entries).
inline std::vector<std::size_t> geometric_grid(std::size_t m0, std::size_t count) {
  std::vector<std::size_t> ms;
  for (std::size_t i = 0; i < count; ++i) ms.push_back(m0 << i);
  return ms;
}

}  // namespace hypsum
