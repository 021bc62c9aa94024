#include <gtest/gtest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "hypsum/continuation.hpp"
#include "oracle_values.inc"
#include "test_util.hpp"

using namespace hypsum;
using testutil::rel_err;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

const double kLn2 = std::numbers::ln2;

double tg(double x) { return std::tgamma(x); }

// Verbatim evaluation of the finite coefficient sums at 50 digits, with the
// closed-form p = 2 coefficients A_k = (b_2 - a_3)_k (b_1 - a_3)_k / k!.
struct Verbatim {
  std::vector<Big> a, b;

  static Big poch(const Big& x, unsigned n) {
    Big r = 1;
    for (unsigned i = 0; i < n; ++i) r *= x + i;
    return r;
  }
  static Big fact(unsigned n) { return poch(Big(1), n); }
  Big ak(unsigned k) const { return poch(b[1] - a[2], k) * poch(b[0] - a[2], k) / fact(k); }
  Big s() const { return b[0] + b[1] - a[0] - a[1] - a[2]; }

  template <class W>
  Big inner(const Big& x1, const Big& x2, unsigned n, W weight) const {
    Big sum = 0;
    for (unsigned k = 0; k <= n; ++k) {
      sum += poch(Big(-int(n)), k) / (poch(x1, k) * poch(x2, k)) * ak(k) * weight(k);
    }
    return sum;
  }
  Big inner(const Big& x1, const Big& x2, unsigned n) const {
    return inner(x1, x2, n, [](unsigned) { return Big(1); });
  }
  static Big sgn(unsigned n) { return n % 2 ? Big(-1) : Big(1); }

  Big g(unsigned n) const {
    const Big S = s();
    return sgn(n) * poch(a[0] + S, n) * poch(a[1] + S, n) * boost::math::tgamma(Big(-S - n)) / fact(n) *
           inner(a[0] + S, a[1] + S, n);
  }
  Big e(unsigned n) const { return -poch(a[0], n) * poch(a[1], n) / (fact(n) * fact(n)) * inner(a[0], a[1], n); }
  Big q(unsigned t, unsigned n) const {
    return -sgn(t) * poch(a[0] + t, n) * poch(a[1] + t, n) / fact(t + n) * inner(a[0] + t, a[1] + t, n);
  }
  Big h(unsigned t, unsigned n) const {
    return sgn(n) * poch(a[0] - t, n) * poch(a[1] - t, n) * fact(t - n - 1) / fact(n) * inner(a[0] - t, a[1] - t, n);
  }
  Big v(unsigned t, unsigned n) const {
    return -sgn(t) * poch(a[0] - t, t + n) * poch(a[1] - t, t + n) / (fact(n) * fact(t + n)) *
           inner(a[0] - t, a[1] - t, t + n);
  }
  Big u0_block(unsigned t) const {
    using boost::math::digamma;
    const Big base = digamma(Big(1)) - digamma(a[0]) - digamma(a[1]);
    return sgn(t) * poch(a[0] - t, t) * poch(a[1] - t, t) / fact(t) *
           inner(a[0] - t, a[1] - t, t, [&](unsigned k) { return digamma(Big(1 + t - k)) + base; });
  }
};

// Random p = 2 parameters with s_p = target (b_2 chosen to close the sum).
SeriesParams<double> draw_p2(std::mt19937_64& rng, double target) {
  std::uniform_real_distribution<double> dist(0.2, 2.0);
  for (;;) {
    const double a1 = dist(rng), a2 = dist(rng), a3 = dist(rng), b1 = dist(rng);
    const double b2 = a1 + a2 + a3 + target - b1;
    if (b2 > 0.2 && b2 < 3.0) return SeriesParams<double>({a1, a2, a3}, {b1, b2});
  }
}

Verbatim verbatim(const SeriesParams<double>& P) {
  Verbatim v;
  for (double x : P.a()) v.a.emplace_back(x);
  for (double x : P.b()) v.b.emplace_back(x);
  return v;
}

double rel(double got, const Big& want) { return static_cast<double>(rel_err(Big(got), want)); }

}  // namespace

TEST(TailControl, Validation) {
  TailControl<double> c;
  EXPECT_NO_THROW(c.validate());
  c.rel_tol = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c.rel_tol = 1;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.k_max = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(G0Const, P1IsGaussConstant) {
  const SeriesParams<double> P({0.5, 0.7}, {1.9});
  const double want = tg(.5) * tg(.7) * tg(.7) / (tg(1.2) * tg(1.4));
  EXPECT_LE(rel_err(g0_const(P), want), 1e-14);
}

TEST(G0Const, OracleLimits) {
  EXPECT_LE(rel_err(g0_const(SeriesParams<double>({.4, .6, .8}, {1.5, 1.7})), oracle::kLimit_p2_s1p4), 1e-12);
  EXPECT_LE(rel_err(g0_const(SeriesParams<double>({.6, .7, .8, .9}, {1.2, 1.3, 1.4})), oracle::kLimit_p3_s0p9),
            1e-12);
}

TEST(G0Const, SeriesCollapsesWhenB1EqualsA3) {
  const SeriesParams<double> P({.3, .4, .6}, {.6, 1.5});
  const double s = P.s();
  const double want = tg(.3) * tg(.4) * tg(s) / (tg(.3 + s) * tg(.4 + s));
  EXPECT_LE(rel_err(g0_const(P), want), 1e-14);
  EXPECT_EQ(g0_series(P, s).value, 1.0);
}

TEST(G0Const, Errors) {
  EXPECT_THROW(g0_const(SeriesParams<double>({.5, .5, -.3}, {1.5, 1.5})), ConvergenceError);
  EXPECT_THROW(g0_const(SeriesParams<double>({.5, .5}, {1.0})), PoleError);
  TailControl<double> tight;
  tight.k_max = 40;
  try {
    g0_const(SeriesParams<double>({.4, .6, .8}, {1.5, 1.7}), tight);
    FAIL() << "expected TailError";
  } catch (const TailError& e) {
    EXPECT_EQ(e.sum_name(), "g0 series");
  }
}

// Doubling k_max (or tightening the tolerance) moves the result by no more
// than the reported bound.
TEST(G0Const, TruncationBoundHolds) {
  // fast tails for plain truncation, slow ones for the extrapolated path
  for (bool accelerate : {false, true}) {
    const SeriesParams<double> P = accelerate ? SeriesParams<double>({.4, .6, .8, 1.7}, {1.5, 1.7, 2.2})
                                              : SeriesParams<double>({.4, .6, 3.5, 4.0}, {1.5, 3.7, 5.2});
    TailControl<double> loose;
    loose.accelerate = accelerate;
    loose.rel_tol = 1e-7;
    const auto est = g0_series(P, P.s(), loose);
    TailControl<double> ref;
    ref.k_max = 2 * 200000;
    ref.rel_tol = 1e-13;
    const auto better = g0_series(P, P.s(), ref);
    EXPECT_LE(std::abs(est.value - better.value), est.error + better.error + 1e-14) << accelerate;
    EXPECT_GT(est.terms, 0u);
  }
}

TEST(L0Const, Examples) {
  const SeriesParams<double> p1t1({.6, .9}, {2.5});
  EXPECT_LE(rel_err(l0_const(p1t1, 1), 1 / (.6 * .9)), 1e-14);
  const SeriesParams<double> p1t2({.6, .9}, {3.5});
  EXPECT_LE(rel_err(l0_const(p1t2, 2), 1 / (.6 * 1.6 * .9 * 1.9)), 1e-14);
  EXPECT_LE(rel_err(l0_const(SeriesParams<double>({.6, .9, 1.3}, {1.1, 2.7}), 1), oracle::kL0_t1), 1e-12);
  EXPECT_LE(rel_err(l0_const(SeriesParams<double>({.5, .5, .5}, {1, 1.5}), 1), oracle::kLimit_p2_s1), 1e-12);
  EXPECT_THROW(l0_const(p1t1, 2), DomainError);
}

TEST(L0Const, SharesG0Series) {
  std::mt19937_64 rng(21);
  for (unsigned t : {1u, 2u}) {
    for (int i = 0; i < 5; ++i) {
      const auto P = draw_p2(rng, double(t));
      EXPECT_LE(rel_err(l0_const(P, t), g0_at(P, double(t))), 1e-13);
    }
  }
}

TEST(GSingular, Examples) {
  const SeriesParams<double> p1({0.5, 0.7}, {1.9});
  EXPECT_EQ(g_singular(p1, 0), hypsum::gamma(-p1.s()));
  EXPECT_LE(rel_err(g_singular(p1, 0), std::tgamma(-p1.s())), 1e-14);
  const SeriesParams<double> p2({.3, .5, .6}, {1.1, 1.25});
  EXPECT_EQ(g_singular(p2, 0), hypsum::gamma(-p2.s()));
  EXPECT_LE(rel_err(g_singular(SeriesParams<double>({.3, .4, .6}, {1.1, 1.25}), 2), oracle::kGSingular_n2), 1e-13);
  EXPECT_THROW(g_singular(SeriesParams<double>({.3, .4, .6}, {1.1, 1.2}), 0), PoleError);
}

TEST(ECoeff, Examples) {
  const SeriesParams<double> P({.6, .9, 1.3}, {1.1, 1.7});
  EXPECT_EQ(e_coeff(P, 0), -1.0);
  const double A1 = ak_table_nested(P, 1).value_real(1);
  EXPECT_LE(rel_err(e_coeff(P, 1), -(.6 * .9 - A1)), 1e-14);
  EXPECT_LE(rel_err(e_coeff(P, 2), oracle::kE2_zero), 1e-13);
  EXPECT_LE(rel_err(e_coeff(P, 3), oracle::kE3_zero), 1e-13);
  EXPECT_THROW(e_coeff(SeriesParams<double>({.6, .9, 1.3}, {1.1, 1.8}), 1), DomainError);
}

TEST(D0Const, Examples) {
  const SeriesParams<double> p1({.5, .5}, {1.0});
  EXPECT_LE(rel_err(d0_const(p1), 2 * digamma(1.0) - 2 * digamma(.5)), 1e-15);
  const SeriesParams<double> p2({.6, .9, .4}, {.4, 1.5});
  EXPECT_LE(rel_err(d0_const(p2), 2 * digamma(1.0) - digamma(.6) - digamma(.9)), 1e-15);
  // d_0 - psi(1) is the constant of the zero-balanced expansion
  const SeriesParams<double> p3({.6, .9, 1.3}, {1.1, 1.7});
  EXPECT_LE(rel_err(d0_const(p3) - digamma(1.0), oracle::kZeroBalanced_p2), 1e-12);
}

TEST(D0Const, ZeroBalanced5F4) {
  const SeriesParams<double> P({.5, .5, .5, .5, 1.25}, {1, 1, 1, .25});
  EXPECT_NEAR(d0_series(P).value, -kLn2, 1e-13);
  EXPECT_NEAR(d0_const(P) - digamma(1.0), -digamma(1.0) + 3 * kLn2, 1e-13);
}

TEST(QCoeff, Examples) {
  EXPECT_EQ(q_coeff(SeriesParams<double>({.6, .9}, {2.5}), 1, 0), 1.0);
  EXPECT_EQ(q_coeff(SeriesParams<double>({.6, .9}, {3.5}), 2, 0), -0.5);
  EXPECT_LE(rel_err(q_coeff(SeriesParams<double>({.6, .9, 1.3}, {1.1, 2.7}), 1, 1), oracle::kQ1_t1), 1e-14);
}

TEST(HCoeff, Examples) {
  const SeriesParams<double> t2({.6, .9}, {-.5});
  EXPECT_EQ(h_coeff(t2, 2, 0), 1.0);
  EXPECT_LE(rel_err(h_coeff(t2, 2, 1), -(.6 - 2) * (.9 - 2)), 1e-14);
  EXPECT_EQ(h_coeff(SeriesParams<double>({.6, .9, 1.3}, {1.1, .7}), 1, 0), 1.0);
  EXPECT_LE(rel_err(h_coeff(SeriesParams<double>({.6, .9, 1.3}, {.45, .35}), 2, 1), oracle::kH1_t2), 1e-13);
  EXPECT_THROW(h_coeff(t2, 2, 2), DomainError);
}

TEST(VCoeff, Examples) {
  const SeriesParams<double> p1({.6, .9}, {.5});
  EXPECT_LE(rel_err(v_coeff(p1, 1, 0), (.6 - 1) * (.9 - 1)), 1e-14);
  const SeriesParams<double> p2({.6, .9, 1.3}, {1.1, .7});
  EXPECT_LE(rel_err(v_coeff(p2, 1, 0), oracle::kV0_t1), 1e-13);
  EXPECT_LE(rel_err(v_coeff(p2, 1, 1), oracle::kV1_t1), 1e-13);
  EXPECT_LE(rel_err(v_coeff(p2, 1, 2), oracle::kV2_t1), 1e-13);
  EXPECT_LE(rel_err(v_coeff(SeriesParams<double>({.6, .9, 1.3}, {.45, .35}), 2, 1), oracle::kV1_t2), 1e-12);
}

TEST(U0Const, Examples) {
  const SeriesParams<double> p1({.6, .9}, {.5});
  const double want = -(.6 - 1) * (.9 - 1) * (digamma(2.0) + digamma(1.0) - digamma(.6) - digamma(.9));
  EXPECT_LE(rel_err(u0_const(p1, 1), want), 1e-14);
  EXPECT_LE(rel_err(u0_const(SeriesParams<double>({.6, .9, 1.3}, {1.1, .7}), 1), oracle::kU0_t1), 1e-12);
  // b_1 = a_3: the infinite part vanishes
  const SeriesParams<double> cut({.6, .9, .5}, {.5, .5});
  EXPECT_EQ(u0_series(cut, 1).value, 0.0);
}

TEST(FiniteSums, AgreeWithHighPrecision) {
  std::mt19937_64 rng(99);
  for (int draw = 0; draw < 50; ++draw) {
    {
      std::uniform_real_distribution<double> frac(0.1, 0.9);
      const auto P = draw_p2(rng, std::floor(draw % 3) + frac(rng) - 1);
      const auto V = verbatim(P);
      for (unsigned n = 0; n <= 4; ++n) EXPECT_LE(rel(g_singular(P, n), V.g(n)), 1e-12) << n;
    }
    {
      const auto P = draw_p2(rng, 0.0);
      const auto V = verbatim(P);
      for (unsigned n = 0; n <= 4; ++n) EXPECT_LE(rel(e_coeff(P, n), V.e(n)), 1e-12) << n;
    }
    for (unsigned t : {1u, 2u, 3u}) {
      const auto P = draw_p2(rng, double(t));
      const auto V = verbatim(P);
      for (unsigned n = 0; n <= 3; ++n) EXPECT_LE(rel(q_coeff(P, t, n), V.q(t, n)), 1e-12);
    }
    for (unsigned t : {1u, 2u, 3u}) {
      const auto P = draw_p2(rng, -double(t));
      const auto V = verbatim(P);
      for (unsigned n = 0; n < t; ++n) EXPECT_LE(rel(h_coeff(P, t, n), V.h(t, n)), 1e-12);
      for (unsigned n = 0; n <= 2; ++n) EXPECT_LE(rel(v_coeff(P, t, n), V.v(t, n)), 1e-12);
      const double base = digamma(1.0) - digamma(P.a(1)) - digamma(P.a(2));
      const double block = u0_finite_block(P, t, [&](std::size_t k) { return digamma(double(1 + t - k)) + base; });
      EXPECT_LE(rel(block, V.u0_block(t)), 1e-12);
    }
  }
}

TEST(Continuation, QuadPrecisionInstantiation) {
  using Q = Big;
  const SeriesParams<Q> P({Q(2) / 5, Q(3) / 5, Q(4) / 5}, {Q(3) / 2, Q(17) / 10});
  TailControl<Q> ctl;
  ctl.rel_tol = Q(1e-20);
  EXPECT_LT(static_cast<double>(rel_err(g0_const(P, ctl), Q(oracle::kLimit_p2_s1p4))), 1e-15);
}
