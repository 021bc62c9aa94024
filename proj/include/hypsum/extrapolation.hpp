#pragma once

// Richardson extrapolation for sequences with a known set of algebraic
// error exponents, and the least-squares log-log slope used to measure
// convergence orders.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hypsum/errors.hpp"

namespace hypsum {

/// Exponents e_j + n (n = 0, 1, ...) of every family, merged in ascending
/// order and truncated to `count` entries.  Equal exponents from different
/// families are kept twice; eliminating a ratio twice also removes the
/// matching K^{-e} ln K term.
template <class Real>
std::vector<Real> exponent_ladder(std::span<const Real> families, std::size_t count) {
  std::vector<Real> ladder;
  if (families.empty()) return ladder;
  for (std::size_t n = 0; ladder.size() < count * families.size() && n < count; ++n) {
    for (const Real& e : families) ladder.push_back(e + Real(n));
  }
  std::sort(ladder.begin(), ladder.end());
  ladder.resize(std::min(ladder.size(), count));
  return ladder;
}

template <class Real>
struct Extrapolated {
  Real value;
  Real error;  // difference between the last two diagonal estimates
};

namespace detail {

template <class Real>
Real eliminate(std::vector<Real> row, std::span<const Real> exponents, const Real& ratio) {
  using std::pow;
  const std::size_t levels = std::min(exponents.size(), row.size() - 1);
  for (std::size_t level = 0; level < levels; ++level) {
    const Real r = pow(ratio, -exponents[level]);
    for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = (row[i + 1] - r * row[i]) / (1 - r);
    row.pop_back();
  }
  return row.back();
}

}  // namespace detail

/// S_i = S(K_0 r^i) with S(K) = S + sum_j c_j K^{-e_j} + ...; eliminates
/// the exponents in order, one per extra sample.  The error estimate is the
/// change against the estimate built without the last sample.
template <class Real>
Extrapolated<Real> richardson(std::span<const Real> samples, std::span<const Real> exponents, const Real& ratio = Real(2)) {
  using std::abs;
  if (samples.empty()) throw DomainError("richardson: no samples");
  const Real best = detail::eliminate(std::vector<Real>(samples.begin(), samples.end()), exponents, ratio);
  if (samples.size() == 1) return {best, Real(0)};
  const Real shorter = detail::eliminate(std::vector<Real>(samples.begin(), samples.end() - 1), exponents, ratio);
  return {best, abs(best - shorter)};
}

/// Worst-case growth of independent sample errors through richardson():
/// prod (1 + r^{-e}) / (1 - r^{-e}) over the eliminated exponents.
template <class Real>
Real richardson_noise_gain(std::span<const Real> exponents, std::size_t levels, const Real& ratio = Real(2)) {
  using std::pow;
  Real gain = 1;
  for (std::size_t i = 0; i < std::min(levels, exponents.size()); ++i) {
    const Real r = pow(ratio, -exponents[i]);
    gain *= (1 + r) / (1 - r);
  }
  return gain;
}

/// Least-squares slope of log|y| against log x.
template <class Real>
Real loglog_slope(std::span<const Real> x, std::span<const Real> y) {
  using std::abs;
  using std::log;
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need matching samples, at least two");
  const std::size_t n = x.size();
  Real mx = 0, my = 0;
  std::vector<Real> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] <= 0 || y[i] == 0) throw DomainError("loglog_slope: zero or negative sample");
    lx[i] = log(x[i]);
    ly[i] = log(abs(y[i]));
    mx += lx[i];
    my += ly[i];
  }
  mx /= Real(n);
  my /= Real(n);
  Real sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace hypsum
