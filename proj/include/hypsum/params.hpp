#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hypsum/errors.hpp"
#include "hypsum/specfun.hpp"

namespace hypsum {

/// Upper parameters a_1..a_{p+1} and lower parameters b_1..b_p of a
/// {p+1}F{p} series of unit argument.
///
/// Construction validates the parameter lists; a SeriesParams object is
/// therefore always usable by every downstream routine except that the
/// infinite sums over k additionally need k_sums_converge().
template <class Real = double>
class SeriesParams {
 public:
  SeriesParams(std::vector<Real> a, std::vector<Real> b) : a_(std::move(a)), b_(std::move(b)) {
    if (b_.empty()) throw ParamError("at least one lower parameter is required (p >= 1)");
    if (a_.size() != b_.size() + 1) {
      std::ostringstream msg;
      msg << "expected " << b_.size() + 1 << " upper parameters for " << b_.size()
          << " lower parameters, got " << a_.size();
      throw ParamError(msg.str());
    }
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (is_nonpositive_integer(a_[i])) {
        throw ParamError("a_" + std::to_string(i + 1) + " is a non-positive integer (terminating series)");
      }
    }
    for (std::size_t j = 0; j < b_.size(); ++j) {
      if (is_nonpositive_integer(b_[j])) {
        throw ParamError("b_" + std::to_string(j + 1) + " is a non-positive integer (gamma pole)");
      }
    }
  }

  std::size_t p() const { return b_.size(); }
  const std::vector<Real>& a() const { return a_; }
  const std::vector<Real>& b() const { return b_; }

  /// One-based accessors matching the usual a_i, b_j numbering.
  const Real& a(std::size_t i) const { return a_.at(i - 1); }
  const Real& b(std::size_t j) const { return b_.at(j - 1); }

  /// s_p = sum b_j - sum a_i.
  Real s() const {
    return std::accumulate(b_.begin(), b_.end(), Real(0)) - std::accumulate(a_.begin(), a_.end(), Real(0));
  }

  /// The infinite sums over k converge iff a_j > 0 for j = 3..p+1.
  bool k_sums_converge() const {
    return std::all_of(a_.begin() + 2, a_.end(), [](const Real& x) { return x > 0; });
  }

  /// Decay exponents a_3..a_{p+1} of the k-series terms (empty for p = 1).
  std::vector<Real> k_decay_exponents() const { return {a_.begin() + 2, a_.end()}; }

  /// Decay exponents that actually show up in the tails.  An upper
  /// parameter a_j that exceeds some lower parameter by a non-negative
  /// integer cancels against it and contributes no k^{-1-a_j} family
  /// (for p = 2 the sum then terminates).  Each b_i cancels at most one a_j.
  std::vector<Real> k_tail_exponents() const {
    std::vector<bool> used(b_.size(), false);
    std::vector<Real> out;
    for (std::size_t j = 2; j < a_.size(); ++j) {
      bool cancelled = false;
      for (std::size_t i = 0; i < b_.size() && !cancelled; ++i) {
        const Real d = a_[j] - b_[i];
        if (!used[i] && d > Real(-0.5) && (is_nonpositive_integer(Real(-d)))) {
          used[i] = true;
          cancelled = true;
        }
      }
      if (!cancelled) out.push_back(a_[j]);
    }
    return out;
  }

  bool operator==(const SeriesParams&) const = default;

 private:
  std::vector<Real> a_;
  std::vector<Real> b_;
};

template <class Real>
Real s_exponent(const SeriesParams<Real>& params) {
  return params.s();
}

template <class Real>
void require_convergent_k_sums(const SeriesParams<Real>& params, const char* what) {
  if (!params.k_sums_converge()) {
    throw ConvergenceError(std::string(what) + ": the sum over k needs a_j > 0 for j = 3..p+1");
  }
}

enum class SpTag { NonInteger, Zero, PositiveInteger, NegativeInteger };

inline const char* to_string(SpTag tag) {
  switch (tag) {
    case SpTag::NonInteger: return "NonInteger";
    case SpTag::Zero: return "Zero";
    case SpTag::PositiveInteger: return "PositiveInteger";
    case SpTag::NegativeInteger: return "NegativeInteger";
  }
  return "?";
}

/// Classification of the exponent s_p.
template <class Real = double>
struct SpClass {
  SpTag tag = SpTag::NonInteger;
  unsigned t = 0;  // |s_p| for the integer tags, 0 otherwise
  Real s = 0;
};

inline constexpr double kDefaultIntegerTolerance = 1e-9;

template <class Real>
SpClass<Real> classify(const Real& s, double eps_int = kDefaultIntegerTolerance) {
  using std::abs;
  if (abs(s) <= Real(eps_int)) return {SpTag::Zero, 0, s};
  const Real nearest = detail::nearest_integer(s);
  if (abs(s - nearest) <= Real(eps_int)) {
    const auto t = static_cast<unsigned>(static_cast<long long>(abs(nearest)));
    return {nearest > 0 ? SpTag::PositiveInteger : SpTag::NegativeInteger, t, s};
  }
  return {SpTag::NonInteger, 0, s};
}

}  // namespace hypsum
