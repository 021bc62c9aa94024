#pragma once

// The coefficient family A_k^(p) that enters every continuation coefficient.
//
// For p >= 2, with k_1 = k and k_p = 0,
//
//   A_k^(p) = sum_{k >= k_2 >= ... >= k_{p-1} >= 0}
//               prod_{j=1}^{p-1} (B_j + k_{j+1})_{d_j} (b_j - a_{j+2})_{d_j} / d_j!,
//   d_j = k_j - k_{j+1},
//   B_j = b_{j+1} + ... + b_p - a_{j+2} - ... - a_{p+1},
//
// and A_k^(1) = [k == 0].  For p = 2, 3, 4 this is the printed closed form
// and its double and triple sums; for p >= 5 the same nesting pattern is
// extrapolated and only checked for internal consistency.
//
// A_k grows like k! so tables store A_k = (beta)_k * m_k with a positive
// normalisation beta chosen per table; m_k then only varies polynomially
// in k.  The nested sum becomes p-1 convolution layers, each O(K^2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "hypsum/errors.hpp"
#include "hypsum/params.hpp"
#include "hypsum/signed_log.hpp"
#include "hypsum/specfun.hpp"

namespace hypsum {

/// A_0^(p) .. A_K^(p) for one parameter set.
template <class Real = double>
class AkTable {
 public:
  AkTable(SeriesParams<Real> params, Real beta, std::vector<Real> scaled)
      : params_(std::move(params)), beta_(std::move(beta)), scaled_(std::move(scaled)) {}

  std::size_t p() const { return params_.p(); }
  const SeriesParams<Real>& params() const { return params_; }
  /// Highest index stored.
  std::size_t K() const { return scaled_.size() - 1; }

  /// Normalisation: A_k = (beta)_k * scaled(k).
  const Real& beta() const { return beta_; }
  const Real& scaled(std::size_t k) const { return scaled_.at(k); }

  SignedLog<Real> value(std::size_t k) const {
    return pochhammer(beta_, k) * SignedLog<Real>::from_real(scaled_.at(k));
  }
  Real value_real(std::size_t k) const { return value(k).to_real(); }

 private:
  SeriesParams<Real> params_;
  Real beta_;
  std::vector<Real> scaled_;
};

namespace detail {

template <class Real>
struct Layer {
  Real B;     // B_j
  Real c;     // b_j - a_{j+2}
  Real beta;  // positive normalisation for this layer
};

template <class Real>
Real layer_normalisation(const Real& B) {
  using std::ceil;
  if (B >= Real(0.5)) return B;
  return B + ceil(Real(0.5) - B);
}

template <class Real>
std::vector<Layer<Real>> make_layers(const SeriesParams<Real>& params) {
  const std::size_t p = params.p();
  std::vector<Layer<Real>> layers;
  for (std::size_t j = 1; j + 1 <= p; ++j) {
    Real B = 0;
    for (std::size_t i = j + 1; i <= p; ++i) B += params.b(i);
    for (std::size_t i = j + 2; i <= p + 1; ++i) B -= params.a(i);
    layers.push_back({B, params.b(j) - params.a(j + 2), layer_normalisation(B)});
  }
  return layers;
}

// sum_{kp=lo}^{k} w[k-kp] v[kp], four independent accumulators.
template <class Real>
Real lagged_dot(const std::vector<Real>& w, const std::vector<Real>& v, std::size_t lo, std::size_t k) {
  Real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t kp = lo;
  for (; kp + 3 <= k; kp += 4) {
    s0 += w[k - kp] * v[kp];
    s1 += w[k - kp - 1] * v[kp + 1];
    s2 += w[k - kp - 2] * v[kp + 2];
    s3 += w[k - kp - 3] * v[kp + 3];
  }
  for (; kp <= k; ++kp) s0 += w[k - kp] * v[kp];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// A_0..A_K by the nested-sum formula, evaluated as p-1 convolution layers.
/// p >= 5 uses the extrapolated nesting pattern (see the file comment).
template <class Real>
AkTable<Real> ak_table_nested(const SeriesParams<Real>& params, std::size_t K) {
  const std::size_t n = K + 1;
  if (params.p() == 1) {
    std::vector<Real> scaled(n, Real(0));
    scaled[0] = 1;
    return AkTable<Real>(params, Real(1), std::move(scaled));
  }

  const auto layers = detail::make_layers(params);

  // m holds L_{j+1}(k) / (beta_{j+1})_k; the innermost level is a delta.
  std::vector<Real> m(n, Real(0));
  m[0] = 1;
  bool is_delta = true;
  Real beta_next = 1;

  for (std::size_t idx = layers.size(); idx-- > 0;) {
    const auto& layer = layers[idx];

    // w(d) = (c)_d / d!
    std::vector<Real> w(n);
    w[0] = 1;
    for (std::size_t d = 1; d < n; ++d) w[d] = w[d - 1] * (layer.c + Real(d - 1)) / Real(d);

    // prefix(k) = prod_{i<k, i != zero_at} (B+i)/(beta+i); a factor B+i that
    // vanishes splits the index range into independent halves.
    std::vector<Real> prefix(n);
    std::size_t zero_at = n;  // none
    if (is_nonpositive_integer(layer.B)) {
      const auto z = static_cast<std::size_t>(static_cast<long long>(-detail::nearest_integer(layer.B)));
      if (z + 1 < n) zero_at = z;
    }
    prefix[0] = 1;
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t i = k - 1;
      prefix[k] = i == zero_at ? prefix[k - 1] : prefix[k - 1] * (layer.B + Real(i)) / (layer.beta + Real(i));
    }

    // v(k') = rho(k') m(k') / prefix(k'), rho = (beta_next)_k' / (beta_j)_k'
    std::vector<Real> v(n);
    Real rho = 1;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = rho * m[k] / prefix[k];
      rho *= (beta_next + Real(k)) / (layer.beta + Real(k));
    }

    std::vector<Real> next(n, Real(0));
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t lo = (zero_at < k) ? zero_at + 1 : 0;
      if (is_delta) {
        next[k] = lo == 0 ? prefix[k] * w[k] * v[0] : Real(0);
        continue;
      }
      next[k] = prefix[k] * detail::lagged_dot(w, v, lo, k);
    }

    m = std::move(next);
    beta_next = layer.beta;
    is_delta = false;
  }
  return AkTable<Real>(params, layers.front().beta, std::move(m));
}

/// Thread-safe cache of A_k tables keyed by the parameter set.  A request
/// for more entries than cached recomputes with at least twice the size.
template <class Real = double>
class AkCache {
 public:
  std::shared_ptr<const AkTable<Real>> get(const SeriesParams<Real>& params, std::size_t K) {
    const Key key{params.a(), params.b()};
    std::size_t size = K;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = tables_.find(key);
      if (it != tables_.end()) {
        if (it->second->K() >= K) return it->second;
        size = std::max(K, 2 * it->second->K());
      }
    }
    auto table = std::make_shared<const AkTable<Real>>(ak_table_nested(params, size));
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = tables_[key];
    if (!slot || slot->K() < table->K()) slot = table;
    return slot;
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    tables_.clear();
  }

 private:
  using Key = std::pair<std::vector<Real>, std::vector<Real>>;
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const AkTable<Real>>> tables_;
};

template <class Real>
AkCache<Real>& default_ak_cache() {
  static AkCache<Real> cache;
  return cache;
}

namespace detail {

// Terminating 3F2(x1, x2, -n; y1, y2; 1) as a finite sum of n+1 terms.
template <class Real>
Real terminating_3f2(const Real& x1, const Real& x2, std::size_t n, const Real& y1, const Real& y2) {
  using std::abs;
  Real term = 1;
  Real sum = 1;
  for (std::size_t l = 0; l < n; ++l) {
    const Real den = (y1 + Real(l)) * (y2 + Real(l)) * Real(l + 1);
    if (abs(y1 + Real(l)) <= Real(kPoleTolerance) || abs(y2 + Real(l)) <= Real(kPoleTolerance)) {
      if (term == 0) break;
      throw DegenerateRepresentation("terminating 3F2: denominator Pochhammer vanishes");
    }
    term *= (x1 + Real(l)) * (x2 + Real(l)) * (Real(l) - Real(n)) / den;
    sum += term;
  }
  return sum;
}

template <class Real>
SignedLog<Real> leading_factor(const Real& x, const Real& y, std::size_t k) {
  return pochhammer(x, k) * pochhammer(y, k) / ln_gamma_signed(Real(k + 1));
}

}  // namespace detail

enum class AltVariant { first, second };

/// A_k^(3) from one of the two terminating-3F2 representations.
template <class Real>
SignedLog<Real> ak3_alt(const SeriesParams<Real>& params, std::size_t k, AltVariant variant) {
  if (params.p() != 3) throw DomainError("ak3_alt needs p = 3");
  const auto& P = params;
  if (variant == AltVariant::first) {
    const Real B1 = P.b(3) + P.b(2) - P.a(4) - P.a(3);
    const Real c1 = P.b(1) - P.a(3);
    const Real f = detail::terminating_3f2(P.b(3) - P.a(4), P.b(2) - P.a(4), k, B1, 1 + P.a(3) - P.b(1) - Real(k));
    return detail::leading_factor(B1, c1, k) * SignedLog<Real>::from_real(f);
  }
  const Real u = P.b(1) + P.b(3) - P.a(3) - P.a(4);
  const Real v = P.b(2) + P.b(3) - P.a(3) - P.a(4);
  const Real f = detail::terminating_3f2(P.b(3) - P.a(3), P.b(3) - P.a(4), k, u, v);
  return detail::leading_factor(u, v, k) * SignedLog<Real>::from_real(f);
}

/// A_k^(4) from one of the two representations built on an inner
/// terminating 3F2.
template <class Real>
SignedLog<Real> ak4_alt(const SeriesParams<Real>& params, std::size_t k, AltVariant variant) {
  using std::abs;
  if (params.p() != 4) throw DomainError("ak4_alt needs p = 4");
  const auto& P = params;

  Real x1, x2, y1, y2;  // outer sum parameters
  if (variant == AltVariant::first) {
    x1 = P.b(4) + P.b(3) - P.a(5) - P.a(4);
    x2 = P.b(2) - P.a(4);
    y1 = P.b(4) + P.b(3) + P.b(2) - P.a(5) - P.a(4) - P.a(3);
    y2 = 1 + P.a(3) - P.b(1) - Real(k);
  } else {
    x1 = P.b(3) + P.b(4) - P.a(3) - P.a(5);
    x2 = P.b(3) + P.b(4) - P.a(4) - P.a(5);
    y1 = P.b(1) + P.b(3) + P.b(4) - P.a(3) - P.a(4) - P.a(5);
    y2 = P.b(2) + P.b(3) + P.b(4) - P.a(3) - P.a(4) - P.a(5);
  }

  Real outer = 0;
  Real coeff = 1;  // (x1)_l (x2)_l (-k)_l / ((y1)_l (y2)_l l!)
  for (std::size_t l = 0; l <= k; ++l) {
    if (coeff == 0) break;
    Real inner;
    if (variant == AltVariant::first) {
      inner = detail::terminating_3f2(P.b(4) - P.a(5), P.b(3) - P.a(5), l, x1, 1 + P.a(4) - P.b(2) - Real(l));
    } else {
      inner = detail::terminating_3f2(P.b(3) - P.a(5), P.b(4) - P.a(5), l, x1, x2);
    }
    outer += coeff * inner;
    if (l == k) break;
    if (abs(y1 + Real(l)) <= Real(kPoleTolerance) || abs(y2 + Real(l)) <= Real(kPoleTolerance)) {
      throw DegenerateRepresentation("ak4_alt: outer denominator Pochhammer vanishes");
    }
    coeff *= (x1 + Real(l)) * (x2 + Real(l)) * (Real(l) - Real(k)) / ((y1 + Real(l)) * (y2 + Real(l)) * Real(l + 1));
  }

  const SignedLog<Real> lead = variant == AltVariant::first
                                   ? detail::leading_factor(y1, P.b(1) - P.a(3), k)
                                   : detail::leading_factor(y1, y2, k);
  return lead * SignedLog<Real>::from_real(outer);
}

}  // namespace hypsum
