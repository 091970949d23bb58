#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "stochmoments/numkernel/bigfloat.hpp"
#include "stochmoments/numkernel/rational.hpp"

namespace stochmoments::stability::detail {

/// w(m, i) = C(m,i)^2 / C(2m,2i); 0 < w <= 1.
Rational weight(int m, int i);

/// Row m of w(m, 0..m) rounded to `bits`; cached.
const std::vector<BigFloat>& weight_row(int m, Precision bits);

/// sum_{i<=m} w(m,i) x^i by Horner's rule at x's precision.
BigFloat weight_poly(int m, const BigFloat& x);

/// W_n(x) = sum_i w(n,i) x^i / n!, cached per (x, bits) for n = 0, 1, ...
const BigFloat& euler_poly_value(double x, int n, Precision bits);

/// U_n(x) cached per (x, bits); index 0 holds 1.
const BigFloat& un_value(double x, int n, Precision bits);

/// Write-once map: values are built outside the lock and the first insert wins.
template <class Key, class Value>
class OnceMap {
 public:
  template <class Build>
  const Value& get(const Key& key, Build&& build) {
    {
      std::shared_lock lock(mutex_);
      const auto it = map_.find(key);
      if (it != map_.end()) return *it->second;
    }
    auto fresh = std::make_unique<Value>(build());
    std::unique_lock lock(mutex_);
    return *map_.try_emplace(key, std::move(fresh)).first->second;
  }

 private:
  std::shared_mutex mutex_;
  std::map<Key, std::unique_ptr<Value>> map_;
};

}  // namespace stochmoments::stability::detail
