#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>

namespace stochmoments {

/// Memo table of lazily grown rows.
///
/// Each row is filled front to back by an `extend(row, key)` callable that
/// appends exactly one entry. Readers share the lock; growth takes it
/// exclusively. Returned references stay valid for the cache's lifetime
/// (std::map nodes and std::deque push_back never relocate elements).
/// `extend` must not re-enter the same cache.
template <class Key, class Value>
class RowCache {
 public:
  template <class Extend>
  const Value& get(const Key& key, std::size_t index, Extend&& extend) {
    {
      std::shared_lock lock(mutex_);
      const auto it = rows_.find(key);
      if (it != rows_.end() && index < it->second.size()) return it->second[index];
    }
    std::unique_lock lock(mutex_);
    auto& row = rows_[key];
    while (row.size() <= index) extend(row, key);
    return row[index];
  }

  void clear() {
    std::unique_lock lock(mutex_);
    rows_.clear();
  }

 private:
  std::shared_mutex mutex_;
  std::map<Key, std::deque<Value>> rows_;
};

}  // namespace stochmoments
