#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace stochmoments {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Scientific notation with 17 significant digits.
inline std::string format_sci17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace stochmoments
