#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace qnoise {

inline constexpr const char* version = "0.1.0";

/// Locale-independent decimal rendering with 12 significant digits.
inline std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

}  // namespace qnoise
