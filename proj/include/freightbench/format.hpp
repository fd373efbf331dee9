#pragma once

#include <charconv>
#include <string>

namespace freightbench {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace freightbench
