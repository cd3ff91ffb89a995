#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace omtree {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Whole-token parse; false on any trailing garbage.
template <typename T>
bool parse_number(std::string_view tok, T& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size() && !tok.empty();
}

}  // namespace omtree
