#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmask {

/// Exact rational number. Canonically reduced, denominator > 0.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline bool rat_is_integer(const Rat& r) { return denominator(r) == 1; }

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string rat_to_string(const Rat& r) {
  if (rat_is_integer(r)) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Parses "3", "-2", "0.05" (exact: 1/20), or "3/4". Returns nullopt on
/// malformed input.
inline std::optional<Rat> rat_parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool neg = false;
  size_t i = 0;
  if (text[0] == '+' || text[0] == '-') {
    neg = text[0] == '-';
    i = 1;
  }
  BigInt num = 0, den = 1;
  bool any_digit = false, seen_dot = false, seen_slash = false;
  BigInt slash_den = 0;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      any_digit = true;
      if (seen_slash)
        slash_den = slash_den * 10 + (c - '0');
      else {
        num = num * 10 + (c - '0');
        if (seen_dot) den *= 10;
      }
    } else if (c == '.' && !seen_dot && !seen_slash) {
      seen_dot = true;
    } else if (c == '/' && !seen_slash && !seen_dot && any_digit) {
      seen_slash = true;
      any_digit = false;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  if (seen_slash) {
    if (slash_den == 0) return std::nullopt;
    den = slash_den;
  }
  Rat r(num, den);
  return neg ? Rat(-r) : r;
}

inline Rat rat_parse_or_throw(std::string_view text) {
  auto r = rat_parse(text);
  if (!r) throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
  return *r;
}

}  // namespace pmask
