#include "htif/duration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace htif {

Duration Duration::from_units(double units) {
  if (!std::isfinite(units) || units < 0.0) {
    throw std::domain_error("duration must be finite and nonnegative");
  }
  const double scaled = std::nearbyint(std::ldexp(units, kFractionBits));
  if (scaled >= std::ldexp(1.0, 126)) {
    throw std::overflow_error("duration exceeds the representable time horizon (2^94 units)");
  }
  return Duration(static_cast<rep>(scaled));
}

double Duration::to_double() const {
  return std::ldexp(static_cast<double>(ticks_), -kFractionBits);
}

Duration& Duration::operator+=(Duration other) {
  if (__builtin_add_overflow(ticks_, other.ticks_, &ticks_)) {
    throw std::overflow_error("duration sum overflow");
  }
  return *this;
}

Duration& Duration::operator-=(Duration other) {
  if (__builtin_sub_overflow(ticks_, other.ticks_, &ticks_)) {
    throw std::overflow_error("duration difference overflow");
  }
  return *this;
}

Duration Duration::scaled(std::int64_t factor) const {
  rep out = 0;
  if (__builtin_mul_overflow(ticks_, static_cast<rep>(factor), &out)) {
    throw std::overflow_error("scaled duration overflow");
  }
  return Duration(out);
}

std::string ticks_to_string(Duration d) {
  auto v = d.ticks();
  if (v == 0) return "0";
  const bool negative = v < 0;
  std::string digits;
  while (v != 0) {
    const int digit = static_cast<int>(v % 10);
    digits.push_back(static_cast<char>('0' + (negative ? -digit : digit)));
    v /= 10;
  }
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

}  // namespace htif
