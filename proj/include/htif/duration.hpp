#pragma once

// Exact fixed-point time. Event times are sums and differences of input ISIs,
// so integer ticks make every bookkeeping identity hold bit-for-bit:
// current time == sum of waiting times, Z_i == sum of the tau's in its window,
// and scaling all inputs by an integer scales every derived time by the same integer.

#include <compare>
#include <cstdint>
#include <string>

namespace htif {

__extension__ using int128_t = __int128;

class Duration {
 public:
  using rep = int128_t;

  // One tick is 2^-32 time units.
  static constexpr int kFractionBits = 32;
  // Largest magnitude accepted from a conversion; leaves one bit of headroom for sums.
  static constexpr rep kHorizonTicks = rep{1} << 126;

  constexpr Duration() = default;

  static constexpr Duration from_ticks(rep ticks) { return Duration(ticks); }
  static constexpr Duration zero() { return Duration(0); }

  // Rounds to the nearest tick. Throws std::domain_error for negative or
  // non-finite input, std::overflow_error beyond the horizon (2^94 units).
  static Duration from_units(double units);

  constexpr rep ticks() const { return ticks_; }
  double to_double() const;

  constexpr bool is_zero() const { return ticks_ == 0; }
  constexpr bool is_positive() const { return ticks_ > 0; }

  // Checked arithmetic: throws std::overflow_error.
  Duration& operator+=(Duration other);
  Duration& operator-=(Duration other);
  friend Duration operator+(Duration a, Duration b) { return a += b; }
  friend Duration operator-(Duration a, Duration b) { return a -= b; }
  Duration scaled(std::int64_t factor) const;

  friend constexpr auto operator<=>(Duration, Duration) = default;
  friend constexpr bool operator==(Duration, Duration) = default;

 private:
  explicit constexpr Duration(rep ticks) : ticks_(ticks) {}
  rep ticks_ = 0;
};

// Decimal rendering of the exact tick count (int128 has no std::to_string).
std::string ticks_to_string(Duration d);

}  // namespace htif
