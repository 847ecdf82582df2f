#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "htif/duration.hpp"

using htif::Duration;

TEST_CASE("conversion rounds to the nearest 2^-32 tick") {
  CHECK(Duration::from_units(1.0).ticks() == (Duration::rep{1} << 32));
  CHECK(Duration::from_units(0.5).to_double() == 0.5);
  CHECK(Duration::from_units(0x1.0p-33).ticks() == 0);  // half a tick, ties to even
  CHECK(Duration::from_units(0x1.8p-32).ticks() == 2);
  CHECK(Duration::from_units(12345.678).to_double() == doctest::Approx(12345.678).epsilon(1e-12));
  CHECK(Duration::from_units(0.0).is_zero());
}

TEST_CASE("invalid conversions") {
  CHECK_THROWS_AS(Duration::from_units(-1.0), std::domain_error);
  CHECK_THROWS_AS(Duration::from_units(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(Duration::from_units(std::numeric_limits<double>::infinity()), std::domain_error);
  CHECK_THROWS_AS(Duration::from_units(0x1.0p94), std::overflow_error);
  CHECK_NOTHROW(Duration::from_units(0x1.0p93));
}

TEST_CASE("exact arithmetic and integer scaling") {
  const Duration a = Duration::from_units(0.1), b = Duration::from_units(0.2), c = Duration::from_units(0.3);
  CHECK((a + b) - b == a);
  CHECK((a + b).scaled(3) == a.scaled(3) + b.scaled(3));
  CHECK(((a + b) + c) == (a + (b + c)));
  CHECK(a < b);
  CHECK_THROWS_AS(Duration::from_ticks(Duration::kHorizonTicks).scaled(4), std::overflow_error);
  CHECK_THROWS_AS(Duration::from_ticks(Duration::kHorizonTicks) + Duration::from_ticks(Duration::kHorizonTicks),
                  std::overflow_error);
}

TEST_CASE("tick rendering") {
  CHECK(htif::ticks_to_string(Duration::from_units(1.0)) == "4294967296");
  CHECK(htif::ticks_to_string(Duration::zero()) == "0");
  CHECK(htif::ticks_to_string(Duration::from_ticks(-5)) == "-5");
}
