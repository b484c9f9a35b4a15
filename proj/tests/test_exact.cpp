#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heislat/exact.hpp"

using namespace heislat;

TEST_CASE("parse_rational reads integers, fractions and decimals exactly") {
  CHECK(parse_rational("7") == 7);
  CHECK(parse_rational("-3/4") == Rational(-3, 4));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("1.5e-3") == Rational(3, 2000));
  CHECK(parse_rational("2E2") == 200);
  CHECK(parse_rational("0.1") == Rational(1, 10));
  CHECK_THROWS_AS(parse_rational(""), ValidationError);
  CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_rational("abc"), ValidationError);
  CHECK_THROWS_AS(parse_rational("1.2.3"), ValidationError);
}

TEST_CASE("floor and ceil of rationals") {
  CHECK(floor(Rational(7, 2)) == 3);
  CHECK(ceil(Rational(7, 2)) == 4);
  CHECK(floor(Rational(-7, 2)) == -4);
  CHECK(ceil(Rational(-7, 2)) == -3);
  CHECK(floor(Rational(5)) == 5);
  CHECK(ceil(Rational(5)) == 5);
}

TEST_CASE("integer roots bracket the true root") {
  for (long x = 0; x < 2000; ++x) {
    for (unsigned long k = 1; k <= 4; ++k) {
      Integer r = floor_root(Integer(x), k);
      CHECK(ipow(r, k) <= x);
      CHECK(ipow(Integer(r + 1), k) > x);
      Integer c = ceil_root(Integer(x), k);
      CHECK(ipow(c, k) >= x);
      if (c > 0) CHECK(ipow(Integer(c - 1), k) < x);
    }
  }
  CHECK(ceil_root(Rational(9, 4), 2) == 2);
  CHECK(ceil_root(Rational(4, 1), 2) == 2);
  CHECK(ceil_root(Rational(17, 4), 2) == 3);
}

TEST_CASE("exact powers") {
  CHECK(exact_root(Rational(9, 4), 2) == Rational(3, 2));
  CHECK_FALSE(exact_root(Rational(2), 2).has_value());
  CHECK(exact_power(Rational(16), Rational(3, 4)) == Rational(8));
  CHECK(exact_power(Rational(4), Rational(-3, 2)) == Rational(1, 8));
  CHECK_FALSE(exact_power(Rational(4), Rational(3, 4)).has_value());
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(100.0) == "100");
  for (double v : {0.1, 1.0 / 3.0, 12345.678, 1e-20, 2.5e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("from_double is exact") {
  CHECK(from_double(0.375) == Rational(3, 8));
  CHECK(from_double(0.1).get_d() == 0.1);
  CHECK(from_double(0.1) != Rational(1, 10));
}
