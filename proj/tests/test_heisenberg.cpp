#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heislat/heisenberg.hpp"
#include "test_support.hpp"

using namespace heislat;
using namespace heislat::testing;

TEST_CASE("group law examples") {
  CHECK(group_mul(rat_point({1, 0, 0}), rat_point({0, 1, 0})) == rat_point({1, 1, Rational(1, 2)}));
  const RatPoint x = rat_point({Rational(3, 2), -2, 7});
  CHECK(group_mul(x, RatPoint::origin(1)) == x);
  CHECK(group_inv(rat_point({1, 0, 0})) == rat_point({-1, 0, 0}));
  CHECK(group_inv(RatPoint::origin(1)) == RatPoint::origin(1));
  const RatPoint y = rat_point({2, 3, 5});
  CHECK(group_mul(y, group_inv(y)) == RatPoint::origin(1));
  CHECK(group_mul(int_point({1, 0, 0}), int_point({0, 1, 0})).vert == Rational(1, 2));
}

TEST_CASE("dilations") {
  CHECK(dilate(Rational(2), rat_point({1, 1, 1})) == rat_point({2, 2, 4}));
  const RatPoint x = rat_point({Rational(1, 3), 4, -2});
  CHECK(dilate(Rational(1), x) == x);
  CHECK_THROWS_AS(dilate(Rational(0), x), ValidationError);
  CHECK_THROWS_AS(dilate(Rational(-1), x), ValidationError);
}

TEST_CASE("gauge norm examples") {
  const GaugeParams g4(1, 4);
  CHECK(norm_alpha(rat_point({1, 0, 0}), g4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(norm_alpha(rat_point({0, 0, 1}), g4) == doctest::Approx(2.0).epsilon(1e-15));
  const RatPoint x = rat_point({1, 0, 1});
  CHECK(norm_alpha(dilate(Rational(3), x), g4) == doctest::Approx(3 * norm_alpha(x, g4)).epsilon(1e-14));
}

TEST_CASE("defining function examples") {
  const GaugeParams g4(1, 4);
  const RatPoint x = rat_point({1, 0, 0});
  const RatPoint y = rat_point({0, 1, 0});
  CHECK(phi_alpha(x, x, g4) == 0.0);
  CHECK(phi_alpha(x, RatPoint::origin(1), g4) == doctest::Approx(1.0));
  CHECK(phi_power(x, y, g4) == 8);
  CHECK(phi_alpha(x, y, g4) == doctest::Approx(std::pow(8.0, 0.25)).epsilon(1e-15));
  CHECK(phi_power_scaled(int_point({1, 0, 0}), int_point({0, 1, 0}), g4) == 128);
  CHECK(phi_power_scaled(int_point({3, -1, 2}), int_point({3, -1, 2}), g4) == 0);
  CHECK(phi_power_scaled(int_point({0, 0, 1}), int_point({0, 0, 0}), g4) == 256);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(GaugeParams(0, 4), ValidationError);
  CHECK_THROWS_AS(GaugeParams(1, 3), ValidationError);
  CHECK_THROWS_AS(GaugeParams(1, 0), ValidationError);
  CHECK_THROWS_AS(GaugeParams(1, 4, Rational(0)), ValidationError);
  CHECK_THROWS_AS(GaugeParams(1, 4, Rational(1, 3)).scaled_vertical_constant(), ValidationError);
  CHECK_THROWS_AS(make_point(std::vector<Rational>{1, 2}), ValidationError);
  CHECK_THROWS_AS(group_mul(RatPoint::origin(1), RatPoint::origin(2)), ValidationError);
}

TEST_CASE("phi_power_scaled equals 2^alpha Phi on random integer pairs") {
  for (int alpha : {2, 4, 6, 8}) {
    for (int n : {1, 2}) {
      const GaugeParams g(n, alpha);
      const Rational scale = ipow(Rational(2), static_cast<unsigned long>(alpha));
      for (std::uint64_t i = 0; i < 300; ++i) {
        KeyedRng rng(11, static_cast<std::uint64_t>(alpha * 10 + n), i);
        const IntPoint x = random_int_point(rng, n, 20, 200);
        const IntPoint y = random_int_point(rng, n, 20, 200);
        CHECK(Rational(phi_power_scaled(x, y, g)) == scale * phi_power(x, y, g));
      }
    }
  }
}

TEST_CASE("group and gauge properties on random rational points") {
  constexpr std::uint64_t kCases = 2000;
  for (std::size_t n : {1u, 2u, 3u}) {
    for (int alpha : {2, 4, 6}) {
      const GaugeParams g(static_cast<int>(n), alpha);
      for (std::uint64_t i = 0; i < kCases / 3; ++i) {
        KeyedRng rng(2024, n * 100 + static_cast<std::uint64_t>(alpha), i);
        const RatPoint x = random_rat_point(rng, n);
        const RatPoint y = random_rat_point(rng, n);
        const RatPoint z = random_rat_point(rng, n);
        Rational t = random_rational(rng, 20, 9);
        if (t == 0) t = 1;
        t = abs(t);

        REQUIRE(group_mul(group_mul(x, y), z) == group_mul(x, group_mul(y, z)));
        REQUIRE(group_mul(x, group_inv(x)) == RatPoint::origin(n));
        REQUIRE(group_mul(group_inv(x), x) == RatPoint::origin(n));
        REQUIRE(dilate(t, group_mul(x, y)) == group_mul(dilate(t, x), dilate(t, y)));
        REQUIRE(phi_power(group_mul(x, z), group_mul(y, z), g) == phi_power(x, y, g));
        REQUIRE(phi_power(x, y, g) == phi_power(y, x, g));
        const Rational ta = ipow(t, static_cast<unsigned long>(alpha));
        REQUIRE(gauge_power(dilate(t, x), g) == ta * gauge_power(x, g));
        REQUIRE(gauge_power(group_inv(x), g) == gauge_power(x, g));

        const double lhs = norm_alpha(dilate(t, x), g);
        const double rhs = t.get_d() * norm_alpha(x, g);
        REQUIRE(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
      }
    }
  }
}
