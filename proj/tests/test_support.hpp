#pragma once

#include <cstdint>
#include <vector>

#include "heislat/heisenberg.hpp"
#include "heislat/rng.hpp"

namespace heislat::testing {

// p/q with |p| <= num_bound and 1 <= q <= den_bound.
inline Rational random_rational(KeyedRng& rng, std::int64_t num_bound = 50, std::int64_t den_bound = 12) {
  Rational r(rng.between(-num_bound, num_bound), rng.between(1, den_bound));
  r.canonicalize();
  return r;
}

inline RatPoint random_rat_point(KeyedRng& rng, std::size_t n, std::int64_t num_bound = 50,
                                 std::int64_t den_bound = 12) {
  std::vector<Rational> h(2 * n);
  for (auto& c : h) c = random_rational(rng, num_bound, den_bound);
  return RatPoint(std::move(h), random_rational(rng, num_bound, den_bound));
}

inline IntPoint random_int_point(KeyedRng& rng, std::size_t n, std::int64_t hb, std::int64_t vb) {
  std::vector<Integer> h(2 * n);
  for (auto& c : h) c = Integer(static_cast<long>(rng.between(-hb, hb)));
  return IntPoint(std::move(h), Integer(static_cast<long>(rng.between(-vb, vb))));
}

inline IntPoint int_point(std::initializer_list<long> coords) {
  std::vector<Integer> c;
  for (long v : coords) c.emplace_back(v);
  return make_point(std::move(c));
}

inline RatPoint rat_point(std::initializer_list<Rational> coords) {
  return make_point(std::vector<Rational>(coords));
}

}  // namespace heislat::testing
