// Copyright 2026 The heislat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "heislat/heisenberg.hpp"

#include <fmt/format.h>

namespace heislat {

GaugeParams::GaugeParams(int n, int alpha, Rational c_alpha) : n_(n), alpha_(alpha), c_alpha_(std::move(c_alpha)) {
  if (n_ < 1) throw ValidationError(fmt::format("n must be a positive integer, got {}", n_));
  if (alpha_ < 2 || alpha_ % 2 != 0) {
    throw ValidationError(fmt::format("alpha must be an even integer >= 2, got {}", alpha_));
  }
  if (c_alpha_ <= 0) throw ValidationError("C_alpha must be positive");
}

Integer GaugeParams::scaled_vertical_constant() const {
  Rational k = c_alpha_ * Rational(ipow(Integer(2), static_cast<unsigned long>(half_alpha())));
  k.canonicalize();
  if (k.get_den() != 1) {
    throw ValidationError(fmt::format("C_alpha * 2^(alpha/2) = {} is not an integer", k.get_str()));
  }
  return k.get_num();
}

RatPoint to_rational(const IntPoint& p) {
  std::vector<Rational> h(p.horiz.begin(), p.horiz.end());
  return RatPoint(std::move(h), Rational(p.vert));
}

RealPoint to_real(const RatPoint& p) {
  std::vector<double> h;
  h.reserve(p.horiz.size());
  for (const auto& c : p.horiz) h.push_back(c.get_d());
  return RealPoint(std::move(h), p.vert.get_d());
}

RealPoint to_real(const IntPoint& p) { return to_real(to_rational(p)); }

std::string to_string(const RatPoint& p) {
  std::string out = "(";
  for (const auto& c : p.horiz) out += c.get_str() + ",";
  out += p.vert.get_str() + ")";
  return out;
}

RatPoint group_mul(const IntPoint& x, const IntPoint& y) { return group_mul(to_rational(x), to_rational(y)); }

Rational phi_power(const IntPoint& x, const IntPoint& y, const GaugeParams& g) {
  return phi_power(to_rational(x), to_rational(y), g);
}

Integer phi_power_scaled(const IntPoint& x, const IntPoint& y, const GaugeParams& g) {
  detail::require_same_n(x, y);
  if (static_cast<int>(x.n()) != g.n()) throw ValidationError("HPoint dimension does not match gauge n");
  const Integer k = g.scaled_vertical_constant();
  const auto p = static_cast<unsigned long>(g.half_alpha());
  Integer r2 = 0;
  for (std::size_t i = 0; i < x.horiz.size(); ++i) {
    Integer d = x.horiz[i] - y.horiz[i];
    r2 += d * d;
  }
  Integer m = 2 * (x.vert - y.vert) + symplectic_form(y.horiz, x.horiz);
  m = abs(m);
  // 2^alpha |d|^alpha = (4 |d|^2)^(alpha/2)
  return ipow(Integer(4 * r2), p) + k * ipow(m, p);
}

}  // namespace heislat
