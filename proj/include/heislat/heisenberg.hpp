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

// Heisenberg group H^n = R^{2n} x R with the twisted product
//
//   x * y = (x_h + y_h, x_v + y_v + 1/2 <x_h, J y_h>)
//
// where J is the standard 2n x 2n symplectic matrix, together with the
// parabolic dilations delta_t(x) = (t x_h, t^2 x_v) and the homogeneous gauges
//
//   ||x||_alpha = (|x_h|^alpha + C_alpha |x_v|^(alpha/2))^(1/alpha).
//
// Every operation is available for exact rationals and for doubles. Integer
// points are accepted wherever the result stays integral; the product of two
// integer points is promoted to a rational point (its vertical part may be a
// half-integer).

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heislat/exact.hpp"

namespace heislat {

template <class T>
struct BasicHPoint {
  std::vector<T> horiz;
  T vert{};

  BasicHPoint() = default;
  BasicHPoint(std::vector<T> h, T v) : horiz(std::move(h)), vert(std::move(v)) {
    if (horiz.empty() || horiz.size() % 2 != 0) {
      throw ValidationError("horizontal part of an HPoint must have even positive length");
    }
  }

  static BasicHPoint origin(std::size_t n) { return BasicHPoint(std::vector<T>(2 * n, T(0)), T(0)); }

  std::size_t n() const { return horiz.size() / 2; }
  std::size_t dim() const { return horiz.size() + 1; }

  friend bool operator==(const BasicHPoint& a, const BasicHPoint& b) {
    return a.vert == b.vert && a.horiz == b.horiz;
  }
};

using IntPoint = BasicHPoint<Integer>;
using RatPoint = BasicHPoint<Rational>;
using RealPoint = BasicHPoint<double>;

// Builds a point from D = 2n+1 coordinates (last one vertical).
template <class T>
BasicHPoint<T> make_point(std::vector<T> coords) {
  if (coords.size() < 3) throw ValidationError("an HPoint needs at least 3 coordinates");
  T v = std::move(coords.back());
  coords.pop_back();
  return BasicHPoint<T>(std::move(coords), std::move(v));
}

RatPoint to_rational(const IntPoint& p);
RealPoint to_real(const RatPoint& p);
RealPoint to_real(const IntPoint& p);
std::string to_string(const RatPoint& p);

class GaugeParams {
 public:
  GaugeParams(int n, int alpha, Rational c_alpha = Rational(16));

  int n() const { return n_; }
  int alpha() const { return alpha_; }
  int half_alpha() const { return alpha_ / 2; }
  int D() const { return 2 * n_ + 1; }
  const Rational& c_alpha() const { return c_alpha_; }
  double c_alpha_double() const { return c_alpha_.get_d(); }

  // C_alpha * 2^(alpha/2); must be an integer for exact shell membership.
  Integer scaled_vertical_constant() const;

 private:
  int n_;
  int alpha_;
  Rational c_alpha_;
};

namespace detail {

template <class T>
T powu(T base, unsigned e) {
  T result(1);
  while (e != 0) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e != 0) base *= base;
  }
  return result;
}

template <class T>
T abs_value(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return std::fabs(x);
  } else {
    return x < 0 ? T(-x) : x;
  }
}

template <class T>
void require_same_n(const BasicHPoint<T>& x, const BasicHPoint<T>& y) {
  if (x.horiz.size() != y.horiz.size()) throw ValidationError("HPoint dimension mismatch");
}

}  // namespace detail

// <u, J v> = sum_{i<n} (u_i v_{n+i} - u_{n+i} v_i)
template <class T>
T symplectic_form(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size() || u.size() % 2 != 0) throw ValidationError("symplectic form dimension mismatch");
  const std::size_t n = u.size() / 2;
  T acc(0);
  for (std::size_t i = 0; i < n; ++i) {
    acc += u[i] * v[n + i];
    acc -= u[n + i] * v[i];
  }
  return acc;
}

template <class T>
T symplectic_form(const std::vector<T>& u, const std::vector<T>& v) {
  return symplectic_form(std::span<const T>(u), std::span<const T>(v));
}

template <class T>
BasicHPoint<T> group_mul(const BasicHPoint<T>& x, const BasicHPoint<T>& y) {
  static_assert(!std::is_same_v<T, Integer>, "integer points multiply into rational points");
  detail::require_same_n(x, y);
  std::vector<T> h(x.horiz.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = x.horiz[i] + y.horiz[i];
  T v = x.vert + y.vert + symplectic_form(x.horiz, y.horiz) / T(2);
  return BasicHPoint<T>(std::move(h), std::move(v));
}

RatPoint group_mul(const IntPoint& x, const IntPoint& y);

template <class T>
BasicHPoint<T> group_inv(const BasicHPoint<T>& x) {
  std::vector<T> h(x.horiz.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = -x.horiz[i];
  return BasicHPoint<T>(std::move(h), T(-x.vert));
}

template <class T>
BasicHPoint<T> dilate(const T& t, const BasicHPoint<T>& x) {
  if (!(t > 0)) throw ValidationError("dilation factor must be positive");
  std::vector<T> h(x.horiz.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = t * x.horiz[i];
  return BasicHPoint<T>(std::move(h), T(t * t * x.vert));
}

// Psi(x) = ||x||_alpha^alpha, exact for rational points.
template <class T>
T gauge_power(const BasicHPoint<T>& x, const GaugeParams& g) {
  T r2(0);
  for (const auto& c : x.horiz) r2 += c * c;
  const unsigned p = static_cast<unsigned>(g.half_alpha());
  T vertical = detail::powu(detail::abs_value(x.vert), p);
  if constexpr (std::is_same_v<T, double>) {
    return detail::powu(r2, p) + g.c_alpha_double() * vertical;
  } else {
    return T(detail::powu(r2, p) + T(g.c_alpha()) * vertical);
  }
}

template <class T>
double norm_alpha(const BasicHPoint<T>& x, const GaugeParams& g) {
  double psi;
  if constexpr (std::is_same_v<T, double>) {
    psi = gauge_power(x, g);
  } else if constexpr (std::is_same_v<T, Integer>) {
    psi = gauge_power(to_rational(x), g).get_d();
  } else {
    psi = gauge_power(x, g).get_d();
  }
  return std::pow(psi, 1.0 / g.alpha());
}

// Phi(x, y) = phi_alpha(x, y)^alpha = Psi(x * y^-1).
template <class T>
T phi_power(const BasicHPoint<T>& x, const BasicHPoint<T>& y, const GaugeParams& g) {
  detail::require_same_n(x, y);
  std::vector<T> h(x.horiz.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = x.horiz[i] - y.horiz[i];
  T v = x.vert - y.vert + symplectic_form(y.horiz, x.horiz) / T(2);
  return gauge_power(BasicHPoint<T>(std::move(h), std::move(v)), g);
}

Rational phi_power(const IntPoint& x, const IntPoint& y, const GaugeParams& g);

template <class T>
double phi_alpha(const BasicHPoint<T>& x, const BasicHPoint<T>& y, const GaugeParams& g) {
  double Phi;
  if constexpr (std::is_same_v<T, double>) {
    Phi = phi_power(x, y, g);
  } else {
    Phi = to_double(phi_power(x, y, g));
  }
  return std::pow(Phi, 1.0 / g.alpha());
}

// 2^alpha * Phi(x, y)
//   = 2^alpha |x_h - y_h|^alpha + C_alpha 2^(alpha/2) |2(x_v - y_v) + <y_h, J x_h>|^(alpha/2),
// an exact integer for integer inputs.
Integer phi_power_scaled(const IntPoint& x, const IntPoint& y, const GaugeParams& g);

}  // namespace heislat
