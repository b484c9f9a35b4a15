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

#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heislat {

using Integer = mpz_class;
using Rational = mpq_class;

// Raised for any violated precondition on user-supplied parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a closed form is evaluated where it is not defined
// (e.g. a derivative on a nondifferentiable seam).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Accepts "7", "-3/4", "0.25", "1.5e-3". Decimal input is converted exactly.
Rational parse_rational(std::string_view text);

// Shortest decimal string that round-trips through double, used for CSV.
std::string format_double(double value);

Integer floor(const Rational& x);
Integer ceil(const Rational& x);

Integer ipow(const Integer& base, unsigned long exponent);
Rational ipow(const Rational& base, unsigned long exponent);

// Largest r >= 0 with r^k <= x, for x >= 0.
Integer floor_root(const Integer& x, unsigned long k);
// Smallest r >= 0 with r^k >= x, for x >= 0.
Integer ceil_root(const Integer& x, unsigned long k);
// Smallest integer r >= 0 with r^k >= x for a nonnegative rational x.
Integer ceil_root(const Rational& x, unsigned long k);

// x^(1/k) when it is rational, otherwise nullopt. Requires x >= 0.
std::optional<Rational> exact_root(const Rational& x, unsigned long k);
// base^exponent when the result is rational. Requires base > 0.
std::optional<Rational> exact_power(const Rational& base, const Rational& exponent);

inline double to_double(const Rational& x) { return x.get_d(); }
double to_double(const Integer& x);

// Exact conversion; every finite double is a dyadic rational.
Rational from_double(double value);

}  // namespace heislat
