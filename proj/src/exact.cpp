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

#include "heislat/exact.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>

namespace heislat {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Rational parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = s.substr(e + 1);
    const char* begin = exp_text.data();
    const char* end = begin + exp_text.size();
    if (!exp_text.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, exponent);
    if (ec != std::errc{} || ptr != end || begin == end) {
      throw ValidationError(fmt::format("malformed number '{}'", text));
    }
    s = s.substr(0, e);
  }
  std::string digits;
  long scale = 0;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw ValidationError(fmt::format("malformed number '{}'", text));
    }
    digits = std::string(whole) + std::string(frac);
    scale = static_cast<long>(frac.size());
  } else {
    if (!all_digits(s)) throw ValidationError(fmt::format("malformed number '{}'", text));
    digits = std::string(s);
  }
  Rational value{Integer(digits, 10)};
  long shift = exponent - scale;
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  if (shift >= 0) {
    value *= ten_pow;
  } else {
    value /= ten_pow;
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw ValidationError("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw ValidationError(fmt::format("zero denominator in '{}'", text));
    Rational q = num / den;
    q.canonicalize();
    return q;
  }
  return parse_decimal(text);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return fmt::format("{:.17g}", value);
  return std::string(buf, ptr);
}

Integer floor(const Rational& x) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

Integer ceil(const Rational& x) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

Integer ipow(const Integer& base, unsigned long exponent) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
  return r;
}

Rational ipow(const Rational& base, unsigned long exponent) {
  Rational r{ipow(base.get_num(), exponent), ipow(base.get_den(), exponent)};
  r.canonicalize();
  return r;
}

Integer floor_root(const Integer& x, unsigned long k) {
  if (x < 0) throw ValidationError("root of a negative number");
  Integer r;
  mpz_root(r.get_mpz_t(), x.get_mpz_t(), k);
  return r;
}

Integer ceil_root(const Integer& x, unsigned long k) {
  if (x <= 0) {
    if (x < 0) throw ValidationError("root of a negative number");
    return Integer(0);
  }
  Integer r = floor_root(x, k);
  if (ipow(r, k) < x) ++r;
  return r;
}

Integer ceil_root(const Rational& x, unsigned long k) {
  if (x < 0) throw ValidationError("root of a negative number");
  // smallest r with r^k * den >= num
  Integer guess = ceil_root(ceil(x), k);
  while (guess > 0 && Rational(ipow(Integer(guess - 1), k)) >= x) --guess;
  while (Rational(ipow(guess, k)) < x) ++guess;
  return guess;
}

std::optional<Rational> exact_root(const Rational& x, unsigned long k) {
  if (x < 0) throw ValidationError("root of a negative number");
  Integer num_root, den_root;
  if (mpz_root(num_root.get_mpz_t(), x.get_num_mpz_t(), k) == 0) return std::nullopt;
  if (mpz_root(den_root.get_mpz_t(), x.get_den_mpz_t(), k) == 0) return std::nullopt;
  Rational r{num_root, den_root};
  r.canonicalize();
  return r;
}

std::optional<Rational> exact_power(const Rational& base, const Rational& exponent) {
  if (base <= 0) throw ValidationError("exact_power requires a positive base");
  const Integer& p = exponent.get_num();
  const Integer& r = exponent.get_den();
  if (!r.fits_ulong_p() || !p.fits_slong_p()) return std::nullopt;
  auto root = exact_root(base, r.get_ui());
  if (!root) return std::nullopt;
  long pe = p.get_si();
  Rational result = ipow(*root, static_cast<unsigned long>(pe < 0 ? -pe : pe));
  if (pe < 0) result = 1 / result;
  result.canonicalize();
  return result;
}

double to_double(const Integer& x) { return x.get_d(); }

Rational from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite value");
  Rational r;
  mpq_set_d(r.get_mpq_t(), value);
  return r;
}

}  // namespace heislat
