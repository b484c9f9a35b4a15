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

#include "heislat/shell_count.hpp"

#include <fmt/format.h>
#include <mpfr.h>

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "heislat/parallel.hpp"
#include "heislat/rng.hpp"

namespace heislat {

namespace {

std::int64_t to_i64(const Integer& x, const char* what) {
  if (!x.fits_slong_p()) throw ValidationError(fmt::format("{} does not fit in 64 bits", what));
  return x.get_si();
}

std::uint64_t to_u64(const Integer& x, const char* what) {
  if (x < 0 || !x.fits_ulong_p()) throw ValidationError(fmt::format("{} does not fit in 64 bits", what));
  return x.get_ui();
}

// ---------------------------------------------------------------------------
// Saturating 128-bit arithmetic. Every value compared against a window bound
// below 2^120 is either exact or clamped to kSaturated, which exceeds it.

using i128 = __int128;
constexpr i128 kSaturated = static_cast<i128>(1) << 125;
constexpr int kWideBits = 120;

i128 sat_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r) || r > kSaturated) return kSaturated;
  return r;
}

i128 sat_pow(i128 base, unsigned e) {
  i128 r = 1;
  while (e != 0) {
    if (e & 1u) r = sat_mul(r, base);
    e >>= 1u;
    if (e != 0) base = sat_mul(base, base);
  }
  return r;
}

Integer sat_pow(const Integer& base, unsigned e) { return ipow(base, e); }

// Largest r with r^p <= x (x >= 0): floating estimate, then exact correction.
i128 floor_root_wide(i128 x, unsigned p) {
  if (p == 1 || x < 2) return x;
  auto r = static_cast<i128>(std::floor(std::pow(static_cast<long double>(x), 1.0L / p)));
  if (r < 0) r = 0;
  for (int step = 0; step < 4 && sat_pow(r + 1, p) <= x; ++step) ++r;
  while (sat_pow(r + 1, p) <= x) ++r;
  for (int step = 0; step < 4 && r > 0 && sat_pow(r, p) > x; ++step) --r;
  while (r > 0 && sat_pow(r, p) > x) --r;
  return r;
}

Integer floor_root_wide(const Integer& x, unsigned p) { return floor_root(x, p); }

template <class Int>
Int ceil_root_wide(const Int& x, unsigned p) {
  if (x <= 0) return Int(0);
  Int r = floor_root_wide(x, p);
  if (sat_pow(r, p) < x) r += 1;
  return r;
}

i128 to_wide(const Integer& x) {
  // Only called for |x| < 2^120.
  Integer hi_part = x >> 60;
  Integer lo_part = x - (hi_part << 60);
  return (static_cast<i128>(hi_part.get_si()) << 60) + static_cast<i128>(lo_part.get_si());
}

template <class Int>
Int from_i64(std::int64_t v) {
  if constexpr (std::is_same_v<Int, Integer>) {
    return Integer(static_cast<long>(v));
  } else {
    return static_cast<Int>(v);
  }
}

template <class Int>
std::int64_t clamp_to_i64(const Int& x, std::int64_t cap) {
  if (x > from_i64<Int>(cap)) return cap;
  if constexpr (std::is_same_v<Int, Integer>) {
    return x.get_si();
  } else {
    return static_cast<std::int64_t>(x);
  }
}

std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
std::int64_t ceil_div2(std::int64_t a) { return a >= 0 ? (a + 1) / 2 : -((-a) / 2); }

// #{ v in [vmin, vmax] : b - 2v in [lo, hi] }
std::int64_t count_vertical(std::int64_t b, std::int64_t lo, std::int64_t hi, std::int64_t vmin, std::int64_t vmax) {
  if (lo > hi) return 0;
  const std::int64_t first = std::max(vmin, ceil_div2(b - hi));
  const std::int64_t last = std::min(vmax, floor_div2(b - lo));
  return last >= first ? last - first + 1 : 0;
}

struct CenterCoords {
  std::vector<std::int64_t> horiz;
  std::int64_t vert;
};

CenterCoords center_coords(const IntPoint& u) {
  CenterCoords c;
  c.horiz.reserve(u.horiz.size());
  for (const auto& x : u.horiz) c.horiz.push_back(to_i64(x, "center coordinate"));
  c.vert = to_i64(u.vert, "center coordinate");
  return c;
}

template <class Int>
std::int64_t slice_count(const CenterCoords& u, const GaugeParams& g, const LatticeSpec& lattice,
                         const ShellWindow& window) {
  const std::size_t dim_h = u.horiz.size();
  const std::size_t n = dim_h / 2;
  const auto p = static_cast<unsigned>(g.half_alpha());
  Int lo, hi, k;
  if constexpr (std::is_same_v<Int, Integer>) {
    lo = window.lo;
    hi = window.hi;
    k = g.scaled_vertical_constant();
  } else {
    lo = to_wide(window.lo);
    hi = to_wide(window.hi);
    k = to_wide(g.scaled_vertical_constant());
  }
  if (hi < 0) return 0;

  // (4 |u_h - v_h|^2)^p <= hi bounds each horizontal offset.
  const Int r2_cap = floor_root_wide(hi, p) / 4;
  const std::int64_t reach = clamp_to_i64(floor_root_wide(r2_cap, 2), std::numeric_limits<std::int32_t>::max());

  std::vector<std::int64_t> first(dim_h), last(dim_h), v(dim_h);
  for (std::size_t i = 0; i < dim_h; ++i) {
    first[i] = std::max(lattice.horiz_min(), u.horiz[i] - reach);
    last[i] = std::min(lattice.horiz_bound, u.horiz[i] + reach);
    if (first[i] > last[i]) return 0;
    v[i] = first[i];
  }
  const std::int64_t vmin = lattice.vert_min();
  const std::int64_t vmax = lattice.vert_bound;
  std::int64_t max_abs_v = std::max(std::abs(vmin), std::abs(vmax));

  std::int64_t total = 0;
  while (true) {
    std::int64_t r2 = 0;
    std::int64_t s = 0;  // <v_h, J u_h>
    for (std::size_t i = 0; i < dim_h; ++i) {
      const std::int64_t d = u.horiz[i] - v[i];
      r2 += d * d;
    }
    for (std::size_t i = 0; i < n; ++i) s += v[i] * u.horiz[n + i] - v[n + i] * u.horiz[i];

    const Int horiz_term = sat_pow(from_i64<Int>(4 * r2), p);
    if (horiz_term <= hi) {
      // m = b - 2 v_D with b = 2 u_D + <v_h, J u_h>; need lo <= horiz_term + k |m|^p <= hi.
      const std::int64_t b = 2 * u.vert + s;
      const std::int64_t m_cap = std::abs(b) + 2 * max_abs_v + 2;
      const Int upper = (hi - horiz_term) / k;
      const std::int64_t m_hi = clamp_to_i64(floor_root_wide(upper, p), m_cap);
      const Int lower_gap = lo - horiz_term;
      std::int64_t m_lo = 0;
      if (lower_gap > 0) {
        const Int need = (lower_gap + k - 1) / k;
        m_lo = clamp_to_i64(ceil_root_wide(need, p), m_cap + 1);
      }
      if (m_lo <= m_hi) {
        if (m_lo == 0) {
          total += count_vertical(b, -m_hi, m_hi, vmin, vmax);
        } else {
          total += count_vertical(b, m_lo, m_hi, vmin, vmax);
          total += count_vertical(b, -m_hi, -m_lo, vmin, vmax);
        }
      }
    }

    std::size_t i = 0;
    for (; i < dim_h; ++i) {
      if (v[i] < last[i]) {
        ++v[i];
        break;
      }
      v[i] = first[i];
    }
    if (i == dim_h) break;
  }
  return total;
}

bool fits_wide(const Integer& x) { return mpz_sizeinbase(x.get_mpz_t(), 2) < static_cast<std::size_t>(kWideBits); }

// ---------------------------------------------------------------------------
// Counting-lemma windows: bounds 2^alpha (q^a (1 +- q^-tau))^alpha.

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// Encloses root_k(x) for a positive rational x.
void rational_root_bounds(const Rational& x, unsigned long k, mpfr_ptr lower, mpfr_ptr upper) {
  mpfr_set_q(lower, x.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(upper, x.get_mpq_t(), MPFR_RNDU);
  mpfr_rootn_ui(lower, lower, k, MPFR_RNDD);
  mpfr_rootn_ui(upper, upper, k, MPFR_RNDU);
}

struct WindowBounds {
  bool resolved = false;
  Integer lo;
  Integer hi;
};

WindowBounds counting_lemma_window_mpfr(const GaugeParams& g, const Rational& q, const Rational& tau,
                                        mpfr_prec_t prec) {
  const auto D = static_cast<unsigned long>(g.D());
  const auto alpha = static_cast<unsigned long>(g.alpha());
  Mpfr radius_lo(prec), radius_hi(prec), t_lo(prec), t_hi(prec), tmp_lo(prec), tmp_hi(prec);
  // q^a = root_{D+1}(q^D)
  rational_root_bounds(ipow(q, D), D + 1, radius_lo.get(), radius_hi.get());
  // q^tau = root_{den}(q^{num}); t = q^-tau
  const Integer& num = tau.get_num();
  const Integer& den = tau.get_den();
  rational_root_bounds(ipow(q, num.get_ui()), den.get_ui(), tmp_lo.get(), tmp_hi.get());
  mpfr_ui_div(t_lo.get(), 1, tmp_hi.get(), MPFR_RNDD);
  mpfr_ui_div(t_hi.get(), 1, tmp_lo.get(), MPFR_RNDU);

  auto scaled_bound = [&](bool plus, mpfr_ptr out_lo, mpfr_ptr out_hi) {
    Mpfr f_lo(prec), f_hi(prec);
    if (plus) {
      mpfr_add_ui(f_lo.get(), t_lo.get(), 1, MPFR_RNDD);
      mpfr_add_ui(f_hi.get(), t_hi.get(), 1, MPFR_RNDU);
    } else {
      mpfr_ui_sub(f_lo.get(), 1, t_hi.get(), MPFR_RNDD);
      mpfr_ui_sub(f_hi.get(), 1, t_lo.get(), MPFR_RNDU);
    }
    mpfr_mul(out_lo, radius_lo.get(), f_lo.get(), MPFR_RNDD);
    mpfr_mul(out_hi, radius_hi.get(), f_hi.get(), MPFR_RNDU);
    mpfr_mul_ui(out_lo, out_lo, 2, MPFR_RNDD);
    mpfr_mul_ui(out_hi, out_hi, 2, MPFR_RNDU);
    mpfr_pow_ui(out_lo, out_lo, alpha, MPFR_RNDD);
    mpfr_pow_ui(out_hi, out_hi, alpha, MPFR_RNDU);
  };

  WindowBounds out;
  Mpfr b_lo(prec), b_hi(prec);
  Integer a, b;
  scaled_bound(true, b_lo.get(), b_hi.get());
  mpfr_get_z(a.get_mpz_t(), b_lo.get(), MPFR_RNDD);
  mpfr_get_z(b.get_mpz_t(), b_hi.get(), MPFR_RNDD);
  if (a != b) return out;
  out.hi = a;
  scaled_bound(false, b_lo.get(), b_hi.get());
  if (mpfr_sgn(b_lo.get()) < 0) mpfr_set_ui(b_lo.get(), 0, MPFR_RNDD);
  mpfr_get_z(a.get_mpz_t(), b_lo.get(), MPFR_RNDU);
  mpfr_get_z(b.get_mpz_t(), b_hi.get(), MPFR_RNDU);
  if (a != b) return out;
  out.lo = a;
  out.resolved = true;
  return out;
}

ShellWindow counting_lemma_window(const GaugeParams& g, const Rational& q, const Rational& tau) {
  const Rational a(g.D(), g.D() + 1);
  const auto alpha = static_cast<unsigned long>(g.alpha());
  // Exact when q^(a alpha) and q^-tau are both rational.
  auto radius_pow = exact_power(q, Rational(a * g.alpha()));
  auto shrink = exact_power(q, Rational(-tau));
  if (radius_pow && shrink) {
    const Rational scale = ipow(Rational(2), alpha) * *radius_pow;
    ShellWindow w;
    w.hi = floor(Rational(scale * ipow(Rational(1 + *shrink), alpha)));
    const Rational inner = 1 - *shrink;
    w.lo = inner <= 0 ? Integer(0) : ceil(Rational(scale * ipow(inner, alpha)));
    return w;
  }
  for (mpfr_prec_t prec = 128; prec <= 16384; prec *= 2) {
    auto bounds = counting_lemma_window_mpfr(g, q, tau, prec);
    if (bounds.resolved) return ShellWindow{bounds.lo, bounds.hi};
  }
  throw DomainError("could not resolve the counting-lemma shell boundary to an integer window");
}

// Chains v in the lattice through body(v_coords) for the naive oracle.
template <class Body>
void for_each_lattice_point(const LatticeSpec& lattice, std::size_t dim_h, Body&& body) {
  std::vector<std::int64_t> v(dim_h + 1);
  for (std::size_t i = 0; i < dim_h; ++i) v[i] = lattice.horiz_min();
  v[dim_h] = lattice.vert_min();
  while (true) {
    body(v);
    std::size_t i = dim_h + 1;
    while (i-- > 0) {
      const std::int64_t top = i == dim_h ? lattice.vert_bound : lattice.horiz_bound;
      const std::int64_t bottom = i == dim_h ? lattice.vert_min() : lattice.horiz_min();
      if (v[i] < top) {
        ++v[i];
        break;
      }
      v[i] = bottom;
      if (i == 0) return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Integer LatticeSpec::cardinality() const {
  return ipow(Integer(static_cast<unsigned long>(horiz_width())), static_cast<unsigned long>(2 * n)) *
         Integer(static_cast<unsigned long>(vert_width()));
}

bool LatticeSpec::contains(const IntPoint& p) const {
  if (static_cast<int>(p.n()) != n) return false;
  for (const auto& c : p.horiz) {
    if (c < horiz_min() || c > horiz_bound) return false;
  }
  return p.vert >= vert_min() && p.vert <= vert_bound;
}

IntPoint LatticeSpec::point_at(std::uint64_t index) const {
  std::vector<Integer> h(static_cast<std::size_t>(2 * n));
  const std::uint64_t vw = vert_width();
  Integer vert(static_cast<long>(vert_min() + static_cast<std::int64_t>(index % vw)));
  index /= vw;
  const std::uint64_t hw = horiz_width();
  for (std::size_t i = h.size(); i-- > 0;) {
    h[i] = Integer(static_cast<long>(horiz_min() + static_cast<std::int64_t>(index % hw)));
    index /= hw;
  }
  return IntPoint(std::move(h), std::move(vert));
}

LatticeSpec truncated_lattice(int n, const Rational& c, const Rational& Q, bool is_signed) {
  if (n < 1) throw ValidationError("n must be positive");
  if (c <= 0) throw ValidationError("truncation constant c must be positive");
  if (Q <= 0) throw ValidationError("radius Q must be positive");
  LatticeSpec l;
  l.n = n;
  l.is_signed = is_signed;
  const Rational h = c * Q;
  const Rational v = c * Q * Q;
  l.horiz_bound = to_i64(is_signed ? floor(h) : ceil(h), "lattice bound");
  l.vert_bound = to_i64(is_signed ? floor(v) : ceil(v), "lattice bound");
  return l;
}

LatticeSpec counting_lemma_lattice(int n, const Rational& q) {
  if (n < 1) throw ValidationError("n must be positive");
  if (q < 1) throw ValidationError("q must be at least 1");
  const auto D = static_cast<unsigned long>(2 * n + 1);
  LatticeSpec l;
  l.n = n;
  l.is_signed = false;
  l.horiz_bound = to_i64(ceil_root(ipow(q, D), D + 1), "lattice bound");
  l.vert_bound = to_i64(ceil_root(ipow(q, 2 * D), D + 1), "lattice bound");
  return l;
}

ShellWindow shell_window(const GaugeParams& g, const Rational& Q, const Rational& delta) {
  if (Q <= 0) throw ValidationError("radius Q must be positive");
  if (delta < 0) throw ValidationError("thickness delta must be nonnegative");
  const auto alpha = static_cast<unsigned long>(g.alpha());
  const Rational two(2);
  ShellWindow w;
  w.hi = floor(Rational(ipow(Rational(two * (Q + delta)), alpha)));
  const Rational inner = Q - delta;
  w.lo = inner <= 0 ? Integer(0) : ceil(Rational(ipow(Rational(two * inner), alpha)));
  return w;
}

ShellQuery ShellQuery::fixed_radius(const GaugeParams& g, const Rational& Q, const Rational& delta,
                                    const Rational& c, bool is_signed) {
  ShellQuery query(g);
  query.mode_ = QueryMode::fixed_radius;
  query.lattice_ = truncated_lattice(g.n(), c, Q, is_signed);
  query.window_ = shell_window(g, Q, delta);
  query.radius_ = Q.get_d();
  query.thickness_ = delta.get_d();
  query.exact_radius_ = Q;
  query.exact_thickness_ = delta;
  query.normalization_ = 1 / ipow(Q, static_cast<unsigned long>(2 * g.n() + 2));
  return query;
}

ShellQuery ShellQuery::counting_lemma(const GaugeParams& g, const Rational& q, const Rational& tau) {
  const Rational a(g.D(), g.D() + 1);
  if (q < 1) throw ValidationError("counting-lemma mode needs q >= 1");
  if (tau <= a) throw ValidationError(fmt::format("counting-lemma mode needs tau > a = {}", a.get_str()));
  if (!tau.get_num().fits_ulong_p() || !tau.get_den().fits_ulong_p()) throw ValidationError("tau is too large");
  ShellQuery query(g);
  query.mode_ = QueryMode::counting_lemma;
  query.lattice_ = counting_lemma_lattice(g.n(), q);
  query.window_ = counting_lemma_window(g, q, tau);
  const double a_d = a.get_d();
  query.q_ = q.get_d();
  query.tau_ = tau.get_d();
  query.radius_ = std::pow(query.q_, a_d);
  query.thickness_ = std::pow(query.q_, a_d - query.tau_);
  query.exact_radius_ = exact_power(q, a);
  query.exact_thickness_ = exact_power(q, Rational(a - tau));
  query.normalization_ = 1 / ipow(q, static_cast<unsigned long>(g.D()));
  return query;
}

Integer count_in_window(const IntPoint& u, const GaugeParams& g, const LatticeSpec& lattice,
                        const ShellWindow& window) {
  if (static_cast<int>(u.n()) != g.n() || lattice.n != g.n()) throw ValidationError("dimension mismatch");
  const CenterCoords c = center_coords(u);
  // Horizontal offsets stay below 2^31, so 4 r^2 and the m values fit in 64 bits.
  const Integer k = g.scaled_vertical_constant();
  std::int64_t count;
  if (fits_wide(window.hi) && fits_wide(k) && window.lo >= 0) {
    count = slice_count<i128>(c, g, lattice, window);
  } else {
    count = slice_count<Integer>(c, g, lattice, window);
  }
  return Integer(static_cast<long>(count));
}

Integer fast_shell_count(const IntPoint& u, const ShellQuery& query) {
  return count_in_window(u, query.gauge(), query.lattice(), query.window());
}

Integer naive_shell_count(const IntPoint& u, const ShellQuery& query) {
  const GaugeParams& g = query.gauge();
  const LatticeSpec& lattice = query.lattice();
  if (!lattice.contains(u)) throw ValidationError("center must lie in the lattice");
  if (lattice.cardinality() > kNaiveLatticeLimit) {
    throw ValidationError("lattice too large for the brute-force counter");
  }
  const ShellWindow& w = query.window();
  const std::size_t dim_h = u.horiz.size();
  const auto p = static_cast<unsigned long>(g.half_alpha());

  // Bound every term of 2^alpha Phi to decide whether 64-bit arithmetic is exact.
  const Integer k = g.scaled_vertical_constant();
  Integer max_u = 0;
  for (const auto& x : u.horiz) max_u = std::max(max_u, Integer(abs(x)));
  const Integer hb = lattice.horiz_bound;
  const Integer vb = lattice.vert_bound;
  const Integer max_d = max_u + hb;
  const Integer max_r2 = Integer(static_cast<unsigned long>(dim_h)) * max_d * max_d;
  const Integer max_m = 2 * (abs(u.vert) + vb) + Integer(static_cast<unsigned long>(dim_h)) * hb * max_u;
  const Integer max_s = ipow(Integer(4 * max_r2), p) + k * ipow(max_m, p);
  const Integer limit = Integer(1) << 62;

  std::uint64_t count = 0;
  if (max_s < limit) {
    std::vector<std::int64_t> uc(dim_h);
    for (std::size_t i = 0; i < dim_h; ++i) uc[i] = u.horiz[i].get_si();
    const std::int64_t uv = u.vert.get_si();
    const std::int64_t kk = k.get_si();
    const std::int64_t lo = w.lo > limit ? std::numeric_limits<std::int64_t>::max() : w.lo.get_si();
    const std::int64_t hi = w.hi > limit ? std::numeric_limits<std::int64_t>::max() : w.hi.get_si();
    const std::size_t n = dim_h / 2;
    auto pw = [p](std::int64_t b) {
      std::int64_t r = 1;
      for (unsigned long i = 0; i < p; ++i) r *= b;
      return r;
    };
    for_each_lattice_point(lattice, dim_h, [&](const std::vector<std::int64_t>& v) {
      std::int64_t r2 = 0;
      for (std::size_t i = 0; i < dim_h; ++i) {
        const std::int64_t d = uc[i] - v[i];
        r2 += d * d;
      }
      std::int64_t m = 2 * (uv - v[dim_h]);
      for (std::size_t i = 0; i < n; ++i) m += v[i] * uc[n + i] - v[n + i] * uc[i];
      if (m < 0) m = -m;
      const std::int64_t s = pw(4 * r2) + kk * pw(m);
      if (lo <= s && s <= hi) ++count;
    });
  } else {
    for_each_lattice_point(lattice, dim_h, [&](const std::vector<std::int64_t>& v) {
      std::vector<Integer> h(dim_h);
      for (std::size_t i = 0; i < dim_h; ++i) h[i] = Integer(static_cast<long>(v[i]));
      IntPoint vp(std::move(h), Integer(static_cast<long>(v[dim_h])));
      if (w.contains(phi_power_scaled(u, vp, g))) ++count;
    });
  }
  return Integer(static_cast<unsigned long>(count));
}

ShellCount averaged_shell_count(const ShellQuery& query, const Sampling& sampling, unsigned threads) {
  const LatticeSpec& lattice = query.lattice();
  const Integer card = lattice.cardinality();
  ShellCount result;
  result.sampling = sampling;

  const bool exhaustive = sampling.kind == Sampling::Kind::exhaustive || Integer(static_cast<unsigned long>(sampling.samples)) >= card;
  if (sampling.kind == Sampling::Kind::random && sampling.samples < kMinRandomCenters) {
    throw ValidationError(fmt::format("random sampling needs at least {} centers", kMinRandomCenters));
  }

  if (exhaustive) {
    const std::uint64_t total = to_u64(card, "lattice cardinality");
    constexpr std::uint64_t block = 256;
    const std::uint64_t blocks = (total + block - 1) / block;
    std::vector<Integer> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
      Integer sum = 0;
      const std::uint64_t end = std::min<std::uint64_t>(total, (b + 1) * block);
      for (std::uint64_t i = b * block; i < end; ++i) sum += fast_shell_count(lattice.point_at(i), query);
      partial[b] = sum;
    });
    Integer sum = 0;
    for (const auto& s : partial) sum += s;
    result.raw_count = sum;
    result.centers_used = total;
    result.normalized = Rational(Rational(sum) * query.normalization()).get_d();
    result.std_error = 0;
    result.sampling = Sampling::exhaustive();
    return result;
  }

  const std::uint64_t N = sampling.samples;
  std::vector<Integer> counts(N);
  parallel_for(N, threads, [&](std::size_t i) {
    KeyedRng rng(sampling.seed, /*stream=*/1, i);
    std::vector<Integer> h(static_cast<std::size_t>(2 * lattice.n));
    for (auto& c : h) c = Integer(static_cast<long>(rng.between(lattice.horiz_min(), lattice.horiz_bound)));
    Integer v(static_cast<long>(rng.between(lattice.vert_min(), lattice.vert_bound)));
    counts[i] = fast_shell_count(IntPoint(std::move(h), std::move(v)), query);
  });
  Integer sum = 0, sum_sq = 0;
  for (const auto& c : counts) {
    sum += c;
    sum_sq += c * c;
  }
  result.raw_count = sum;
  result.centers_used = N;
  const Rational n_r(static_cast<unsigned long>(N));
  const Rational mean = Rational(sum) / n_r;
  const Rational scale = Rational(card) * query.normalization();
  result.normalized = Rational(mean * scale).get_d();
  // sample variance (N - 1 denominator), exact
  const Rational var = (Rational(sum_sq) - Rational(sum) * mean) / (n_r - 1);
  result.std_error = scale.get_d() * std::sqrt(std::max(0.0, var.get_d())) / std::sqrt(static_cast<double>(N));
  return result;
}

double theorem_bound(int n, int alpha, double Q, double delta) {
  if (alpha < 2 || alpha % 2 != 0) throw ValidationError("theorem bound needs an even alpha >= 2");
  if (n < 1) throw ValidationError("n must be positive");
  const double D = 2.0 * n + 1.0;
  const double thick = std::pow(Q, 2.0 * n + 1.0) * delta;
  const double base = alpha <= 4 ? std::pow(Q, 2.0 * n) : std::pow(Q, 2.0 * n + 2.0 / D);
  return std::max(base, thick);
}

double theorem_bound(const ShellQuery& query) {
  const GaugeParams& g = query.gauge();
  if (query.mode() == QueryMode::counting_lemma) return std::pow(query.q(), g.D() - query.tau());
  return theorem_bound(g.n(), g.alpha(), query.radius(), query.thickness());
}

ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> series) {
  if (series.size() < 3) throw ValidationError("scaling fit needs at least 3 points");
  const double m = static_cast<double>(series.size());
  double sx = 0, sy = 0;
  for (const auto& [Q, c] : series) {
    if (!(Q > 0) || !(c > 0)) throw ValidationError("scaling fit needs positive entries");
    sx += std::log(Q);
    sy += std::log(c);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [Q, c] : series) {
    const double dx = std::log(Q) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(c) - my);
  }
  if (sxx == 0) throw ValidationError("scaling fit needs at least two distinct Q values");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (const auto& [Q, c] : series) {
    const double r = std::log(c) - (fit.intercept + fit.slope * std::log(Q));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

double unit_ball_volume(const GaugeParams& g) {
  const int n = g.n();
  const double alpha = g.alpha();
  const double C = g.c_alpha_double();
  // surface area of S^{2n-1}
  const double sphere = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(static_cast<double>(n));
  auto integrand = [&](double r) {
    const double rest = 1.0 - std::pow(r, alpha);
    if (rest <= 0) return 0.0;
    return std::pow(r, 2.0 * n - 1.0) * 2.0 * std::pow(rest / C, 2.0 / alpha);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0, l1 = 0;
  const double value = integrator.integrate(integrand, 0.0, 1.0, 1e-12, &error, &l1);
  if (!(error <= 1e-9 * std::fabs(value))) {
    throw DomainError(fmt::format("unit ball quadrature did not converge (estimate {}, error {})", value, error));
  }
  return sphere * value;
}

BallErrorTerm fixed_center_error_term(const GaugeParams& g, const Rational& Q) {
  if (Q <= 0) throw ValidationError("radius Q must be positive");
  const auto alpha = static_cast<unsigned long>(g.alpha());
  const auto p = static_cast<unsigned long>(g.half_alpha());
  LatticeSpec ball;
  ball.n = g.n();
  ball.is_signed = true;
  ball.horiz_bound = to_i64(floor(Q), "ball bound");
  // C |m_D|^(alpha/2) <= Q^alpha
  ball.vert_bound = to_i64(floor_root(floor(Rational(ipow(Q, alpha) / g.c_alpha())), p), "ball bound");
  ShellWindow window{Integer(0), floor(Rational(ipow(Rational(2 * Q), alpha)))};
  BallErrorTerm out;
  out.lattice_count = count_in_window(IntPoint::origin(static_cast<std::size_t>(g.n())), g, ball, window);
  out.volume = std::pow(Q.get_d(), 2.0 * g.n() + 2.0) * unit_ball_volume(g);
  out.error = std::fabs(out.volume - out.lattice_count.get_d());
  return out;
}

}  // namespace heislat
