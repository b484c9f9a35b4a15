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

#include "heislat/monge_ampere.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "heislat/parallel.hpp"
#include "heislat/rng.hpp"

namespace heislat {

namespace {

// Radial and vertical profile derivatives. With r2 = |z_h|^2 and P = alpha/2:
//   g1 = P r2^(P-1), g2 = P (P-1) r2^(P-2)     (|z_h|^alpha = r2^P)
//   h1 = A P sign(w) |w|^(P-1), h2 = A P (P-1) |w|^(P-2)
template <class T>
struct Profile {
  T g1, g2, h1, h2;
};

template <class T>
T constant_a(const GaugeParams& g) {
  if constexpr (std::is_same_v<T, double>) {
    return g.c_alpha_double();
  } else {
    return g.c_alpha();
  }
}

template <class T>
Profile<T> profile(const T& r2, const T& w, const GaugeParams& g) {
  const unsigned P = static_cast<unsigned>(g.half_alpha());
  const T A = constant_a<T>(g);
  const T aw = w < 0 ? T(-w) : w;
  Profile<T> p;
  p.g1 = T(P) * detail::powu(r2, P - 1);
  p.g2 = P >= 2 ? T(T(P * (P - 1)) * detail::powu(r2, P - 2)) : T(0);
  if (P == 1) {
    if (w == 0) throw DomainError("alpha = 2: Phi is not differentiable in the vertical variable at z_v = 0");
    p.h1 = w > 0 ? A : T(-A);
    p.h2 = T(0);
  } else {
    const T mag = T(A * T(P)) * detail::powu(aw, P - 1);
    p.h1 = w < 0 ? T(-mag) : mag;
    p.h2 = T(A * T(P * (P - 1))) * detail::powu(aw, P - 2);
  }
  return p;
}

template <class T>
T squared_norm(const std::vector<T>& v) {
  T s(0);
  for (const auto& c : v) s += c * c;
  return s;
}

template <class T>
PhiGradient<T> gradient_impl(const BasicHPoint<T>& x, const BasicHPoint<T>& y, const GaugeParams& g) {
  detail::require_same_n(x, y);
  if (static_cast<int>(x.n()) != g.n()) throw ValidationError("HPoint dimension does not match gauge n");
  const std::size_t dh = x.horiz.size();
  std::vector<T> delta(dh);
  for (std::size_t i = 0; i < dh; ++i) delta[i] = x.horiz[i] - y.horiz[i];
  const T w = x.vert - y.vert + symplectic_form(y.horiz, x.horiz) / T(2);
  const Profile<T> p = profile(squared_norm(delta), w, g);
  const std::vector<T> jx = apply_symplectic(x.horiz);
  const std::vector<T> jy = apply_symplectic(y.horiz);
  PhiGradient<T> out;
  out.dx.resize(dh + 1);
  out.dy.resize(dh + 1);
  for (std::size_t i = 0; i < dh; ++i) {
    out.dx[i] = T(2) * p.g1 * delta[i] - p.h1 * jy[i] / T(2);
    out.dy[i] = T(-2) * p.g1 * delta[i] + p.h1 * jx[i] / T(2);
  }
  out.dx[dh] = p.h1;
  out.dy[dh] = -p.h1;
  return out;
}

RatMatrix direct_matrix(const RatPoint& x, const RatPoint& y, const GaugeParams& g) {
  const std::size_t dh = x.horiz.size();
  const std::size_t D = dh + 1;
  std::vector<Rational> delta(dh);
  for (std::size_t i = 0; i < dh; ++i) delta[i] = x.horiz[i] - y.horiz[i];
  const Rational w = x.vert - y.vert + symplectic_form(y.horiz, x.horiz) / 2;
  const Profile<Rational> p = profile(squared_norm(delta), w, g);
  const std::vector<Rational> jx = apply_symplectic(x.horiz);
  const std::vector<Rational> jy = apply_symplectic(y.horiz);
  const RatMatrix J = symplectic_matrix<Rational>(dh / 2);
  const PhiGradient<Rational> grad = gradient_impl(x, y, g);

  RatMatrix m(D + 1, D + 1);
  for (std::size_t j = 0; j < D; ++j) m(0, 1 + j) = grad.dy[j];
  for (std::size_t i = 0; i < D; ++i) m(1 + i, 0) = grad.dx[i];
  for (std::size_t i = 0; i < dh; ++i) {
    for (std::size_t j = 0; j < dh; ++j) {
      Rational v = -4 * p.g2 * delta[i] * delta[j] - p.h2 * jy[i] * jx[j] / 4 - p.h1 * J(i, j) / 2;
      if (i == j) v -= 2 * p.g1;
      m(1 + i, 1 + j) = v;
    }
    m(1 + i, D) = p.h2 * jy[i] / 2;
    m(D, 1 + i) = p.h2 * jx[i] / 2;
  }
  m(D, D) = -p.h2;
  return m;
}

RatMatrix factorized_matrix(const RatPoint& x, const RatPoint& y, const GaugeParams& g) {
  const std::size_t dh = x.horiz.size();
  const std::size_t D = dh + 1;
  const RatMatrix N = n_psi_matrix(theta(x, y), g).entries;
  const std::vector<Rational> jx = apply_symplectic(x.horiz);
  const std::vector<Rational> jy = apply_symplectic(y.horiz);
  RatMatrix L = RatMatrix::identity(D + 1);
  RatMatrix R(D + 1, D + 1);
  R(0, 0) = 1;
  R(D, D) = -1;
  for (std::size_t i = 0; i < dh; ++i) {
    L(1 + i, D) = -jy[i] / 2;
    R(1 + i, 1 + i) = -1;
    R(D, 1 + i) = jx[i] / 2;
  }
  return L * N * R;
}

// Rational point on the unit sphere of R^d by inverse stereographic projection.
std::vector<Rational> rational_unit_vector(KeyedRng& rng, std::size_t d) {
  std::vector<Rational> v(d - 1);
  Rational s = 0;
  for (auto& c : v) {
    c = Rational(rng.between(-12, 12), rng.between(1, 6));
    c.canonicalize();
    s += c * c;
  }
  std::vector<Rational> u(d);
  u[0] = (s - 1) / (s + 1);
  for (std::size_t i = 1; i < d; ++i) u[i] = 2 * v[i - 1] / (s + 1);
  return u;
}

Rational random_coordinate(KeyedRng& rng) {
  Rational r(rng.between(-40, 40), rng.between(1, 8));
  r.canonicalize();
  return r;
}

struct LevelPoint {
  RatPoint z;
  bool exact = false;
};

LevelPoint sample_level_point(KeyedRng& rng, const GaugeParams& g, const Rational& t, bool equator) {
  const std::size_t n = static_cast<std::size_t>(g.n());
  const std::size_t dh = 2 * n;
  LevelPoint out;
  if (equator) {
    std::vector<Rational> u = rational_unit_vector(rng, dh);
    for (auto& c : u) c *= t;
    out.z = RatPoint(std::move(u), Rational(0));
    out.exact = true;
    return out;
  }
  if (g.alpha() == 2) {
    // |z_h|^2 + A |z_v| = t^2 with |z_h| = s t, s in (0, 1).
    Rational s(rng.between(1, 999), 1000);
    s.canonicalize();
    std::vector<Rational> u = rational_unit_vector(rng, dh);
    for (auto& c : u) c *= s * t;
    Rational v = t * t * (1 - s * s) / g.c_alpha();
    if (rng.below(2) == 0) v = -v;
    out.z = RatPoint(std::move(u), std::move(v));
    out.exact = true;
    return out;
  }
  std::vector<double> w(dh);
  double wv = 0;
  while (true) {
    for (auto& c : w) c = rng.normal();
    wv = rng.normal();
    if (wv != 0) break;
  }
  const RealPoint wp(w, wv);
  const double scale = t.get_d() / norm_alpha(wp, g);
  const RealPoint zr = dilate(scale, wp);
  std::vector<Rational> h(dh);
  for (std::size_t i = 0; i < dh; ++i) h[i] = from_double(zr.horiz[i]);
  out.z = RatPoint(std::move(h), from_double(zr.vert));
  out.exact = false;
  return out;
}

struct SampleResult {
  bool equator = false;
  bool nonzero_det = false;
  double abs_det = 0;
  bool factorization_agrees = true;
  bool x_positive = true;
  bool gradient_nonzero = true;
  std::size_t rank = 0;
  bool subdet_nonzero = false;
  double level_deviation = 0;
  bool exact = false;
};

bool all_zero(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& c) { return c == 0; });
}

}  // namespace

std::string to_string(MAProvenance p) {
  switch (p) {
    case MAProvenance::direct: return "direct";
    case MAProvenance::factorized: return "factorized";
    case MAProvenance::submatrix: return "submatrix";
  }
  return "unknown";
}

PhiGradient<Rational> grad_Phi(const RatPoint& x, const RatPoint& y, const GaugeParams& g) {
  return gradient_impl(x, y, g);
}

PhiGradient<double> grad_Phi(const RealPoint& x, const RealPoint& y, const GaugeParams& g) {
  return gradient_impl(x, y, g);
}

std::vector<Rational> grad_Psi(const RatPoint& z, const GaugeParams& g) {
  if (static_cast<int>(z.n()) != g.n()) throw ValidationError("HPoint dimension does not match gauge n");
  const Profile<Rational> p = profile(squared_norm(z.horiz), z.vert, g);
  std::vector<Rational> out(z.horiz.size() + 1);
  for (std::size_t i = 0; i < z.horiz.size(); ++i) out[i] = 2 * p.g1 * z.horiz[i];
  out.back() = p.h1;
  return out;
}

RatMatrix horizontal_block(const RatPoint& z, const GaugeParams& g) {
  const std::size_t dh = z.horiz.size();
  const Profile<Rational> p = profile(squared_norm(z.horiz), z.vert, g);
  const RatMatrix J = symplectic_matrix<Rational>(dh / 2);
  RatMatrix b(dh, dh);
  for (std::size_t i = 0; i < dh; ++i)
    for (std::size_t j = 0; j < dh; ++j) {
      b(i, j) = 4 * p.g2 * z.horiz[i] * z.horiz[j] + p.h1 * J(i, j) / 2;
      if (i == j) b(i, j) += 2 * p.g1;
    }
  return b;
}

MAMatrix n_psi_matrix(const RatPoint& z, const GaugeParams& g) {
  if (static_cast<int>(z.n()) != g.n()) throw ValidationError("HPoint dimension does not match gauge n");
  const std::size_t dh = z.horiz.size();
  const std::size_t D = dh + 1;
  const Profile<Rational> p = profile(squared_norm(z.horiz), z.vert, g);
  const RatMatrix block = horizontal_block(z, g);
  MAMatrix out;
  out.provenance = MAProvenance::factorized;
  RatMatrix& m = out.entries;
  m = RatMatrix(D + 1, D + 1);
  for (std::size_t i = 0; i < dh; ++i) {
    const Rational gi = 2 * p.g1 * z.horiz[i];
    m(0, 1 + i) = gi;
    m(1 + i, 0) = gi;
    for (std::size_t j = 0; j < dh; ++j) m(1 + i, 1 + j) = block(i, j);
  }
  m(0, D) = p.h1;
  m(D, 0) = p.h1;
  m(D, D) = p.h2;
  return out;
}

MAMatrix n_psi_submatrix(const RatPoint& z, const GaugeParams& g) {
  MAMatrix out;
  out.entries = n_psi_matrix(z, g).entries.leading(z.horiz.size() + 1);
  out.provenance = MAProvenance::submatrix;
  return out;
}

MAMatrix monge_ampere_matrix(const RatPoint& x, const RatPoint& y, const GaugeParams& g, MAMode mode) {
  detail::require_same_n(x, y);
  if (static_cast<int>(x.n()) != g.n()) throw ValidationError("HPoint dimension does not match gauge n");
  MAMatrix out;
  if (mode == MAMode::direct) {
    out.entries = direct_matrix(x, y, g);
    out.provenance = MAProvenance::direct;
  } else {
    out.entries = factorized_matrix(x, y, g);
    out.provenance = MAProvenance::factorized;
  }
  return out;
}

std::size_t matrix_rank(const MAMatrix& m, RankMode mode, double eps) {
  if (mode == RankMode::exact) return exact_rank(m.entries);
  return tolerant_rank(to_real(m.entries), eps);
}

RatMatrix structured_matrix(const StructuredMatrixParams& p) {
  const std::size_t d = p.w.size();
  if (d == 0 || d % 2 != 0) throw ValidationError("w must have even positive length");
  const RatMatrix J = symplectic_matrix<Rational>(d / 2);
  RatMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      m(i, j) = p.lambda * p.w[i] * p.w[j] + p.kappa * J(i, j);
      if (i == j) m(i, j) += p.sigma;
    }
  return m;
}

namespace {

std::pair<Rational, Rational> structured_denominators(const StructuredMatrixParams& p) {
  if (p.w.empty() || p.w.size() % 2 != 0) throw ValidationError("w must have even positive length");
  const Rational base = p.sigma * p.sigma + p.kappa * p.kappa;
  const Rational full = base + p.sigma * p.lambda * squared_norm(p.w);
  if (base == 0 || full == 0) throw ValidationError("singular parameters: sigma^2 + kappa^2 (+ sigma lambda |w|^2) is zero");
  return {base, full};
}

}  // namespace

RatMatrix structured_inverse(const StructuredMatrixParams& p) {
  const auto [base, full] = structured_denominators(p);
  const std::size_t d = p.w.size();
  const RatMatrix J = symplectic_matrix<Rational>(d / 2);
  const std::vector<Rational>& w = p.w;
  const std::vector<Rational> jw = apply_symplectic(w);
  const Rational c1 = -p.sigma * p.lambda / full;
  const Rational c2 = p.lambda * p.kappa / full;
  RatMatrix inv(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Rational v = -p.kappa * J(i, j);
      if (i == j) v += p.sigma;
      v += c1 * (p.sigma * w[i] * w[j] - p.kappa * jw[i] * w[j]);
      v += c2 * (-p.sigma * w[i] * jw[j] + p.kappa * jw[i] * jw[j]);
      inv(i, j) = v / base;
    }
  return inv;
}

std::vector<Rational> structured_inverse_apply_w(const StructuredMatrixParams& p) {
  const auto denominators = structured_denominators(p);
  const Rational& full = denominators.second;
  const std::vector<Rational> jw = apply_symplectic(p.w);
  std::vector<Rational> out(p.w.size());
  for (std::size_t i = 0; i < p.w.size(); ++i) out[i] = (p.sigma * p.w[i] - p.kappa * jw[i]) / full;
  return out;
}

StructuredMatrixParams block_parameters(const RatPoint& z, const GaugeParams& g) {
  const Profile<Rational> p = profile(squared_norm(z.horiz), z.vert, g);
  return StructuredMatrixParams{2 * p.g1, 4 * p.g2, p.h1 / 2, z.horiz};
}

Rational x_functional(const RatPoint& z, const GaugeParams& g) {
  if (g.alpha() < 4) throw ValidationError("the X functional needs alpha >= 4");
  const Rational r2 = squared_norm(z.horiz);
  if (r2 == 0 && z.vert == 0) throw ValidationError("the X functional is undefined at the origin");
  const unsigned P = static_cast<unsigned>(g.half_alpha());
  const StructuredMatrixParams s = block_parameters(z, g);
  Rational value = 0;
  if (r2 != 0) {
    const Rational den = s.sigma * s.sigma + s.sigma * s.lambda * r2 + s.kappa * s.kappa;
    value += s.sigma * s.sigma * s.sigma * r2 / den;
  }
  value += g.c_alpha() * P / (P - 1) * ipow(Rational(abs(z.vert)), P);
  return value;
}

bool RankReport::passed() const {
  if (off_equator_nonzero_det != off_equator_count) return false;
  if (!factorization_agrees || !gradient_nonzero || !x_functional_positive) return false;
  if (equator_count > 0) {
    if (alpha >= 6) return equator_rank_d == equator_count && equator_subdet_nonzero == equator_count;
    return equator_rank_full == equator_count;
  }
  return true;
}

RankReport verify_rank_proposition(const GaugeParams& g, const RankCheckOptions& options) {
  if (options.t <= 0) throw ValidationError("level t must be positive");
  if (options.equator_samples > 0 && g.alpha() == 2) {
    throw ValidationError("alpha = 2 is not differentiable on the equator z_v = 0");
  }
  const std::uint64_t total = options.samples + options.equator_samples;
  const std::size_t D = static_cast<std::size_t>(g.D());
  std::vector<SampleResult> results(total);

  parallel_for(total, options.threads, [&](std::size_t i) {
    const bool equator = i >= options.samples;
    KeyedRng rng(options.seed, equator ? 3 : 2, i);
    const LevelPoint lp = sample_level_point(rng, g, options.t, equator);
    std::vector<Rational> yh(2 * static_cast<std::size_t>(g.n()));
    for (auto& c : yh) c = random_coordinate(rng);
    const RatPoint y(std::move(yh), random_coordinate(rng));
    const RatPoint x = group_mul(lp.z, y);

    SampleResult r;
    r.equator = equator;
    r.exact = lp.exact;
    const Rational level = gauge_power(lp.z, g) / ipow(options.t, static_cast<unsigned long>(g.alpha()));
    r.level_deviation = std::fabs(std::pow(level.get_d(), 1.0 / g.alpha()) - 1.0);
    if (lp.exact && level != 1) throw std::logic_error("exact level-set sample is off the level set");
    if (theta(x, y) != lp.z) throw std::logic_error("x = z * y does not reproduce z");

    const PhiGradient<Rational> grad = grad_Phi(x, y, g);
    r.gradient_nonzero = !all_zero(grad.dx) && !all_zero(grad.dy);

    const MAMatrix direct = monge_ampere_matrix(x, y, g, MAMode::direct);
    if (!equator) {
      const MAMatrix fact = monge_ampere_matrix(x, y, g, MAMode::factorized);
      r.factorization_agrees = direct.entries == fact.entries;
      const Rational det = determinant(direct.entries);
      r.nonzero_det = det != 0;
      r.abs_det = std::fabs(det.get_d());
      if (g.alpha() >= 4) r.x_positive = x_functional(lp.z, g) > 0;
    } else {
      r.rank = matrix_rank(direct);
      r.subdet_nonzero = determinant(n_psi_submatrix(lp.z, g).entries) != 0;
      if (g.alpha() >= 4) r.x_positive = x_functional(lp.z, g) > 0;
    }
    results[i] = r;
  });

  RankReport report;
  report.alpha = g.alpha();
  report.n = g.n();
  report.t = options.t;
  report.samples = total;
  report.min_abs_det = std::numeric_limits<double>::infinity();
  report.equator_rank_histogram.assign(D + 2, 0);
  report.level_exact = true;
  for (const SampleResult& r : results) {
    report.gradient_nonzero = report.gradient_nonzero && r.gradient_nonzero;
    report.x_functional_positive = report.x_functional_positive && r.x_positive;
    report.max_level_deviation = std::max(report.max_level_deviation, r.level_deviation);
    report.level_exact = report.level_exact && r.exact;
    if (!r.equator) {
      ++report.off_equator_count;
      if (r.nonzero_det) ++report.off_equator_nonzero_det;
      report.min_abs_det = std::min(report.min_abs_det, r.abs_det);
      report.factorization_agrees = report.factorization_agrees && r.factorization_agrees;
    } else {
      ++report.equator_count;
      ++report.equator_rank_histogram[r.rank];
      if (r.rank == D + 1) ++report.equator_rank_full;
      if (r.rank == D) ++report.equator_rank_d;
      if (r.subdet_nonzero) ++report.equator_subdet_nonzero;
    }
  }
  if (report.off_equator_count == 0) report.min_abs_det = 0;
  return report;
}

}  // namespace heislat
