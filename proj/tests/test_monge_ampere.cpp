#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heislat/monge_ampere.hpp"
#include "test_support.hpp"

using namespace heislat;
using namespace heislat::testing;

namespace {

// Cofactor expansion along the first row.
Rational laplace_det(const RatMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0);
  Rational det = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (m(0, c) == 0) continue;
    RatMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, k = 0; j < n; ++j)
        if (j != c) minor(i - 1, k++) = m(i, j);
    const Rational term = m(0, c) * laplace_det(minor);
    det += c % 2 == 0 ? term : Rational(-term);
  }
  return det;
}

RatMatrix random_matrix(KeyedRng& rng, std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = random_rational(rng, 9, 5);
  return m;
}

// Random point with z_v != 0 when required.
RatPoint random_off_seam(KeyedRng& rng, std::size_t n) {
  RatPoint p = random_rat_point(rng, n, 30, 7);
  while (p.vert == 0) p.vert = random_rational(rng, 30, 7);
  return p;
}

}  // namespace

TEST_CASE("determinant and rank primitives") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    KeyedRng rng(1, 0, i);
    const std::size_t n = 1 + i % 6;
    RatMatrix m = random_matrix(rng, n);
    if (i % 5 == 0 && n > 1) {
      for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = m(0, j) * 3 - m(1 % n, j);
    }
    const Rational det = determinant(m);
    CHECK(det == laplace_det(m));
    CHECK((exact_rank(m) == n) == (det != 0));
    CHECK(tolerant_rank(to_real(m)) == exact_rank(m));
  }
  CHECK(exact_rank(RatMatrix::identity(4)) == 4);
  CHECK(exact_rank(RatMatrix(4, 4)) == 0);
  CHECK(tolerant_rank(RealMatrix(3, 3)) == 0);
  RatMatrix wide(2, 4);
  wide(0, 3) = 1;
  wide(1, 3) = 2;
  CHECK(exact_rank(wide) == 1);
  CHECK_THROWS_AS(determinant(wide), ValidationError);
}

TEST_CASE("theta") {
  const RatPoint x = rat_point({1, 0, 0});
  CHECK(theta(x, x) == RatPoint::origin(1));
  CHECK(theta(x, rat_point({0, 1, 0})) == rat_point({1, -1, Rational(-1, 2)}));
  for (std::uint64_t i = 0; i < 100; ++i) {
    KeyedRng rng(2, 0, i);
    for (std::size_t n : {1u, 2u}) {
      const RatPoint a = random_rat_point(rng, n), b = random_rat_point(rng, n);
      for (int alpha : {2, 4, 6}) {
        const GaugeParams g(static_cast<int>(n), alpha);
        CHECK(gauge_power(theta(a, b), g) == phi_power(a, b, g));
      }
    }
  }
}

TEST_CASE("gradient closed forms") {
  const GaugeParams g4(1, 4);
  const auto grad = grad_Phi(rat_point({1, 0, 0}), RatPoint::origin(1), g4);
  CHECK(grad.dx == std::vector<Rational>{4, 0, 0});
  CHECK(grad.dy == std::vector<Rational>{-4, 0, 0});
  CHECK_THROWS_AS(grad_Phi(rat_point({1, 0, 0}), RatPoint::origin(1), GaugeParams(1, 2)), DomainError);
  CHECK_NOTHROW(grad_Phi(rat_point({1, 0, 0}), RatPoint::origin(1), GaugeParams(1, 6)));

  // Central differences with step 1e-5.
  const double h = 1e-5;
  double worst = 0;
  for (int alpha : {4, 6}) {
    for (std::size_t n : {1u, 2u}) {
      const GaugeParams g(static_cast<int>(n), alpha);
      for (std::uint64_t i = 0; i < 50; ++i) {
        KeyedRng rng(3, static_cast<std::uint64_t>(alpha) * 10 + n, i);
        RealPoint x = to_real(random_rat_point(rng, n, 10, 8));
        RealPoint y = to_real(random_rat_point(rng, n, 10, 8));
        const auto exact = grad_Phi(x, y, g);
        std::vector<double> fdx(2 * n + 1), fdy(2 * n + 1);
        for (std::size_t k = 0; k <= 2 * n; ++k) {
          auto coord = [&](RealPoint& p) -> double& { return k < 2 * n ? p.horiz[k] : p.vert; };
          RealPoint xp = x, xm = x, yp = y, ym = y;
          coord(xp) += h;
          coord(xm) -= h;
          coord(yp) += h;
          coord(ym) -= h;
          fdx[k] = (phi_power(xp, y, g) - phi_power(xm, y, g)) / (2 * h);
          fdy[k] = (phi_power(x, yp, g) - phi_power(x, ym, g)) / (2 * h);
        }
        double num = 0, den = 0;
        for (std::size_t k = 0; k <= 2 * n; ++k) {
          num += std::pow(fdx[k] - exact.dx[k], 2) + std::pow(fdy[k] - exact.dy[k], 2);
          den += std::pow(exact.dx[k], 2) + std::pow(exact.dy[k], 2);
        }
        worst = std::max(worst, std::sqrt(num / den));
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("N(Psi) for alpha = 2") {
  // Bordered block [[0, 2 z_h^T, A], [2 z_h, 2I + (A/2) J, 0], [A, 0, 0]].
  const GaugeParams g(1, 2);
  for (const Rational& v : {Rational(3), Rational(-1, 7)}) {
    const MAMatrix N = n_psi_matrix(rat_point({1, 0, v}), g);
    const Rational A = v > 0 ? 16 : -16;
    RatMatrix expected(4, 4);
    expected(0, 1) = 2;
    expected(1, 0) = 2;
    expected(0, 3) = A;
    expected(3, 0) = A;
    expected(1, 1) = 2;
    expected(2, 2) = 2;
    expected(1, 2) = A / 2;
    expected(2, 1) = -A / 2;
    CHECK(N.entries == expected);
    CHECK(laplace_det(N.entries) == -17408);
    CHECK(determinant(N.entries) == -17408);
  }
  CHECK_THROWS_AS(n_psi_matrix(rat_point({1, 0, 0}), g), DomainError);
}

TEST_CASE("N(Psi) structure") {
  // alpha = 4 on the vertical axis: D^2 Psi vanishes, the block is (A alpha/4) z_v J.
  const GaugeParams g4(1, 4);
  const MAMatrix N = n_psi_matrix(rat_point({0, 0, 2}), g4);
  CHECK(N.entries(1, 1) == 0);
  CHECK(N.entries(1, 2) == 32);
  CHECK(N.entries(2, 1) == -32);
  CHECK(N.entries(0, 3) == 64);
  CHECK(N.entries(3, 3) == 32);

  // N - N^T is Psi'_v J inside the horizontal block and zero elsewhere.
  for (std::uint64_t i = 0; i < 30; ++i) {
    KeyedRng rng(4, 0, i);
    const std::size_t n = 1 + i % 2;
    const GaugeParams g(static_cast<int>(n), 4 + 2 * static_cast<int>(i % 3));
    const RatPoint z = random_off_seam(rng, n);
    const RatMatrix m = n_psi_matrix(z, g).entries;
    const Rational h1 = grad_Psi(z, g).back();
    const RatMatrix J = symplectic_matrix<Rational>(n);
    for (std::size_t a = 0; a < m.rows(); ++a)
      for (std::size_t b = 0; b < m.cols(); ++b) {
        const bool inner = a >= 1 && b >= 1 && a <= 2 * n && b <= 2 * n;
        const Rational expected = inner ? Rational(h1 * J(a - 1, b - 1)) : Rational(0);
        CHECK(m(a, b) - m(b, a) == expected);
      }
  }
}

TEST_CASE("direct and factorized Monge-Ampere matrices agree") {
  for (int alpha : {2, 4, 6, 8}) {
    for (std::size_t n : {1u, 2u}) {
      const GaugeParams g(static_cast<int>(n), alpha);
      for (std::uint64_t i = 0; i < 25; ++i) {
        KeyedRng rng(5, static_cast<std::uint64_t>(alpha) * 10 + n, i);
        const RatPoint x = random_rat_point(rng, n), y = random_rat_point(rng, n);
        if (alpha == 2 && theta(x, y).vert == 0) continue;
        const MAMatrix d = monge_ampere_matrix(x, y, g, MAMode::direct);
        const MAMatrix f = monge_ampere_matrix(x, y, g, MAMode::factorized);
        CHECK(d.provenance == MAProvenance::direct);
        CHECK(f.provenance == MAProvenance::factorized);
        CHECK(d.order() == 2 * n + 2);
        CHECK(d.entries == f.entries);
        const Rational dm = determinant(d.entries);
        const Rational dn = determinant(n_psi_matrix(theta(x, y), g).entries);
        CHECK(dm == -dn);
      }
    }
  }
  // On the seam z_v = 0 for alpha >= 6 both paths use the continuous extension.
  const GaugeParams g6(1, 6);
  const RatPoint y = rat_point({Rational(1, 2), 3, -2});
  const RatPoint x = group_mul(rat_point({1, 2, 0}), y);
  CHECK(monge_ampere_matrix(x, y, g6, MAMode::direct).entries ==
        monge_ampere_matrix(x, y, g6, MAMode::factorized).entries);

  const GaugeParams g4(1, 4);
  CHECK(determinant(monge_ampere_matrix(rat_point({1, 0, 0}), RatPoint::origin(1), g4, MAMode::direct).entries) != 0);
}

TEST_CASE("matrix_rank") {
  MAMatrix id{RatMatrix::identity(4), MAProvenance::direct};
  CHECK(matrix_rank(id) == 4);
  CHECK(matrix_rank(id, RankMode::tolerant) == 4);
  MAMatrix zero{RatMatrix(4, 4), MAProvenance::direct};
  CHECK(matrix_rank(zero) == 0);
  const GaugeParams g6(1, 6);
  const MAMatrix sub = n_psi_submatrix(rat_point({1, 0, 0}), g6);
  CHECK(sub.provenance == MAProvenance::submatrix);
  CHECK(matrix_rank(sub) == 3);
  CHECK(matrix_rank(n_psi_matrix(rat_point({1, 0, 0}), g6)) == 3);
  for (std::uint64_t i = 0; i < 40; ++i) {
    KeyedRng rng(6, 0, i);
    const RatPoint z = random_off_seam(rng, 1);
    for (int alpha : {4, 6}) {
      const MAMatrix m = n_psi_matrix(z, GaugeParams(1, alpha));
      CHECK(matrix_rank(m, RankMode::exact) == matrix_rank(m, RankMode::tolerant));
    }
  }
}

TEST_CASE("structured inverse") {
  const std::vector<Rational> w{Rational(1, 2), 3};
  CHECK(structured_inverse({1, 0, 0, w}) == RatMatrix::identity(2));
  const RatMatrix J = symplectic_matrix<Rational>(1);
  RatMatrix half(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) half(i, j) = (RatMatrix::identity(2)(i, j) - J(i, j)) / 2;
  CHECK(structured_inverse({1, 0, 1, w}) == half);
  CHECK(structured_inverse({1, 0, 1, w}) * structured_matrix({1, 0, 1, w}) == RatMatrix::identity(2));
  CHECK(structured_inverse_apply_w({1, 0, 0, w}) == w);
  {
    const StructuredMatrixParams p{3, 2, 0, w};
    const Rational wn = w[0] * w[0] + w[1] * w[1];
    const auto v = structured_inverse_apply_w(p);
    CHECK(v[0] == 3 * w[0] / (9 + 6 * wn));
    CHECK(v[1] == 3 * w[1] / (9 + 6 * wn));
  }
  CHECK_THROWS_AS(structured_inverse({0, 1, 0, w}), ValidationError);
  CHECK_THROWS_AS(structured_inverse({1, -4, 0, {Rational(1, 2), 0}}), ValidationError);

  for (std::uint64_t i = 0; i < 100; ++i) {
    KeyedRng rng(7, 0, i);
    const std::size_t n = 1 + i % 3;
    StructuredMatrixParams p{random_rational(rng), random_rational(rng), random_rational(rng), {}};
    for (std::size_t k = 0; k < 2 * n; ++k) p.w.push_back(random_rational(rng));
    const Rational base = p.sigma * p.sigma + p.kappa * p.kappa;
    Rational wn = 0;
    for (const auto& c : p.w) wn += c * c;
    if (base == 0 || base + p.sigma * p.lambda * wn == 0) continue;
    const RatMatrix m = structured_matrix(p);
    const RatMatrix inv = structured_inverse(p);
    CHECK(inv * m == RatMatrix::identity(2 * n));
    CHECK(m * inv == RatMatrix::identity(2 * n));
    CHECK(structured_inverse_apply_w(p) == inv * p.w);
    const StructuredMatrixParams no_rank_one{p.sigma, 0, p.kappa, p.w};
    CHECK(determinant(structured_matrix(no_rank_one)) == ipow(base, n));
  }
}

TEST_CASE("X functional") {
  const GaugeParams g4(1, 4), g6(1, 6);
  CHECK(x_functional(rat_point({0, 0, 3}), g4) == 2 * 16 * 9);
  // kappa = 0 on the equator: alpha^3 |z_h|^(3 alpha - 4) / (sigma^2 + sigma lambda |z_h|^2).
  const RatPoint e = rat_point({1, 1, 0});
  const Rational r2 = 2;
  const Rational sigma = 6 * r2 * r2, lambda = 24 * r2;
  CHECK(x_functional(e, g6) == Rational(216 * ipow(r2, 7) / (sigma * sigma + sigma * lambda * r2)));
  CHECK_THROWS_AS(x_functional(RatPoint::origin(1), g4), ValidationError);
  CHECK_THROWS_AS(x_functional(e, GaugeParams(1, 2)), ValidationError);

  // Block identity, with the sign from the 1x1 Schur complement 0 - b^T D^-1 b.
  for (std::uint64_t i = 0; i < 50; ++i) {
    KeyedRng rng(8, 0, i);
    const std::size_t n = 1 + i % 2;
    const GaugeParams g(static_cast<int>(n), i % 3 == 0 ? 6 : 4);
    const RatPoint z = random_off_seam(rng, n);
    const Rational X = x_functional(z, g);
    CHECK(X > 0);
    const RatMatrix N = n_psi_matrix(z, g).entries;
    const Rational diag = determinant(horizontal_block(z, g)) * N(2 * n + 1, 2 * n + 1);
    CHECK(determinant(N) == -X * diag);

    RatPoint eq = z;
    eq.vert = 0;
    if (g.alpha() >= 6) {
      const RatMatrix sub = n_psi_submatrix(eq, g).entries;
      CHECK(determinant(sub) == -x_functional(eq, g) * determinant(horizontal_block(eq, g)));
    }
  }
}

TEST_CASE("level-set rank sampler") {
  RankCheckOptions opt;
  opt.samples = 40;
  opt.seed = 9;
  for (int alpha : {2, 4, 6}) {
    for (int n : {1, 2}) {
      opt.equator_samples = alpha >= 4 ? 20 : 0;
      const RankReport r = verify_rank_proposition(GaugeParams(n, alpha), opt);
      CAPTURE(alpha);
      CAPTURE(n);
      CHECK(r.passed());
      CHECK(r.off_equator_count == 40);
      CHECK(r.equator_count == opt.equator_samples);
      CHECK(r.max_level_deviation < 1e-10);
      if (alpha == 2) CHECK(r.level_exact);
      if (alpha >= 6) CHECK(r.equator_rank_histogram[static_cast<std::size_t>(2 * n + 1)] == 20);
    }
  }
  opt.equator_samples = 10;
  CHECK_THROWS_AS(verify_rank_proposition(GaugeParams(1, 2), opt), ValidationError);
  opt.equator_samples = 5;
  opt.t = Rational(3, 2);
  const RankReport a = verify_rank_proposition(GaugeParams(1, 6), opt);
  opt.threads = 3;
  const RankReport b = verify_rank_proposition(GaugeParams(1, 6), opt);
  CHECK(a.min_abs_det == b.min_abs_det);
  CHECK(a.max_level_deviation == b.max_level_deviation);
  opt.t = 0;
  CHECK_THROWS_AS(verify_rank_proposition(GaugeParams(1, 4), opt), ValidationError);
}
