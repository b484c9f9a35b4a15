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

// The bordered mixed Hessian
//
//   M(Phi)(x, y) = [[0, grad_y Phi^T], [grad_x Phi, Phi''_xy]]
//
// of Phi(x, y) = Psi(Theta(x, y)), Theta(x, y) = x * y^-1, and its reduction
// to N(Psi)(Theta(x, y)). With P = alpha/2 and A = C_alpha:
//
//   Psi(z)       = |z_h|^alpha + A |z_v|^P
//   grad_h Psi   = alpha |z_h|^(alpha-2) z_h
//   Psi'_v       = A P sign(z_v) |z_v|^(P-1)
//   Psi''_vv     = A P (P-1) |z_v|^(P-2)
//
// All exact paths work on rationals; alpha = 2 is not differentiable in z_v
// at z_v = 0 and is refused there (DomainError).

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "heislat/heisenberg.hpp"
#include "heislat/matrix.hpp"

namespace heislat {

enum class MAProvenance { direct, factorized, submatrix };

struct MAMatrix {
  RatMatrix entries;
  MAProvenance provenance = MAProvenance::direct;
  std::size_t order() const { return entries.rows(); }
};

std::string to_string(MAProvenance p);

template <class T>
BasicHPoint<T> theta(const BasicHPoint<T>& x, const BasicHPoint<T>& y) {
  return group_mul(x, group_inv(y));
}

template <class T>
struct PhiGradient {
  std::vector<T> dx;  // length D, vertical last
  std::vector<T> dy;
};

PhiGradient<Rational> grad_Phi(const RatPoint& x, const RatPoint& y, const GaugeParams& g);
PhiGradient<double> grad_Phi(const RealPoint& x, const RealPoint& y, const GaugeParams& g);

// Full gradient of Psi (vertical entry last).
std::vector<Rational> grad_Psi(const RatPoint& z, const GaugeParams& g);

// (D+1) x (D+1) matrix [[0, grad_h^T, Psi'_v], [grad_h, D^2 Psi + Psi'_v J / 2, 0], [Psi'_v, 0, Psi''_vv]].
MAMatrix n_psi_matrix(const RatPoint& z, const GaugeParams& g);

// Leading D x D block of N(Psi)(z); at z_v = 0 and alpha >= 6 the remaining
// row and column vanish, so rank N = rank of this block.
MAMatrix n_psi_submatrix(const RatPoint& z, const GaugeParams& g);

// D^2 Psi + Psi'_v J / 2 (the 2n x 2n block of N).
RatMatrix horizontal_block(const RatPoint& z, const GaugeParams& g);

enum class MAMode { direct, factorized };

// direct: closed-form second derivatives of Phi in x and y.
// factorized: L * N(Psi)(Theta(x, y)) * R with
//   L = [[1, 0, 0], [0, I, -J y_h / 2], [0, 0, 1]],
//   R = [[1, 0, 0], [0, -I, 0], [0, (J x_h)^T / 2, -1]]   (det L = 1, det R = -1).
MAMatrix monge_ampere_matrix(const RatPoint& x, const RatPoint& y, const GaugeParams& g, MAMode mode);

enum class RankMode { exact, tolerant };
std::size_t matrix_rank(const MAMatrix& m, RankMode mode = RankMode::exact, double eps = 1e-9);

struct StructuredMatrixParams {
  Rational sigma;
  Rational lambda;
  Rational kappa;
  std::vector<Rational> w;  // length 2n
};

// sigma I + lambda w w^T + kappa J
RatMatrix structured_matrix(const StructuredMatrixParams& p);
// Closed-form inverse; ValidationError when sigma^2 + kappa^2 or
// sigma^2 + kappa^2 + sigma lambda |w|^2 vanishes.
RatMatrix structured_inverse(const StructuredMatrixParams& p);
// (sigma I - kappa J) w / (sigma^2 + sigma lambda |w|^2 + kappa^2)
std::vector<Rational> structured_inverse_apply_w(const StructuredMatrixParams& p);

// sigma, lambda, kappa of the horizontal block at z (w = z_h).
StructuredMatrixParams block_parameters(const RatPoint& z, const GaugeParams& g);

// sigma^3 |z_h|^2 / (sigma^2 + sigma lambda |z_h|^2 + kappa^2) + A alpha/(alpha-2) |z_v|^P.
// With kappa = 0 at z_v = 0 this is the equator functional. Requires
// alpha >= 4 and z != 0; then det N(Psi)(z) = -X(z) det diag(block, Psi''_vv).
Rational x_functional(const RatPoint& z, const GaugeParams& g);

struct RankCheckOptions {
  Rational t = 1;
  std::uint64_t samples = 100;           // generic (off-equator) samples
  std::uint64_t equator_samples = 0;     // z_v = 0 exactly
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct RankReport {
  int alpha = 0;
  int n = 0;
  Rational t;
  std::uint64_t samples = 0;

  std::uint64_t off_equator_count = 0;
  std::uint64_t off_equator_nonzero_det = 0;
  double min_abs_det = 0;  // smallest |det M| over off-equator samples
  bool factorization_agrees = true;
  bool x_functional_positive = true;

  std::uint64_t equator_count = 0;
  std::uint64_t equator_rank_full = 0;    // rank M = D + 1
  std::uint64_t equator_rank_d = 0;       // rank M = D
  std::uint64_t equator_subdet_nonzero = 0;
  std::vector<std::uint64_t> equator_rank_histogram;  // index = rank

  bool gradient_nonzero = true;
  double max_level_deviation = 0;  // max | ||z||_alpha / t - 1 |
  bool level_exact = false;        // every sample lies exactly on the level set

  // Off-equator: det != 0. Equator: rank D + 1 for alpha <= 4, D for alpha >= 6.
  bool passed() const;
};

// Samples (x, y) with phi_alpha(x, y) = t: z on the level set, y random
// rational, x = z * y, so Theta(x, y) = z. alpha = 2 and equator points are
// exact rationals; otherwise z is a double rescaling converted exactly to a
// dyadic rational (its level is reported in max_level_deviation).
RankReport verify_rank_proposition(const GaugeParams& g, const RankCheckOptions& options);

}  // namespace heislat
