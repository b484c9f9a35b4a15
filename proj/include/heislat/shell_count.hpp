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

// Lattice points in shells { v : |phi_alpha(u, v) - Q| <= delta }.
//
// Membership is decided on the integer S = 2^alpha * phi_alpha(u, v)^alpha
// (see phi_power_scaled): the shell becomes an integer window
// ceil(2^alpha (Q - delta)^alpha) <= S <= floor(2^alpha (Q + delta)^alpha),
// so every count here is exact.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "heislat/exact.hpp"
#include "heislat/heisenberg.hpp"

namespace heislat {

// Box of integer points b in Z^D with |b_i| <= horiz_bound (i < D) and
// |b_D| <= vert_bound, or 0 <= b_i <= bound when unsigned.
struct LatticeSpec {
  int n = 1;
  std::int64_t horiz_bound = 0;
  std::int64_t vert_bound = 0;
  bool is_signed = true;

  std::int64_t horiz_min() const { return is_signed ? -horiz_bound : 0; }
  std::int64_t vert_min() const { return is_signed ? -vert_bound : 0; }
  std::uint64_t horiz_width() const { return static_cast<std::uint64_t>(horiz_bound - horiz_min()) + 1; }
  std::uint64_t vert_width() const { return static_cast<std::uint64_t>(vert_bound - vert_min()) + 1; }

  Integer cardinality() const;
  bool contains(const IntPoint& p) const;
  // Mixed-radix enumeration; the vertical coordinate varies fastest.
  IntPoint point_at(std::uint64_t index) const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

// Signed truncation |b_i| <= floor(cQ), |b_D| <= floor(cQ^2); unsigned
// truncation 0 <= b_i <= ceil(cQ), 0 <= b_D <= ceil(cQ^2).
LatticeSpec truncated_lattice(int n, const Rational& c, const Rational& Q, bool is_signed = true);

// Unsigned box with bounds ceil(q^a), ceil(q^(2a)), a = D/(D+1).
LatticeSpec counting_lemma_lattice(int n, const Rational& q);

// Closed integer window on S = 2^alpha * Phi.
struct ShellWindow {
  Integer lo;
  Integer hi;
  bool contains(const Integer& s) const { return lo <= s && s <= hi; }
  friend bool operator==(const ShellWindow&, const ShellWindow&) = default;
};

ShellWindow shell_window(const GaugeParams& g, const Rational& Q, const Rational& delta);

enum class QueryMode { fixed_radius, counting_lemma };

class ShellQuery {
 public:
  static ShellQuery fixed_radius(const GaugeParams& g, const Rational& Q, const Rational& delta,
                                 const Rational& c = Rational(1), bool is_signed = true);
  // Q = q^a, delta = q^(a - tau) with a = D/(D+1), over counting_lemma_lattice.
  static ShellQuery counting_lemma(const GaugeParams& g, const Rational& q, const Rational& tau);

  const GaugeParams& gauge() const { return gauge_; }
  const LatticeSpec& lattice() const { return lattice_; }
  const ShellWindow& window() const { return window_; }
  QueryMode mode() const { return mode_; }

  double radius() const { return radius_; }
  double thickness() const { return thickness_; }
  // Exact radius/thickness when available (always in fixed-radius mode).
  const std::optional<Rational>& exact_radius() const { return exact_radius_; }
  const std::optional<Rational>& exact_thickness() const { return exact_thickness_; }
  // Counting-lemma parameters (zero in fixed-radius mode).
  double q() const { return q_; }
  double tau() const { return tau_; }

  // Q^-(2n+2) in fixed-radius mode, q^-D in counting-lemma mode.
  const Rational& normalization() const { return normalization_; }

 private:
  ShellQuery(GaugeParams g) : gauge_(std::move(g)) {}

  GaugeParams gauge_;
  LatticeSpec lattice_;
  ShellWindow window_;
  QueryMode mode_ = QueryMode::fixed_radius;
  double radius_ = 0;
  double thickness_ = 0;
  std::optional<Rational> exact_radius_;
  std::optional<Rational> exact_thickness_;
  double q_ = 0;
  double tau_ = 0;
  Rational normalization_;
};

inline constexpr std::uint64_t kNaiveLatticeLimit = 100'000'000;

// Brute force over the whole lattice with phi_power_scaled. Oracle only.
Integer naive_shell_count(const IntPoint& u, const ShellQuery& query);

// Slice counter: loops over horizontal v and counts the admissible vertical
// coordinates in closed form. Same value as naive_shell_count.
Integer fast_shell_count(const IntPoint& u, const ShellQuery& query);

// #{ v in lattice : window.lo <= 2^alpha Phi(u, v) <= window.hi }
Integer count_in_window(const IntPoint& u, const GaugeParams& g, const LatticeSpec& lattice,
                        const ShellWindow& window);

struct Sampling {
  enum class Kind { exhaustive, random };
  Kind kind = Kind::exhaustive;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static Sampling exhaustive() { return {}; }
  static Sampling random(std::uint64_t samples, std::uint64_t seed) { return {Kind::random, samples, seed}; }
};

inline constexpr std::uint64_t kMinRandomCenters = 30;

struct ShellCount {
  Integer raw_count;
  double normalized = 0;
  std::uint64_t centers_used = 0;
  Sampling sampling;
  double std_error = 0;
};

// Exhaustive: normalization * sum_u fast_shell_count(u).
// Random: |L| * mean over N uniformly drawn centers (with replacement),
// times the normalization, with standard error from the sample deviation.
// Center i is drawn from a stream keyed by (seed, i), so the result does not
// depend on `threads`. N >= |L| falls back to the exhaustive sum.
ShellCount averaged_shell_count(const ShellQuery& query, const Sampling& sampling, unsigned threads = 1);

// max{Q^2n, Q^(2n+1) delta} for alpha in {2, 4}; max{Q^(2n+2/D), Q^(2n+1) delta}
// for alpha >= 6; q^(D - tau) in counting-lemma mode.
double theorem_bound(const ShellQuery& query);
double theorem_bound(int n, int alpha, double Q, double delta);

struct ScalingFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // root mean square of the log-space residuals
};

// Least squares of log(count) against log(Q).
ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> series);

struct BallErrorTerm {
  Integer lattice_count;  // #{ m in Z^D : ||m||_alpha <= Q }
  double volume = 0;      // Q^(2n+2) |B_1|
  double error = 0;       // |volume - lattice_count|
};

// |B_1^alpha| by radial quadrature (relative tolerance 1e-9).
double unit_ball_volume(const GaugeParams& g);

BallErrorTerm fixed_center_error_term(const GaugeParams& g, const Rational& Q);

}  // namespace heislat
