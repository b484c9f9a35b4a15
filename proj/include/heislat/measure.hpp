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

// Thickened scaled lattice and the smoothed probability measure on it.
//
// Cells sit at (b_1/q^a, ..., b_2n/q^a, b_D/q^(2a)) for b in the unsigned box
// L_{D,q^a}, a = D/(D+1). Each carries the bump
//   prod_i psi0(b_i/s_i) psi0((x_i - c_i)/h_i),   psi0(t) = exp(-1/(1-t^2)) on |t| < 1,
// with s = (q^a, ..., q^(2a)) and half-widths h = (q^-tau, ..., q^(-a-tau)).
// The density factors over coordinates, which is what the samplers exploit.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heislat/exact.hpp"
#include "heislat/rng.hpp"
#include "heislat/shell_count.hpp"

namespace heislat {

double bump(double t);
// int_{-1}^{1} psi0
double bump_integral();

struct ThickLattice {
  int n = 1;
  Rational q;
  Rational tau;
  double a = 0;
  LatticeSpec cells;                  // unsigned L_{D,q^a}
  std::vector<double> spacing;        // q^-a horizontally, q^-2a vertically (per axis)
  std::vector<double> half_width;     // q^-tau horizontally, q^(-a-tau) vertically
  double cell_volume = 0;             // V_R = q^(-D tau - a)

  int D() const { return 2 * n + 1; }
  Integer cell_count() const { return cells.cardinality(); }
  std::vector<double> center(std::uint64_t index) const;
};

// q >= 2, tau > a.
ThickLattice build_thick_lattice(const Rational& q, const Rational& tau, int n);

class SmoothedMeasure {
 public:
  explicit SmoothedMeasure(ThickLattice lattice);

  const ThickLattice& lattice() const { return lattice_; }
  int D() const { return lattice_.D(); }

  // Product of the per-axis densities; integrates to 1.
  double density(std::span<const double> x) const;
  // 1 / (sum_b prod_i psi0(b_i/s_i) * I0^D * V_R)
  double normalization() const { return normalization_; }

  // Probability of cell index b along an axis (vertical axis last).
  const std::vector<double>& axis_weights(int axis) const { return weights_[static_cast<std::size_t>(axis)]; }
  // P(two independent draws land in the same cell).
  double same_cell_probability() const { return same_cell_; }

  // Coordinates of one cell index per axis.
  std::vector<std::int64_t> sample_cell(KeyedRng& rng) const;
  // Offset within a cell, distributed as the product bump.
  std::vector<double> sample_offset(KeyedRng& rng) const;
  std::vector<double> sample(KeyedRng& rng) const;

  // Density of the cell-relative offset (product bump of half-widths h).
  double offset_density(std::span<const double> o) const;

 private:
  ThickLattice lattice_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> cumulative_;
  double normalization_ = 0;
  double same_cell_ = 0;
};

double mu_density(std::span<const double> x, const SmoothedMeasure& m);

enum class EnergyMethod { stratified, plain };

struct EnergyEstimate {
  double t = 0;
  double value = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  EnergyMethod method = EnergyMethod::stratified;
};

std::string to_string(EnergyMethod m);

inline constexpr std::uint64_t kMinEnergySamples = 1000;

// Monte-Carlo estimate of iint |x - y|^-t dmu(x) dmu(y), 0 <= t < D.
//
// plain: N independent pairs from mu x mu.
// stratified: splits on whether both points use the same cell. The
// same-cell part integrates y in polar coordinates around x with radial
// density r^(D-1-t), which removes the singularity; the other part samples
// distinct cell pairs. Either way batches are keyed by (seed, stratum, batch)
// and reduced in a fixed order, so `threads` never changes the result.
EnergyEstimate energy_integral_mc(const SmoothedMeasure& m, double t, std::uint64_t samples, std::uint64_t seed,
                                  unsigned threads = 1, EnergyMethod method = EnergyMethod::stratified);

inline constexpr std::uint64_t kAllPairsOffsetLimit = 20000;

// Deterministic value of the same integral: sums, over cell offsets db, the
// weight autocorrelation times the integral of |dc + u|^-t against the
// autocorrelation of the bump. n = 1 only, with at most kAllPairsOffsetLimit
// distinct offsets.
double energy_integral_all_pairs(const SmoothedMeasure& m, double t);

}  // namespace heislat
