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

#include "heislat/measure.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "heislat/parallel.hpp"

namespace heislat {

double bump(double t) {
  const double s = 1.0 - t * t;
  return s > 0 ? std::exp(-1.0 / s) : 0.0;
}

double bump_integral() {
  static const double value = [] {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(bump, -1.0, 1.0);
  }();
  return value;
}

std::vector<double> ThickLattice::center(std::uint64_t index) const {
  const IntPoint b = cells.point_at(index);
  std::vector<double> c(static_cast<std::size_t>(D()));
  for (std::size_t i = 0; i < b.horiz.size(); ++i) c[i] = b.horiz[i].get_d() * spacing[i];
  c.back() = b.vert.get_d() * spacing.back();
  return c;
}

ThickLattice build_thick_lattice(const Rational& q, const Rational& tau, int n) {
  if (n < 1) throw ValidationError("n must be positive");
  if (q < 2) throw ValidationError("the thick lattice needs q >= 2");
  const int D = 2 * n + 1;
  const Rational a_exact(D, D + 1);
  if (tau <= a_exact) throw ValidationError(fmt::format("tau must exceed a = {}", a_exact.get_str()));
  ThickLattice l;
  l.n = n;
  l.q = q;
  l.tau = tau;
  l.a = a_exact.get_d();
  l.cells = counting_lemma_lattice(n, q);
  const double qd = q.get_d();
  const double td = tau.get_d();
  l.spacing.assign(static_cast<std::size_t>(D), std::pow(qd, -l.a));
  l.spacing.back() = std::pow(qd, -2 * l.a);
  l.half_width.assign(static_cast<std::size_t>(D), std::pow(qd, -td));
  l.half_width.back() = std::pow(qd, -l.a - td);
  l.cell_volume = std::pow(qd, -D * td - l.a);
  return l;
}

SmoothedMeasure::SmoothedMeasure(ThickLattice lattice) : lattice_(std::move(lattice)) {
  const int D = lattice_.D();
  weights_.resize(static_cast<std::size_t>(D));
  cumulative_.resize(static_cast<std::size_t>(D));
  double total_weight = 1;
  same_cell_ = 1;
  for (int axis = 0; axis < D; ++axis) {
    const bool vertical = axis == D - 1;
    const std::int64_t bound = vertical ? lattice_.cells.vert_bound : lattice_.cells.horiz_bound;
    const double scale = lattice_.spacing[static_cast<std::size_t>(axis)];
    auto& w = weights_[static_cast<std::size_t>(axis)];
    w.resize(static_cast<std::size_t>(bound) + 1);
    double sum = 0;
    for (std::int64_t b = 0; b <= bound; ++b) {
      w[static_cast<std::size_t>(b)] = bump(static_cast<double>(b) * scale);
      sum += w[static_cast<std::size_t>(b)];
    }
    total_weight *= sum;
    double squares = 0, running = 0;
    auto& cum = cumulative_[static_cast<std::size_t>(axis)];
    cum.resize(w.size());
    for (std::size_t b = 0; b < w.size(); ++b) {
      w[b] /= sum;
      squares += w[b] * w[b];
      running += w[b];
      cum[b] = running;
    }
    cum.back() = 1.0;
    same_cell_ *= squares;
  }
  normalization_ = 1.0 / (total_weight * std::pow(bump_integral(), D) * lattice_.cell_volume);
}

double SmoothedMeasure::density(std::span<const double> x) const {
  const int D = lattice_.D();
  if (static_cast<int>(x.size()) != D) throw ValidationError("point dimension does not match the measure");
  const double i0 = bump_integral();
  double value = 1;
  for (int axis = 0; axis < D; ++axis) {
    const auto ax = static_cast<std::size_t>(axis);
    const double h = lattice_.half_width[ax];
    const double s = lattice_.spacing[ax];
    const auto& w = weights_[ax];
    const auto last = static_cast<std::int64_t>(w.size()) - 1;
    const auto first_b = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((x[ax] - h) / s)));
    const auto last_b = std::min<std::int64_t>(last, static_cast<std::int64_t>(std::floor((x[ax] + h) / s)));
    double axis_value = 0;
    for (std::int64_t b = first_b; b <= last_b; ++b) {
      axis_value += w[static_cast<std::size_t>(b)] * bump((x[ax] - static_cast<double>(b) * s) / h);
    }
    value *= axis_value / (i0 * h);
    if (value == 0) return 0;
  }
  return value;
}

double mu_density(std::span<const double> x, const SmoothedMeasure& m) { return m.density(x); }

std::vector<std::int64_t> SmoothedMeasure::sample_cell(KeyedRng& rng) const {
  std::vector<std::int64_t> b(cumulative_.size());
  for (std::size_t axis = 0; axis < cumulative_.size(); ++axis) {
    const auto& cum = cumulative_[axis];
    const double u = rng.uniform();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    b[axis] = std::min<std::int64_t>(static_cast<std::int64_t>(it - cum.begin()), static_cast<std::int64_t>(cum.size()) - 1);
  }
  return b;
}

std::vector<double> SmoothedMeasure::sample_offset(KeyedRng& rng) const {
  std::vector<double> o(lattice_.half_width.size());
  for (std::size_t axis = 0; axis < o.size(); ++axis) {
    // Rejection from the uniform proposal; the envelope is psi0(0) = 1/e.
    while (true) {
      const double t = rng.uniform(-1.0, 1.0);
      const double s = 1.0 - t * t;
      if (s <= 0) continue;
      if (rng.uniform() < std::exp(1.0 - 1.0 / s)) {
        o[axis] = t * lattice_.half_width[axis];
        break;
      }
    }
  }
  return o;
}

std::vector<double> SmoothedMeasure::sample(KeyedRng& rng) const {
  const std::vector<std::int64_t> b = sample_cell(rng);
  std::vector<double> x = sample_offset(rng);
  for (std::size_t axis = 0; axis < x.size(); ++axis) x[axis] += static_cast<double>(b[axis]) * lattice_.spacing[axis];
  return x;
}

double SmoothedMeasure::offset_density(std::span<const double> o) const {
  const double i0 = bump_integral();
  double value = 1;
  for (std::size_t axis = 0; axis < o.size(); ++axis) {
    const double h = lattice_.half_width[axis];
    value *= bump(o[axis] / h) / (i0 * h);
  }
  return value;
}

std::string to_string(EnergyMethod m) { return m == EnergyMethod::stratified ? "stratified" : "plain"; }

namespace {

// Count, mean and centered second moment; + merges two samples exactly as if
// they had been accumulated together.
struct Moments {
  double count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double v) {
    count += 1;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }

  friend Moments operator+(const Moments& a, const Moments& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    Moments r;
    r.count = a.count + b.count;
    const double d = b.mean - a.mean;
    r.mean = a.mean + d * b.count / r.count;
    r.m2 = a.m2 + b.m2 + d * d * a.count * b.count / r.count;
    return r;
  }

  double variance_of_mean() const { return count > 1 ? m2 / (count - 1) / count : 0.0; }
};

constexpr std::uint64_t kBatch = 4096;
constexpr std::uint64_t kStreamPlain = 20;
constexpr std::uint64_t kStreamSame = 21;
constexpr std::uint64_t kStreamDistinct = 22;

double sphere_area(int D) { return 2.0 * std::pow(std::numbers::pi, D / 2.0) / std::tgamma(D / 2.0); }

double distance(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

template <class Draw>
Moments run_batches(std::uint64_t samples, std::uint64_t seed, std::uint64_t stream, unsigned threads, Draw&& draw) {
  const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
  std::vector<Moments> parts(batches);
  parallel_for(batches, threads, [&](std::size_t k) {
    KeyedRng rng(seed, stream, k);
    const std::uint64_t count = std::min<std::uint64_t>(kBatch, samples - k * kBatch);
    Moments m;
    for (std::uint64_t i = 0; i < count; ++i) m.add(draw(rng));
    parts[k] = m;
  });
  return pairwise_sum(parts);
}

}  // namespace

EnergyEstimate energy_integral_mc(const SmoothedMeasure& m, double t, std::uint64_t samples, std::uint64_t seed,
                                  unsigned threads, EnergyMethod method) {
  const int D = m.D();
  if (!(t >= 0) || !(t < D)) throw ValidationError(fmt::format("energy exponent t must satisfy 0 <= t < D = {}", D));
  if (samples < kMinEnergySamples) {
    throw ValidationError(fmt::format("energy estimation needs at least {} samples", kMinEnergySamples));
  }
  EnergyEstimate est;
  est.t = t;
  est.samples = samples;
  est.seed = seed;
  est.method = method;
  if (t == 0) {
    est.value = 1;
    return est;
  }

  const ThickLattice& l = m.lattice();
  auto pair_value = [&](const std::vector<double>& x, const std::vector<double>& y) {
    return std::pow(distance(x, y), -t);
  };

  if (method == EnergyMethod::plain) {
    const Moments mo = run_batches(samples, seed, kStreamPlain, threads, [&](KeyedRng& rng) {
      while (true) {
        const std::vector<double> x = m.sample(rng), y = m.sample(rng);
        if (distance(x, y) > 0) return pair_value(x, y);
      }
    });
    est.value = mo.mean;
    est.std_error = std::sqrt(mo.variance_of_mean());
    return est;
  }

  const double p_same = m.same_cell_probability();
  const bool single_cell = p_same >= 1.0;
  const std::uint64_t n_same = single_cell ? samples : samples / 2;
  const std::uint64_t n_distinct = samples - n_same;
  const double e = D - t;
  const double area = sphere_area(D);
  const auto& h = l.half_width;

  const Moments same = run_batches(n_same, seed, kStreamSame, threads, [&](KeyedRng& rng) {
    const std::vector<double> o = m.sample_offset(rng);
    std::vector<double> dir(static_cast<std::size_t>(D));
    double norm = 0;
    while (norm == 0) {
      norm = 0;
      for (auto& c : dir) {
        c = rng.normal();
        norm += c * c;
      }
      norm = std::sqrt(norm);
    }
    // Exit distance of the ray o + r dir from the support box prod [-h_i, h_i].
    double R = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dir.size(); ++i) {
      dir[i] /= norm;
      if (dir[i] > 0) R = std::min(R, (h[i] - o[i]) / dir[i]);
      if (dir[i] < 0) R = std::min(R, (-h[i] - o[i]) / dir[i]);
    }
    // Radial density proportional to r^(e-1) on [0, R].
    const double r = R * std::pow(rng.uniform(), 1.0 / e);
    std::vector<double> p(o);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += r * dir[i];
    return area * std::pow(R, e) / e * m.offset_density(p);
  });

  Moments distinct;
  if (n_distinct > 0) {
    distinct = run_batches(n_distinct, seed, kStreamDistinct, threads, [&](KeyedRng& rng) {
      while (true) {
        std::vector<std::int64_t> b1 = m.sample_cell(rng), b2 = m.sample_cell(rng);
        if (b1 == b2) continue;
        std::vector<double> x = m.sample_offset(rng), y = m.sample_offset(rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
          x[i] += static_cast<double>(b1[i]) * l.spacing[i];
          y[i] += static_cast<double>(b2[i]) * l.spacing[i];
        }
        if (distance(x, y) > 0) return pair_value(x, y);
      }
    });
  }

  const double p_distinct = single_cell ? 0.0 : 1.0 - p_same;
  est.value = (single_cell ? 1.0 : p_same) * same.mean + p_distinct * distinct.mean;
  const double ps = single_cell ? 1.0 : p_same;
  est.std_error = std::sqrt(ps * ps * same.variance_of_mean() + p_distinct * p_distinct * distinct.variance_of_mean());
  return est;
}

// ---------------------------------------------------------------------------
// All-pairs evaluation.

namespace {

// Autocorrelation of the normalized unit bump, g(v) = int phi(s) phi(s - v) ds,
// tabulated on [0, 2] and interpolated by a cubic B-spline.
class BumpAutocorrelation {
 public:
  BumpAutocorrelation() {
    const double i0 = bump_integral();
    std::vector<double> values(kPoints);
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (std::size_t k = 0; k < kPoints; ++k) {
      const double v = kStep * static_cast<double>(k);
      if (v >= 2.0) {
        values[k] = 0;
        continue;
      }
      auto f = [v](double s) { return bump(s) * bump(s - v); };
      values[k] = integrator.integrate(f, v - 1.0, 1.0) / (i0 * i0);
    }
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), 0.0, kStep, 0.0, 0.0);
  }

  double operator()(double v) const {
    v = std::fabs(v);
    if (v >= 2.0) return 0.0;
    return std::max(0.0, (*spline_)(v));
  }

 private:
  static constexpr std::size_t kPoints = 4001;
  static constexpr double kStep = 2.0 / (kPoints - 1);
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

const BumpAutocorrelation& autocorrelation() {
  static const BumpAutocorrelation g;
  return g;
}

// Gauss-Legendre rule mapped to [0, 1].
template <std::size_t N>
std::pair<std::vector<double>, std::vector<double>> unit_rule() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  std::vector<double> x, w;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (abscissa[i] == 0) {
      x.push_back(0.5);
      w.push_back(weights[i] / 2);
      continue;
    }
    x.push_back(0.5 - abscissa[i] / 2);
    w.push_back(weights[i] / 2);
    x.push_back(0.5 + abscissa[i] / 2);
    w.push_back(weights[i] / 2);
  }
  return {x, w};
}

struct PairKernel {
  std::vector<double> h;  // half-widths per axis
  double t;
  const BumpAutocorrelation& g = autocorrelation();
  std::pair<std::vector<double>, std::vector<double>> coarse = unit_rule<20>();
  std::pair<std::vector<double>, std::vector<double>> fine = unit_rule<24>();

  // |dc + H v|^-t prod g(v_i)
  double integrand(const std::vector<double>& dc, const std::array<double, 3>& v) const {
    double r2 = 0, weight = 1;
    for (std::size_t i = 0; i < 3; ++i) {
      const double u = dc[i] + h[i] * v[i];
      r2 += u * u;
      weight *= g(v[i]);
    }
    if (weight == 0) return 0;
    return weight * std::pow(r2, -t / 2);
  }

  // Box with corner c and signed extents L (v = c + L w, w in [0, 1]^3).
  double tensor(const std::vector<double>& dc, const std::array<double, 3>& c, const std::array<double, 3>& L) const {
    const auto& [x, w] = coarse;
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t k = 0; k < x.size(); ++k) {
          const std::array<double, 3> v{c[0] + L[0] * x[i], c[1] + L[1] * x[j], c[2] + L[2] * x[k]};
          sum += w[i] * w[j] * w[k] * integrand(dc, v);
        }
    return sum * std::fabs(L[0] * L[1] * L[2]);
  }

  // Same box, split into three pyramids by the largest w coordinate, with the
  // radial variable sigma = s^e absorbing a singularity at the corner.
  double duffy(const std::vector<double>& dc, const std::array<double, 3>& c, const std::array<double, 3>& L) const {
    const auto& [x, w] = fine;
    const double e = 3.0 - t;
    double sum = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t p = (k + 1) % 3, q = (k + 2) % 3;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = std::pow(x[i], 1.0 / e);
        for (std::size_t j = 0; j < x.size(); ++j)
          for (std::size_t m = 0; m < x.size(); ++m) {
            std::array<double, 3> ww{};
            ww[k] = s;
            ww[p] = s * x[j];
            ww[q] = s * x[m];
            const std::array<double, 3> v{c[0] + L[0] * ww[0], c[1] + L[1] * ww[1], c[2] + L[2] * ww[2]};
            sum += w[i] * w[j] * w[m] * std::pow(s, t) * integrand(dc, v);
          }
      }
    }
    return sum / e * std::fabs(L[0] * L[1] * L[2]);
  }

  // int |dc + H v|^-t prod g(v_i) dv over [-2, 2]^3.
  double operator()(const std::vector<double>& dc) const {
    std::array<double, 3> split{};
    for (std::size_t i = 0; i < 3; ++i) split[i] = std::clamp(-dc[i] / h[i], -2.0, 2.0);
    double total = 0;
    for (int mask = 0; mask < 8; ++mask) {
      std::array<double, 3> L{};
      bool empty = false;
      double dist2 = 0, diam2 = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        const bool up = (mask >> i) & 1;
        L[i] = up ? 2.0 - split[i] : -2.0 - split[i];
        if (L[i] == 0) empty = true;
        const double near = dc[i] + h[i] * split[i];
        dist2 += near * near;
        diam2 += h[i] * h[i] * L[i] * L[i];
      }
      if (empty) continue;
      total += dist2 > diam2 ? tensor(dc, split, L) : duffy(dc, split, L);
    }
    return total;
  }
};

}  // namespace

double energy_integral_all_pairs(const SmoothedMeasure& m, double t) {
  const ThickLattice& l = m.lattice();
  if (l.n != 1) throw ValidationError("the all-pairs energy is implemented for n = 1 only");
  if (!(t >= 0) || !(t < 3)) throw ValidationError("energy exponent t must satisfy 0 <= t < D = 3");
  if (t == 0) return 1;

  // Weight autocorrelation per axis, indexed by db + (size - 1).
  std::vector<std::vector<double>> corr(3);
  std::vector<std::vector<std::int64_t>> offsets(3);
  std::uint64_t combos = 1;
  for (int axis = 0; axis < 3; ++axis) {
    const auto& w = m.axis_weights(axis);
    const auto size = static_cast<std::int64_t>(w.size());
    for (std::int64_t d = -(size - 1); d <= size - 1; ++d) {
      double c = 0;
      for (std::int64_t b = std::max<std::int64_t>(0, d); b < size && b - d < size; ++b) {
        c += w[static_cast<std::size_t>(b)] * w[static_cast<std::size_t>(b - d)];
      }
      if (c > 0) {
        corr[static_cast<std::size_t>(axis)].push_back(c);
        offsets[static_cast<std::size_t>(axis)].push_back(d);
      }
    }
    combos *= corr[static_cast<std::size_t>(axis)].size();
  }
  if (combos > kAllPairsOffsetLimit) {
    throw ValidationError(fmt::format("all-pairs energy would need {} cell offsets (limit {})", combos,
                                      kAllPairsOffsetLimit));
  }

  const PairKernel kernel{l.half_width, t};
  std::vector<double> terms;
  terms.reserve(combos);
  std::vector<double> dc(3);
  for (std::size_t i = 0; i < corr[0].size(); ++i)
    for (std::size_t j = 0; j < corr[1].size(); ++j)
      for (std::size_t k = 0; k < corr[2].size(); ++k) {
        dc[0] = static_cast<double>(offsets[0][i]) * l.spacing[0];
        dc[1] = static_cast<double>(offsets[1][j]) * l.spacing[1];
        dc[2] = static_cast<double>(offsets[2][k]) * l.spacing[2];
        terms.push_back(corr[0][i] * corr[1][j] * corr[2][k] * kernel(dc));
      }
  return pairwise_sum(terms);
}

}  // namespace heislat
