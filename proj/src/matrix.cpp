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

#include "heislat/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace heislat {

namespace {

// Integer matrix with row i scaled by scale[i].
struct Cleared {
  std::vector<std::vector<Integer>> rows;
  Integer scale = 1;  // product of the row multipliers
};

Cleared clear_denominators(const RatMatrix& m) {
  Cleared c;
  c.rows.assign(m.rows(), std::vector<Integer>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Integer l = 1;
    for (std::size_t j = 0; j < m.cols(); ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < m.cols(); ++j) c.rows[i][j] = m(i, j).get_num() * (l / m(i, j).get_den());
    c.scale *= l;
  }
  return c;
}

// Bareiss elimination in place. Returns the rank; `sign` tracks row swaps.
// When the matrix is square and nonsingular the last pivot is its determinant.
std::size_t bareiss(std::vector<std::vector<Integer>>& a, int& sign) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  sign = 1;
  Integer prev = 1;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank) {
      std::swap(a[pivot], a[rank]);
      sign = -sign;
    }
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j) {
        a[i][j] = a[i][j] * a[rank][col] - a[i][col] * a[rank][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      a[i][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return rank;
}

}  // namespace

Rational determinant(const RatMatrix& m) {
  if (!m.square()) throw ValidationError("determinant of a non-square matrix");
  if (m.rows() == 0) return 1;
  Cleared c = clear_denominators(m);
  int sign = 1;
  const std::size_t n = m.rows();
  // Bareiss without column skipping: a zero column pivot means det = 0.
  const std::size_t rank = bareiss(c.rows, sign);
  if (rank < n) return 0;
  Rational det(c.rows[n - 1][n - 1] * sign, c.scale);
  det.canonicalize();
  return det;
}

std::size_t exact_rank(const RatMatrix& m) {
  Cleared c = clear_denominators(m);
  int sign = 1;
  return bareiss(c.rows, sign);
}

std::size_t tolerant_rank(const RealMatrix& m, double eps) {
  std::vector<std::vector<double>> a(m.rows(), std::vector<double>(m.cols()));
  double scale = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      a[i][j] = m(i, j);
      scale = std::max(scale, std::fabs(a[i][j]));
    }
  if (scale == 0) return 0;
  const double threshold = eps * scale;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t pivot = rank;
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      if (std::fabs(a[i][col]) > std::fabs(a[pivot][col])) pivot = i;
    }
    if (std::fabs(a[pivot][col]) <= threshold) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      const double f = a[i][col] / a[rank][col];
      for (std::size_t j = col; j < m.cols(); ++j) a[i][j] -= f * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

RealMatrix to_real(const RatMatrix& m) {
  RealMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).get_d();
  return r;
}

std::string to_string(const RatMatrix& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += i == 0 ? "[" : ", [";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j != 0) out += ", ";
      out += m(i, j).get_str();
    }
    out += "]";
  }
  return out + "]";
}

}  // namespace heislat
