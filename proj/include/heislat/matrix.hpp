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

// Small dense matrices with exact determinant and rank.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "heislat/exact.hpp"

namespace heislat {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // Leading k x k block.
  Matrix leading(std::size_t k) const {
    Matrix b(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) b(i, j) = (*this)(i, j);
    return b;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw ValidationError("matrix product dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
    if (a.cols_ != v.size()) throw ValidationError("matrix-vector dimension mismatch");
    std::vector<T> out(a.rows_, T(0));
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RatMatrix = Matrix<Rational>;
using RealMatrix = Matrix<double>;

// Standard symplectic J = [[0, I_n], [-I_n, 0]] of order 2n.
template <class T>
Matrix<T> symplectic_matrix(std::size_t n) {
  Matrix<T> j(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    j(i, n + i) = T(1);
    j(n + i, i) = T(-1);
  }
  return j;
}

// J v for v of length 2n.
template <class T>
std::vector<T> apply_symplectic(const std::vector<T>& v) {
  const std::size_t n = v.size() / 2;
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v[n + i];
    out[n + i] = -v[i];
  }
  return out;
}

// Fraction-free (Bareiss) elimination after clearing each row's denominators.
Rational determinant(const RatMatrix& m);
std::size_t exact_rank(const RatMatrix& m);

// Partial-pivoting elimination; pivots below eps * max|entry| count as zero.
std::size_t tolerant_rank(const RealMatrix& m, double eps = 1e-9);

RealMatrix to_real(const RatMatrix& m);
std::string to_string(const RatMatrix& m);

}  // namespace heislat
