// Copyright 2026 The urbanrest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef URBANREST_MATRIX_HPP_
#define URBANREST_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace urbanrest {

class Rng;

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> Row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> Row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void Fill(double v);
  bool AllFinite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// All products throw on shape mismatch.
DenseMatrix MatMul(const DenseMatrix& a, const DenseMatrix& b);         // a b
DenseMatrix MatMulTransA(const DenseMatrix& a, const DenseMatrix& b);   // a^T b
DenseMatrix MatMulTransB(const DenseMatrix& a, const DenseMatrix& b);   // a b^T
DenseMatrix Transpose(const DenseMatrix& a);
void AddInPlace(DenseMatrix& dst, const DenseMatrix& src, double scale = 1.0);
// Adds a 1 x cols bias row to every row.
void AddRowBroadcast(DenseMatrix& dst, const DenseMatrix& bias);
// Column sums as a 1 x cols matrix.
DenseMatrix ColumnSums(const DenseMatrix& a);
void ReluInPlace(DenseMatrix& a);
// Keeps columns in [begin, end) for each (begin, end) pair, concatenated.
DenseMatrix SelectColumns(const DenseMatrix& a,
                          std::span<const std::pair<std::size_t, std::size_t>> ranges);

// U(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
DenseMatrix GlorotUniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Compressed sparse row matrix (square, n x n).
class SparseMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };
  SparseMatrix() = default;
  // Entries may arrive in any order; duplicates are summed.
  SparseMatrix(std::size_t n, std::vector<Entry> entries);

  std::size_t n() const { return n_; }
  std::size_t nnz() const { return cols_.size(); }

  // this * dense
  DenseMatrix Multiply(const DenseMatrix& dense) const;
  // this^T * dense
  DenseMatrix MultiplyTransposed(const DenseMatrix& dense) const;
  DenseMatrix ToDense() const;

  std::span<const std::size_t> RowCols(std::size_t r) const {
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> RowValues(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

}  // namespace urbanrest

#endif  // URBANREST_MATRIX_HPP_
