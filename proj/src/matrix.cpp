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

#include "urbanrest/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "urbanrest/error.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

void RequireShape(bool ok, const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!ok) {
    ThrowNumeric(std::string("shape mismatch in ") + op + ": (" + std::to_string(a.rows()) +
                 "x" + std::to_string(a.cols()) + ") vs (" + std::to_string(b.rows()) + "x" +
                 std::to_string(b.cols()) + ")");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) ThrowUsage("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::Identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMatrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix MatMul(const DenseMatrix& a, const DenseMatrix& b) {
  RequireShape(a.cols() == b.rows(), "MatMul", a, b);
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.Row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.Row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix MatMulTransA(const DenseMatrix& a, const DenseMatrix& b) {
  RequireShape(a.rows() == b.rows(), "MatMulTransA", a, b);
  DenseMatrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* brow = b.Row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* o = out.Row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aki * brow[j];
    }
  }
  return out;
}

DenseMatrix MatMulTransB(const DenseMatrix& a, const DenseMatrix& b) {
  RequireShape(a.cols() == b.cols(), "MatMulTransB", a, b);
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.Row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.Row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

DenseMatrix Transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

void AddInPlace(DenseMatrix& dst, const DenseMatrix& src, double scale) {
  RequireShape(dst.rows() == src.rows() && dst.cols() == src.cols(), "AddInPlace", dst, src);
  auto& d = dst.data();
  const auto& s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void AddRowBroadcast(DenseMatrix& dst, const DenseMatrix& bias) {
  RequireShape(bias.rows() == 1 && bias.cols() == dst.cols(), "AddRowBroadcast", dst, bias);
  for (std::size_t i = 0; i < dst.rows(); ++i) {
    auto row = dst.Row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias(0, j);
  }
}

DenseMatrix ColumnSums(const DenseMatrix& a) {
  DenseMatrix s(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) s(0, j) += a(i, j);
  }
  return s;
}

void ReluInPlace(DenseMatrix& a) {
  for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
}

DenseMatrix SelectColumns(const DenseMatrix& a,
                          std::span<const std::pair<std::size_t, std::size_t>> ranges) {
  std::size_t width = 0;
  for (const auto& [b, e] : ranges) {
    if (b > e || e > a.cols()) ThrowUsage("column range out of bounds");
    width += e - b;
  }
  DenseMatrix out(a.rows(), width);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::size_t c = 0;
    for (const auto& [b, e] : ranges) {
      for (std::size_t j = b; j < e; ++j) out(i, c++) = a(i, j);
    }
  }
  return out;
}

DenseMatrix GlorotUniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  DenseMatrix w(fan_in, fan_out);
  for (double& v : w.data()) v = rng.Uniform(-r, r);
  return w;
}

SparseMatrix::SparseMatrix(std::size_t n, std::vector<Entry> entries) : n_(n) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.row >= n || e.col >= n) ThrowUsage("sparse entry out of range");
    if (!cols_.empty() && i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
      values_.back() += e.value;
      continue;
    }
    cols_.push_back(e.col);
    values_.push_back(e.value);
    ++row_ptr_[e.row + 1];
  }
  for (std::size_t r = 0; r < n; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

DenseMatrix SparseMatrix::Multiply(const DenseMatrix& dense) const {
  if (dense.rows() != n_) ThrowNumeric("sparse multiply: row count mismatch");
  DenseMatrix out(n_, dense.cols());
  for (std::size_t r = 0; r < n_; ++r) {
    double* o = out.Row(r).data();
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = values_[k];
      const double* src = dense.Row(cols_[k]).data();
      for (std::size_t j = 0; j < dense.cols(); ++j) o[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix SparseMatrix::MultiplyTransposed(const DenseMatrix& dense) const {
  if (dense.rows() != n_) ThrowNumeric("sparse multiply: row count mismatch");
  DenseMatrix out(n_, dense.cols());
  for (std::size_t r = 0; r < n_; ++r) {
    const double* src = dense.Row(r).data();
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = values_[k];
      double* o = out.Row(cols_[k]).data();
      for (std::size_t j = 0; j < dense.cols(); ++j) o[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix SparseMatrix::ToDense() const {
  DenseMatrix d(n_, n_);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, cols_[k]) += values_[k];
  }
  return d;
}

}  // namespace urbanrest
