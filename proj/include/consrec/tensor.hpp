#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "consrec/error.hpp"

namespace consrec {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("Matrix: data length does not match shape");
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw ShapeError("Matrix::from_rows: ragged rows");
      std::copy(row.begin(), row.end(), m.row(r++).begin());
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

// Compressed sparse row matrix. Column indices strictly increase within a row.
class SparseMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Builds from unordered triplets. Duplicates are summed; zeros are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix s(rows, cols);
    for (std::size_t k = 0; k < entries.size();) {
      const auto& e = entries[k];
      if (e.row >= rows || e.col >= cols) throw ShapeError("SparseMatrix: entry out of range");
      double v = 0.0;
      std::size_t j = k;
      for (; j < entries.size() && entries[j].row == e.row && entries[j].col == e.col; ++j) {
        v += entries[j].value;
      }
      if (!std::isfinite(v)) throw NumericError("SparseMatrix: non-finite entry");
      if (v != 0.0) {
        s.col_idx_.push_back(e.col);
        s.values_.push_back(v);
        ++s.row_ptr_[e.row + 1];
      }
      k = j;
    }
    for (std::size_t r = 0; r < rows; ++r) s.row_ptr_[r + 1] += s.row_ptr_[r];
    return s;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const noexcept {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  // Returns 0 for structurally absent entries.
  double at(std::size_t r, std::size_t c) const noexcept {
    auto cols = row_cols(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
  }

  Matrix to_dense() const {
    Matrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      auto cols = row_cols(r);
      auto vals = row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
    }
    return d;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// A list of index sets over the rows of some source matrix; the pooling
// operator behind segment_mean. Segment s covers indices[offsets[s]..offsets[s+1]).
class Segments {
 public:
  Segments() : offsets_(1, 0) {}

  static Segments from_lists(std::size_t source_rows,
                             const std::vector<std::vector<std::size_t>>& lists) {
    Segments s;
    s.source_rows_ = source_rows;
    for (const auto& l : lists) {
      for (auto i : l) {
        if (i >= source_rows) throw ShapeError("Segments: index out of range");
        s.indices_.push_back(i);
      }
      s.offsets_.push_back(s.indices_.size());
    }
    return s;
  }

  std::size_t count() const noexcept { return offsets_.size() - 1; }
  std::size_t source_rows() const noexcept { return source_rows_; }
  std::span<const std::size_t> segment(std::size_t s) const noexcept {
    return {indices_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
  }

 private:
  std::size_t source_rows_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
};

namespace kernels {

// out += a * b
inline void gemm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* br = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// out += a^T * b
inline void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* br = b.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      double* o = out.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// out += a * b^T
inline void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.row(i).data();
    double* o = out.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      o[j] += s;
    }
  }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  Matrix out(a.rows(), b.cols());
  gemm_acc(a, b, out);
  return out;
}

// out += s * b
inline void spmm_acc(const SparseMatrix& s, const Matrix& b, Matrix& out) {
  const std::size_t m = b.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto cols = s.row_cols(r);
    auto vals = s.row_values(r);
    double* o = out.row(r).data();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double* br = b.row(cols[k]).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += vals[k] * br[j];
    }
  }
}

// out += s^T * g
inline void spmm_tn_acc(const SparseMatrix& s, const Matrix& g, Matrix& out) {
  const std::size_t m = g.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto cols = s.row_cols(r);
    auto vals = s.row_values(r);
    const double* gr = g.row(r).data();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double* o = out.row(cols[k]).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += vals[k] * gr[j];
    }
  }
}

}  // namespace kernels

}  // namespace consrec
