#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "qfi/errors.hpp"

namespace qfi {

// Dense row-major matrix of doubles. Deliberately minimal: the pipeline only
// needs row/column access, column substitution, and row/column selection.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    for (const auto& r : rows) {
      if (m.rows_ == 0) m.cols_ = r.size();
      if (r.size() != m.cols_) throw ValidationError("matrix rows have unequal lengths");
      m.data_.insert(m.data_.end(), r.begin(), r.end());
      ++m.rows_;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void set_column(std::size_t c, std::span<const double> values) {
    if (values.size() != rows_) throw ValidationError("column length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
  }

  void fill_column(std::size_t c, double value) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = value;
  }

  Matrix select_rows(std::span<const int> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = row(static_cast<std::size_t>(indices[i]));
      for (std::size_t c = 0; c < cols_; ++c) out(i, c) = src[c];
    }
    return out;
  }

  Matrix select_columns(std::span<const int> indices) const {
    Matrix out(rows_, indices.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t i = 0; i < indices.size(); ++i)
        out(r, i) = (*this)(r, static_cast<std::size_t>(indices[i]));
    return out;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace qfi
