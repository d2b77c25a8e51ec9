#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace albird {

/// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;
using LabelMatrix = Matrix<std::uint8_t>;

/// A subset of rows of a float matrix, addressed by position 0..size()-1.
class RowsView {
 public:
  RowsView() = default;
  RowsView(const MatrixF& base, std::span<const std::size_t> rows) : base_(&base), rows_(rows) {}

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return base_ ? base_->cols() : 0; }
  std::span<const float> row(std::size_t i) const { return base_->row(rows_[i]); }
  std::size_t source_index(std::size_t i) const { return rows_[i]; }

 private:
  const MatrixF* base_ = nullptr;
  std::span<const std::size_t> rows_;
};

template <class RangeA, class RangeB>
double dot(const RangeA& a, const RangeB& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <class RangeA, class RangeB>
double squared_distance(const RangeA& a, const RangeB& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace albird
