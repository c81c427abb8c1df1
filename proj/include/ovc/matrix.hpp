#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "ovc/error.hpp"

namespace ovc {

/// Dense row-major matrix over a ring element type. T must be default
/// constructible (the default value acts as an adaptive zero) and support
/// +, -, *.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, const T& fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  size_t rows() const noexcept { return rows_; }
  size_t cols() const noexcept { return cols_; }

  T& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  template <class F>
  auto map(F&& f) const -> Matrix<decltype(f(std::declval<const T&>()))> {
    Matrix<decltype(f(std::declval<const T&>()))> out(rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  /// Identity with the given unit on the diagonal and `zero` elsewhere.
  static Matrix identity(size_t n, const T& one, const T& zero = T{}) {
    Matrix out(n, n, zero);
    for (size_t i = 0; i < n; ++i) out(i, i) = one;
    return out;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same(a, b);
    Matrix out(a.rows_, a.cols_);
    for (size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = a.data_[k] + b.data_[k];
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same(a, b);
    Matrix out(a.rows_, a.cols_);
    for (size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = a.data_[k] - b.data_[k];
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error("matrix.shape", "inner dimensions differ");
    Matrix out(a.rows_, b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < b.cols_; ++j) {
        T acc{};
        for (size_t k = 0; k < a.cols_; ++k) acc = acc + a(i, k) * b(k, j);
        out(i, j) = acc;
      }
    return out;
  }

 private:
  static void check_same(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("matrix.shape", "shapes differ");
  }

  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace ovc
