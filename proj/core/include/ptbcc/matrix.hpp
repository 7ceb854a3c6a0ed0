#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace ptbcc {

/// Dense row-major matrix of doubles. Rows are exposed as spans so that
/// per-row simplex operations do not need to copy.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept {
    assert(r < rows_);
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    assert(r < rows_);
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// |S| x |K| x |K| tensor stored as a Matrix with |S|*|K| rows, one row per
/// (prototype, true class) pair. Each row is one Dirichlet / categorical.
class PrototypeTensor {
 public:
  PrototypeTensor() = default;
  PrototypeTensor(std::size_t prototypes, std::size_t classes, double fill = 0.0)
      : prototypes_(prototypes), classes_(classes),
        rows_(prototypes * classes, classes, fill) {}

  std::size_t prototypes() const noexcept { return prototypes_; }
  std::size_t classes() const noexcept { return classes_; }

  double& operator()(std::size_t s, std::size_t k, std::size_t l) noexcept {
    return rows_(s * classes_ + k, l);
  }
  double operator()(std::size_t s, std::size_t k, std::size_t l) const noexcept {
    return rows_(s * classes_ + k, l);
  }

  std::span<double> row(std::size_t s, std::size_t k) noexcept {
    return rows_.row(s * classes_ + k);
  }
  std::span<const double> row(std::size_t s, std::size_t k) const noexcept {
    return rows_.row(s * classes_ + k);
  }

  Matrix& flat() noexcept { return rows_; }
  const Matrix& flat() const noexcept { return rows_; }

  friend bool operator==(const PrototypeTensor&, const PrototypeTensor&) = default;

 private:
  std::size_t prototypes_ = 0;
  std::size_t classes_ = 0;
  Matrix rows_;
};

}  // namespace ptbcc
