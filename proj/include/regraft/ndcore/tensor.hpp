#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace regraft::nd {

// Dense row-major matrix of doubles. Batches are rows.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor2 column(std::vector<double> values);
  static Tensor2 row_vector(std::vector<double> values);
  static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2 scalar(double v) { return Tensor2(1, 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Tensor2& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  Tensor2 select_rows(std::span<const std::size_t> indices) const;
  void fill(double v);

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Raw kernels shared by the tape ops and plain evaluation paths.
// out = a * b
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// out = a^T * b
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
// out = a * b^T
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);

// Stacks row blocks with equal column counts.
Tensor2 vstack(std::span<const Tensor2> blocks);

double squared_norm(std::span<const double> v);

}  // namespace regraft::nd
