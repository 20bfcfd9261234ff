#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace hopf {

using NodeId = std::uint32_t;

// Row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

void add_inplace(DenseMatrix& dst, const DenseMatrix& src, double scale = 1.0);
void scale_inplace(DenseMatrix& m, double s);
// dst[r, :] *= s[r]
void scale_rows_inplace(DenseMatrix& m, std::span<const double> s);
// dst[:, offset:offset+src.cols] += src
void add_columns_inplace(DenseMatrix& dst, const DenseMatrix& src, std::size_t col_offset);

// [A | B]
DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix column_slice(const DenseMatrix& m, std::size_t begin, std::size_t count);
DenseMatrix row_prefix(const DenseMatrix& m, std::size_t count);
DenseMatrix gather_rows(const DenseMatrix& m, std::span<const NodeId> ids);
void scatter_rows(DenseMatrix& dst, std::span<const NodeId> ids, const DenseMatrix& src);

double frobenius_sq(const DenseMatrix& m);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace hopf
