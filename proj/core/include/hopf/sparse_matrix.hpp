#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hopf/dense_matrix.hpp"

namespace hopf {

// CSR matrix of doubles. Column indices within a row are strictly increasing.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::uint32_t> col_indices, std::vector<double> values);

  static SparseMatrix zeros(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::uint32_t> row_indices(std::size_t r) const noexcept {
    return {cols_idx_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }

  // Entry lookup by binary search; 0 when absent.
  double at(std::size_t r, std::size_t c) const;

  DenseMatrix to_dense() const;
  SparseMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> cols_idx_;
  std::vector<double> values_;
};

// Sparse-dense product S * D. Zero rows of S give zero rows of the result.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d);

}  // namespace hopf
