#include "hopf/sparse_matrix.hpp"

#include <algorithm>
#include <string>

#include "hopf/error.hpp"

namespace hopf {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::uint32_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(row_offsets)),
      cols_idx_(std::move(col_indices)),
      values_(std::move(values)) {
  if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != cols_idx_.size() ||
      cols_idx_.size() != values_.size())
    throw ShapeError("SparseMatrix: inconsistent CSR arrays");
  for (std::size_t r = 0; r < rows_; ++r) {
    if (offsets_[r] > offsets_[r + 1]) throw ShapeError("SparseMatrix: row offsets not monotone");
    for (std::size_t e = offsets_[r]; e < offsets_[r + 1]; ++e) {
      if (cols_idx_[e] >= cols_) throw ShapeError("SparseMatrix: column index out of range");
      if (e > offsets_[r] && cols_idx_[e] <= cols_idx_[e - 1])
        throw ShapeError("SparseMatrix: column indices must be strictly increasing per row");
    }
  }
}

SparseMatrix SparseMatrix::zeros(std::size_t rows, std::size_t cols) {
  return SparseMatrix(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {});
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), static_cast<std::uint32_t>(c));
  if (it == idx.end() || *it != c) return 0.0;
  return values_[offsets_[r] + static_cast<std::size_t>(it - idx.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t e = 0; e < idx.size(); ++e) d(r, idx[e]) = val[e];
  }
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (auto c : cols_idx_) ++offsets[c + 1];
  for (std::size_t c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<std::uint32_t> idx(nnz());
  std::vector<double> val(nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  // Rows are visited in ascending order, so each transposed row stays sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t e = offsets_[r]; e < offsets_[r + 1]; ++e) {
      const std::size_t slot = cursor[cols_idx_[e]]++;
      idx[slot] = static_cast<std::uint32_t>(r);
      val[slot] = values_[e];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(idx), std::move(val));
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  if (s.cols() != d.rows())
    throw ShapeError("spmm: sparse " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                     " times dense " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()));
  DenseMatrix out(s.rows(), d.cols());
  const std::size_t n = d.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    auto idx = s.row_indices(r);
    auto val = s.row_values(r);
    double* o = out.row(r).data();
    for (std::size_t e = 0; e < idx.size(); ++e) {
      const double w = val[e];
      const double* src = d.row(idx[e]).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += w * src[j];
    }
  }
  return out;
}

}  // namespace hopf
