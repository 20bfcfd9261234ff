#include "hopf/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hopf/error.hpp"

namespace hopf {
namespace {

std::string dims(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool ok, const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!ok) throw ShapeError(std::string(op) + ": incompatible shapes " + dims(a) + " and " + dims(b));
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// The accumulation order of every product below is fixed (inner index
// ascending), so results are bit-reproducible and appending zero columns to
// an operand leaves the sums unchanged.

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul", a, b);
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  const double* bd = b.values().data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    const auto ai = a.row(i);
    for (std::size_t k = 0; k < ai.size(); ++k) {
      const double av = ai[k];
      if (av == 0.0) continue;
      const double* bk = bd + k * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "matmul_at_b", a, b);
  DenseMatrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  double* cd = c.values().data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    const double* bi = b.row(i).data();
    for (std::size_t k = 0; k < ai.size(); ++k) {
      const double av = ai[k];
      if (av == 0.0) continue;
      double* ck = cd + k * n;
      for (std::size_t j = 0; j < n; ++j) ck[j] += av * bi[j];
    }
  }
  return c;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "matmul_a_bt", a, b);
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void add_inplace(DenseMatrix& dst, const DenseMatrix& src, double scale) {
  require(dst.rows() == src.rows() && dst.cols() == src.cols(), "add_inplace", dst, src);
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void scale_inplace(DenseMatrix& m, double s) {
  for (double& v : m.values()) v *= s;
}

void scale_rows_inplace(DenseMatrix& m, std::span<const double> s) {
  if (s.size() != m.rows()) throw ShapeError("scale_rows_inplace: scale vector length mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double& v : m.row(i)) v *= s[i];
}

void add_columns_inplace(DenseMatrix& dst, const DenseMatrix& src, std::size_t col_offset) {
  require(dst.rows() == src.rows() && col_offset + src.cols() <= dst.cols(), "add_columns_inplace", dst, src);
  for (std::size_t i = 0; i < src.rows(); ++i) {
    auto d = dst.row(i);
    auto s = src.row(i);
    for (std::size_t j = 0; j < s.size(); ++j) d[col_offset + j] += s[j];
  }
}

DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "hconcat", a, b);
  DenseMatrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), ci.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), ci.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return c;
}

DenseMatrix column_slice(const DenseMatrix& m, std::size_t begin, std::size_t count) {
  if (begin + count > m.cols()) throw ShapeError("column_slice: range exceeds " + dims(m));
  DenseMatrix out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i).subspan(begin, count);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

DenseMatrix row_prefix(const DenseMatrix& m, std::size_t count) {
  if (count > m.rows()) throw ShapeError("row_prefix: count exceeds " + dims(m));
  DenseMatrix out(count, m.cols());
  std::copy_n(m.values().begin(), count * m.cols(), out.values().begin());
  return out;
}

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const NodeId> ids) {
  DenseMatrix out(ids.size(), m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= m.rows()) throw ShapeError("gather_rows: row id out of range for " + dims(m));
    std::copy(m.row(ids[i]).begin(), m.row(ids[i]).end(), out.row(i).begin());
  }
  return out;
}

void scatter_rows(DenseMatrix& dst, std::span<const NodeId> ids, const DenseMatrix& src) {
  if (src.rows() != ids.size() || src.cols() != dst.cols()) throw ShapeError("scatter_rows: shape mismatch");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= dst.rows()) throw ShapeError("scatter_rows: row id out of range for " + dims(dst));
    std::copy(src.row(i).begin(), src.row(i).end(), dst.row(ids[i]).begin());
  }
}

double frobenius_sq(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return s;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff", a, b);
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

}  // namespace hopf
