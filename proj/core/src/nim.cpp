#include "hopf/nim.hpp"

#include <string>

namespace hopf {

double nim_relative_importance(double alpha, double beta, std::size_t k, bool skip) {
  return nim_relative_importance_as<double>(alpha, beta, k, skip);
}

std::vector<double> LinearUnroll::self_coefficients() const {
  std::vector<double> out;
  if (hop_terms.empty()) return out;
  const auto& t0 = hop_terms.front();
  out.reserve(t0.rows());
  for (std::size_t i = 0; i < t0.rows(); ++i) out.push_back(t0(i, i));
  return out;
}

LinearUnroll linear_unroll(const Graph& g, std::span<const double> alpha, double beta, NormScheme norm, std::size_t k,
                           bool skip) {
  const std::size_t n = g.num_nodes();
  if (n > kMaxUnrollNodes)
    throw ArgumentError("linear_unroll: analysis is limited to " + std::to_string(kMaxUnrollNodes) + " nodes, got " +
                        std::to_string(n));
  if (norm == NormScheme::MaxPool) throw ArgumentError("linear_unroll: maxpool aggregation has no linear form");
  if (alpha.size() != 1 && alpha.size() != n)
    throw ArgumentError("linear_unroll: alpha must hold 1 or n values");

  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = (alpha.size() == 1 ? alpha[0] : alpha[i]) + (skip ? 1.0 : 0.0);
  const SparseMatrix f = normalize_adjacency(whole_graph(g), norm);

  LinearUnroll out;
  out.hop_terms.push_back(DenseMatrix::identity(n));
  for (std::size_t step = 0; step < k; ++step) {
    std::vector<DenseMatrix> next(out.hop_terms.size() + 1, DenseMatrix(n, n));
    for (std::size_t j = 0; j < out.hop_terms.size(); ++j) {
      DenseMatrix stay = out.hop_terms[j];
      scale_rows_inplace(stay, self);
      add_inplace(next[j], stay);
      if (beta != 0.0) add_inplace(next[j + 1], spmm(f, out.hop_terms[j]), beta);
    }
    out.hop_terms = std::move(next);
  }

  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const NodeId j : g.neighbors(static_cast<NodeId>(i))) m(i, j) = beta * f.at(i, j);
    m(i, i) += self[i];
  }
  out.power = DenseMatrix::identity(n);
  for (std::size_t step = 0; step < k; ++step) out.power = matmul(m, out.power);
  return out;
}

DenseMatrix linear_unroll_coefficient(const Graph& g, double alpha, double beta, NormScheme norm, std::size_t k) {
  const double a[1] = {alpha};
  return linear_unroll(g, a, beta, norm, k).power;
}

std::vector<double> gcn_alpha(const Graph& g) {
  std::vector<double> a(g.num_nodes());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 / (static_cast<double>(g.degree(static_cast<NodeId>(i))) + 1.0);
  return a;
}

}  // namespace hopf
