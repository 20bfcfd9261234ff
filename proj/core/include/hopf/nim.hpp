#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/error.hpp"
#include "hopf/graph.hpp"

namespace hopf {

// Share of h_0 in the linearized k-layer representation:
//   (alpha / (alpha + beta))^k, or ((alpha + 1) / (alpha + beta + 1))^k with an
// identity skip. Templated so callers can evaluate it in exact arithmetic.
template <class Real>
Real nim_relative_importance_as(const Real& alpha, const Real& beta, std::size_t k, bool skip) {
  if (alpha < Real(0) || beta < Real(0)) throw ArgumentError("nim: alpha and beta must be non-negative");
  if (alpha == Real(0) && beta == Real(0)) throw ArgumentError("nim: alpha and beta cannot both be zero");
  const Real num = skip ? alpha + Real(1) : alpha;
  const Real den = skip ? alpha + beta + Real(1) : alpha + beta;
  Real r(1);
  for (std::size_t i = 0; i < k; ++i) r = r * num / den;
  return r;
}

double nim_relative_importance(double alpha, double beta, std::size_t k, bool skip = false);

// The linear recurrence h_k = (alpha I + beta F(A)) h_{k-1} (+ h_{k-1} with a
// skip) unrolled k times.
struct LinearUnroll {
  // (diag(alpha) + beta F (+ I))^k
  DenseMatrix power;
  // hop_terms[j]: the part of `power` made of walks with exactly j neighbor
  // steps, so power = sum_j hop_terms[j].
  std::vector<DenseMatrix> hop_terms;

  // Coefficient of node i's own h_0 along the path that never leaves i:
  // diagonal of hop_terms[0], i.e. alpha_i^k.
  std::vector<double> self_coefficients() const;
};

inline constexpr std::size_t kMaxUnrollNodes = 200;

// alpha holds one weight per node (or a single value for all nodes). Small
// graphs only (n <= 200). Throws ArgumentError for MaxPool, which is not linear.
LinearUnroll linear_unroll(const Graph& g, std::span<const double> alpha, double beta, NormScheme norm, std::size_t k,
                           bool skip = false);

// Just the matrix power, scalar alpha.
DenseMatrix linear_unroll_coefficient(const Graph& g, double alpha, double beta, NormScheme norm, std::size_t k);

// GCN's per-node alpha: 1 / (degree + 1).
std::vector<double> gcn_alpha(const Graph& g);

}  // namespace hopf
