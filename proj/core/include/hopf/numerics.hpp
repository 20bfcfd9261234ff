#pragma once

#include <cstdint>
#include <functional>

#include "hopf/dense_matrix.hpp"

namespace hopf {

double relu(double x) noexcept;
double sigmoid(double x) noexcept;

void relu_inplace(DenseMatrix& m);
void sigmoid_inplace(DenseMatrix& m);
// Row-wise softmax with max subtraction.
DenseMatrix softmax_rows(const DenseMatrix& m);

// Uniform in [-L, L] with L = sqrt(6 / (fan_in + fan_out)).
DenseMatrix glorot_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t rng_seed);
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

struct AdamHyper {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Optimizer state for one parameter matrix.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols, AdamHyper hyper = {});

  const DenseMatrix& first_moment() const noexcept { return m_; }
  const DenseMatrix& second_moment() const noexcept { return v_; }
  std::int64_t step_count() const noexcept { return steps_; }
  AdamHyper& hyper() noexcept { return hyper_; }
  const AdamHyper& hyper() const noexcept { return hyper_; }

  // Bias-corrected Adam update of `param` in place. Throws NumericsError on a
  // non-finite gradient (state is left untouched in that case).
  void step(DenseMatrix& param, const DenseMatrix& grad);

 private:
  DenseMatrix m_;
  DenseMatrix v_;
  std::int64_t steps_ = 0;
  AdamHyper hyper_;
};

inline void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state) { state.step(param, grad); }

// Central differences, entry by entry. `param` is restored before returning.
DenseMatrix finite_diff_grad(const std::function<double(const DenseMatrix&)>& loss_fn, DenseMatrix param,
                             double eps);

// Inverted dropout mask: entries are 0 or 1/(1-rate).
DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t rng_seed);

}  // namespace hopf
