#include "hopf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hopf/error.hpp"

namespace hopf {

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void relu_inplace(DenseMatrix& m) {
  for (double& v : m.values()) v = relu(v);
}

void sigmoid_inplace(DenseMatrix& m) {
  for (double& v : m.values()) v = sigmoid(v);
}

DenseMatrix softmax_rows(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (double& v : o) v /= sum;
  }
  return out;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) throw ArgumentError("glorot_init: fans must be >= 1");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

DenseMatrix glorot_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t rng_seed) {
  const double limit = glorot_limit(fan_in, fan_out);
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseMatrix w(fan_in, fan_out);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

AdamState::AdamState(std::size_t rows, std::size_t cols, AdamHyper hyper)
    : m_(rows, cols), v_(rows, cols), hyper_(hyper) {}

void AdamState::step(DenseMatrix& param, const DenseMatrix& grad) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() || m_.rows() != param.rows() ||
      m_.cols() != param.cols())
    throw ShapeError("adam_step: parameter, gradient and state shapes differ");
  if (!grad.all_finite()) throw NumericsError("adam_step: non-finite gradient");

  ++steps_;
  const double b1 = hyper_.beta1;
  const double b2 = hyper_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  auto p = param.values();
  auto g = grad.values();
  auto m = m_.values();
  auto v = v_.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= hyper_.learning_rate * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
  }
}

DenseMatrix finite_diff_grad(const std::function<double(const DenseMatrix&)>& loss_fn, DenseMatrix param,
                             double eps) {
  if (!(eps > 0.0)) throw ArgumentError("finite_diff_grad: eps must be positive");
  DenseMatrix grad(param.rows(), param.cols());
  auto p = param.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + eps;
    const double up = loss_fn(param);
    p[i] = orig - eps;
    const double down = loss_fn(param);
    p[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t rng_seed) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout_mask: rate must lie in [0, 1)");
  DenseMatrix mask(rows, cols, 1.0);
  if (rate == 0.0) return mask;
  std::mt19937_64 rng(rng_seed);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (double& v : mask.values()) v = keep(rng) ? scale : 0.0;
  return mask;
}

}  // namespace hopf
