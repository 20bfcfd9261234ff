#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/task.hpp"

namespace hopf {

inline constexpr double kLogClamp = 1e-12;

// omega_i = sum_j N_j / (|L| * N_i). Throws ConfigError when a label has no
// training example.
std::vector<double> wce_weights(std::span<const std::size_t> label_counts);

// Positive count per label column over the given rows of Y (all rows when
// `rows` is empty).
std::vector<std::size_t> label_counts(const DenseMatrix& y, std::span<const NodeId> rows = {});

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // dLoss / dprediction
};

// Weighted cross entropy. Multi-class: -mean_i omega_{y_i} log p_i[y_i].
// Multi-label: -mean over cells of omega_j y log p + (1 - y) log(1 - p).
// Probabilities are clamped to [1e-12, 1 - 1e-12]; the gradient is evaluated
// at the clamped value. An empty omega means all ones.
LossResult weighted_cross_entropy(const DenseMatrix& pred, const DenseMatrix& truth, std::span<const double> omega,
                                  TaskKind task);

// Multi-class: one-hot of the row argmax (first index on ties).
// Multi-label: 1 where p >= 0.5.
DenseMatrix binarize(const DenseMatrix& pred, TaskKind task);

// 2TP / (2TP + FP + FN) pooled over all cells; 1.0 when both are all zero.
double micro_f1(const DenseMatrix& pred_binary, const DenseMatrix& truth_binary);

struct MetricsRecord {
  std::string model;
  std::string dataset;
  int fold = 0;
  double micro_f1 = 0.0;
  double loss = 0.0;
};

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records);
std::string metrics_to_json(std::span<const MetricsRecord> records);

}  // namespace hopf
