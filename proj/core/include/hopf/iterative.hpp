#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/graph.hpp"
#include "hopf/kernel_spec.hpp"
#include "hopf/model.hpp"
#include "hopf/task.hpp"
#include "hopf/training.hpp"

namespace hopf {

// What seeds each iteration's label channel. Only predicted labels exist.
enum class ThetaMode { Labels };

struct HopfConfig {
  std::size_t C = 1;  // differentiable hops per iteration
  std::size_t T = 1;  // iterations; reach is T * C hops
  bool warm_start = true;
  ThetaMode theta_mode = ThetaMode::Labels;
  // Weight the fresh prediction by (T - t + 1) / T instead of (T - t) / T.
  bool shifted_averaging = false;
  // Keep every iteration's weights (inductive use) instead of only the last.
  bool retain_all_weights = false;

  void validate() const;
};

// Yhat_U <- (T - t)/T * Ytilde_U + (t/T) * Yhat_U, or (T - t + 1)/T for the
// fresh term when shifted. Throws ArgumentError unless 1 <= t <= T.
DenseMatrix temporal_average(const DenseMatrix& ytilde_u, const DenseMatrix& yhat_u_old, std::size_t t, std::size_t T,
                             bool shifted = false);

// Initial weights for iteration t: a copy of `previous` on warm start,
// otherwise a fresh Glorot draw whose seed depends on t.
ModelWeights warm_start_transfer(const ModelWeights& previous, bool warm_start, const KernelSpec& spec,
                                 std::size_t num_features, std::size_t num_labels, std::uint64_t rng_seed,
                                 std::size_t t);

struct IterationRecord {
  std::size_t iteration = 0;
  double micro_f1 = 0.0;       // fresh predictions on the test nodes
  double best_val_loss = 0.0;
  double first_epoch_loss = 0.0;
  std::size_t epochs = 0;
  double train_seconds = 0.0;
  double infer_seconds = 0.0;
};

struct IterationReport {
  const IterationRecord& record;
  const ModelWeights& weights;
  const DenseMatrix& yhat;    // n x l after restore and averaging
  const DenseMatrix& ytilde;  // n x l fresh predictions (rows outside U are zero)
};

struct HopfResult {
  DenseMatrix yhat;
  DenseMatrix ytilde;  // last iteration's fresh predictions, rows of U filled
  std::vector<NodeId> unlabeled;  // U = V \ S
  std::vector<IterationRecord> trajectory;
  // Last iteration's weights, or all of them with retain_all_weights.
  std::vector<ModelWeights> weights;
};

using IterationObserver = std::function<void(const IterationReport&)>;

// The iterative learn/infer loop. S = split.train; every other node is in U
// and receives predicted labels. Throws ConfigError when T > 1 and the kernel
// has no label channel, or when C differs from the kernel depth.
HopfResult run_hopf(const KernelSpec& spec, const Graph& graph, const DenseMatrix& x, const LabelSource& labels,
                    TaskKind task, const SplitSpec& split, const TrainConfig& train_config,
                    const HopfConfig& hopf_config, const IterationObserver& observer = {});

// The same label loop with fixed weights and no training: T rounds of
// inference over all nodes, restoring `labeled` rows to `labeled_y`.
// Returns the final round's fresh predictions (n x l).
DenseMatrix propagate_fixed(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                            std::span<const NodeId> labeled, const DenseMatrix& labeled_y, TaskKind task,
                            std::size_t T, bool shifted_averaging = false, std::size_t batch_size = 128);

}  // namespace hopf
