#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/graph.hpp"
#include "hopf/kernel_spec.hpp"
#include "hopf/model.hpp"
#include "hopf/numerics.hpp"
#include "hopf/task.hpp"

namespace hopf {

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t hidden_dim = 16;
  double learning_rate = 1e-2;
  double l2_weight = 1e-3;
  double dropout_rate = 0.5;
  std::size_t max_epochs = 2000;
  std::size_t min_epochs = 50;
  std::size_t patience = 30;
  std::size_t max_consecutive_exhaustions = 2;
  bool use_wce = true;
  std::uint64_t rng_seed = 0;
  // Per-hop neighbor caps; empty means exact k-hop balls.
  std::vector<std::size_t> sample_caps;
  // Background subgraph prefetch (0 disables it).
  std::size_t num_workers = 1;

  // Throws ConfigError on non-positive sizes or a dropout rate outside [0, 1).
  void validate() const;
};

struct SplitSpec {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  std::vector<NodeId> unlabeled;
};

// One shared test set of floor(0.2 n) nodes; per fold floor(0.1 n) labeled
// nodes from the rest, floor(20%) of which become validation. Sets are sorted.
// Throws ConfigError for n < 10.
std::vector<SplitSpec> make_splits(std::size_t n, std::uint64_t rng_seed, std::size_t num_folds = 5);

// Validation-loss patience schedule. Before min_epochs only the best loss is
// tracked. Afterwards each epoch without improvement spends one unit of
// patience; an empty budget halves both the learning rate and the budget, and
// `max_exhaustions` exhaustions in a row (no improvement between) stop training.
class EarlyStopState {
 public:
  enum class Event { Improved, Waiting, Exhausted, Stop };

  EarlyStopState(std::size_t patience, double learning_rate, std::size_t min_epochs, std::size_t max_exhaustions);

  // `epoch` is 1-based.
  Event update(double val_loss, std::size_t epoch);

  double best_val_loss() const noexcept { return best_; }
  std::size_t patience_budget() const noexcept { return budget_; }
  std::size_t patience_remaining() const noexcept { return remaining_; }
  double lr_current() const noexcept { return lr_; }
  std::size_t consecutive_exhaustions() const noexcept { return consecutive_; }
  bool stopped() const noexcept { return stopped_; }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t budget_;
  std::size_t remaining_;
  double lr_;
  std::size_t min_epochs_;
  std::size_t max_exhaustions_;
  std::size_t consecutive_ = 0;
  bool stopped_ = false;
};

// What a label read is for. Fitting reads must only touch training nodes.
enum class LabelUse { Fit, Monitor, Evaluate };

class LabelSource {
 public:
  virtual ~LabelSource() = default;
  virtual std::size_t num_labels() const = 0;
  virtual DenseMatrix rows(std::span<const NodeId> ids, LabelUse use) const = 0;
};

class DenseLabels final : public LabelSource {
 public:
  explicit DenseLabels(const DenseMatrix& y) : y_(y) {}
  explicit DenseLabels(DenseMatrix&&) = delete;
  std::size_t num_labels() const override { return y_.cols(); }
  DenseMatrix rows(std::span<const NodeId> ids, LabelUse) const override { return gather_rows(y_, ids); }

 private:
  const DenseMatrix& y_;
};

struct TrainingProblem {
  const KernelSpec* spec = nullptr;
  const Graph* graph = nullptr;
  const DenseMatrix* x = nullptr;
  const LabelSource* labels = nullptr;
  TaskKind task = TaskKind::MultiClass;
  // n x l label channel, required when the kernel reads labels.
  const DenseMatrix* yhat = nullptr;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelWeights weights;  // best monitored loss
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::size_t updates = 0;
};

// Mini-batch trainer for one kernel. Owns weights and optimizer state.
class Trainer {
 public:
  Trainer(const TrainingProblem& problem, const SplitSpec& split, TrainConfig config,
          const ModelWeights* initial = nullptr);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // One shuffled pass over the training nodes; returns the mean batch loss
  // (data + L2). `epoch` is 1-based and seeds shuffling, dropout and sampling.
  double train_epoch(std::size_t epoch);
  // Data loss on the validation nodes (training loss proxy when there are
  // none), dropout off.
  double validation_loss() const;
  // Full loop with early stopping; returns the best weights.
  TrainResult run();

  const ModelWeights& weights() const noexcept { return weights_; }
  double learning_rate() const noexcept { return lr_; }
  void set_learning_rate(double lr);
  std::size_t updates() const noexcept { return updates_; }
  const std::vector<double>& class_weights() const noexcept { return omega_; }

 private:
  double step(const Subgraph& sub, std::span<const std::size_t> label_rows, std::size_t epoch, std::size_t batch);

  TrainingProblem p_;
  SplitSpec split_;
  TrainConfig cfg_;
  ModelWeights weights_;
  std::vector<AdamState> adam_;
  std::vector<double> omega_;
  DenseMatrix y_train_;
  DenseMatrix y_val_;
  double lr_;
  std::size_t updates_ = 0;
};

TrainResult train(const TrainingProblem& problem, const SplitSpec& split, const TrainConfig& config,
                  const ModelWeights* initial = nullptr);
TrainResult train(const KernelSpec& spec, const Graph& graph, const DenseMatrix& x, const DenseMatrix& y,
                  TaskKind task, const SplitSpec& split, const TrainConfig& config);

// Subgraph for a batch of seeds: the exact depth-hop ball, or a sampled one
// when caps are given (caps.size() must equal depth).
Subgraph extract_batch(const Graph& graph, std::span<const NodeId> seeds, std::size_t depth,
                       std::span<const std::size_t> caps, std::uint64_t rng_seed);

// Inference (dropout off) for `nodes` in mini-batches; rows follow `nodes`.
// `yhat` is the label channel (n x l) for kernels that read labels.
DenseMatrix predict_nodes(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                          const DenseMatrix* yhat, std::span<const NodeId> nodes, TaskKind task,
                          const TrainConfig& config);

struct EvalResult {
  double micro_f1 = 0.0;
  double loss = 0.0;  // unweighted cross entropy
};

// Throws ArgumentError on an empty node set.
EvalResult evaluate(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                    const LabelSource& labels, std::span<const NodeId> nodes, TaskKind task,
                    const TrainConfig& config, const DenseMatrix* yhat = nullptr);

// epoch,train_loss,val_loss,lr
void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace hopf
