#include "hopf/iterative.hpp"

#include <algorithm>
#include <chrono>

#include "hopf/error.hpp"
#include "hopf/objectives.hpp"
#include "hopf/rng.hpp"

namespace hopf {

namespace {

constexpr std::uint64_t kIterationStream = 0x17e7;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<NodeId> complement(std::size_t n, std::span<const NodeId> s) {
  std::vector<char> in(n, 0);
  for (NodeId v : s) in.at(v) = 1;
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < n; ++v)
    if (!in[v]) out.push_back(static_cast<NodeId>(v));
  return out;
}

}  // namespace

void HopfConfig::validate() const {
  if (C == 0) throw ConfigError("hopf: C must be >= 1");
  if (T == 0) throw ConfigError("hopf: T must be >= 1");
}

DenseMatrix temporal_average(const DenseMatrix& ytilde_u, const DenseMatrix& yhat_u_old, std::size_t t, std::size_t T,
                             bool shifted) {
  if (T == 0 || t < 1 || t > T)
    throw ArgumentError("temporal_average: iteration " + std::to_string(t) + " outside [1, " + std::to_string(T) + "]");
  if (ytilde_u.rows() != yhat_u_old.rows() || ytilde_u.cols() != yhat_u_old.cols())
    throw ShapeError("temporal_average: shapes differ");
  const double tt = static_cast<double>(T);
  const double fresh = (static_cast<double>(T - t) + (shifted ? 1.0 : 0.0)) / tt;
  const double old = static_cast<double>(t) / tt;
  DenseMatrix out(ytilde_u.rows(), ytilde_u.cols());
  auto o = out.values();
  auto a = ytilde_u.values();
  auto b = yhat_u_old.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = fresh * a[i] + old * b[i];
  return out;
}

ModelWeights warm_start_transfer(const ModelWeights& previous, bool warm_start, const KernelSpec& spec,
                                 std::size_t num_features, std::size_t num_labels, std::uint64_t rng_seed,
                                 std::size_t t) {
  if (warm_start) return previous;
  return init_weights(spec, num_features, num_labels, derive_seed(rng_seed, {kIterationStream, t}));
}

HopfResult run_hopf(const KernelSpec& spec, const Graph& graph, const DenseMatrix& x, const LabelSource& labels,
                    TaskKind task, const SplitSpec& split, const TrainConfig& train_config,
                    const HopfConfig& hc, const IterationObserver& observer) {
  hc.validate();
  if (hc.C != spec.depth)
    throw ConfigError("hopf: C = " + std::to_string(hc.C) + " but kernel " + spec.name + " has depth " +
                      std::to_string(spec.depth));
  if (hc.T > 1 && !spec.uses_labels())
    throw ConfigError("hopf: " + spec.name + " has no label channel, so T > 1 iterations cannot exchange labels");
  const std::size_t n = graph.num_nodes();
  const std::size_t l = labels.num_labels();
  if (x.rows() != n) throw ShapeError("hopf: feature rows do not match the node count");

  HopfResult out;
  out.yhat = DenseMatrix(n, l);
  out.unlabeled = complement(n, split.train);
  const DenseMatrix y_s = labels.rows(split.train, LabelUse::Fit);

  // Positions of the test nodes inside U.
  std::vector<std::size_t> test_pos;
  {
    std::vector<std::int64_t> pos(n, -1);
    for (std::size_t i = 0; i < out.unlabeled.size(); ++i) pos[out.unlabeled[i]] = static_cast<std::int64_t>(i);
    for (NodeId v : split.test) {
      if (pos.at(v) < 0) throw ConfigError("hopf: test node " + std::to_string(v) + " is also a training node");
      test_pos.push_back(static_cast<std::size_t>(pos[v]));
    }
  }
  const DenseMatrix y_test = split.test.empty() ? DenseMatrix() : labels.rows(split.test, LabelUse::Evaluate);

  ModelWeights current;
  for (std::size_t t = 1; t <= hc.T; ++t) {
    TrainConfig cfg = train_config;
    if (t > 1) cfg.rng_seed = derive_seed(train_config.rng_seed, {kIterationStream, t});
    const ModelWeights* init = nullptr;
    ModelWeights start;
    if (t > 1) {
      start = warm_start_transfer(current, hc.warm_start, spec, x.cols(), l, train_config.rng_seed, t);
      init = &start;
    }

    IterationRecord rec;
    rec.iteration = t;
    const auto t0 = std::chrono::steady_clock::now();
    TrainingProblem problem{&spec, &graph, &x, &labels, task, &out.yhat};
    TrainResult tr;
    try {
      Trainer trainer(problem, split, cfg, init);
      tr = trainer.run();
    } catch (const TrainingError& e) {
      throw TrainingError(e.what(), e.epoch(), e.batch(), static_cast<int>(t));
    }
    rec.train_seconds = seconds_since(t0);
    rec.best_val_loss = tr.best_val_loss;
    rec.epochs = tr.history.size();
    rec.first_epoch_loss = tr.history.empty() ? 0.0 : tr.history.front().train_loss;
    current = std::move(tr.weights);

    const auto t1 = std::chrono::steady_clock::now();
    // Reads come from the previous snapshot; writes go to a fresh buffer.
    const DenseMatrix ytilde_u = predict_nodes(spec, current, graph, x, &out.yhat, out.unlabeled, task, cfg);
    DenseMatrix next = out.yhat;
    scatter_rows(next, split.train, y_s);
    const DenseMatrix old_u = gather_rows(out.yhat, out.unlabeled);
    scatter_rows(next, out.unlabeled, temporal_average(ytilde_u, old_u, t, hc.T, hc.shifted_averaging));
    out.yhat = std::move(next);
    out.ytilde = DenseMatrix(n, l);
    scatter_rows(out.ytilde, out.unlabeled, ytilde_u);
    rec.infer_seconds = seconds_since(t1);

    if (!test_pos.empty()) {
      DenseMatrix pred_test(test_pos.size(), l);
      for (std::size_t i = 0; i < test_pos.size(); ++i) {
        auto src = ytilde_u.row(test_pos[i]);
        std::copy(src.begin(), src.end(), pred_test.row(i).begin());
      }
      rec.micro_f1 = micro_f1(binarize(pred_test, task), y_test);
    }
    out.trajectory.push_back(rec);
    if (hc.retain_all_weights) out.weights.push_back(current);
    if (observer) observer(IterationReport{out.trajectory.back(), current, out.yhat, out.ytilde});
  }
  if (!hc.retain_all_weights) out.weights.push_back(std::move(current));
  return out;
}

DenseMatrix propagate_fixed(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                            std::span<const NodeId> labeled, const DenseMatrix& labeled_y, TaskKind task,
                            std::size_t T, bool shifted_averaging, std::size_t batch_size) {
  if (T == 0) throw ConfigError("propagate_fixed: T must be >= 1");
  if (labeled_y.rows() != labeled.size()) throw ShapeError("propagate_fixed: one label row per labeled node");
  const std::size_t n = graph.num_nodes();
  const std::size_t l = w.output.cols();
  std::vector<NodeId> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<NodeId>(i);
  const std::vector<NodeId> u = complement(n, labeled);
  TrainConfig cfg;
  cfg.batch_size = batch_size;
  DenseMatrix yhat(n, l);
  DenseMatrix ytilde;
  for (std::size_t t = 1; t <= T; ++t) {
    ytilde = predict_nodes(spec, w, graph, x, &yhat, all, task, cfg);
    DenseMatrix next = yhat;
    if (!labeled.empty()) scatter_rows(next, labeled, labeled_y);
    scatter_rows(next, u, temporal_average(gather_rows(ytilde, u), gather_rows(yhat, u), t, T, shifted_averaging));
    yhat = std::move(next);
  }
  return ytilde;
}

}  // namespace hopf
