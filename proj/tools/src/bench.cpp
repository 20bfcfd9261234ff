#include "hopf_cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "hopf/error.hpp"
#include "hopf/iterative.hpp"
#include "hopf/propagation.hpp"

namespace hopf::cli {

namespace {

constexpr const char* kIterativePrefix = "i_nip_mean_c";

std::vector<NodeId> complement(std::size_t n, std::span<const NodeId> s) {
  std::vector<char> in(n, 0);
  for (NodeId v : s) in.at(v) = 1;
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < n; ++v)
    if (!in[v]) out.push_back(static_cast<NodeId>(v));
  return out;
}

TrainConfig bench_config(const ScalingOptions& o) {
  TrainConfig cfg;
  cfg.batch_size = o.batch_size;
  cfg.hidden_dim = o.hidden_dim;
  cfg.num_workers = o.num_workers;
  cfg.rng_seed = o.rng_seed;
  return cfg;
}

// One epoch of a full kernel: a training pass over the labeled nodes.
double time_full_epoch(const KernelSpec& spec, const DatasetBundle& data, const SplitSpec& split,
                       const TrainConfig& cfg, std::size_t epoch) {
  DenseLabels labels(data.y);
  TrainingProblem problem{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  const auto t0 = std::chrono::steady_clock::now();
  Trainer trainer(problem, split, cfg);
  trainer.train_epoch(epoch);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// T rounds of (one training epoch, inference on U, label averaging).
double time_iterative_epoch(const KernelSpec& spec, std::size_t T, const DatasetBundle& data, const SplitSpec& split,
                            std::span<const NodeId> unlabeled, const TrainConfig& cfg, std::size_t epoch) {
  DenseLabels labels(data.y);
  const std::size_t n = data.num_nodes();
  const std::size_t l = data.num_labels();
  const DenseMatrix y_s = gather_rows(data.y, split.train);
  const auto t0 = std::chrono::steady_clock::now();
  DenseMatrix yhat(n, l);
  ModelWeights w;
  for (std::size_t t = 1; t <= T; ++t) {
    TrainingProblem problem{&spec, &data.graph, &data.x, &labels, data.task, &yhat};
    Trainer trainer(problem, split, cfg, t > 1 ? &w : nullptr);
    trainer.train_epoch(epoch);
    w = trainer.weights();
    const DenseMatrix fresh = predict_nodes(spec, w, data.graph, data.x, &yhat, unlabeled, data.task, cfg);
    DenseMatrix next = yhat;
    scatter_rows(next, split.train, y_s);
    scatter_rows(next, unlabeled, temporal_average(fresh, gather_rows(yhat, unlabeled), t, T));
    yhat = std::move(next);
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::pair<std::size_t, std::size_t> ScalingVariant::shape(std::size_t K) const {
  if (K == 0) return {0, 0};
  if (!iterative) return {K, 1};
  if (K % C != 0) return {0, 0};
  return {C, K / C};
}

ScalingVariant parse_variant(const std::string& name) {
  ScalingVariant v;
  v.name = name;
  const std::string prefix = kIterativePrefix;
  if (name.rfind(prefix, 0) == 0) {
    const std::string digits = name.substr(prefix.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ConfigError("bad variant '" + name + "': expected " + prefix + "<C>");
    v.kernel = "i_nip_mean";
    v.iterative = true;
    v.C = std::stoul(digits);
    if (v.C == 0) throw ConfigError("bad variant '" + name + "': C must be >= 1");
    return v;
  }
  if (!is_kernel_name(name)) throw ConfigError("unknown model '" + name + "'");
  if (name == "wl") throw ConfigError("wl has no parameters to train");
  v.kernel = name;
  return v;
}

double ScalingCell::mean_seconds() const {
  if (epoch_seconds.empty()) return 0.0;
  return std::accumulate(epoch_seconds.begin(), epoch_seconds.end(), 0.0) /
         static_cast<double>(epoch_seconds.size());
}

std::size_t peak_activation_bytes(const KernelSpec& spec, const DatasetBundle& data, const SplitSpec& split,
                                  std::size_t batch_size) {
  std::size_t peak = 0;
  const std::span<const NodeId> train(split.train);
  for (std::size_t start = 0; start < train.size(); start += batch_size) {
    const auto seeds = train.subspan(start, std::min(batch_size, train.size() - start));
    const Subgraph sub = khop_subgraph(data.graph, seeds, spec.depth);
    peak = std::max(peak, estimate_activation_bytes(spec, sub, data.num_features(), data.num_labels()));
  }
  return peak;
}

std::vector<ScalingCell> bench_scaling(const DatasetBundle& data, const SplitSpec& split, const ScalingOptions& o) {
  if (o.repeats == 0) throw ConfigError("bench-scaling: repeats must be >= 1");
  std::vector<ScalingVariant> variants;
  for (const auto& name : o.variants) variants.push_back(parse_variant(name));
  const TrainConfig cfg = bench_config(o);
  const std::vector<NodeId> unlabeled = complement(data.num_nodes(), split.train);

  std::vector<ScalingCell> out;
  struct Job {
    std::size_t cell;
    KernelSpec spec;
    bool iterative;
  };
  std::vector<Job> jobs;
  for (const auto& v : variants) {
    for (std::size_t K : o.hops) {
      ScalingCell cell;
      cell.variant = v.name;
      cell.K = K;
      const auto [C, T] = v.shape(K);
      cell.C = C;
      cell.T = T;
      if (C == 0) {
        cell.status = "n/a";
        out.push_back(cell);
        continue;
      }
      KernelSpec spec = make_kernel(v.kernel, C, o.hidden_dim);
      cell.peak_activation_bytes = peak_activation_bytes(spec, data, split, o.batch_size);
      cell.status = cell.peak_activation_bytes > o.memory_budget_bytes ? "infeasible" : "ok";
      if (cell.status == "ok") jobs.push_back({out.size(), std::move(spec), v.iterative});
      out.push_back(cell);
    }
  }
  // Repeats go round-robin over the cells.
  for (std::size_t r = 0; r < o.warmup + o.repeats; ++r)
    for (const auto& job : jobs) {
      ScalingCell& cell = out[job.cell];
      const double s = job.iterative ? time_iterative_epoch(job.spec, cell.T, data, split, unlabeled, cfg, r + 1)
                                     : time_full_epoch(job.spec, data, split, cfg, r + 1);
      if (r >= o.warmup) cell.epoch_seconds.push_back(s);
    }
  return out;
}

}  // namespace hopf::cli
