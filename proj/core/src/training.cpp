#include "hopf/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <random>

#include "hopf/error.hpp"
#include "hopf/format.hpp"
#include "hopf/objectives.hpp"
#include "hopf/propagation.hpp"
#include "hopf/rng.hpp"

namespace hopf {

namespace {
// Sub-stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 0x1a17;
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;
constexpr std::uint64_t kInferStream = 3;
}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(l2_weight >= 0.0) || !std::isfinite(l2_weight)) throw ConfigError("l2_weight must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (max_consecutive_exhaustions == 0) throw ConfigError("max_consecutive_exhaustions must be >= 1");
  for (std::size_t c : sample_caps)
    if (c == 0) throw ConfigError("sample_caps entries must be >= 1");
}

std::vector<SplitSpec> make_splits(std::size_t n, std::uint64_t rng_seed, std::size_t num_folds) {
  if (n < 10) throw ConfigError("make_splits: need at least 10 nodes for non-empty splits, got " + std::to_string(n));
  if (num_folds == 0) throw ConfigError("make_splits: num_folds must be >= 1");
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  std::mt19937_64 rng(derive_seed(rng_seed, {0}));
  std::shuffle(all.begin(), all.end(), rng);

  const std::size_t n_test = n / 5;
  const std::size_t n_labeled = n / 10;
  const std::size_t n_val = n_labeled / 5;
  std::vector<NodeId> test(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<NodeId> rest(all.begin() + static_cast<std::ptrdiff_t>(n_test), all.end());
  std::sort(test.begin(), test.end());
  std::sort(rest.begin(), rest.end());

  std::vector<SplitSpec> folds;
  for (std::size_t f = 0; f < num_folds; ++f) {
    std::vector<NodeId> pool = rest;
    std::mt19937_64 frng(derive_seed(rng_seed, {1, f}));
    std::shuffle(pool.begin(), pool.end(), frng);
    SplitSpec s;
    s.test = test;
    s.val.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_val),
                   pool.begin() + static_cast<std::ptrdiff_t>(n_labeled));
    s.unlabeled.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_labeled), pool.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.unlabeled.begin(), s.unlabeled.end());
    folds.push_back(std::move(s));
  }
  return folds;
}

EarlyStopState::EarlyStopState(std::size_t patience, double learning_rate, std::size_t min_epochs,
                               std::size_t max_exhaustions)
    : budget_(patience), remaining_(patience), lr_(learning_rate), min_epochs_(min_epochs),
      max_exhaustions_(max_exhaustions) {
  if (patience == 0 || max_exhaustions == 0) throw ConfigError("early stopping needs patience and exhaustions >= 1");
}

EarlyStopState::Event EarlyStopState::update(double val_loss, std::size_t epoch) {
  if (stopped_) return Event::Stop;
  if (val_loss < best_) {
    best_ = val_loss;
    remaining_ = budget_;
    consecutive_ = 0;
    return Event::Improved;
  }
  if (epoch < min_epochs_) return Event::Waiting;
  if (remaining_ > 0) --remaining_;
  if (remaining_ > 0) return Event::Waiting;
  ++consecutive_;
  if (consecutive_ >= max_exhaustions_) {
    stopped_ = true;
    return Event::Stop;
  }
  lr_ /= 2.0;
  budget_ = std::max<std::size_t>(1, budget_ / 2);
  remaining_ = budget_;
  return Event::Exhausted;
}

Subgraph extract_batch(const Graph& graph, std::span<const NodeId> seeds, std::size_t depth,
                       std::span<const std::size_t> caps, std::uint64_t rng_seed) {
  if (caps.empty()) return khop_subgraph(graph, seeds, depth);
  if (caps.size() != depth)
    throw ConfigError("sample_caps has " + std::to_string(caps.size()) + " entries for a " + std::to_string(depth) +
                      "-hop kernel");
  return sample_neighbors(graph, caps, seeds, depth, rng_seed);
}

Trainer::Trainer(const TrainingProblem& problem, const SplitSpec& split, TrainConfig config,
                 const ModelWeights* initial)
    : p_(problem), split_(split), cfg_(std::move(config)), lr_(cfg_.learning_rate) {
  if (!p_.spec || !p_.graph || !p_.x || !p_.labels) throw ArgumentError("Trainer: incomplete training problem");
  cfg_.validate();
  const KernelSpec& spec = *p_.spec;
  spec.validate();
  if (!spec.differentiable) throw ConfigError(spec.name + " is not trainable");
  if (spec.hidden_dim != cfg_.hidden_dim)
    throw ConfigError("kernel hidden_dim " + std::to_string(spec.hidden_dim) + " differs from config hidden_dim " +
                      std::to_string(cfg_.hidden_dim));
  const std::size_t n = p_.graph->num_nodes();
  if (p_.x->rows() != n) throw ShapeError("Trainer: feature rows do not match the node count");
  const std::size_t l = p_.labels->num_labels();
  if (spec.uses_labels()) {
    if (!p_.yhat) throw ConfigError(spec.name + " reads a label channel; provide one");
    if (p_.yhat->rows() != n || p_.yhat->cols() != l) throw ShapeError("Trainer: label channel must be n x l");
  }
  if (split_.train.empty()) throw ConfigError("Trainer: the training set is empty");

  y_train_ = p_.labels->rows(split_.train, LabelUse::Fit);
  if (!split_.val.empty()) y_val_ = p_.labels->rows(split_.val, LabelUse::Monitor);
  if (cfg_.use_wce) omega_ = wce_weights(label_counts(y_train_));

  weights_ = initial ? *initial : init_weights(spec, p_.x->cols(), l, derive_seed(cfg_.rng_seed, {kInitStream}));
  const ModelWeights shape = zero_weights(spec, p_.x->cols(), l);
  {
    std::vector<std::pair<std::size_t, std::size_t>> a, b;
    weights_.for_each_slot([&](const DenseMatrix& m) { a.emplace_back(m.rows(), m.cols()); });
    shape.for_each_slot([&](const DenseMatrix& m) { b.emplace_back(m.rows(), m.cols()); });
    if (a != b) throw ShapeError("Trainer: initial weights do not fit the kernel");
  }
  weights_.for_each_slot([&](const DenseMatrix& m) {
    adam_.emplace_back(m.rows(), m.cols(), AdamHyper{cfg_.learning_rate, 0.9, 0.999, 1e-8});
  });
}

Trainer::~Trainer() = default;

void Trainer::set_learning_rate(double lr) {
  lr_ = lr;
  for (auto& a : adam_) a.hyper().learning_rate = lr;
}

double Trainer::step(const Subgraph& sub, std::span<const std::size_t> label_rows, std::size_t epoch,
                     std::size_t batch) {
  const KernelSpec& spec = *p_.spec;
  const DenseMatrix xs = gather_rows(*p_.x, sub.global_ids);
  const DenseMatrix ys = spec.uses_labels() ? gather_rows(*p_.yhat, sub.global_ids) : DenseMatrix();
  PredictOptions opts{p_.task, true, cfg_.dropout_rate, derive_seed(cfg_.rng_seed, {kDropoutStream, epoch, batch})};
  ForwardCache cache;
  const DenseMatrix pred = predict(spec, weights_, sub, xs, ys, opts, &cache);

  DenseMatrix truth(label_rows.size(), y_train_.cols());
  for (std::size_t i = 0; i < label_rows.size(); ++i) {
    auto src = y_train_.row(label_rows[i]);
    std::copy(src.begin(), src.end(), truth.row(i).begin());
  }
  LossResult lr = weighted_cross_entropy(pred, truth, omega_, p_.task);
  double l2 = 0.0;
  if (cfg_.l2_weight > 0.0) weights_.for_each_slot([&](const DenseMatrix& m) { l2 += frobenius_sq(m); });
  const double total = lr.loss + 0.5 * cfg_.l2_weight * l2;
  const int e = static_cast<int>(epoch);
  const int b = static_cast<int>(batch);
  if (!std::isfinite(total)) throw TrainingError("non-finite training loss", e, b);

  ModelWeights grad = backward(spec, weights_, cache, lr.grad);
  if (cfg_.l2_weight > 0.0) add_inplace(grad, weights_, cfg_.l2_weight);
  std::vector<DenseMatrix*> params;
  weights_.for_each_slot([&](DenseMatrix& m) { params.push_back(&m); });
  std::vector<const DenseMatrix*> grads;
  grad.for_each_slot([&](const DenseMatrix& m) { grads.push_back(&m); });
  try {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (!params[i]->empty()) adam_[i].step(*params[i], *grads[i]);
  } catch (const NumericsError& err) {
    throw TrainingError(std::string("non-finite gradient: ") + err.what(), e, b);
  }
  ++updates_;
  return total;
}

double Trainer::train_epoch(std::size_t epoch) {
  const std::size_t m = split_.train.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg_.rng_seed + epoch);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t bs = cfg_.batch_size;
  const std::size_t num_batches = (m + bs - 1) / bs;
  auto rows_of = [&](std::size_t b) {
    return std::span<const std::size_t>(order.data() + b * bs, std::min(bs, m - b * bs));
  };
  auto make = [&](std::size_t b) {
    auto rows = rows_of(b);
    std::vector<NodeId> seeds;
    seeds.reserve(rows.size());
    for (std::size_t r : rows) seeds.push_back(split_.train[r]);
    return extract_batch(*p_.graph, seeds, p_.spec->depth, cfg_.sample_caps,
                         derive_seed(cfg_.rng_seed, {kSampleStream, epoch, b}));
  };

  double sum = 0.0;
  std::future<Subgraph> next;
  const bool prefetch = cfg_.num_workers > 0 && num_batches > 1;
  if (prefetch) next = std::async(std::launch::async, make, std::size_t{0});
  for (std::size_t b = 0; b < num_batches; ++b) {
    Subgraph sub = prefetch ? next.get() : make(b);
    if (prefetch && b + 1 < num_batches) next = std::async(std::launch::async, make, b + 1);
    sum += step(sub, rows_of(b), epoch, b);
  }
  return sum / static_cast<double>(num_batches);
}

double Trainer::validation_loss() const {
  const bool have_val = !split_.val.empty();
  const auto& nodes = have_val ? split_.val : split_.train;
  const DenseMatrix& truth = have_val ? y_val_ : y_train_;
  const DenseMatrix pred = predict_nodes(*p_.spec, weights_, *p_.graph, *p_.x, p_.yhat, nodes, p_.task, cfg_);
  return weighted_cross_entropy(pred, truth, omega_, p_.task).loss;
}

TrainResult Trainer::run() {
  TrainResult out;
  EarlyStopState es(cfg_.patience, lr_, cfg_.min_epochs, cfg_.max_consecutive_exhaustions);
  out.weights = weights_;
  out.best_val_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    const double used_lr = lr_;
    const double tl = train_epoch(epoch);
    const double vl = validation_loss();
    if (!std::isfinite(vl)) throw TrainingError("non-finite validation loss", static_cast<int>(epoch), -1);
    out.history.push_back({epoch, tl, vl, used_lr});
    const auto ev = es.update(vl, epoch);
    if (ev == EarlyStopState::Event::Improved) {
      out.weights = weights_;
      out.best_epoch = epoch;
      out.best_val_loss = vl;
    } else if (ev == EarlyStopState::Event::Exhausted) {
      set_learning_rate(es.lr_current());
    } else if (ev == EarlyStopState::Event::Stop) {
      break;
    }
  }
  out.updates = updates_;
  return out;
}

TrainResult train(const TrainingProblem& problem, const SplitSpec& split, const TrainConfig& config,
                  const ModelWeights* initial) {
  Trainer t(problem, split, config, initial);
  return t.run();
}

TrainResult train(const KernelSpec& spec, const Graph& graph, const DenseMatrix& x, const DenseMatrix& y,
                  TaskKind task, const SplitSpec& split, const TrainConfig& config) {
  DenseLabels labels(y);
  TrainingProblem p{&spec, &graph, &x, &labels, task, nullptr};
  return train(p, split, config);
}

DenseMatrix predict_nodes(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                          const DenseMatrix* yhat, std::span<const NodeId> nodes, TaskKind task,
                          const TrainConfig& config) {
  if (spec.uses_labels() && !yhat) throw ConfigError(spec.name + " reads a label channel; provide one");
  DenseMatrix out(nodes.size(), w.output.cols());
  const std::size_t bs = config.batch_size;
  PredictOptions opts{task, false, 0.0, 0};
  for (std::size_t start = 0, b = 0; start < nodes.size(); start += bs, ++b) {
    const auto seeds = nodes.subspan(start, std::min(bs, nodes.size() - start));
    const Subgraph sub =
        extract_batch(graph, seeds, spec.depth, config.sample_caps, derive_seed(config.rng_seed, {kInferStream, b}));
    const DenseMatrix xs = gather_rows(x, sub.global_ids);
    const DenseMatrix ys = spec.uses_labels() ? gather_rows(*yhat, sub.global_ids) : DenseMatrix();
    const DenseMatrix pred = predict(spec, w, sub, xs, ys, opts);
    for (std::size_t i = 0; i < pred.rows(); ++i) {
      auto src = pred.row(i);
      std::copy(src.begin(), src.end(), out.row(start + i).begin());
    }
  }
  return out;
}

EvalResult evaluate(const KernelSpec& spec, const ModelWeights& w, const Graph& graph, const DenseMatrix& x,
                    const LabelSource& labels, std::span<const NodeId> nodes, TaskKind task,
                    const TrainConfig& config, const DenseMatrix* yhat) {
  if (nodes.empty()) throw ArgumentError("evaluate: empty node set");
  const DenseMatrix pred = predict_nodes(spec, w, graph, x, yhat, nodes, task, config);
  const DenseMatrix truth = labels.rows(nodes, LabelUse::Evaluate);
  EvalResult r;
  r.micro_f1 = micro_f1(binarize(pred, task), truth);
  r.loss = weighted_cross_entropy(pred, truth, {}, task).loss;
  return r;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << "epoch,train_loss,val_loss,lr\n";
  for (const auto& h : history)
    out << h.epoch << ',' << format_double(h.train_loss) << ',' << format_double(h.val_loss) << ','
        << format_double(h.lr) << '\n';
}

}  // namespace hopf
