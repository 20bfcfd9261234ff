#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>

#include "fixtures.hpp"
#include "hopf/config_io.hpp"
#include "hopf/datasets.hpp"
#include "hopf/error.hpp"
#include "hopf/training.hpp"

using namespace hopf;
using hopf::testing::random_connected_edges;

namespace {

// Records every label read with its declared use.
class TrackingLabels final : public LabelSource {
 public:
  explicit TrackingLabels(const DenseMatrix& y) : y_(y) {}
  std::size_t num_labels() const override { return y_.cols(); }
  DenseMatrix rows(std::span<const NodeId> ids, LabelUse use) const override {
    std::lock_guard lock(mu_);
    for (NodeId v : ids) reads_.emplace_back(v, use);
    return gather_rows(y_, ids);
  }
  std::set<NodeId> nodes_read(LabelUse use) const {
    std::set<NodeId> out;
    for (auto [v, u] : reads_)
      if (u == use) out.insert(v);
    return out;
  }

 private:
  const DenseMatrix& y_;
  mutable std::mutex mu_;
  mutable std::vector<std::pair<NodeId, LabelUse>> reads_;
};

TrainConfig quick_config(std::size_t d = 8) {
  TrainConfig c;
  c.hidden_dim = d;
  c.max_epochs = 30;
  c.min_epochs = 5;
  c.patience = 5;
  c.batch_size = 16;
  c.rng_seed = 3;
  return c;
}

DatasetBundle small_partition(std::uint64_t seed = 1) { return gen_planted_partition(120, 3, 0.15, 0.01, 0.2, seed); }

}  // namespace

TEST(MakeSplits, HundredNodes) {
  auto folds = make_splits(100, 7);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& s : folds) {
    EXPECT_EQ(s.test.size(), 20u);
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.val.size(), 2u);
    EXPECT_EQ(s.unlabeled.size(), 70u);
    EXPECT_EQ(s.test, folds[0].test);
    std::set<NodeId> all;
    for (const auto* part : {&s.train, &s.val, &s.test, &s.unlabeled}) {
      EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
      all.insert(part->begin(), part->end());
    }
    EXPECT_EQ(all.size(), 100u);
    EXPECT_LT(*all.rbegin(), 100u);
  }
  EXPECT_NE(folds[0].train, folds[1].train);
}

TEST(MakeSplits, DeterministicAndSmallSizes) {
  auto a = make_splits(250, 1, 3);
  auto b = make_splits(250, 1, 3);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(a[f].train, b[f].train);
    EXPECT_EQ(a[f].val, b[f].val);
  }
  auto tiny = make_splits(10, 0, 1);
  EXPECT_EQ(tiny[0].test.size(), 2u);
  EXPECT_EQ(tiny[0].train.size(), 1u);
  EXPECT_TRUE(tiny[0].val.empty());
  EXPECT_THROW(make_splits(9, 0), ConfigError);
  EXPECT_THROW(make_splits(100, 0, 0), ConfigError);
}

TEST(EarlyStop, NoPatienceSpentBeforeMinEpochs) {
  EarlyStopState es(3, 0.01, 50, 2);
  EXPECT_EQ(es.update(1.0, 1), EarlyStopState::Event::Improved);
  for (std::size_t e = 2; e < 50; ++e) EXPECT_EQ(es.update(2.0, e), EarlyStopState::Event::Waiting);
  EXPECT_EQ(es.patience_remaining(), 3u);
  EXPECT_EQ(es.lr_current(), 0.01);
}

TEST(EarlyStop, HalvingScheduleAndStop) {
  EarlyStopState es(4, 0.08, 1, 2);
  es.update(1.0, 1);
  std::vector<EarlyStopState::Event> ev;
  for (std::size_t e = 2; e < 40 && !es.stopped(); ++e) ev.push_back(es.update(2.0, e));
  // 4 waits to exhaust, then a budget of 2, then stop
  const std::vector<EarlyStopState::Event> expect = {
      EarlyStopState::Event::Waiting,   EarlyStopState::Event::Waiting, EarlyStopState::Event::Waiting,
      EarlyStopState::Event::Exhausted, EarlyStopState::Event::Waiting, EarlyStopState::Event::Stop};
  EXPECT_EQ(ev, expect);
  EXPECT_EQ(es.lr_current(), 0.04);
  EXPECT_EQ(es.update(0.1, 100), EarlyStopState::Event::Stop);
}

TEST(EarlyStop, ImprovementResetsConsecutiveCount) {
  EarlyStopState es(2, 1.0, 1, 2);
  es.update(10.0, 1);
  std::size_t epoch = 2;
  es.update(11, epoch++);
  EXPECT_EQ(es.update(11, epoch++), EarlyStopState::Event::Exhausted);
  EXPECT_EQ(es.consecutive_exhaustions(), 1u);
  EXPECT_EQ(es.update(9.0, epoch++), EarlyStopState::Event::Improved);
  EXPECT_EQ(es.consecutive_exhaustions(), 0u);
  EXPECT_EQ(es.patience_budget(), 1u);
  EXPECT_EQ(es.update(9.5, epoch++), EarlyStopState::Event::Exhausted);
  EXPECT_EQ(es.lr_current(), 0.25);
  EXPECT_EQ(es.update(9.5, epoch++), EarlyStopState::Event::Stop);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dropout_rate = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.sample_caps = {0};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Trainer, ZeroLearningRateKeepsWeights) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 2)[0];
  KernelSpec spec = KernelSpec::nip_mean(2, 8);
  TrainConfig cfg = quick_config();
  cfg.learning_rate = 0.0;
  DenseLabels labels(data.y);
  TrainingProblem p{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  Trainer t(p, split, cfg);
  const std::uint64_t before = fingerprint(t.weights());
  for (std::size_t e = 1; e <= 3; ++e) t.train_epoch(e);
  EXPECT_EQ(fingerprint(t.weights()), before);
  EXPECT_GT(t.updates(), 0u);
}

TEST(Trainer, OneUpdatePerEpochWithFullBatch) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 2)[0];
  KernelSpec spec = KernelSpec::gcn(2, 8);
  TrainConfig cfg = quick_config();
  cfg.batch_size = split.train.size();
  DenseLabels labels(data.y);
  TrainingProblem p{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  Trainer t(p, split, cfg);
  for (std::size_t e = 1; e <= 4; ++e) {
    t.train_epoch(e);
    EXPECT_EQ(t.updates(), e);
  }
}

TEST(Trainer, SeparableFeaturesLossDecreases) {
  // features are the exact class one-hot, no graph needed
  DatasetBundle data = gen_planted_partition(200, 4, 0.06, 0.05, 0.0, 5);
  auto split = make_splits(200, 5)[0];
  split.train.insert(split.train.end(), split.unlabeled.begin(), split.unlabeled.begin() + 30);
  std::sort(split.train.begin(), split.train.end());
  KernelSpec spec = KernelSpec::bl_node(1, 8);
  TrainConfig cfg = quick_config();
  cfg.dropout_rate = 0.0;
  cfg.batch_size = split.train.size();
  DenseLabels labels(data.y);
  TrainingProblem p{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  Trainer t(p, split, cfg);
  double prev = t.train_epoch(1);
  for (std::size_t e = 2; e <= 10; ++e) {
    const double cur = t.train_epoch(e);
    EXPECT_LT(cur, prev) << "epoch " << e;
    prev = cur;
  }
}

TEST(Trainer, FitReadsOnlyTrainingLabels) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 4)[1];
  KernelSpec spec = KernelSpec::nip_mean(2, 8);
  TrackingLabels labels(data.y);
  TrainingProblem p{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  TrainConfig cfg = quick_config();
  cfg.num_workers = 2;
  TrainResult r = train(p, split, cfg);
  EXPECT_FALSE(r.history.empty());
  const auto fit = labels.nodes_read(LabelUse::Fit);
  EXPECT_EQ(fit, std::set<NodeId>(split.train.begin(), split.train.end()));
  const auto monitor = labels.nodes_read(LabelUse::Monitor);
  EXPECT_EQ(monitor, std::set<NodeId>(split.val.begin(), split.val.end()));
  EXPECT_TRUE(labels.nodes_read(LabelUse::Evaluate).empty());
  evaluate(spec, r.weights, data.graph, data.x, labels, split.test, data.task, cfg);
  EXPECT_EQ(labels.nodes_read(LabelUse::Evaluate), std::set<NodeId>(split.test.begin(), split.test.end()));
}

TEST(Trainer, EarlyStopBoundsAndHistory) {
  auto data = small_partition(3);
  auto split = make_splits(data.num_nodes(), 1)[0];
  KernelSpec spec = KernelSpec::gs_mean(1, 8);
  TrainConfig cfg = quick_config();
  cfg.max_epochs = 60;
  cfg.min_epochs = 10;
  cfg.patience = 3;
  TrainResult r = train(spec, data.graph, data.x, data.y, data.task, split, cfg);
  ASSERT_FALSE(r.history.empty());
  EXPECT_GE(r.history.size(), std::min<std::size_t>(cfg.min_epochs, cfg.max_epochs));
  EXPECT_LE(r.history.size(), cfg.max_epochs);
  EXPECT_GE(r.best_epoch, 1u);
  double best = r.history[0].val_loss;
  for (const auto& h : r.history) best = std::min(best, h.val_loss);
  EXPECT_EQ(r.best_val_loss, best);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const double ratio = r.history[i - 1].lr / r.history[i].lr;
    EXPECT_TRUE(ratio == 1.0 || ratio == 2.0);
  }
}

TEST(Trainer, DeterministicForFixedSeed) {
  auto data = small_partition(4);
  auto split = make_splits(data.num_nodes(), 4)[0];
  KernelSpec spec = KernelSpec::gcn_s(2, 8);
  TrainConfig cfg = quick_config();
  cfg.sample_caps = {3, 3};
  TrainResult a = train(spec, data.graph, data.x, data.y, data.task, split, cfg);
  cfg.num_workers = 0;
  TrainResult b = train(spec, data.graph, data.x, data.y, data.task, split, cfg);
  EXPECT_EQ(fingerprint(a.weights), fingerprint(b.weights));
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
}

TEST(Trainer, MissingValidationMonitorsTrainingLoss) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 2)[0];
  split.val.clear();
  KernelSpec spec = KernelSpec::nip_mean(1, 8);
  TrainConfig cfg = quick_config();
  cfg.max_epochs = 5;
  TrainResult r = train(spec, data.graph, data.x, data.y, data.task, split, cfg);
  EXPECT_EQ(r.history.size(), 5u);
  for (const auto& h : r.history) EXPECT_TRUE(std::isfinite(h.val_loss));
}

TEST(Trainer, OverfitsFiftyNodes) {
  DatasetBundle data = gen_planted_partition(50, 2, 0.2, 0.05, 0.1, 9);
  data.x = hopf::testing::random_matrix(50, 20, 2, 0.0, 1.0);
  SplitSpec split;
  for (NodeId v = 0; v < 50; ++v) split.train.push_back(v);
  KernelSpec spec = KernelSpec::bl_node(1, 32);
  TrainConfig cfg = quick_config(32);
  cfg.dropout_rate = 0.0;
  cfg.l2_weight = 0.0;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 50;
  cfg.max_epochs = 400;
  cfg.min_epochs = 400;
  TrainResult r = train(spec, data.graph, data.x, data.y, data.task, split, cfg);
  DenseLabels labels(data.y);
  EvalResult e1 = evaluate(spec, r.weights, data.graph, data.x, labels, split.train, data.task, cfg);
  EvalResult e2 = evaluate(spec, r.weights, data.graph, data.x, labels, split.train, data.task, cfg);
  EXPECT_GE(e1.micro_f1, 0.98);
  EXPECT_EQ(e1.micro_f1, e2.micro_f1);
  EXPECT_EQ(e1.loss, e2.loss);
  EXPECT_THROW(evaluate(spec, r.weights, data.graph, data.x, labels, {}, data.task, cfg), ArgumentError);
}

TEST(Trainer, ConfigErrors) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 2)[0];
  DenseLabels labels(data.y);
  KernelSpec spec = KernelSpec::nip_mean(2, 8);
  TrainingProblem p{&spec, &data.graph, &data.x, &labels, data.task, nullptr};
  EXPECT_THROW(Trainer(p, split, quick_config(16)), ConfigError);
  SplitSpec empty = split;
  empty.train.clear();
  EXPECT_THROW(Trainer(p, empty, quick_config()), ConfigError);
  KernelSpec lab = KernelSpec::i_nip_mean(2, 8);
  TrainingProblem pl{&lab, &data.graph, &data.x, &labels, data.task, nullptr};
  EXPECT_THROW(Trainer(pl, split, quick_config()), ConfigError);
  TrainConfig caps = quick_config();
  caps.sample_caps = {2};
  EXPECT_THROW(train(p, split, caps), ConfigError);
}

TEST(Trainer, DivergenceRaisesTrainingError) {
  auto data = small_partition();
  auto split = make_splits(data.num_nodes(), 2)[0];
  DenseMatrix x = data.x;
  x(split.train[0], 0) = std::numeric_limits<double>::infinity();
  KernelSpec spec = KernelSpec::bl_node(1, 8);
  try {
    train(spec, data.graph, x, data.y, data.task, split, quick_config());
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.epoch(), 1);
    EXPECT_GE(e.batch(), 0);
  }
}

TEST(HistoryCsv, Header) {
  const auto path = std::filesystem::temp_directory_path() / "hopf_history_test.csv";
  const EpochRecord recs[] = {{1, 0.5, 0.25, 0.01}};
  write_history_csv(path, recs);
  std::ifstream in(path);
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(a, "epoch,train_loss,val_loss,lr");
  EXPECT_EQ(b, "1,0.5,0.25,0.01");
  std::filesystem::remove(path);
}

TEST(RunConfig, ParseAndRoundTrip) {
  RunConfig c = parse_run_config(R"({"batch_size": 32, "hidden_dim": 4, "C": 2, "T": 3, "warm_start": false,
                                     "theta_mode": "labels", "sample_caps": [5, 3]})");
  EXPECT_EQ(c.train.batch_size, 32u);
  EXPECT_EQ(c.train.hidden_dim, 4u);
  EXPECT_EQ(c.train.sample_caps, (std::vector<std::size_t>{5, 3}));
  EXPECT_EQ(c.hopf.C, 2u);
  EXPECT_EQ(c.hopf.T, 3u);
  EXPECT_FALSE(c.hopf.warm_start);
  EXPECT_EQ(c.train.learning_rate, TrainConfig{}.learning_rate);
  RunConfig again = parse_run_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_THROW(parse_run_config(R"({"batchsize": 3})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"batch_size": "x"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"theta_mode": "features"})"), ConfigError);
  EXPECT_THROW(parse_run_config("[1, 2"), ConfigError);
}
