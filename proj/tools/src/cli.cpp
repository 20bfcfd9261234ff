#include "hopf_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopf/comparison.hpp"
#include "hopf/config_io.hpp"
#include "hopf/datasets.hpp"
#include "hopf/error.hpp"
#include "hopf/format.hpp"
#include "hopf/iterative.hpp"
#include "hopf/nim.hpp"
#include "hopf/objectives.hpp"
#include "hopf_cli/bench.hpp"
#include "hopf_cli/manifest.hpp"

namespace hopf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t_).count();
    t_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

struct TimingRow {
  std::string phase;
  int fold = -1;
  int iteration = -1;
  double seconds = 0.0;
};

void write_timings(const fs::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << "phase,fold,iteration,seconds\n";
  for (const auto& r : rows) {
    out << r.phase << ',';
    if (r.fold >= 0) out << r.fold;
    out << ',';
    if (r.iteration >= 0) out << r.iteration;
    out << ',' << format_double(r.seconds) << '\n';
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  return out;
}

// Left-aligned first column, right-aligned rest.
void print_table(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> w(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) {
      if (c > 0) os << "  ";
      if (c == 0) os << std::left << std::setw(static_cast<int>(w[c])) << r[c];
      else os << std::right << std::setw(static_cast<int>(w[c])) << r[c];
    }
    os << '\n';
  }
  os << std::left;
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Options shared by the verbs that train on a dataset directory.
struct DataArgs {
  std::string dataset;
  std::string config;
  std::string out;
  std::size_t folds = 5;
  std::optional<std::uint64_t> seed;
  bool raw_features = false;

  void add_to(CLI::App* app) {
    app->add_option("--dataset", dataset, "Dataset directory (meta.json, graph.tsv, features.tsv, labels.tsv)")
        ->required();
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--folds", folds, "Number of splits")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Overrides rng_seed from the configuration");
    app->add_flag("--raw-features", raw_features, "Skip feature row normalization");
  }
};

struct LoadedRun {
  DatasetBundle data;
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<SplitSpec> splits;
  json dataset;  // described before normalization
};

LoadedRun load_run(const DataArgs& a) {
  LoadedRun r;
  if (!a.config.empty()) r.config = read_run_config(a.config);
  if (a.seed) r.config.train.rng_seed = *a.seed;
  r.config.train.validate();
  r.seed = r.config.train.rng_seed;
  r.data = load_dataset(a.dataset);
  r.dataset = describe_dataset(r.data, a.dataset);
  if (!a.raw_features) r.data.x = row_normalize(r.data.x);
  r.splits = make_splits(r.data.num_nodes(), r.seed, a.folds);
  return r;
}

json seeds_json(std::uint64_t seed, std::size_t folds) {
  json train = json::array();
  for (std::size_t f = 0; f < folds; ++f) train.push_back(seed + f);
  return {{"split", seed}, {"train_per_fold", train}};
}

RunManifest start_manifest(const std::string& command, const std::vector<std::string>& argv, const LoadedRun& r,
                           const DataArgs& a) {
  RunManifest m;
  m.command = command;
  m.argv = argv;
  m.config = json::parse(to_json(r.config));
  m.config["folds"] = a.folds;
  m.config["raw_features"] = a.raw_features;
  m.seeds = seeds_json(r.seed, a.folds);
  m.dataset = r.dataset;
  return m;
}

TrainConfig fold_config(const LoadedRun& r, std::size_t fold) {
  TrainConfig cfg = r.config.train;
  cfg.rng_seed = r.seed + fold;
  return cfg;
}

double mean_of(const std::vector<MetricsRecord>& recs) {
  double s = 0.0;
  for (const auto& r : recs) s += r.micro_f1;
  return recs.empty() ? 0.0 : s / static_cast<double>(recs.size());
}

void print_fold_summary(std::ostream& out, const std::string& model, const std::vector<MetricsRecord>& recs) {
  std::vector<std::vector<std::string>> rows{{"fold", "micro_f1", "loss"}};
  for (const auto& r : recs) rows.push_back({std::to_string(r.fold), fixed(r.micro_f1, 4), fixed(r.loss, 4)});
  print_table(out, rows);
  out << model << " mean micro-F1 over " << recs.size() << " fold(s): " << fixed(mean_of(recs), 4) << '\n';
}

// ---- gen ----

struct GenArgs {
  std::string kind = "planted";
  std::string out;
  std::optional<std::size_t> n;
  std::size_t blocks = 4;
  double p_in = 0.05;
  double p_out = 0.002;
  double noise = 0.4;
  std::size_t edges = 500000;
  std::size_t features = 100;
  std::size_t labels = 10;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Stopwatch sw;
  DatasetBundle b;
  json params;
  if (a.kind == "chain") {
    const std::size_t n = a.n.value_or(6);
    b = gen_chain(n);
    params = {{"n", n}};
  } else if (a.kind == "planted") {
    const std::size_t n = a.n.value_or(400);
    b = gen_planted_partition(n, a.blocks, a.p_in, a.p_out, a.noise, a.seed);
    params = {{"n", n}, {"blocks", a.blocks}, {"p_in", a.p_in}, {"p_out", a.p_out}, {"noise", a.noise}};
  } else {
    const std::size_t n = a.n.value_or(100000);
    b = gen_benchmark_graph(n, a.edges, a.features, a.labels, a.seed);
    params = {{"n", n}, {"edges", a.edges}, {"features", a.features}, {"labels", a.labels}};
  }
  const double gen_s = sw.lap();
  RunManifest m;
  m.command = "gen";
  m.argv = argv;
  m.config = {{"kind", a.kind}, {"params", params}};
  m.seeds = {{"generator", a.seed}};
  m.dataset = describe_dataset(b, "generated");
  m.write(a.out);
  save_dataset(a.out, b);
  const double write_s = sw.lap();
  m.timings = {{"generate", gen_s}, {"write", write_s}};
  write_timings(fs::path(a.out) / "timings.csv", {{"generate", -1, -1, gen_s}, {"write", -1, -1, write_s}});
  m.write(a.out);
  out << "wrote " << b.name << " (n=" << b.num_nodes() << ", m=" << b.graph.num_edges() << ", f=" << b.num_features()
      << ", l=" << b.num_labels() << ") to " << a.out << '\n';
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  DataArgs data;
  std::string model;
  std::size_t hops = 2;
  std::vector<std::size_t> sample_caps;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Stopwatch sw;
  LoadedRun r = load_run(a.data);
  r.config.train.sample_caps = a.sample_caps;
  const KernelSpec spec = make_kernel(a.model, a.hops, r.config.train.hidden_dim);
  if (!spec.differentiable) throw UsageError(a.model + " has no parameters to train");
  if (spec.uses_labels())
    throw UsageError(a.model + " reads predicted labels; run it with the hopf verb");
  if (!a.sample_caps.empty() && a.sample_caps.size() != a.hops)
    throw UsageError("--sample-caps needs one cap per hop (" + std::to_string(a.hops) + ")");
  RunManifest m = start_manifest("train", argv, r, a.data);
  m.config["model"] = a.model;
  m.config["hops"] = a.hops;
  std::vector<TimingRow> timings{{"load", -1, -1, sw.lap()}};
  m.write(a.data.out);

  const fs::path dir = a.data.out;
  std::vector<MetricsRecord> recs;
  auto traj = open_out(dir / "trajectory.csv");
  traj << "fold,epoch,train_loss,val_loss,lr\n";
  DenseLabels labels(r.data.y);
  for (std::size_t f = 0; f < r.splits.size(); ++f) {
    const TrainConfig cfg = fold_config(r, f);
    TrainingProblem problem{&spec, &r.data.graph, &r.data.x, &labels, r.data.task, nullptr};
    const TrainResult tr = train(problem, r.splits[f], cfg);
    timings.push_back({"train", static_cast<int>(f), -1, sw.lap()});
    const EvalResult ev =
        evaluate(spec, tr.weights, r.data.graph, r.data.x, labels, r.splits[f].test, r.data.task, cfg);
    timings.push_back({"evaluate", static_cast<int>(f), -1, sw.lap()});
    recs.push_back({a.model, r.data.name, static_cast<int>(f), ev.micro_f1, ev.loss});
    for (const auto& h : tr.history)
      traj << f << ',' << h.epoch << ',' << format_double(h.train_loss) << ',' << format_double(h.val_loss) << ','
           << format_double(h.lr) << '\n';
  }
  write_metrics_csv(dir / "metrics.csv", recs);
  write_timings(dir / "timings.csv", timings);
  for (const auto& t : timings)
    m.timings.emplace_back(t.phase + (t.fold >= 0 ? "/fold" + std::to_string(t.fold) : ""), t.seconds);
  m.write(dir);
  print_fold_summary(out, a.model, recs);
  return kExitOk;
}

// ---- hopf ----

struct HopfArgs {
  DataArgs data;
  std::string model = "i_nip_mean";
  std::optional<std::size_t> C;
  std::optional<std::size_t> T;
  bool cold_start = false;
  bool shifted = false;
};

int cmd_hopf(const HopfArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Stopwatch sw;
  if (a.model != "i_nip_mean" && a.model != "ss_ica")
    throw UsageError("hopf runs i_nip_mean or ss_ica, got '" + a.model + "'");
  LoadedRun r = load_run(a.data);
  HopfConfig& hc = r.config.hopf;
  if (a.C) hc.C = *a.C;
  if (a.T) hc.T = *a.T;
  if (a.cold_start) hc.warm_start = false;
  if (a.shifted) hc.shifted_averaging = true;
  hc.validate();
  const KernelSpec spec = make_kernel(a.model, hc.C, r.config.train.hidden_dim);
  RunManifest m = start_manifest("hopf", argv, r, a.data);
  m.config["model"] = a.model;
  std::vector<TimingRow> timings{{"load", -1, -1, sw.lap()}};
  m.write(a.data.out);

  const fs::path dir = a.data.out;
  std::vector<MetricsRecord> recs;
  auto traj = open_out(dir / "trajectory.csv");
  traj << "fold,iteration,micro_f1,epochs,best_val_loss\n";
  DenseLabels labels(r.data.y);
  for (std::size_t f = 0; f < r.splits.size(); ++f) {
    const TrainConfig cfg = fold_config(r, f);
    const SplitSpec& split = r.splits[f];
    const HopfResult res = run_hopf(spec, r.data.graph, r.data.x, labels, r.data.task, split, cfg, hc);
    sw.lap();
    for (const auto& rec : res.trajectory) {
      traj << f << ',' << rec.iteration << ',' << format_double(rec.micro_f1) << ',' << rec.epochs << ','
           << format_double(rec.best_val_loss) << '\n';
      timings.push_back({"train", static_cast<int>(f), static_cast<int>(rec.iteration), rec.train_seconds});
      timings.push_back({"infer", static_cast<int>(f), static_cast<int>(rec.iteration), rec.infer_seconds});
    }
    const DenseMatrix pred = gather_rows(res.ytilde, split.test);
    const DenseMatrix truth = labels.rows(split.test, LabelUse::Evaluate);
    recs.push_back({a.model, r.data.name, static_cast<int>(f), res.trajectory.back().micro_f1,
                    weighted_cross_entropy(pred, truth, {}, r.data.task).loss});
    write_matrix_csv(dir / ("yhat_fold" + std::to_string(f) + ".csv"), res.yhat);
    timings.push_back({"write", static_cast<int>(f), -1, sw.lap()});
  }
  write_metrics_csv(dir / "metrics.csv", recs);
  write_timings(dir / "timings.csv", timings);
  for (const auto& t : timings)
    m.timings.emplace_back(t.phase + (t.fold >= 0 ? "/fold" + std::to_string(t.fold) : "") +
                               (t.iteration >= 0 ? "/t" + std::to_string(t.iteration) : ""),
                           t.seconds);
  m.write(dir);
  print_fold_summary(out, a.model, recs);
  return kExitOk;
}

// ---- neighbor-fraction ----

struct FractionArgs {
  DataArgs data;
  std::string model = "nip_mean";
  std::size_t hops = 2;
  std::vector<double> fractions{0.1, 0.25, 0.5, 1.0};
};

int cmd_neighbor_fraction(const FractionArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  Stopwatch sw;
  for (double f : a.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("fractions must lie in (0, 1], got " + format_double(f));
  LoadedRun r = load_run(a.data);
  const KernelSpec spec = make_kernel(a.model, a.hops, r.config.train.hidden_dim);
  if (!spec.differentiable || spec.uses_labels())
    throw UsageError("neighbor-fraction trains single-pass kernels, got '" + a.model + "'");
  RunManifest m = start_manifest("neighbor-fraction", argv, r, a.data);
  m.config["model"] = a.model;
  m.config["hops"] = a.hops;
  m.config["fractions"] = a.fractions;
  m.config["max_degree"] = r.data.graph.max_degree();
  std::vector<TimingRow> timings{{"load", -1, -1, sw.lap()}};
  m.write(a.data.out);

  const fs::path dir = a.data.out;
  auto csv = open_out(dir / "metrics.csv");
  csv << "fraction,cap,fold,micro_f1,loss\n";
  std::vector<std::vector<std::string>> table{{"fraction", "cap", "mean_micro_f1"}};
  DenseLabels labels(r.data.y);
  const std::size_t max_deg = std::max<std::size_t>(r.data.graph.max_degree(), 1);
  for (double frac : a.fractions) {
    const auto cap = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(max_deg)));
    double sum = 0.0;
    for (std::size_t f = 0; f < r.splits.size(); ++f) {
      TrainConfig cfg = fold_config(r, f);
      cfg.sample_caps.assign(a.hops, cap);
      TrainingProblem problem{&spec, &r.data.graph, &r.data.x, &labels, r.data.task, nullptr};
      const TrainResult tr = train(problem, r.splits[f], cfg);
      const EvalResult ev =
          evaluate(spec, tr.weights, r.data.graph, r.data.x, labels, r.splits[f].test, r.data.task, cfg);
      csv << format_double(frac) << ',' << cap << ',' << f << ',' << format_double(ev.micro_f1) << ','
          << format_double(ev.loss) << '\n';
      sum += ev.micro_f1;
      timings.push_back({"fraction_" + format_double(frac), static_cast<int>(f), -1, sw.lap()});
    }
    table.push_back({format_double(frac), std::to_string(cap), fixed(sum / static_cast<double>(r.splits.size()), 4)});
  }
  csv.close();
  write_timings(dir / "timings.csv", timings);
  for (const auto& t : timings) m.timings.emplace_back(t.phase + "/fold" + std::to_string(t.fold), t.seconds);
  m.write(dir);
  print_table(out, table);
  return kExitOk;
}

// ---- bench-scaling ----

struct BenchArgs {
  std::string dataset;
  std::string out;
  std::size_t n = 100000;
  std::size_t edges = 500000;
  std::size_t features = 100;
  std::size_t labels = 10;
  double memory_budget_gib = 4.0;
  ScalingOptions opts;
};

int cmd_bench_scaling(BenchArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  Stopwatch sw;
  if (!(a.memory_budget_gib > 0.0)) throw UsageError("--memory-budget must be positive");
  a.opts.memory_budget_bytes = static_cast<std::size_t>(a.memory_budget_gib * static_cast<double>(1ull << 30));
  for (const auto& v : a.opts.variants) parse_variant(v);
  DatasetBundle data;
  std::string source;
  if (!a.dataset.empty()) {
    data = load_dataset(a.dataset);
    source = a.dataset;
  } else {
    data = gen_benchmark_graph(a.n, a.edges, a.features, a.labels, a.opts.rng_seed);
    source = "generated";
  }
  const json described = describe_dataset(data, source);
  data.x = row_normalize(data.x);
  const SplitSpec split = make_splits(data.num_nodes(), a.opts.rng_seed, 1)[0];

  RunManifest m;
  m.command = "bench-scaling";
  m.argv = argv;
  m.config = {{"hops", a.opts.hops},
              {"variants", a.opts.variants},
              {"repeats", a.opts.repeats},
              {"warmup", a.opts.warmup},
              {"batch_size", a.opts.batch_size},
              {"hidden_dim", a.opts.hidden_dim},
              {"num_workers", a.opts.num_workers},
              {"memory_budget_bytes", a.opts.memory_budget_bytes}};
  m.seeds = {{"generator", a.opts.rng_seed}, {"split", a.opts.rng_seed}, {"train", a.opts.rng_seed}};
  m.dataset = described;
  m.timings.emplace_back("prepare", sw.lap());
  m.write(a.out);

  const auto cells = bench_scaling(data, split, a.opts);
  const fs::path dir = a.out;
  {
    auto csv = open_out(dir / "metrics.csv");
    csv << "variant,K,C,T,status,activation_bytes\n";
    for (const auto& c : cells)
      csv << c.variant << ',' << c.K << ',' << c.C << ',' << c.T << ',' << c.status << ',' << c.peak_activation_bytes
          << '\n';
  }
  {
    auto csv = open_out(dir / "timings.csv");
    csv << "variant,K,C,T,status,repeat,epoch_seconds\n";
    for (const auto& c : cells) {
      if (c.epoch_seconds.empty())
        csv << c.variant << ',' << c.K << ',' << c.C << ',' << c.T << ',' << c.status << ",,\n";
      for (std::size_t i = 0; i < c.epoch_seconds.size(); ++i)
        csv << c.variant << ',' << c.K << ',' << c.C << ',' << c.T << ',' << c.status << ',' << i << ','
            << format_double(c.epoch_seconds[i]) << '\n';
    }
  }
  m.timings.emplace_back("bench", sw.lap());
  m.write(dir);

  std::vector<std::vector<std::string>> table{{"variant"}};
  for (std::size_t K : a.opts.hops) table[0].push_back("K=" + std::to_string(K));
  for (const auto& v : a.opts.variants) {
    std::vector<std::string> row{v};
    for (std::size_t K : a.opts.hops)
      for (const auto& c : cells)
        if (c.variant == v && c.K == K) row.push_back(c.status == "ok" ? fixed(c.mean_seconds(), 4) + "s" : c.status);
    table.push_back(row);
  }
  out << "mean epoch time (n=" << data.num_nodes() << ", m=" << data.graph.num_edges() << ")\n";
  print_table(out, table);
  return kExitOk;
}

// ---- nim ----

struct NimArgs {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t max_k = 10;
  bool skip = false;
  std::string out;
};

int cmd_nim(const NimArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  if (a.alpha == 0.0 && a.beta == 0.0) throw UsageError("--alpha and --beta cannot both be 0");
  if (a.alpha < 0.0 || a.beta < 0.0) throw UsageError("--alpha and --beta must be non-negative");
  std::ostringstream csv;
  csv << "k,importance" << (a.skip ? ",importance_skip" : "") << '\n';
  for (std::size_t k = 0; k <= a.max_k; ++k) {
    csv << k << ',' << format_double(nim_relative_importance(a.alpha, a.beta, k, false));
    if (a.skip) csv << ',' << format_double(nim_relative_importance(a.alpha, a.beta, k, true));
    csv << '\n';
  }
  if (!a.out.empty()) {
    RunManifest m;
    m.command = "nim";
    m.argv = argv;
    m.config = {{"alpha", a.alpha}, {"beta", a.beta}, {"max_k", a.max_k}, {"skip", a.skip}};
    m.write(a.out);
    open_out(fs::path(a.out) / "metrics.csv") << csv.str();
  }
  out << csv.str();
  return kExitOk;
}

// ---- compare ----

struct CompareArgs {
  std::string scores;
  bool detail = false;
  std::string out;
};

int cmd_compare(const CompareArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const ScoreTable t = read_score_csv(a.scores);
  const auto standings = compare_models(t);
  const auto cells = shortfall_cells(t);
  if (!a.out.empty()) {
    RunManifest m;
    m.command = "compare";
    m.argv = argv;
    m.config = {{"scores", a.scores}, {"detail", a.detail}};
    std::ifstream in(a.scores, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    m.dataset = {{"source", a.scores}, {"sha256", sha256_hex(buf.str())}};
    m.write(a.out);
    auto csv = open_out(fs::path(a.out) / "metrics.csv");
    csv << "model,shortfall,average_rank,datasets\n";
    for (const auto& s : standings)
      csv << s.model << ',' << format_double(s.shortfall) << ',' << format_double(s.average_rank) << ','
          << s.datasets << '\n';
    auto det = open_out(fs::path(a.out) / "shortfall_cells.csv");
    det << "model,dataset,micro_f1,shortfall\n";
    for (std::size_t mi = 0; mi < t.models.size(); ++mi)
      for (std::size_t d = 0; d < t.datasets.size(); ++d)
        if (auto s = t.get(mi, d))
          det << t.models[mi] << ',' << t.datasets[d] << ',' << format_double(*s) << ','
              << format_double(*cells[mi][d]) << '\n';
  }
  std::vector<std::vector<std::string>> rows{{"model", "shortfall", "avg_rank", "datasets"}};
  for (const auto& s : standings)
    rows.push_back({s.model, fixed(s.shortfall, 4), fixed(s.average_rank, 2), std::to_string(s.datasets)});
  print_table(out, rows);
  if (a.detail) {
    out << '\n';
    std::vector<std::vector<std::string>> det{{"model", "dataset", "micro_f1", "shortfall"}};
    for (std::size_t mi = 0; mi < t.models.size(); ++mi)
      for (std::size_t d = 0; d < t.datasets.size(); ++d)
        if (auto s = t.get(mi, d))
          det.push_back({t.models[mi], t.datasets[d], format_double(*s), fixed(*cells[mi][d], 5)});
    print_table(out, det);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collective classification with propagation kernels", "hopf"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic dataset directory");
  g->add_option("--kind", gen.kind, "chain | planted | benchmark")
      ->check(CLI::IsMember({"chain", "planted", "benchmark"}));
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--n", gen.n, "Number of nodes");
  g->add_option("--blocks", gen.blocks, "Planted partition: number of blocks");
  g->add_option("--p-in", gen.p_in, "Planted partition: intra-block edge probability");
  g->add_option("--p-out", gen.p_out, "Planted partition: inter-block edge probability");
  g->add_option("--noise", gen.noise, "Planted partition: feature flip probability");
  g->add_option("--edges", gen.edges, "Benchmark graph: number of edges");
  g->add_option("--features", gen.features, "Benchmark graph: number of features");
  g->add_option("--labels", gen.labels, "Benchmark graph: number of labels");
  g->add_option("--seed", gen.seed, "Generator seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a kernel over several splits");
  tr.data.add_to(t);
  t->add_option("--model", tr.model, "Registry kernel name")->required();
  t->add_option("--hops", tr.hops, "Kernel depth")->check(CLI::PositiveNumber);
  t->add_option("--sample-caps", tr.sample_caps, "Per-hop neighbor caps, e.g. 25,10")->delimiter(',');

  HopfArgs hp;
  auto* h = app.add_subcommand("hopf", "Iterative label propagation runs");
  hp.data.add_to(h);
  h->add_option("--model", hp.model, "i_nip_mean or ss_ica");
  h->add_option("-C", hp.C, "Differentiable hops per iteration")->check(CLI::PositiveNumber);
  h->add_option("-T", hp.T, "Iterations")->check(CLI::PositiveNumber);
  h->add_flag("--cold-start", hp.cold_start, "Fresh weights every iteration");
  h->add_flag("--shifted", hp.shifted, "Weight fresh labels by (T - t + 1) / T");

  FractionArgs nf;
  auto* f = app.add_subcommand("neighbor-fraction", "Accuracy against the share of neighbors sampled");
  nf.data.add_to(f);
  f->add_option("--model", nf.model, "Registry kernel name");
  f->add_option("--hops", nf.hops, "Kernel depth")->check(CLI::PositiveNumber);
  f->add_option("--fractions", nf.fractions, "Comma-separated fractions in (0, 1]")->delimiter(',');

  BenchArgs bs;
  auto* b = app.add_subcommand("bench-scaling", "Epoch time against total hops");
  b->add_option("--dataset", bs.dataset, "Dataset directory; a benchmark graph is generated when absent");
  b->add_option("--out", bs.out, "Output directory")->required();
  b->add_option("--n", bs.n, "Generated graph: nodes");
  b->add_option("--edges", bs.edges, "Generated graph: edges");
  b->add_option("--features", bs.features, "Generated graph: features");
  b->add_option("--labels", bs.labels, "Generated graph: labels");
  b->add_option("--hops", bs.opts.hops, "Total hops K")->delimiter(',');
  b->add_option("--variants", bs.opts.variants, "nip_mean, i_nip_mean_c<C>, or any trainable kernel")
      ->delimiter(',');
  b->add_option("--repeats", bs.opts.repeats, "Timed epochs per cell")->check(CLI::PositiveNumber);
  b->add_option("--warmup", bs.opts.warmup, "Untimed epochs per cell");
  b->add_option("--batch-size", bs.opts.batch_size)->check(CLI::PositiveNumber);
  b->add_option("--hidden", bs.opts.hidden_dim)->check(CLI::PositiveNumber);
  b->add_option("--workers", bs.opts.num_workers, "Prefetch workers (0 disables prefetch)");
  b->add_option("--memory-budget", bs.memory_budget_gib, "Activation budget in GiB");
  b->add_option("--seed", bs.opts.rng_seed);

  NimArgs nm;
  auto* n = app.add_subcommand("nim", "Relative importance of h_0 against depth");
  n->add_option("--alpha", nm.alpha)->required();
  n->add_option("--beta", nm.beta)->required();
  n->add_option("--max-k", nm.max_k)->required();
  n->add_flag("--skip", nm.skip, "Add the skip-connection column");
  n->add_option("--out", nm.out, "Also write manifest.json and metrics.csv here");

  CompareArgs cp;
  auto* c = app.add_subcommand("compare", "Shortfall and average rank from a score table");
  c->add_option("--scores", cp.scores, "CSV with model,dataset,micro_f1 columns")->required();
  c->add_flag("--detail", cp.detail, "Print per-cell shortfalls");
  c->add_option("--out", cp.out, "Also write manifest.json and CSV tables here");

  std::vector<std::string> argv_full{"hopf"};
  argv_full.insert(argv_full.end(), args.begin(), args.end());
  std::vector<char*> cargv;
  for (auto& s : argv_full) cargv.push_back(s.data());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen, args, out);
    if (*t) return cmd_train(tr, args, out);
    if (*h) return cmd_hopf(hp, args, out);
    if (*f) return cmd_neighbor_fraction(nf, args, out);
    if (*b) return cmd_bench_scaling(bs, args, out);
    if (*n) return cmd_nim(nm, args, out);
    if (*c) return cmd_compare(cp, args, out);
  } catch (const TrainingError& e) {
    err << "error: training diverged: " << e.what() << " (";
    if (e.iteration() > 0) err << "iteration " << e.iteration() << ", ";
    err << "epoch " << e.epoch() << ", batch " << e.batch() << ")\n";
    return kExitFailure;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hopf::cli
