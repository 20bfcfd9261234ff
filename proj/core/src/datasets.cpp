#include "hopf/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "hopf/error.hpp"
#include "hopf/format.hpp"

namespace hopf {

void DatasetBundle::validate() const {
  const std::size_t n = graph.num_nodes();
  if (x.rows() != n) throw IngestError(name + ": feature rows (" + std::to_string(x.rows()) + ") != n (" +
                                       std::to_string(n) + ")");
  if (y.rows() != n) throw IngestError(name + ": label rows (" + std::to_string(y.rows()) + ") != n (" +
                                       std::to_string(n) + ")");
  if (x.cols() == 0 || y.cols() == 0) throw IngestError(name + ": need at least one feature and one label");
  if (!x.all_finite()) throw IngestError(name + ": non-finite feature value");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ones = 0;
    for (double v : y.row(i)) {
      if (v != 0.0 && v != 1.0) throw IngestError(name + ": label matrix must be binary (row " + std::to_string(i) + ")");
      ones += v == 1.0;
    }
    if (task == TaskKind::MultiClass && ones != 1)
      throw IngestError(name + ": multi-class label row " + std::to_string(i) + " is not one-hot");
  }
}

DenseMatrix read_dense_tsv(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw IngestError("missing file " + path.string());
  DenseMatrix m(rows, cols);
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (r >= rows)
      throw IngestError(path.filename().string() + ": more than the " + std::to_string(rows) + " rows declared in meta.json");
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t c = 0; c < cols; ++c) {
      if (c > 0) {
        if (p == end || *p != '\t')
          throw IngestError(path.filename().string() + ":" + std::to_string(r + 1) + ": expected " +
                            std::to_string(cols) + " values");
        ++p;
      }
      auto [next, ec] = std::from_chars(p, end, m(r, c));
      if (ec != std::errc())
        throw IngestError(path.filename().string() + ":" + std::to_string(r + 1) + ": bad number in column " +
                          std::to_string(c + 1));
      p = next;
    }
    if (p != end)
      throw IngestError(path.filename().string() + ":" + std::to_string(r + 1) + ": more than " +
                        std::to_string(cols) + " values");
    ++r;
  }
  if (r != rows)
    throw IngestError(path.filename().string() + ": " + std::to_string(r) + " rows, meta.json declares " +
                      std::to_string(rows));
  return m;
}

void write_dense_tsv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) line += '\t';
      line += format_double(m(r, c));
    }
    line += '\n';
    out << line;
  }
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m, const std::string& row_label) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << row_label;
  for (std::size_t c = 0; c < m.cols(); ++c) out << ",c" << c;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << r;
    for (std::size_t c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IngestError("missing file " + meta_path.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("meta.json: " + std::string(e.what()));
  }
  DatasetBundle b;
  std::size_t n = 0, f = 0, l = 0;
  try {
    b.name = meta.at("name").get<std::string>();
    n = meta.at("n").get<std::size_t>();
    f = meta.at("f").get<std::size_t>();
    l = meta.at("l").get<std::size_t>();
    const auto task = meta.at("task").get<std::string>();
    if (task == "multi_class") b.task = TaskKind::MultiClass;
    else if (task == "multi_label") b.task = TaskKind::MultiLabel;
    else throw IngestError("meta.json: task must be multi_class or multi_label, got '" + task + "'");
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("meta.json: " + std::string(e.what()));
  }
  const auto graph_path = dir / "graph.tsv";
  if (!std::filesystem::exists(graph_path)) throw IngestError("missing file " + graph_path.string());
  try {
    b.graph = build_graph(read_edge_list(graph_path), static_cast<std::int64_t>(n));
  } catch (const IngestError& e) {
    throw IngestError("graph.tsv: " + std::string(e.what()));
  }
  b.x = read_dense_tsv(dir / "features.tsv", n, f);
  b.y = read_dense_tsv(dir / "labels.tsv", n, l);
  b.validate();
  return b;
}

void save_dataset(const std::filesystem::path& dir, const DatasetBundle& b) {
  b.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {{"name", b.name},
                         {"n", b.num_nodes()},
                         {"f", b.num_features()},
                         {"l", b.num_labels()},
                         {"task", std::string(to_string(b.task))}};
  std::ofstream out(dir / "meta.json", std::ios::binary);
  if (!out) throw IngestError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
  out.close();
  write_edge_list(dir / "graph.tsv", b.graph);
  write_dense_tsv(dir / "features.tsv", b.x);
  write_dense_tsv(dir / "labels.tsv", b.y);
}

DenseMatrix row_normalize(const DenseMatrix& x) {
  DenseMatrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double norm = 0.0;
    for (double v : row) norm += std::abs(v);
    if (norm == 0.0) continue;
    for (double& v : row) v /= norm;
  }
  return out;
}

DatasetBundle gen_chain(std::size_t n) {
  if (n < 2) throw ConfigError("gen_chain: n must be >= 2");
  EdgeList edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  DatasetBundle b;
  b.name = "chain";
  b.graph = build_graph(edges, static_cast<std::int64_t>(n));
  b.x = DenseMatrix::identity(n);
  b.y = DenseMatrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) b.y(i, i < n / 2 ? 0 : 1) = 1.0;
  b.task = TaskKind::MultiClass;
  return b;
}

DatasetBundle gen_planted_partition(std::size_t n, std::size_t num_blocks, double p_in, double p_out,
                                    double feature_noise, std::uint64_t rng_seed) {
  if (num_blocks < 1 || n < num_blocks) throw ConfigError("gen_planted_partition: need 1 <= num_blocks <= n");
  if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0))
    throw ConfigError("gen_planted_partition: need 0 <= p_out < p_in <= 1");
  if (!(0.0 <= feature_noise && feature_noise <= 1.0))
    throw ConfigError("gen_planted_partition: feature_noise must lie in [0, 1]");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::size_t> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = i * num_blocks / n;

  EdgeList edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u01(rng) < (block[i] == block[j] ? p_in : p_out)) edges.emplace_back(i, j);

  DatasetBundle b;
  b.name = "planted_partition";
  b.graph = build_graph(edges, static_cast<std::int64_t>(n));
  b.x = DenseMatrix(n, num_blocks);
  b.y = DenseMatrix(n, num_blocks);
  for (std::size_t i = 0; i < n; ++i) {
    b.y(i, block[i]) = 1.0;
    for (std::size_t c = 0; c < num_blocks; ++c) {
      const double bit = c == block[i] ? 1.0 : 0.0;
      b.x(i, c) = u01(rng) < feature_noise ? 1.0 - bit : bit;
    }
  }
  b.task = TaskKind::MultiClass;
  return b;
}

DatasetBundle gen_benchmark_graph(std::size_t n, std::size_t m_edges, std::size_t f, std::size_t l,
                                  std::uint64_t rng_seed) {
  if (n < 2) throw ConfigError("gen_benchmark_graph: n must be >= 2");
  const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m_edges > max_edges)
    throw ConfigError("gen_benchmark_graph: " + std::to_string(m_edges) + " edges exceed the " +
                      std::to_string(max_edges) + " possible on " + std::to_string(n) + " nodes");
  if (m_edges < n - 1) throw ConfigError("gen_benchmark_graph: a connected graph needs m_edges >= n - 1");
  if (f == 0 || l == 0) throw ConfigError("gen_benchmark_graph: f and l must be >= 1");

  std::mt19937_64 rng(rng_seed);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m_edges * 2);
  auto key = [n](std::size_t u, std::size_t v) {
    return static_cast<std::uint64_t>(std::min(u, v)) * n + std::max(u, v);
  };
  EdgeList edges;
  edges.reserve(m_edges);
  // Every endpoint occurrence; a uniform draw from it is degree-proportional.
  std::vector<NodeId> ends;
  ends.reserve(2 * m_edges);
  auto add = [&](std::size_t u, std::size_t v) {
    seen.insert(key(u, v));
    edges.emplace_back(std::min(u, v), std::max(u, v));
    ends.push_back(static_cast<NodeId>(u));
    ends.push_back(static_cast<NodeId>(v));
  };
  auto pick = [&] { return ends[std::uniform_int_distribution<std::size_t>(0, ends.size() - 1)(rng)]; };

  // Preferential-attachment spanning tree keeps the graph connected.
  add(0, 1);
  for (std::size_t v = 2; v < n; ++v) add(v, pick());

  const std::uint64_t remaining = m_edges - edges.size();
  const std::uint64_t free_pairs = max_edges - edges.size();
  if (remaining > 0 && remaining * 2 > free_pairs) {
    // Dense target: sample the missing edges from the explicit complement.
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (!seen.count(key(u, v))) candidates.emplace_back(u, v);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(chosen), remaining, rng);
    for (auto [u, v] : chosen) add(u, v);
  } else {
    while (edges.size() < m_edges) {
      const std::size_t u = pick();
      const std::size_t v = pick();
      if (u == v || seen.count(key(u, v))) continue;
      add(u, v);
    }
  }

  DatasetBundle b;
  b.name = "benchmark";
  b.graph = build_graph(edges, static_cast<std::int64_t>(n));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  b.x = DenseMatrix(n, f);
  for (double& v : b.x.values()) v = u01(rng);
  b.y = DenseMatrix(n, l);
  for (double& v : b.y.values()) v = u01(rng) < 0.2 ? 1.0 : 0.0;
  b.task = TaskKind::MultiLabel;
  return b;
}

double homophily(const DatasetBundle& b) {
  const auto edges = b.graph.edges();
  if (edges.empty()) return 1.0;
  std::size_t same = 0;
  for (const auto& [u, v] : edges) {
    auto yu = b.y.row(static_cast<std::size_t>(u));
    auto yv = b.y.row(static_cast<std::size_t>(v));
    if (b.task == TaskKind::MultiClass) {
      same += std::max_element(yu.begin(), yu.end()) - yu.begin() == std::max_element(yv.begin(), yv.end()) - yv.begin();
    } else {
      bool shared = false;
      for (std::size_t j = 0; j < yu.size() && !shared; ++j) shared = yu[j] != 0.0 && yv[j] != 0.0;
      same += shared;
    }
  }
  return static_cast<double>(same) / static_cast<double>(edges.size());
}

std::size_t count_components(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack;
  std::size_t comps = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++comps;
    seen[s] = 1;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v))
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  return comps;
}

}  // namespace hopf
