#include "hopf/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>

#include "hopf/error.hpp"

namespace hopf {

std::size_t Graph::max_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

double Graph::average_degree() const noexcept {
  const std::size_t n = num_nodes();
  return n == 0 ? 0.0 : 2.0 * static_cast<double>(num_edges()) / static_cast<double>(n);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

EdgeList Graph::edges() const {
  EdgeList out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph build_graph(const EdgeList& edges, std::int64_t n) {
  if (n < 0) throw IngestError("build_graph: negative node count " + std::to_string(n));
  if (static_cast<std::uint64_t>(n) > std::numeric_limits<NodeId>::max())
    throw IngestError("build_graph: node count exceeds id range");

  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw IngestError("build_graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") references a node outside [0, " + std::to_string(n) + ")");
    if (u == v) continue;
    directed.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    directed.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(u));
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  const auto nn = static_cast<std::size_t>(n);
  g.offsets_.assign(nn + 1, 0);
  g.cols_.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    ++g.offsets_[u + 1];
    g.cols_.push_back(v);
  }
  for (std::size_t i = 0; i < nn; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.degrees_.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) g.degrees_[i] = g.offsets_[i + 1] - g.offsets_[i];
  return g;
}

namespace {

void check_seeds(const Graph& g, std::span<const NodeId> seeds) {
  if (seeds.empty()) throw ArgumentError("subgraph: seed set is empty");
  for (NodeId s : seeds)
    if (s >= g.num_nodes())
      throw ArgumentError("subgraph: seed " + std::to_string(s) + " out of range [0, " +
                          std::to_string(g.num_nodes()) + ")");
}

constexpr std::int64_t kUnseen = -1;

// BFS bookkeeping shared by the exact and sampled expansions.
struct BallBuilder {
  const Graph& g;
  std::vector<std::int64_t> local_of;
  Subgraph sub;

  BallBuilder(const Graph& graph, std::span<const NodeId> seeds) : g(graph), local_of(graph.num_nodes(), kUnseen) {
    check_seeds(g, seeds);
    sub.frontier_offsets = {0};
    for (NodeId s : seeds) {
      if (local_of[s] != kUnseen) throw ArgumentError("subgraph: duplicate seed " + std::to_string(s));
      local_of[s] = static_cast<std::int64_t>(sub.global_ids.size());
      sub.global_ids.push_back(s);
    }
    sub.frontier_offsets.push_back(sub.global_ids.size());
  }

  // Appends a new frontier made of `candidates` not seen yet, ascending by id.
  void add_frontier(std::vector<NodeId>& candidates) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (NodeId v : candidates) {
      if (local_of[v] != kUnseen) continue;
      local_of[v] = static_cast<std::int64_t>(sub.global_ids.size());
      sub.global_ids.push_back(v);
    }
    sub.frontier_offsets.push_back(sub.global_ids.size());
  }

  void push_induced_row(NodeId global, std::vector<NodeId>& row) const {
    for (NodeId w : g.neighbors(global))
      if (local_of[w] != kUnseen) row.push_back(static_cast<NodeId>(local_of[w]));
  }

  void finish_degrees() {
    sub.global_degree.resize(sub.global_ids.size());
    for (std::size_t i = 0; i < sub.global_ids.size(); ++i) sub.global_degree[i] = g.degree(sub.global_ids[i]);
  }
};

void append_row(LocalAdjacency& adj, std::vector<NodeId>& row) {
  std::sort(row.begin(), row.end());
  adj.cols.insert(adj.cols.end(), row.begin(), row.end());
  adj.offsets.push_back(adj.cols.size());
  row.clear();
}

}  // namespace

Subgraph khop_subgraph(const Graph& g, std::span<const NodeId> seeds, std::size_t hops) {
  BallBuilder b(g, seeds);
  std::vector<NodeId> candidates;
  for (std::size_t h = 1; h <= hops; ++h) {
    candidates.clear();
    for (std::size_t i = b.sub.frontier_offsets[h - 1]; i < b.sub.frontier_offsets[h]; ++i)
      for (NodeId w : g.neighbors(b.sub.global_ids[i]))
        if (b.local_of[w] == kUnseen) candidates.push_back(w);
    b.add_frontier(candidates);
  }
  std::vector<NodeId> row;
  for (NodeId gid : b.sub.global_ids) {
    if (hops > 0) b.push_induced_row(gid, row);
    append_row(b.sub.adjacency, row);
  }
  b.finish_degrees();
  return std::move(b.sub);
}

Subgraph sample_neighbors(const Graph& g, std::span<const std::size_t> caps, std::span<const NodeId> seeds,
                          std::size_t hops, std::uint64_t rng_seed) {
  if (caps.size() != hops)
    throw ArgumentError("sample_neighbors: expected " + std::to_string(hops) + " caps, got " +
                        std::to_string(caps.size()));
  for (std::size_t c : caps)
    if (c == 0) throw ArgumentError("sample_neighbors: caps must be >= 1");

  BallBuilder b(g, seeds);
  std::mt19937_64 rng(rng_seed);
  // Sampled neighbor lists (global ids) of every expanded node, in local order.
  std::vector<std::vector<NodeId>> sampled;
  std::vector<NodeId> candidates;
  for (std::size_t h = 1; h <= hops; ++h) {
    candidates.clear();
    for (std::size_t i = b.sub.frontier_offsets[h - 1]; i < b.sub.frontier_offsets[h]; ++i) {
      auto nb = g.neighbors(b.sub.global_ids[i]);
      std::vector<NodeId> pick;
      pick.reserve(std::min(nb.size(), caps[h - 1]));
      std::sample(nb.begin(), nb.end(), std::back_inserter(pick), caps[h - 1], rng);
      for (NodeId w : pick)
        if (b.local_of[w] == kUnseen) candidates.push_back(w);
      sampled.push_back(std::move(pick));
    }
    b.add_frontier(candidates);
  }

  std::vector<NodeId> row;
  for (std::size_t i = 0; i < b.sub.global_ids.size(); ++i) {
    if (i < sampled.size()) {
      for (NodeId w : sampled[i]) row.push_back(static_cast<NodeId>(b.local_of[w]));
    } else if (hops > 0) {
      b.push_induced_row(b.sub.global_ids[i], row);
    }
    append_row(b.sub.adjacency, row);
  }
  b.finish_degrees();
  return std::move(b.sub);
}

Subgraph whole_graph(const Graph& g) {
  Subgraph sub;
  const std::size_t n = g.num_nodes();
  sub.global_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) sub.global_ids[i] = static_cast<NodeId>(i);
  sub.frontier_offsets = {0, n};
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = g.neighbors(static_cast<NodeId>(i));
    sub.adjacency.cols.insert(sub.adjacency.cols.end(), nb.begin(), nb.end());
    sub.adjacency.offsets.push_back(sub.adjacency.cols.size());
  }
  sub.global_degree.assign(g.degrees().begin(), g.degrees().end());
  return sub;
}

const char* to_string(NormScheme s) noexcept {
  switch (s) {
    case NormScheme::Mean: return "mean";
    case NormScheme::SymSelf: return "sym_self";
    case NormScheme::Count: return "count";
    case NormScheme::MaxPool: return "maxpool";
  }
  return "?";
}

SparseMatrix normalize_adjacency(const Subgraph& sub, NormScheme scheme) {
  if (scheme == NormScheme::MaxPool)
    throw ArgumentError("normalize_adjacency: maxpool has no matrix form; use maxpool_aggregate");
  const auto& adj = sub.adjacency;
  const std::size_t n = adj.num_nodes();
  std::vector<double> values(adj.num_entries());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = adj.offsets[i + 1] - adj.offsets[i];
    for (std::size_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
      switch (scheme) {
        case NormScheme::Mean:
          values[e] = 1.0 / static_cast<double>(len);
          break;
        case NormScheme::SymSelf: {
          const double di = static_cast<double>(sub.global_degree[i]) + 1.0;
          const double dj = static_cast<double>(sub.global_degree[adj.cols[e]]) + 1.0;
          values[e] = 1.0 / std::sqrt(di * dj);
          break;
        }
        case NormScheme::Count:
          values[e] = 1.0;
          break;
        case NormScheme::MaxPool:
          break;
      }
    }
  }
  return SparseMatrix(n, n, adj.offsets, std::vector<std::uint32_t>(adj.cols.begin(), adj.cols.end()),
                      std::move(values));
}

EdgeList read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open edge list " + path.string());
  EdgeList edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip_ws = [&] {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    };
    skip_ws();
    if (p == end) continue;
    std::int64_t u = 0;
    std::int64_t v = 0;
    auto r1 = std::from_chars(p, end, u);
    if (r1.ec != std::errc()) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": bad source id");
    p = r1.ptr;
    skip_ws();
    auto r2 = std::from_chars(p, end, v);
    if (r2.ec != std::errc()) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": bad target id");
    p = r2.ptr;
    skip_ws();
    if (p != end) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": trailing characters");
    edges.emplace_back(u, v);
  }
  return edges;
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write edge list " + path.string());
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
}

}  // namespace hopf
