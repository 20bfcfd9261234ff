#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/sparse_matrix.hpp"

namespace hopf {

using EdgeList = std::vector<std::pair<std::int64_t, std::int64_t>>;

// Immutable simple undirected graph in CSR form. Each undirected edge is
// stored in both directions; neighbor lists are strictly increasing.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return cols_.size() / 2; }
  std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  std::span<const std::size_t> degrees() const noexcept { return degrees_; }
  std::size_t max_degree() const noexcept;
  // p = 2|E| / n
  double average_degree() const noexcept;

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {cols_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  bool has_edge(NodeId u, NodeId v) const;

  // Each undirected edge once, as (u, v) with u < v, sorted.
  EdgeList edges() const;

  friend Graph build_graph(const EdgeList& edges, std::int64_t n);

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> cols_;
  std::vector<std::size_t> degrees_;
};

// Deduplicates, symmetrizes and strips self-loops. Throws IngestError on ids
// outside [0, n) or negative n.
Graph build_graph(const EdgeList& edges, std::int64_t n);

// Row-oriented local adjacency of a subgraph (local indices).
struct LocalAdjacency {
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> cols;

  std::size_t num_nodes() const noexcept { return offsets.size() - 1; }
  std::span<const NodeId> row(std::size_t i) const noexcept {
    return {cols.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::size_t num_entries() const noexcept { return cols.size(); }
};

// Nodes reachable from a seed batch, seeds first, then one block per hop.
struct Subgraph {
  LocalAdjacency adjacency;
  std::vector<NodeId> global_ids;
  // frontier_offsets[h] .. frontier_offsets[h+1] are the nodes first reached
  // at hop h (h = 0 are the seeds).
  std::vector<std::size_t> frontier_offsets;
  // Degree of each local node in the full graph.
  std::vector<std::size_t> global_degree;

  std::size_t num_nodes() const noexcept { return global_ids.size(); }
  std::size_t num_seeds() const noexcept { return frontier_offsets.size() > 1 ? frontier_offsets[1] : 0; }
  std::size_t num_hops() const noexcept { return frontier_offsets.empty() ? 0 : frontier_offsets.size() - 2; }
};

// BFS ball of radius `hops` around `seeds` with its induced adjacency.
Subgraph khop_subgraph(const Graph& g, std::span<const NodeId> seeds, std::size_t hops);

// Like khop_subgraph, but each node expanded at hop k keeps at most
// caps[k] uniformly sampled neighbors (without replacement). Rows of expanded
// nodes hold only their sampled neighbors; rows of the outermost frontier hold
// their induced neighbors. Deterministic for a fixed rng_seed.
Subgraph sample_neighbors(const Graph& g, std::span<const std::size_t> caps, std::span<const NodeId> seeds,
                          std::size_t hops, std::uint64_t rng_seed);

enum class NormScheme {
  Mean,     // D^-1 A
  SymSelf,  // (D+I)^-1/2 A (D+I)^-1/2
  Count,    // A
  MaxPool,  // realized inside the kernel, never as a matrix
};

const char* to_string(NormScheme s) noexcept;

// F(A) over the subgraph's local adjacency. Mean divides by the local row
// length (zero rows for isolated nodes); SymSelf uses full-graph degrees so
// that entries of truncated frontier rows match the full graph.
SparseMatrix normalize_adjacency(const Subgraph& sub, NormScheme scheme);

// The whole graph as a subgraph whose local ids equal global ids.
Subgraph whole_graph(const Graph& g);

// Edge-list file: `src<TAB>dst` per line, '#' starts a comment.
EdgeList read_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const Graph& g);

}  // namespace hopf
