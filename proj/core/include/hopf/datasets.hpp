#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hopf/dense_matrix.hpp"
#include "hopf/graph.hpp"
#include "hopf/task.hpp"

namespace hopf {

struct DatasetBundle {
  std::string name;
  Graph graph;
  DenseMatrix x;  // n x f
  DenseMatrix y;  // n x l, binary
  TaskKind task = TaskKind::MultiClass;

  std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
  std::size_t num_features() const noexcept { return x.cols(); }
  std::size_t num_labels() const noexcept { return y.cols(); }

  // Throws IngestError when shapes disagree, labels are not binary, or a
  // multi-class row is not one-hot.
  void validate() const;
};

// Directory layout: meta.json {name, n, f, l, task}, graph.tsv (edge list),
// features.tsv and labels.tsv (dense tab-separated rows in node order).
DatasetBundle load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle);

// Dense tab-separated matrix with exactly `rows` x `cols` numbers.
DenseMatrix read_dense_tsv(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
void write_dense_tsv(const std::filesystem::path& path, const DenseMatrix& m);
// Same, with a header line and comma separators.
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m, const std::string& row_label = "node");

// Divides every nonzero row by its 1-norm.
DenseMatrix row_normalize(const DenseMatrix& x);

// Path graph 0-1-...-(n-1), X = I_n, two classes split at the midpoint.
DatasetBundle gen_chain(std::size_t n);

// Stochastic block model with equal-size blocks (remainder spread over the
// first blocks). Label = block; features are the block one-hot with every bit
// flipped independently with probability feature_noise.
DatasetBundle gen_planted_partition(std::size_t n, std::size_t num_blocks, double p_in, double p_out,
                                    double feature_noise, std::uint64_t rng_seed);

// Connected preferential-attachment graph with exactly m_edges edges, uniform
// random features and random multi-label targets.
DatasetBundle gen_benchmark_graph(std::size_t n = 100000, std::size_t m_edges = 500000, std::size_t f = 100,
                                  std::size_t l = 10, std::uint64_t rng_seed = 0);

// Fraction of edges whose endpoints share a label (argmax for multi-class,
// any common label for multi-label).
double homophily(const DatasetBundle& bundle);

// Number of connected components.
std::size_t count_components(const Graph& g);

}  // namespace hopf
