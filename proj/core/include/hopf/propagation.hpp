#pragma once

#include <cstdint>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/graph.hpp"
#include "hopf/kernel_spec.hpp"
#include "hopf/model.hpp"
#include "hopf/task.hpp"

namespace hopf {

struct PredictOptions {
  TaskKind task = TaskKind::MultiClass;
  // Dropout is applied only when training is set.
  bool training = false;
  double dropout_rate = 0.0;
  std::uint64_t dropout_seed = 0;
};

// Everything backward() needs from one predict() call. Layer k is evaluated
// only on the rows that can still reach a seed in C - k hops, so row counts
// shrink with depth (rows[C] == number of seeds).
struct ForwardCache {
  struct Layer {
    DenseMatrix pre;         // pre-activation (concat layout for Combine::Concat)
    DenseMatrix h;           // post-activation, skip added
    DenseMatrix h_drop;      // h after dropout; feeds the next layer
    DenseMatrix mask;        // dropout mask, empty when dropout is off
    DenseMatrix neighbor_agg;  // F(A) Psi_k for matrix schemes, Psi_k for maxpool
    DenseMatrix node_term;   // alpha * Phi_k W^phi (kept for the projected skip)
    std::vector<std::int64_t> argmax;  // maxpool winners, -1 for empty rows
    std::vector<double> alpha;         // per-row node weight, empty when alpha = 1
  };
  std::vector<std::size_t> rows;  // rows[k] for k = 0..C
  DenseMatrix x_drop;             // X after input dropout (rows[0] rows)
  DenseMatrix x_mask;
  std::vector<Layer> layers;      // layers[0] holds h_0
  SparseMatrix fa;                // F(A), empty for maxpool
  DenseMatrix yhat;               // label input rows used (rows[0] x l), may be empty
  DenseMatrix output;             // seeds x l
  TaskKind task = TaskKind::MultiClass;
  std::uint64_t weights_fingerprint = 0;

  std::size_t bytes() const;
};

// Number of rows evaluated at layer k for this subgraph.
std::size_t layer_rows(const KernelSpec& spec, const Subgraph& sub, std::size_t k);

// Forward pass over a subgraph. `x_slice` and `yhat_slice` are indexed by
// local node id (sub.num_nodes() rows); `yhat_slice` may be empty when the
// kernel has no label channel. Returns the prediction for the seed prefix.
DenseMatrix predict(const KernelSpec& spec, const ModelWeights& w, const Subgraph& sub, const DenseMatrix& x_slice,
                    const DenseMatrix& yhat_slice, const PredictOptions& opts, ForwardCache* cache = nullptr);

// Reverse pass. `d_output` is dLoss/dY~ for the seed rows. Tied kernels get
// their gradient summed in the node slot. The label channel receives no
// gradient. Throws StateError when `w` is not the weights `cache` was built with.
ModelWeights backward(const KernelSpec& spec, const ModelWeights& w, const ForwardCache& cache,
                      const DenseMatrix& d_output);

// out[i][j] = max over neighbors u of i of features[u][j]; zero rows for
// isolated nodes. `argmax` (optional) receives the winning local id per cell.
DenseMatrix maxpool_aggregate(const Subgraph& sub, const DenseMatrix& features,
                              std::vector<std::int64_t>* argmax = nullptr);

// Upper bound on activation bytes predict+backward allocate for this batch.
std::size_t estimate_activation_bytes(const KernelSpec& spec, const Subgraph& sub, std::size_t num_features,
                                      std::size_t num_labels);

}  // namespace hopf
