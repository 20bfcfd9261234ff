#include "hopf/propagation.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "hopf/error.hpp"
#include "hopf/numerics.hpp"
#include "hopf/rng.hpp"

namespace hopf {

std::size_t ForwardCache::bytes() const {
  std::size_t n = x_drop.size() + x_mask.size() + yhat.size() + output.size() + fa.nnz();
  for (const auto& l : layers) {
    n += l.pre.size() + l.h.size() + l.h_drop.size() + l.mask.size() + l.neighbor_agg.size() + l.node_term.size() +
         l.argmax.size();
  }
  return n * sizeof(double);
}

std::size_t layer_rows(const KernelSpec& spec, const Subgraph& sub, std::size_t k) {
  if (k > spec.depth) throw ArgumentError("layer_rows: layer index beyond depth");
  const std::size_t h = std::min(spec.depth - k, sub.num_hops());
  return sub.frontier_offsets.at(h + 1);
}

namespace {

// First `rows` rows of S * D.
DenseMatrix spmm_rows(const SparseMatrix& s, std::size_t rows, const DenseMatrix& d) {
  DenseMatrix out(rows, d.cols());
  const std::size_t n = d.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    auto idx = s.row_indices(r);
    auto val = s.row_values(r);
    double* o = out.row(r).data();
    for (std::size_t e = 0; e < idx.size(); ++e) {
      if (idx[e] >= d.rows()) throw ShapeError("propagation: neighbor row outside the evaluated layer");
      const double w = val[e];
      const double* src = d.row(idx[e]).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += w * src[j];
    }
  }
  return out;
}

// dst[j] += sum_i S[i][j] * src[i] for i < src.rows()
void spmm_rows_transposed_add(const SparseMatrix& s, const DenseMatrix& src, DenseMatrix& dst) {
  const std::size_t n = src.cols();
  for (std::size_t r = 0; r < src.rows(); ++r) {
    auto idx = s.row_indices(r);
    auto val = s.row_values(r);
    const double* g = src.row(r).data();
    for (std::size_t e = 0; e < idx.size(); ++e) {
      double* o = dst.row(idx[e]).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += val[e] * g[j];
    }
  }
}

DenseMatrix maxpool_rows(const LocalAdjacency& adj, std::size_t rows, const DenseMatrix& features,
                         std::vector<std::int64_t>* argmax) {
  const std::size_t d = features.cols();
  DenseMatrix out(rows, d);
  if (argmax) argmax->assign(rows * d, -1);
  for (std::size_t i = 0; i < rows; ++i) {
    auto nb = adj.row(i);
    if (nb.empty()) continue;
    for (std::size_t c = 0; c < d; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      std::int64_t who = -1;
      for (NodeId u : nb) {
        if (u >= features.rows()) throw ShapeError("maxpool: neighbor row outside the feature matrix");
        if (features(u, c) > best) {
          best = features(u, c);
          who = u;
        }
      }
      out(i, c) = best;
      if (argmax) (*argmax)[i * d + c] = who;
    }
  }
  return out;
}

// dst[0:src.rows, :] += src
void add_prefix(DenseMatrix& dst, const DenseMatrix& src) {
  if (src.rows() > dst.rows() || src.cols() != dst.cols()) throw ShapeError("add_prefix: shape mismatch");
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] += s[i];
}

void hadamard_inplace(DenseMatrix& m, const DenseMatrix& mask) {
  if (mask.empty()) return;
  auto v = m.values();
  auto k = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= k[i];
}

void apply(Activation a, DenseMatrix& m) {
  if (a == Activation::Relu) relu_inplace(m);
}

std::vector<double> alpha_weights(const KernelSpec& spec, const Subgraph& sub, std::size_t rows) {
  std::vector<double> a;
  if (spec.alpha != AlphaMode::InvDegSelf) return a;
  a.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) a[i] = 1.0 / (static_cast<double>(sub.global_degree[i]) + 1.0);
  return a;
}

const DenseMatrix& neighbor_weight(const KernelSpec& spec, const ModelWeights& w, std::size_t k) {
  return spec.tie_weights ? w.layers[k - 1].node : w.layers[k - 1].neighbor;
}

void check_inputs(const KernelSpec& spec, const ModelWeights& w, const Subgraph& sub, const DenseMatrix& x,
                  const DenseMatrix& yhat) {
  if (!spec.differentiable)
    throw ConfigError(spec.name + " has no trainable form; use linear_unroll_coefficient for its analysis");
  spec.validate();
  if (w.layers.size() != spec.depth)
    throw ShapeError("predict: weights have " + std::to_string(w.layers.size()) + " layers, kernel depth is " +
                     std::to_string(spec.depth));
  if (x.rows() != sub.num_nodes())
    throw ShapeError("predict: feature slice has " + std::to_string(x.rows()) + " rows for " +
                     std::to_string(sub.num_nodes()) + " subgraph nodes");
  if (x.cols() != w.input.rows())
    throw ShapeError("predict: " + std::to_string(x.cols()) + " features but W_0 expects " +
                     std::to_string(w.input.rows()));
  if (sub.num_seeds() == 0) throw ArgumentError("predict: subgraph has no seeds");
  if (spec.uses_labels()) {
    if (yhat.empty()) throw ConfigError(spec.name + " reads a label channel but no label input was given");
    if (yhat.rows() != sub.num_nodes() || yhat.cols() != w.output.cols())
      throw ShapeError("predict: label slice must be " + std::to_string(sub.num_nodes()) + "x" +
                       std::to_string(w.output.cols()));
  }
}

}  // namespace

DenseMatrix maxpool_aggregate(const Subgraph& sub, const DenseMatrix& features, std::vector<std::int64_t>* argmax) {
  if (features.rows() != sub.num_nodes()) throw ShapeError("maxpool_aggregate: one feature row per node expected");
  return maxpool_rows(sub.adjacency, sub.num_nodes(), features, argmax);
}

DenseMatrix predict(const KernelSpec& spec, const ModelWeights& w, const Subgraph& sub, const DenseMatrix& x_slice,
                    const DenseMatrix& yhat_slice, const PredictOptions& opts, ForwardCache* cache) {
  check_inputs(spec, w, sub, x_slice, yhat_slice);
  const std::size_t depth = spec.depth;
  const bool drop = opts.training && opts.dropout_rate > 0.0;
  if (opts.dropout_rate < 0.0 || opts.dropout_rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.task = opts.task;
  for (std::size_t k = 0; k <= depth; ++k) c.rows.push_back(layer_rows(spec, sub, k));
  const bool matrix_norm = spec.has_neighbor_path() && spec.norm != NormScheme::MaxPool;
  if (matrix_norm) c.fa = normalize_adjacency(sub, spec.norm);
  if (spec.uses_labels()) c.yhat = row_prefix(yhat_slice, c.rows[0]);

  auto mask_for = [&](std::size_t rows, std::size_t cols, std::uint64_t stream) {
    return drop ? dropout_mask(rows, cols, opts.dropout_rate, derive_seed(opts.dropout_seed, {stream}))
                : DenseMatrix();
  };

  c.x_drop = row_prefix(x_slice, c.rows[0]);
  c.x_mask = mask_for(c.x_drop.rows(), c.x_drop.cols(), 0);
  hadamard_inplace(c.x_drop, c.x_mask);

  c.layers.resize(depth + 1);
  {
    auto& l0 = c.layers[0];
    l0.pre = matmul(c.x_drop, w.input);
    l0.h = l0.pre;
    relu_inplace(l0.h);
    l0.mask = mask_for(l0.h.rows(), l0.h.cols(), 1);
    l0.h_drop = l0.h;
    hadamard_inplace(l0.h_drop, l0.mask);
  }

  for (std::size_t k = 1; k <= depth; ++k) {
    const std::size_t rk = c.rows[k];
    const auto& prev = c.layers[k - 1];
    auto& cur = c.layers[k];
    auto alpha = alpha_weights(spec, sub, rk);

    DenseMatrix node;
    if (spec.has_node_path()) {
      const DenseMatrix& phi = spec.phi == NodeInput::H0 ? c.layers[0].h_drop : prev.h_drop;
      node = matmul(row_prefix(phi, rk), w.layers[k - 1].node);
      if (!alpha.empty()) scale_rows_inplace(node, alpha);
    }
    cur.alpha = alpha;

    DenseMatrix neigh;
    if (spec.has_neighbor_path()) {
      DenseMatrix psi;
      switch (spec.psi) {
        case NeighborInput::HPrev: psi = prev.h_drop; break;
        case NeighborInput::Labels: psi = row_prefix(c.yhat, c.rows[k - 1]); break;
        case NeighborInput::HPrevAndLabels: psi = hconcat(prev.h_drop, row_prefix(c.yhat, c.rows[k - 1])); break;
        case NeighborInput::None: break;
      }
      const DenseMatrix& wpsi = neighbor_weight(spec, w, k);
      if (matrix_norm) {
        cur.neighbor_agg = spmm_rows(c.fa, rk, psi);
        neigh = matmul(cur.neighbor_agg, wpsi);
      } else {
        const DenseMatrix projected = matmul(psi, wpsi);
        neigh = maxpool_rows(sub.adjacency, rk, projected, &cur.argmax);
        cur.neighbor_agg = std::move(psi);
      }
    }

    if (spec.combine == Combine::Concat && !node.empty() && !neigh.empty()) {
      cur.pre = hconcat(node, neigh);
    } else if (node.empty()) {
      cur.pre = std::move(neigh);
    } else {
      cur.pre = node;
      if (!neigh.empty()) add_inplace(cur.pre, neigh);
    }
    cur.h = cur.pre;
    apply(spec.activations[k - 1], cur.h);
    if (spec.skip_connections) {
      if (k == 1 && spec.project_first_skip) add_inplace(cur.h, node);
      else add_inplace(cur.h, row_prefix(prev.h_drop, rk));
    }
    if (spec.project_first_skip && k == 1) cur.node_term = std::move(node);
    cur.mask = mask_for(cur.h.rows(), cur.h.cols(), k + 1);
    cur.h_drop = cur.h;
    hadamard_inplace(cur.h_drop, cur.mask);
  }

  DenseMatrix logits = matmul(c.layers[depth].h_drop, w.output);
  c.output = opts.task == TaskKind::MultiClass ? softmax_rows(logits) : std::move(logits);
  if (opts.task == TaskKind::MultiLabel) sigmoid_inplace(c.output);
  c.weights_fingerprint = fingerprint(w);
  if (!cache) return std::move(c.output);
  return c.output;
}

ModelWeights backward(const KernelSpec& spec, const ModelWeights& w, const ForwardCache& c,
                      const DenseMatrix& d_output) {
  if (c.layers.empty()) throw StateError("backward: cache was not filled by predict");
  if (fingerprint(w) != c.weights_fingerprint)
    throw StateError("backward: weights changed since the forward pass (stale cache)");
  if (d_output.rows() != c.output.rows() || d_output.cols() != c.output.cols())
    throw ShapeError("backward: output gradient shape does not match the prediction");
  const std::size_t depth = spec.depth;
  if (c.layers.size() != depth + 1) throw StateError("backward: cache depth does not match the kernel");

  ModelWeights g = zero_weights(spec, w.input.rows(), w.output.cols());

  // Through the output nonlinearity.
  DenseMatrix dlogits(d_output.rows(), d_output.cols());
  for (std::size_t i = 0; i < d_output.rows(); ++i) {
    auto y = c.output.row(i);
    auto dy = d_output.row(i);
    auto dz = dlogits.row(i);
    if (c.task == TaskKind::MultiLabel) {
      for (std::size_t j = 0; j < y.size(); ++j) dz[j] = dy[j] * y[j] * (1.0 - y[j]);
    } else {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) dot += dy[j] * y[j];
      for (std::size_t j = 0; j < y.size(); ++j) dz[j] = y[j] * (dy[j] - dot);
    }
  }
  g.output = matmul_at_b(c.layers[depth].h_drop, dlogits);

  std::vector<DenseMatrix> dh(depth + 1);
  for (std::size_t k = 0; k <= depth; ++k) dh[k] = DenseMatrix(c.layers[k].h.rows(), c.layers[k].h.cols());
  dh[depth] = matmul_a_bt(dlogits, w.output);

  const std::size_t d = spec.hidden_dim;
  for (std::size_t k = depth; k >= 1; --k) {
    const auto& cur = c.layers[k];
    const auto& prev = c.layers[k - 1];
    const std::size_t rk = c.rows[k];
    DenseMatrix grad = dh[k];
    hadamard_inplace(grad, cur.mask);

    DenseMatrix node_extra;
    if (spec.skip_connections) {
      if (k == 1 && spec.project_first_skip) node_extra = grad;
      else add_prefix(dh[k - 1], grad);
    }

    DenseMatrix dz = grad;
    if (spec.activations[k - 1] == Activation::Relu) {
      auto z = dz.values();
      auto pre = cur.pre.values();
      for (std::size_t i = 0; i < z.size(); ++i)
        if (pre[i] <= 0.0) z[i] = 0.0;
    }

    DenseMatrix dnode;
    DenseMatrix dneigh;
    if (spec.combine == Combine::Concat && spec.has_node_path() && spec.has_neighbor_path()) {
      dnode = column_slice(dz, 0, d);
      dneigh = column_slice(dz, d, d);
    } else {
      if (spec.has_node_path()) dnode = dz;
      if (spec.has_neighbor_path()) dneigh = std::move(dz);
    }

    if (spec.has_node_path()) {
      if (!node_extra.empty()) add_inplace(dnode, node_extra);
      if (!cur.alpha.empty()) scale_rows_inplace(dnode, cur.alpha);
      const DenseMatrix& phi_full = spec.phi == NodeInput::H0 ? c.layers[0].h_drop : prev.h_drop;
      const DenseMatrix phi = row_prefix(phi_full, rk);
      DenseMatrix& target = spec.phi == NodeInput::H0 ? dh[0] : dh[k - 1];
      add_inplace(g.layers[k - 1].node, matmul_at_b(phi, dnode));
      add_prefix(target, matmul_a_bt(dnode, w.layers[k - 1].node));
    }

    if (spec.has_neighbor_path()) {
      const DenseMatrix& wpsi = neighbor_weight(spec, w, k);
      DenseMatrix& gpsi = spec.tie_weights ? g.layers[k - 1].node : g.layers[k - 1].neighbor;
      const bool need_input_grad = spec.psi != NeighborInput::Labels;
      DenseMatrix dpsi;
      if (spec.norm != NormScheme::MaxPool) {
        add_inplace(gpsi, matmul_at_b(cur.neighbor_agg, dneigh));
        if (need_input_grad) {
          const DenseMatrix dagg = matmul_a_bt(dneigh, wpsi);
          dpsi = DenseMatrix(c.rows[k - 1], dagg.cols());
          spmm_rows_transposed_add(c.fa, dagg, dpsi);
        }
      } else {
        const DenseMatrix& psi = cur.neighbor_agg;
        DenseMatrix dproj(psi.rows(), wpsi.cols());
        for (std::size_t i = 0; i < rk; ++i)
          for (std::size_t col = 0; col < dneigh.cols(); ++col) {
            const std::int64_t who = cur.argmax[i * dneigh.cols() + col];
            if (who >= 0) dproj(static_cast<std::size_t>(who), col) += dneigh(i, col);
          }
        add_inplace(gpsi, matmul_at_b(psi, dproj));
        if (need_input_grad) dpsi = matmul_a_bt(dproj, wpsi);
      }
      if (need_input_grad) {
        if (spec.psi == NeighborInput::HPrev) add_prefix(dh[k - 1], dpsi);
        else add_prefix(dh[k - 1], column_slice(dpsi, 0, prev.h.cols()));
      }
    }
  }

  DenseMatrix d0 = std::move(dh[0]);
  hadamard_inplace(d0, c.layers[0].mask);
  auto z = d0.values();
  auto pre = c.layers[0].pre.values();
  for (std::size_t i = 0; i < z.size(); ++i)
    if (pre[i] <= 0.0) z[i] = 0.0;
  g.input = matmul_at_b(c.x_drop, d0);
  return g;
}

std::size_t estimate_activation_bytes(const KernelSpec& spec, const Subgraph& sub, std::size_t num_features,
                                      std::size_t num_labels) {
  std::size_t cells = layer_rows(spec, sub, 0) * (2 * num_features + 4 * spec.hidden_dim);
  if (spec.uses_labels()) cells += sub.num_nodes() * num_labels;
  for (std::size_t k = 1; k <= spec.depth; ++k) {
    const std::size_t rk = layer_rows(spec, sub, k);
    const std::size_t rprev = layer_rows(spec, sub, k - 1);
    const std::size_t width = spec.layer_width(k);
    // pre, h, h_drop, mask, gradient, plus the aggregated neighbor input
    cells += rk * width * 5 + std::max(rk, rprev) * (spec.neighbor_input_width(k, num_labels) + spec.hidden_dim);
  }
  cells += sub.adjacency.num_entries() * 2;
  return cells * sizeof(double);
}

}  // namespace hopf
