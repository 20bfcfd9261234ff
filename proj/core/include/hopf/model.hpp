#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/kernel_spec.hpp"

namespace hopf {

// Weights of one propagation layer. A path that is disabled in the spec has
// an empty matrix. With tied weights only `node` is populated and serves both
// paths.
struct LayerWeights {
  DenseMatrix node;
  DenseMatrix neighbor;
};

struct ModelWeights {
  DenseMatrix input;  // W_0: f x d
  std::vector<LayerWeights> layers;
  DenseMatrix output;  // W_L: width(C) x l

  // Visits input, (node, neighbor) per layer, output. Empty slots included.
  void for_each_slot(const std::function<void(DenseMatrix&)>& fn);
  void for_each_slot(const std::function<void(const DenseMatrix&)>& fn) const;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Zero-valued weights shaped for `spec` (also the shape of a gradient).
ModelWeights zero_weights(const KernelSpec& spec, std::size_t num_features, std::size_t num_labels);

// Glorot-uniform weights. Each slot draws from its own derived seed, and the
// label rows of an h_prev+labels neighbor matrix are drawn as a separate block,
// so a kernel and its label-augmented twin share every common entry.
ModelWeights init_weights(const KernelSpec& spec, std::size_t num_features, std::size_t num_labels,
                          std::uint64_t rng_seed);

// Content hash of all weight values and shapes.
std::uint64_t fingerprint(const ModelWeights& w);

void add_inplace(ModelWeights& dst, const ModelWeights& src, double scale = 1.0);
double max_abs_diff(const ModelWeights& a, const ModelWeights& b);

// Binary snapshot: 8-byte magic "HOPFWTS1", uint64 slot count, then
// (uint64 rows, uint64 cols) per slot, then every slot's values as row-major
// little-endian float64, slots in for_each_slot order.
void save_weights(const std::filesystem::path& path, const ModelWeights& w);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace hopf
