#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hopf/datasets.hpp"
#include "hopf/kernel_spec.hpp"
#include "hopf/training.hpp"

namespace hopf::cli {

// "i_nip_mean_c<C>" runs the iterative loop with a C-hop kernel and T = K / C
// iterations; any other registry name is trained as one K-hop kernel.
struct ScalingVariant {
  std::string name;
  std::string kernel;
  bool iterative = false;
  std::size_t C = 0;  // fixed hops per iteration, 0 for the full kernel

  // {C, T} for total reach K, or {0, 0} when K is not a multiple of C.
  std::pair<std::size_t, std::size_t> shape(std::size_t K) const;
};

// Throws ConfigError for names that are neither form.
ScalingVariant parse_variant(const std::string& name);

struct ScalingOptions {
  std::vector<std::size_t> hops{1, 2, 3, 4};
  std::vector<std::string> variants{"nip_mean", "i_nip_mean_c1", "i_nip_mean_c2"};
  std::size_t repeats = 3;
  std::size_t warmup = 1;
  std::size_t batch_size = 128;
  std::size_t hidden_dim = 128;
  std::size_t num_workers = 1;
  std::size_t memory_budget_bytes = std::size_t{4} << 30;
  std::uint64_t rng_seed = 0;
};

struct ScalingCell {
  std::string variant;
  std::size_t K = 0;
  std::size_t C = 0;
  std::size_t T = 0;
  // "ok", "infeasible" (over the memory budget) or "n/a" (K not a multiple of C)
  std::string status;
  std::size_t peak_activation_bytes = 0;
  std::vector<double> epoch_seconds;  // one per timed repeat

  double mean_seconds() const;
};

// Mean epoch time per (variant, K). An epoch of an iterative variant is T
// rounds of one training epoch on the labeled nodes followed by label
// inference on the rest; a full variant is one training epoch.
std::vector<ScalingCell> bench_scaling(const DatasetBundle& data, const SplitSpec& split, const ScalingOptions& opts);

// Largest per-batch activation estimate over the training batches.
std::size_t peak_activation_bytes(const KernelSpec& spec, const DatasetBundle& data, const SplitSpec& split,
                                  std::size_t batch_size);

}  // namespace hopf::cli
