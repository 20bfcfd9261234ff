#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "hopf/model.hpp"
#include "hopf/numerics.hpp"
#include "hopf/propagation.hpp"

namespace hopf::testing {

inline double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst_slot = 0;
  std::size_t entries = 0;
};

inline std::vector<DenseMatrix*> slots_of(ModelWeights& w) {
  std::vector<DenseMatrix*> out;
  w.for_each_slot([&](DenseMatrix& m) { out.push_back(&m); });
  return out;
}

// Analytic backward vs central differences of L = sum(R .* predict(...)).
inline GradCheck check_gradients(const KernelSpec& spec, const ModelWeights& w0, const Subgraph& sub,
                                 const DenseMatrix& x, const DenseMatrix& yhat, const PredictOptions& opts,
                                 std::uint64_t seed, double eps = 1e-5) {
  ForwardCache cache;
  DenseMatrix out = predict(spec, w0, sub, x, yhat, opts, &cache);
  const DenseMatrix r = random_matrix(out.rows(), out.cols(), seed ^ 0xabcdULL);
  ModelWeights grad = backward(spec, w0, cache, r);

  auto loss = [&](const ModelWeights& w) {
    DenseMatrix o = predict(spec, w, sub, x, yhat, opts);
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o.values()[i] * r.values()[i];
    return s;
  };

  GradCheck res;
  ModelWeights w = w0;
  auto wslots = slots_of(w);
  auto gslots = slots_of(grad);
  for (std::size_t s = 0; s < wslots.size(); ++s) {
    if (wslots[s]->empty()) continue;
    DenseMatrix numeric = finite_diff_grad(
        [&](const DenseMatrix& p) {
          const DenseMatrix keep = *wslots[s];
          *wslots[s] = p;
          const double v = loss(w);
          *wslots[s] = keep;
          return v;
        },
        *wslots[s], eps);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double e = rel_error(gslots[s]->values()[i], numeric.values()[i]);
      ++res.entries;
      if (e > res.max_rel_error) {
        res.max_rel_error = e;
        res.worst_slot = s;
      }
    }
  }
  return res;
}

// The standard setup: random connected 10-node graph, f = 5, l = 3, d = 4.
struct GradCheckSetup {
  Graph graph;
  DenseMatrix x;
  DenseMatrix yhat;
  ModelWeights weights;
};

inline GradCheckSetup gradcheck_setup(const KernelSpec& spec, std::uint64_t seed, std::size_t n = 10,
                                      std::size_t f = 5, std::size_t l = 3) {
  GradCheckSetup s;
  s.graph = build_graph(random_connected_edges(n, 0.2, seed), static_cast<std::int64_t>(n));
  s.x = random_matrix(n, f, seed + 1, 0.0, 1.0);
  s.yhat = random_matrix(n, l, seed + 2, 0.0, 1.0);
  s.weights = init_weights(spec, f, l, seed + 3);
  return s;
}

}  // namespace hopf::testing
