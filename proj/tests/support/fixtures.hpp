#pragma once

#include <cstdint>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "hopf/dense_matrix.hpp"
#include "hopf/graph.hpp"

namespace hopf::testing {

// Erdos-Renyi style edge list; may contain nothing for small p.
inline EdgeList random_edges(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  EdgeList e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

// Random graph that is connected: a random tree plus extra edges.
inline EdgeList random_connected_edges(std::size_t n, double extra_p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EdgeList e;
  for (std::size_t v = 1; v < n; ++v) e.emplace_back(v, std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
  auto more = random_edges(n, extra_p, seed ^ 0x5eedULL);
  e.insert(e.end(), more.begin(), more.end());
  return e;
}

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

// Radius-k ball computed from the raw edge list with std::set adjacency.
inline std::set<std::int64_t> bfs_ball(const EdgeList& edges, std::size_t n, const std::vector<std::int64_t>& seeds,
                                       std::size_t k) {
  std::vector<std::set<std::int64_t>> adj(n);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    adj[u].insert(v);
    adj[v].insert(u);
  }
  std::vector<std::int64_t> dist(n, -1);
  std::queue<std::int64_t> q;
  for (auto s : seeds) {
    dist[s] = 0;
    q.push(s);
  }
  std::set<std::int64_t> out(seeds.begin(), seeds.end());
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    if (static_cast<std::size_t>(dist[u]) == k) continue;
    for (auto w : adj[u])
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        out.insert(w);
        q.push(w);
      }
  }
  return out;
}

inline EdgeList chain_edges(std::size_t n) {
  EdgeList e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline EdgeList star_edges(std::size_t leaves) {
  EdgeList e;
  for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return e;
}

}  // namespace hopf::testing
