#include "clar/sampling.hpp"

#include <algorithm>
#include <random>

#include "clar/error.hpp"

namespace clar {

namespace {

using Rng = std::mt19937_64;

// Appends up to `s` distinct complement neighbours of `u` to `out`.
void sample_node(const Graph& g, NodeId u, std::size_t s, Rng& rng, std::vector<Edge>& out) {
  const std::size_t n = g.num_nodes();
  const std::size_t candidates = n - 1 - g.degree(u);
  if (candidates == 0) return;

  auto emit = [&](NodeId v) { out.push_back(u < v ? Edge{u, v} : Edge{v, u}); };

  std::vector<NodeId> chosen;
  chosen.reserve(s);
  auto taken = [&](NodeId v) { return std::find(chosen.begin(), chosen.end(), v) != chosen.end(); };

  // Rejection sampling while the complement is the majority of the row.
  if (candidates > s && 2 * g.degree(u) < n) {
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    for (std::size_t attempt = 0; attempt < 10 * s && chosen.size() < s; ++attempt) {
      const NodeId v = pick(rng);
      if (v == u || g.has_edge(u, v) || taken(v)) continue;
      chosen.push_back(v);
    }
  }

  if (chosen.size() < s) {
    // Explicit enumeration of the remaining candidates, then a partial shuffle.
    std::vector<NodeId> pool;
    pool.reserve(candidates);
    for (NodeId v = 0; v < n; ++v) {
      if (v != u && !g.has_edge(u, v) && !taken(v)) pool.push_back(v);
    }
    const std::size_t need = std::min(s - chosen.size(), pool.size());
    for (std::size_t i = 0; i < need; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      chosen.push_back(pool[i]);
    }
  }
  for (NodeId v : chosen) emit(v);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampledComplement sample_complement(const Graph& g, SampleStrategy strategy, std::uint64_t seed) {
  if (strategy.s == 0) throw Error(ErrorCode::InvalidArgument, "sampling multiple S must be >= 1");
  Rng rng(seed);
  std::vector<Edge> sampled;
  if (strategy.kind == SampleKind::NodeBased) {
    sampled.reserve(strategy.s * g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) sample_node(g, u, strategy.s, rng, sampled);
  } else {
    sampled.reserve(2 * strategy.s * g.num_edges());
    for (const auto& e : g.edges()) {
      sample_node(g, e.u, strategy.s, rng, sampled);
      sample_node(g, e.v, strategy.s, rng, sampled);
    }
  }
  return {build_graph(g.num_nodes(), std::span<const Edge>(sampled)), strategy, seed};
}

std::size_t expected_edge_bound(const Graph& g, SampleStrategy strategy) {
  return strategy.kind == SampleKind::NodeBased ? strategy.s * g.num_nodes()
                                                : 2 * strategy.s * g.num_edges();
}

}  // namespace clar
