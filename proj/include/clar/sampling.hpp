#pragma once

#include <cstddef>
#include <cstdint>

#include "clar/graph.hpp"

namespace clar {

enum class SampleKind { NodeBased, EdgeBased };

struct SampleStrategy {
  SampleKind kind = SampleKind::NodeBased;
  std::size_t s = 1;  ///< sampling multiple, >= 1
};

/// A sampled subgraph of the complement of a source graph, on the same node set.
struct SampledComplement {
  Graph graph;
  SampleStrategy strategy;
  std::uint64_t seed = 0;
};

/// Draws complement edges. Node-based: for every node, up to S distinct
/// non-neighbours. Edge-based: for every edge (u,v), up to S non-neighbours
/// of u and up to S of v. Nodes with fewer than S candidates take all of
/// them; repeated pairs are merged.
SampledComplement sample_complement(const Graph& g, SampleStrategy strategy, std::uint64_t seed);

/// S*n for node-based sampling, 2*S*|E| for edge-based.
std::size_t expected_edge_bound(const Graph& g, SampleStrategy strategy);

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace clar
