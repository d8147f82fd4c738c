#pragma once

#include <random>
#include <vector>

#include "clar/graph.hpp"

namespace testutil {

inline clar::Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<clar::Edge> edges;
  for (clar::NodeId u = 0; u < n; ++u) {
    for (clar::NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.push_back({u, v});
    }
  }
  return clar::build_graph(n, std::span<const clar::Edge>(edges));
}

inline clar::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  clar::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

// Sum over edges of squared row differences, straight from the edge list.
inline double edge_sum(const clar::Graph& g, const clar::Matrix& h) {
  double s = 0.0;
  for (const auto& e : g.edges()) s += (h.row(e.u) - h.row(e.v)).squaredNorm();
  return s;
}

inline clar::Graph path(std::size_t n) {
  std::vector<clar::Edge> edges;
  for (clar::NodeId i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return clar::build_graph(n, std::span<const clar::Edge>(edges));
}

inline clar::Graph complete(std::size_t n) {
  std::vector<clar::Edge> edges;
  for (clar::NodeId u = 0; u < n; ++u) {
    for (clar::NodeId v = u + 1; v < n; ++v) edges.push_back({u, v});
  }
  return clar::build_graph(n, std::span<const clar::Edge>(edges));
}

}  // namespace testutil
