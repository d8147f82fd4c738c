#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace clar {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using NodeId = std::uint32_t;

/// Undirected edge stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph. Edges are canonical (u < v), sorted and
/// unique; adjacency lists are sorted so membership tests are O(log deg).
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  std::vector<std::size_t> degrees() const;
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  friend Graph build_graph(std::size_t, std::span<const std::pair<NodeId, NodeId>>);

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

/// Throws OutOfRange for endpoints >= n, SelfLoop for (u,u) pairs and
/// InvalidArgument for n == 0. Mirrored and repeated pairs are merged.
Graph build_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edge_list);
Graph build_graph(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edge_list);
Graph build_graph(std::size_t n, std::span<const Edge> edges);

/// Dense symmetric matrix. Construction checks symmetry (1e-12, relative to the
/// largest entry) and finiteness.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

enum class LaplacianKind {
  Unnormalized,           // D - A
  SymNormalized,          // D^{-1/2} (D - A) D^{-1/2}
  SelfLoopSymNormalized,  // I - D̂^{-1/2} (A + I) D̂^{-1/2}
};

Matrix adjacency_matrix(const Graph& g);

/// D^{-1/2} A D^{-1/2}; with self_loops, A is replaced by A + I first. Zero
/// degree rows stay zero.
Matrix normalized_adjacency(const Graph& g, bool self_loops);

/// GCN propagation matrix D̂^{-1/2}(A + I)D̂^{-1/2} in sparse form.
SparseMatrix gcn_propagation(const Graph& g);

/// Laplacian of a (possibly weighted) symmetric adjacency. Isolated nodes
/// contribute zero rows/columns under normalization.
Matrix laplacian_of_adjacency(const Matrix& adjacency, LaplacianKind kind);

SymMatrix laplacian(const Graph& g, LaplacianKind kind);
SparseMatrix sparse_laplacian(const Graph& g, LaplacianKind kind);

/// True iff u != v and (u, v) is not an edge.
bool is_complement_edge(const Graph& g, NodeId u, NodeId v);

/// Fraction of edges whose endpoints share a label. Throws EmptyEdgeSet.
double homophily_ratio(const Graph& g, std::span<const int> labels);

bool is_connected(const Graph& g);

/// Graph with the union of both edge sets (same node count required).
Graph graph_union(const Graph& a, const Graph& b);

}  // namespace clar
