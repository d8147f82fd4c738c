#include "clar/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "clar/error.hpp"

namespace clar {

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(n_);
  for (std::size_t v = 0; v < n_; ++v) out[v] = adjacency_[v].size();
  return out;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= n_ || v >= n_) return false;
  const auto& adj = adjacency_[u];
  return std::binary_search(adj.begin(), adj.end(), v);
}

Graph build_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edge_list) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph must have at least one node");
  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (auto [a, b] : edge_list) {
    if (a >= n || b >= n) {
      throw Error(ErrorCode::OutOfRange, "edge (" + std::to_string(a) + "," + std::to_string(b) +
                                             ") has endpoint >= " + std::to_string(n));
    }
    if (a == b) throw Error(ErrorCode::SelfLoop, "self-loop on node " + std::to_string(a));
    edges.push_back(a < b ? Edge{a, b} : Edge{b, a});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.adjacency_.assign(n, {});
  for (const auto& e : g.edges_) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  return g;
}

Graph build_graph(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edge_list) {
  return build_graph(n, std::span<const std::pair<NodeId, NodeId>>(edge_list.begin(), edge_list.size()));
}

Graph build_graph(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) pairs.emplace_back(e.u, e.v);
  return build_graph(n, std::span<const std::pair<NodeId, NodeId>>(pairs));
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw Error(ErrorCode::NonSymmetric, "matrix is " + std::to_string(m_.rows()) + "x" +
                                             std::to_string(m_.cols()));
  }
  if (!m_.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m_.rows(); ++i) {
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-12 * scale) {
        throw Error(ErrorCode::NonSymmetric, "entry (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ") differs from its mirror");
      }
    }
  }
}

Matrix adjacency_matrix(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

namespace {

Eigen::VectorXd inv_sqrt_degrees(const Eigen::VectorXd& deg) {
  Eigen::VectorXd out(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) out(i) = deg(i) > 0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  return out;
}

}  // namespace

Matrix normalized_adjacency(const Graph& g, bool self_loops) {
  Matrix a = adjacency_matrix(g);
  if (self_loops) a.diagonal().array() += 1.0;
  const Eigen::VectorXd s = inv_sqrt_degrees(a.rowwise().sum());
  return s.asDiagonal() * a * s.asDiagonal();
}

SparseMatrix gcn_propagation(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n + 2 * g.num_edges());
  std::vector<double> s(n);
  for (Eigen::Index v = 0; v < n; ++v) s[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)) + 1.0);
  for (Eigen::Index v = 0; v < n; ++v) trips.emplace_back(v, v, s[v] * s[v]);
  for (const auto& e : g.edges()) {
    const double w = s[e.u] * s[e.v];
    trips.emplace_back(e.u, e.v, w);
    trips.emplace_back(e.v, e.u, w);
  }
  SparseMatrix p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

Matrix laplacian_of_adjacency(const Matrix& adjacency, LaplacianKind kind) {
  Matrix a = adjacency;
  if (kind == LaplacianKind::SelfLoopSymNormalized) a.diagonal().array() += 1.0;
  const Eigen::VectorXd deg = a.rowwise().sum();
  Matrix lap = -a;
  lap.diagonal() += deg;
  if (kind == LaplacianKind::Unnormalized) return lap;
  const Eigen::VectorXd s = inv_sqrt_degrees(deg);
  lap = s.asDiagonal() * lap * s.asDiagonal();
  // Re-symmetrize to remove round-off asymmetry from the two diagonal scalings.
  return 0.5 * (lap + lap.transpose());
}

SymMatrix laplacian(const Graph& g, LaplacianKind kind) {
  return SymMatrix(laplacian_of_adjacency(adjacency_matrix(g), kind));
}

SparseMatrix sparse_laplacian(const Graph& g, LaplacianKind kind) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const double loop = kind == LaplacianKind::SelfLoopSymNormalized ? 1.0 : 0.0;
  std::vector<double> deg(n), s(n);
  for (Eigen::Index v = 0; v < n; ++v) {
    deg[v] = static_cast<double>(g.degree(v)) + loop;
    s[v] = kind == LaplacianKind::Unnormalized ? 1.0 : (deg[v] > 0 ? 1.0 / std::sqrt(deg[v]) : 0.0);
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n + 2 * g.num_edges());
  for (Eigen::Index v = 0; v < n; ++v) {
    // D - A on the diagonal: the self-loop weight cancels against its degree share.
    const double d = deg[v] - loop;
    if (d != 0.0) trips.emplace_back(v, v, s[v] * d * s[v]);
  }
  for (const auto& e : g.edges()) {
    const double w = -s[e.u] * s[e.v];
    trips.emplace_back(e.u, e.v, w);
    trips.emplace_back(e.v, e.u, w);
  }
  SparseMatrix lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

bool is_complement_edge(const Graph& g, NodeId u, NodeId v) {
  if (u >= g.num_nodes() || v >= g.num_nodes()) {
    throw Error(ErrorCode::OutOfRange, "node id out of range");
  }
  return u != v && !g.has_edge(u, v);
}

double homophily_ratio(const Graph& g, std::span<const int> labels) {
  if (labels.size() != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "labels length differs from node count");
  }
  if (g.num_edges() == 0) throw Error(ErrorCode::EmptyEdgeSet, "homophily undefined without edges");
  std::size_t same = 0;
  for (const auto& e : g.edges()) same += labels[e.u] == labels[e.v] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == n;
}

Graph graph_union(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "graph union needs equal node counts");
  }
  std::vector<Edge> all = a.edges();
  all.insert(all.end(), b.edges().begin(), b.edges().end());
  return build_graph(a.num_nodes(), std::span<const Edge>(all));
}

}  // namespace clar
