#include "clar/datasets.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "clar/error.hpp"
#include "clar/io.hpp"
#include "clar/regularizers.hpp"

namespace clar {

Dataset make_dataset(Graph graph, Matrix features, std::vector<int> labels) {
  const std::size_t n = graph.num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw Error(ErrorCode::RowCountMismatch, "features have " + std::to_string(features.rows()) +
                                                 " rows, graph has " + std::to_string(n) + " nodes");
  }
  if (labels.size() != n) {
    throw Error(ErrorCode::RowCountMismatch, "labels have " + std::to_string(labels.size()) +
                                                 " rows, graph has " + std::to_string(n) + " nodes");
  }
  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw Error(ErrorCode::InvalidArgument, "negative label");
    max_label = std::max(max_label, y);
  }
  Dataset ds;
  ds.graph = std::move(graph);
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.num_classes = std::max(2, max_label + 1);
  return ds;
}

Dataset generate_sbm(const SbmSpec& spec) {
  if (spec.c < 2 || spec.n < static_cast<std::size_t>(spec.c)) {
    throw Error(ErrorCode::InfeasibleSpec, "need c >= 2 and n >= c");
  }
  if (!(spec.target_h >= 0.0 && spec.target_h <= 1.0) || !(spec.avg_degree > 0.0) || spec.feature_dim == 0) {
    throw Error(ErrorCode::InfeasibleSpec, "target_h must be in [0,1], avg_degree > 0, feature_dim > 0");
  }
  const std::size_t n = spec.n;
  const auto c = static_cast<std::size_t>(spec.c);

  std::vector<int> labels(n);
  std::vector<double> class_size(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % c);
    class_size[i % c] += 1.0;
  }
  double intra_pairs = 0.0;
  for (double s : class_size) intra_pairs += s * (s - 1.0) / 2.0;
  const double all_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double inter_pairs = all_pairs - intra_pairs;
  const double expected_edges = spec.avg_degree * static_cast<double>(n) / 2.0;
  const double p_in = intra_pairs > 0 ? spec.target_h * expected_edges / intra_pairs : 0.0;
  const double p_out = inter_pairs > 0 ? (1.0 - spec.target_h) * expected_edges / inter_pairs : 0.0;
  if (p_in > 1.0 || p_out > 1.0 || (spec.target_h > 0 && intra_pairs == 0)) {
    throw Error(ErrorCode::InfeasibleSpec, "edge probabilities exceed 1 (p_in=" + std::to_string(p_in) +
                                               ", p_out=" + std::to_string(p_out) + ")");
  }

  std::mt19937_64 rng(spec.seed);
  Graph graph;
  bool ok = false;
  for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(expected_edges * 1.2) + 16);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        const double p = labels[u] == labels[v] ? p_in : p_out;
        if (unif(rng) < p) edges.push_back({u, v});
      }
    }
    graph = build_graph(n, std::span<const Edge>(edges));
    ok = !spec.require_connected || is_connected(graph);
  }
  if (!ok) throw Error(ErrorCode::InfeasibleSpec, "graph still disconnected after 20 draws");

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.feature_dim);
  Matrix means(static_cast<Eigen::Index>(c), d);
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    for (Eigen::Index j = 0; j < d; ++j) means(k, j) = normal(rng);
  }
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = spec.feature_signal * means(labels[i], j) + normal(rng);
  }
  auto ds = make_dataset(std::move(graph), std::move(x), std::move(labels));
  ds.num_classes = spec.c;
  return ds;
}

Dataset load_dataset(const std::filesystem::path& graph_path, const std::filesystem::path& features_csv,
                     const std::filesystem::path& labels_csv) {
  Matrix x = io::read_matrix_csv(features_csv);
  std::vector<int> labels = io::read_labels(labels_csv);
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw Error(ErrorCode::RowCountMismatch, "feature file is empty");
  if (labels.size() != n) {
    throw Error(ErrorCode::RowCountMismatch, "labels have " + std::to_string(labels.size()) +
                                                 " rows, features have " + std::to_string(n));
  }
  Graph g = io::read_edge_list(graph_path, n);
  return make_dataset(std::move(g), std::move(x), std::move(labels));
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  return load_dataset(dir / "edges.txt", dir / "features.csv", dir / "labels.csv");
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  io::write_edge_list(dir / "edges.txt", ds.graph);
  io::write_matrix_csv(dir / "features.csv", ds.features);
  io::write_labels(dir / "labels.csv", ds.labels);
}

Dataset remove_edges(const Dataset& ds, double rate, std::uint64_t seed) {
  Dataset out = ds;
  out.graph = dropedge_transform(ds.graph, rate, seed);
  return out;
}

}  // namespace clar
