#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "clar/graph.hpp"

namespace clar {

struct Masks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> val;
  std::vector<std::uint8_t> test;
};

struct Dataset {
  Graph graph;
  Matrix features;          ///< n x d
  std::vector<int> labels;  ///< class ids in [0, num_classes)
  int num_classes = 0;
  std::optional<Masks> masks;
};

/// Checks row counts and label range; derives num_classes as max label + 1
/// (at least 2).
Dataset make_dataset(Graph graph, Matrix features, std::vector<int> labels);

struct SbmSpec {
  std::size_t n = 200;
  int c = 2;
  double target_h = 0.5;
  double avg_degree = 10.0;
  std::size_t feature_dim = 16;
  double feature_signal = 1.0;
  std::uint64_t seed = 0;
  bool require_connected = true;
};

/// Stochastic block model with equal-sized classes (node i has class i mod c).
/// Intra/inter edge probabilities are chosen so the expected homophily ratio
/// is target_h at the requested average degree. Features are N(signal * mu_y, I)
/// with unit-variance random class means mu_y. With require_connected the
/// graph is redrawn up to 20 times. Throws InfeasibleSpec.
Dataset generate_sbm(const SbmSpec& spec);

/// Edge list + headerless feature CSV + labels file. Throws ParseError (with
/// line number) and RowCountMismatch.
Dataset load_dataset(const std::filesystem::path& graph_path, const std::filesystem::path& features_csv,
                     const std::filesystem::path& labels_csv);

/// Directory layout used by gen-sbm: edges.txt, features.csv, labels.csv.
Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);

/// Same dataset with a random fraction of the graph's edges removed.
Dataset remove_edges(const Dataset& ds, double rate, std::uint64_t seed);

}  // namespace clar
