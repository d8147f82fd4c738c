#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "clar/graph.hpp"

namespace clar::io {

// Edge-list format: one edge per line, "u<TAB>v" or "u v", 0-based ids.
// '#' starts a comment. A leading "# nodes <n>" comment fixes the node count
// so trailing isolated nodes survive a round trip.

/// Reads an edge list. The node count is, in order of preference, `n`, the
/// "# nodes" header, or max id + 1.
Graph read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> n = std::nullopt);
void write_edge_list(const std::filesystem::path& path, const Graph& g);

/// Headerless numeric CSV, one row per node.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// One integer label per line (a single comma-separated row is also accepted).
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

}  // namespace clar::io
