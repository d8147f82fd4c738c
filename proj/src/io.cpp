#include "clar/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>

#include "clar/error.hpp"

namespace clar::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& why) {
  throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + why);
}

template <typename T>
T parse_number(std::string_view tok, const std::filesystem::path& path, std::size_t line) {
  tok = trim(tok);
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (tok.empty() || ec != std::errc() || ptr != end) {
    parse_fail(path, line, "not a number: '" + std::string(tok) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Graph read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> n) {
  auto in = open_in(path);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::optional<std::size_t> header_n;
  std::size_t max_id = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      const auto comment = trim(text.substr(hash + 1));
      if (comment.starts_with("nodes ") && pairs.empty()) {
        header_n = parse_number<std::size_t>(comment.substr(6), path, line);
      }
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto sep = text.find_first_of(" \t");
    if (sep == std::string_view::npos) parse_fail(path, line, "expected two node ids");
    const auto u = parse_number<std::uint64_t>(text.substr(0, sep), path, line);
    const auto v = parse_number<std::uint64_t>(trim(text.substr(sep)), path, line);
    if (u > 0xffffffffULL || v > 0xffffffffULL) parse_fail(path, line, "node id too large");
    pairs.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    max_id = std::max<std::size_t>(max_id, std::max(u, v));
  }
  const std::size_t count = n ? *n : header_n ? *header_n : (pairs.empty() ? 1 : max_id + 1);
  return build_graph(count, std::span<const std::pair<NodeId, NodeId>>(pairs));
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  auto out = open_out(path);
  out << "# nodes " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\n';
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const auto text = trim(raw);
    if (text.empty()) continue;
    std::vector<double> row;
    for (auto tok : split(text, ',')) row.push_back(parse_number<double>(tok, path, line));
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(path, line, "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line.push_back(',');
      append_double(line, m(i, j));
    }
    line.push_back('\n');
    out << line;
  }
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (!trim(raw).empty()) lines.emplace_back(line, std::string(trim(raw)));
  }
  std::vector<int> labels;
  if (lines.size() == 1) {
    for (auto tok : split(lines.front().second, ',')) {
      labels.push_back(parse_number<int>(tok, path, lines.front().first));
    }
  } else {
    for (const auto& [line, text] : lines) labels.push_back(parse_number<int>(text, path, line));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw Error(ErrorCode::ParseError, path.string() + ": negative label");
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int y : labels) out << y << '\n';
}

}  // namespace clar::io
