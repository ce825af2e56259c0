#include "semtrack/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace semtrack {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 12);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        fail("E_PARSE", "bad number in CSV at line " + std::to_string(line_no));
      row.push_back(v);
      p = res.ptr;
      if (p < end) {
        if (*p != ',') fail("E_PARSE", "expected ',' in CSV at line " + std::to_string(line_no));
        ++p;
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail("E_PARSE", "ragged CSV row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("E_PARSE", "empty matrix CSV");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  write_text_atomic(path, matrix_to_csv(m));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("E_IO", "cannot open " + path.string());
  return parse_matrix_csv(in);
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) fail("E_PARSE", "expected nonempty matrix array");
  const auto nrows = rows.size();
  const auto ncols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < nrows; ++i) {
    if (rows[i].size() != ncols) fail("E_PARSE", "ragged matrix array");
    for (std::size_t j = 0; j < ncols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

}  // namespace

std::string estimate_to_json_line(const TopologyEstimate& estimate) {
  json obj;
  obj["t"] = estimate.interval_index();
  obj["a"] = matrix_to_json(estimate.adjacency());
  obj["b"] = json::array();
  for (Eigen::Index i = 0; i < estimate.external_influence().size(); ++i)
    obj["b"].push_back(estimate.external_influence()(i));
  return obj.dump();
}

TopologyEstimate estimate_from_json_line(const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) fail("E_PARSE", "invalid JSON snapshot line");
  if (!obj.contains("t") || !obj.contains("a") || !obj.contains("b"))
    fail("E_PARSE", "snapshot line missing t/a/b");
  return TopologyEstimate(matrix_from_json(obj["a"]), vector_from_json(obj["b"]),
                          obj["t"].get<int>());
}

void write_estimates_jsonl(const std::filesystem::path& path,
                           const std::vector<TopologyEstimate>& estimates) {
  std::string out;
  for (const auto& e : estimates) {
    out += estimate_to_json_line(e);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<TopologyEstimate> read_estimates_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("E_IO", "cannot open " + path.string());
  std::vector<TopologyEstimate> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(estimate_from_json_line(line));
  }
  if (out.empty()) fail("E_PARSE", "no snapshots in " + path.string());
  return out;
}

void write_network_jsonl(const std::filesystem::path& path, const DynamicNetwork& network) {
  std::string out;
  for (int t = 0; t < network.num_intervals(); ++t) {
    out += estimate_to_json_line(
        TopologyEstimate(network.adjacency(t), network.influence(t), t + 1));
    out += '\n';
  }
  write_text_atomic(path, out);
}

DynamicNetwork read_network_jsonl(const std::filesystem::path& path) {
  auto snapshots = read_estimates_jsonl(path);
  std::vector<Matrix> adjacency;
  std::vector<Vector> influence;
  adjacency.reserve(snapshots.size());
  influence.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    adjacency.push_back(s.adjacency());
    influence.push_back(s.external_influence());
  }
  return DynamicNetwork(std::move(adjacency), std::move(influence));
}

namespace {

std::string interval_file_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "y_%05d.csv", t);
  return buf;
}

}  // namespace

void write_observations(const std::filesystem::path& dir,
                        const std::vector<IntervalObservations>& observations) {
  std::filesystem::create_directories(dir);
  for (const auto& obs : observations)
    write_matrix_csv(dir / interval_file_name(obs.interval_index()), obs.infection_times());
}

std::vector<IntervalObservations> read_observations(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail("E_IO", "not a directory: " + dir.string());
  std::vector<IntervalObservations> out;
  for (int t = 1;; ++t) {
    auto path = dir / interval_file_name(t);
    if (!std::filesystem::exists(path)) break;
    out.emplace_back(read_matrix_csv(path), t);
  }
  if (out.empty()) fail("E_IO", "no interval files found in " + dir.string());
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("E_IO", "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail("E_IO", "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail("E_IO", "cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("E_IO", "cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace semtrack
