#include "semtrack/ingest.hpp"

#include "semtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <unordered_map>

namespace semtrack {

namespace {

bool parse_timestamp(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

// One `node,ts` token. Node ids carry no commas or semicolons.
bool parse_event(const std::string& token, CascadeEvent& out, std::string& reason) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) {
    reason = "event missing ','";
    return false;
  }
  out.node_id = token.substr(0, comma);
  if (out.node_id.empty()) {
    reason = "empty node id";
    return false;
  }
  if (!parse_timestamp(token.substr(comma + 1), out.timestamp)) {
    reason = "non-numeric timestamp";
    return false;
  }
  if (out.timestamp < 0.0) {
    reason = "negative timestamp";
    return false;
  }
  return true;
}

}  // namespace

ParseResult parse_cascades(std::istream& in) {
  if (!in) fail("E_IO", "unreadable cascade stream");
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      result.rejects.push_back({line_no, "empty line"});
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      result.rejects.push_back({line_no, "missing tab separator"});
      continue;
    }
    CascadeRecord record;
    record.cascade_id = line.substr(0, tab);
    if (record.cascade_id.empty()) {
      result.rejects.push_back({line_no, "empty cascade id"});
      continue;
    }
    std::string reason;
    bool ok = true;
    std::size_t pos = tab + 1;
    while (pos <= line.size()) {
      auto semi = line.find(';', pos);
      if (semi == std::string::npos) semi = line.size();
      CascadeEvent event;
      if (!parse_event(line.substr(pos, semi - pos), event, reason)) {
        ok = false;
        break;
      }
      record.events.push_back(std::move(event));
      pos = semi + 1;
    }
    if (!ok) {
      result.rejects.push_back({line_no, reason});
      continue;
    }
    if (record.events.empty()) {
      result.rejects.push_back({line_no, "no events"});
      continue;
    }
    result.records.push_back(std::move(record));
  }
  if (in.bad()) fail("E_IO", "read failure on cascade stream");
  return result;
}

void IngestConfig::validate() const {
  if (min_sites < 1) fail("E_CONFIG", "min_sites must be at least 1");
  if (!(interval_hours > 0.0)) fail("E_CONFIG", "interval_hours must be positive");
  if (max_nodes && *max_nodes < 1) fail("E_CONFIG", "max_nodes must be at least 1");
}

std::vector<CascadeRecord> filter_cascades(std::vector<CascadeRecord> records, int min_sites) {
  if (min_sites < 1) fail("E_RANGE", "min_sites must be at least 1");
  std::vector<CascadeRecord> kept;
  kept.reserve(records.size());
  for (auto& record : records) {
    // Collapse repeated mentions to the earliest timestamp, keeping
    // first-appearance order of nodes.
    std::vector<CascadeEvent> deduped;
    std::unordered_map<std::string, std::size_t> index;
    deduped.reserve(record.events.size());
    for (auto& event : record.events) {
      auto [it, inserted] = index.emplace(event.node_id, deduped.size());
      if (inserted) {
        deduped.push_back(std::move(event));
      } else if (event.timestamp < deduped[it->second].timestamp) {
        deduped[it->second].timestamp = event.timestamp;
      }
    }
    if (static_cast<int>(deduped.size()) >= min_sites) {
      record.events = std::move(deduped);
      kept.push_back(std::move(record));
    }
  }
  return kept;
}

IntervalDataset build_intervals(const std::vector<CascadeRecord>& records,
                                const IngestConfig& config) {
  config.validate();
  if (records.empty()) fail("E_EMPTY", "no cascades left to bin");

  double origin = std::numeric_limits<double>::infinity();
  for (const auto& record : records)
    for (const auto& event : record.events) origin = std::min(origin, event.timestamp);

  double t_max = 0.0;
  for (const auto& record : records)
    for (const auto& event : record.events) t_max = std::max(t_max, event.timestamp - origin);

  // Mention counts decide row order: most active first, ties by id.
  std::unordered_map<std::string, int> mentions;
  for (const auto& record : records)
    for (const auto& event : record.events) ++mentions[event.node_id];
  std::vector<NodeEntry> node_map;
  node_map.reserve(mentions.size());
  for (const auto& [id, count] : mentions) node_map.push_back({id, count});
  std::sort(node_map.begin(), node_map.end(), [](const NodeEntry& a, const NodeEntry& b) {
    if (a.mentions != b.mentions) return a.mentions > b.mentions;
    return a.id < b.id;
  });
  if (config.max_nodes && static_cast<int>(node_map.size()) > *config.max_nodes)
    node_map.resize(static_cast<std::size_t>(*config.max_nodes));

  std::unordered_map<std::string, int> row_of;
  for (std::size_t i = 0; i < node_map.size(); ++i)
    row_of.emplace(node_map[i].id, static_cast<int>(i));

  const int n = static_cast<int>(node_map.size());
  const int c = static_cast<int>(records.size());
  const int horizon = static_cast<int>(std::floor(t_max / config.interval_hours)) + 1;
  const double fill = 100.0 * t_max;

  std::vector<Matrix> mats(static_cast<std::size_t>(horizon), Matrix::Constant(n, c, fill));
  for (int col = 0; col < c; ++col) {
    for (const auto& event : records[static_cast<std::size_t>(col)].events) {
      auto it = row_of.find(event.node_id);
      if (it == row_of.end()) continue;  // truncated away
      const double shifted = event.timestamp - origin;
      const int t = static_cast<int>(std::floor(shifted / config.interval_hours));
      Matrix& y = mats[static_cast<std::size_t>(t)];
      y(it->second, col) = std::min(y(it->second, col), shifted);
    }
  }

  IntervalDataset out;
  out.node_map = std::move(node_map);
  out.origin = origin;
  out.t_max = t_max;
  out.fill_value = fill;
  out.intervals.reserve(mats.size());
  for (std::size_t k = 0; k < mats.size(); ++k)
    out.intervals.emplace_back(std::move(mats[k]), static_cast<int>(k) + 1);
  return out;
}

Susceptibility build_susceptibility(int num_nodes, int num_contagions, double low, double high,
                                    std::uint64_t seed) {
  return Susceptibility::uniform(num_nodes, num_contagions, low, high, seed);
}

Susceptibility build_susceptibility(int num_nodes, int num_contagions,
                                    const std::filesystem::path& file) {
  Matrix values = read_matrix_csv(file);
  if (values.rows() != num_nodes || values.cols() != num_contagions)
    fail("E_SHAPE", "susceptibility file is " + std::to_string(values.rows()) + "x" +
                        std::to_string(values.cols()) + ", expected " +
                        std::to_string(num_nodes) + "x" + std::to_string(num_contagions));
  return Susceptibility(std::move(values));
}

std::string rejects_report(const std::vector<RejectedLine>& rejects) {
  std::string out;
  for (const auto& reject : rejects) {
    out += "line ";
    out += std::to_string(reject.line_number);
    out += ": ";
    out += reject.reason;
    out += '\n';
  }
  return out;
}

std::string node_map_csv(const std::vector<NodeEntry>& node_map) {
  std::string out = "index,id,mentions\n";
  for (std::size_t i = 0; i < node_map.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += node_map[i].id;
    out += ',';
    out += std::to_string(node_map[i].mentions);
    out += '\n';
  }
  return out;
}

}  // namespace semtrack
