#pragma once

#include "semtrack/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semtrack {

struct CascadeEvent {
  std::string node_id;
  double timestamp = 0.0;  // hours since epoch
};

/// One propagating item and the (node, adoption time) events recorded for it.
struct CascadeRecord {
  std::string cascade_id;
  std::vector<CascadeEvent> events;
};

struct RejectedLine {
  std::size_t line_number = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<CascadeRecord> records;
  std::vector<RejectedLine> rejects;
};

/// Parses lines of the form
///   cascade_id<TAB>node,ts;node,ts;...
/// Events keep file order. Malformed lines (empty, missing fields,
/// non-numeric or negative timestamps) land in the rejects report and
/// parsing continues; only an unreadable stream is fatal.
ParseResult parse_cascades(std::istream& in);

struct IngestConfig {
  int min_sites = 7;              // distinct-node threshold for keeping a cascade
  double interval_hours = 168.0;  // one week
  std::optional<int> max_nodes;   // keep only the most-active nodes

  void validate() const;
};

/// Keeps cascades that reached at least min_sites distinct nodes, after
/// collapsing repeated mentions of a node to its earliest timestamp.
/// Idempotent on already-filtered records.
std::vector<CascadeRecord> filter_cascades(std::vector<CascadeRecord> records, int min_sites);

struct NodeEntry {
  std::string id;
  int mentions = 0;
};

struct IntervalDataset {
  std::vector<NodeEntry> node_map;  // row order: mentions desc, then id asc
  std::vector<IntervalObservations> intervals;
  double origin = 0.0;      // earliest timestamp across all events
  double t_max = 0.0;       // largest origin-shifted timestamp
  double fill_value = 0.0;  // 100 * t_max, marks "not adopted in this interval"
};

/// Bins events into week-style intervals. The time origin is the earliest
/// event; entry (i,c) of interval t is the shifted adoption time when node
/// i adopted cascade c within that interval's span, and the fill value
/// otherwise. Cascades become columns in first-appearance order; nodes
/// become rows by descending mention count then id, truncated to max_nodes.
IntervalDataset build_intervals(const std::vector<CascadeRecord>& records,
                                const IngestConfig& config);

/// Susceptibility proxy when no real prior exists: uniform draws over
/// [low, high].
Susceptibility build_susceptibility(int num_nodes, int num_contagions, double low, double high,
                                    std::uint64_t seed);

/// Susceptibility loaded from a matrix CSV; the shape must be N x C.
Susceptibility build_susceptibility(int num_nodes, int num_contagions,
                                    const std::filesystem::path& file);

/// Rejects report, one line per rejected input line.
std::string rejects_report(const std::vector<RejectedLine>& rejects);

/// Node map CSV with header index,id,mentions.
std::string node_map_csv(const std::vector<NodeEntry>& node_map);

}  // namespace semtrack
