#pragma once

#include "semtrack/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace semtrack {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Matrix text format: CSV, row-major, one matrix row per line, '.' decimal
// point, no header. Round-trips bit-exactly.
std::string matrix_to_csv(const Matrix& m);
Matrix parse_matrix_csv(std::istream& in);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Estimate snapshot format: one JSON object per line,
//   {"t": int, "a": [[...]], "b": [...]}
std::string estimate_to_json_line(const TopologyEstimate& estimate);
TopologyEstimate estimate_from_json_line(const std::string& line);
void write_estimates_jsonl(const std::filesystem::path& path,
                           const std::vector<TopologyEstimate>& estimates);
std::vector<TopologyEstimate> read_estimates_jsonl(const std::filesystem::path& path);

// A ground-truth network uses the same snapshot format, one line per interval.
void write_network_jsonl(const std::filesystem::path& path, const DynamicNetwork& network);
DynamicNetwork read_network_jsonl(const std::filesystem::path& path);

// Observations live as one CSV matrix per interval, y_00001.csv ... y_T.csv,
// inside a directory.
void write_observations(const std::filesystem::path& dir,
                        const std::vector<IntervalObservations>& observations);
std::vector<IntervalObservations> read_observations(const std::filesystem::path& dir);

/// Writes via a temporary file and renames, so readers never see partial content.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace semtrack
