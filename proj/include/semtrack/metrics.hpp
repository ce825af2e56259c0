#pragma once

#include "semtrack/types.hpp"

#include <string>
#include <vector>

namespace semtrack {

/// Mean-square adjacency error sum_ij (est_ij - truth_ij)^2 / N^2;
/// diagonals are included (both are zero by invariant).
double mse(const Matrix& estimate, const Matrix& truth);

/// Number of off-diagonal entries with |a_ij| > threshold.
int edge_count(const Matrix& estimate, double threshold);

struct SupportMetrics {
  double precision = 1.0;  // |est ∩ true| / |est|, 1 when est is empty
  double recall = 1.0;     // |est ∩ true| / |true|, 1 when true is empty
};

/// Support recovery over thresholded off-diagonal entries.
SupportMetrics support_metrics(const Matrix& estimate, const Matrix& truth, double threshold);

/// Any |a_ij| below this counts as structurally zero: proximal iterates
/// carry exact zeros, so anything this small is shrinkage residue.
inline constexpr double kDefaultSupportThreshold = 1e-6;

struct MetricRecord {
  int t = 0;
  double mse = 0.0;
  int nnz = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Per-interval trace of an estimate sequence against ground truth;
/// estimates and truth are matched by interval index.
std::vector<MetricRecord> evaluate(const std::vector<TopologyEstimate>& estimates,
                                   const DynamicNetwork& truth, double threshold);

/// nnz-only trace for when no ground truth exists.
std::vector<MetricRecord> evaluate_nnz_only(const std::vector<TopologyEstimate>& estimates,
                                            double threshold);

/// CSV with header t,mse,nnz,precision,recall — or t,nnz without truth.
std::string metrics_csv(const std::vector<MetricRecord>& records, bool with_truth);

}  // namespace semtrack
