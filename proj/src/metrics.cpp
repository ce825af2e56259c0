#include "semtrack/metrics.hpp"

#include "semtrack/io.hpp"

#include <cmath>

namespace semtrack {

double mse(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    fail("E_DIM", "estimate and truth dimensions differ");
  const double n = static_cast<double>(estimate.rows());
  return (estimate - truth).squaredNorm() / (n * n);
}

int edge_count(const Matrix& estimate, double threshold) {
  if (threshold < 0.0) fail("E_RANGE", "threshold must be nonnegative");
  int count = 0;
  for (Eigen::Index i = 0; i < estimate.rows(); ++i)
    for (Eigen::Index j = 0; j < estimate.cols(); ++j)
      if (i != j && std::abs(estimate(i, j)) > threshold) ++count;
  return count;
}

SupportMetrics support_metrics(const Matrix& estimate, const Matrix& truth, double threshold) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    fail("E_DIM", "estimate and truth dimensions differ");
  int est_size = 0, true_size = 0, overlap = 0;
  for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
    for (Eigen::Index j = 0; j < estimate.cols(); ++j) {
      if (i == j) continue;
      const bool in_est = std::abs(estimate(i, j)) > threshold;
      const bool in_true = std::abs(truth(i, j)) > threshold;
      est_size += in_est;
      true_size += in_true;
      overlap += in_est && in_true;
    }
  }
  SupportMetrics out;
  out.precision = est_size == 0 ? 1.0 : static_cast<double>(overlap) / est_size;
  out.recall = true_size == 0 ? 1.0 : static_cast<double>(overlap) / true_size;
  return out;
}

std::vector<MetricRecord> evaluate(const std::vector<TopologyEstimate>& estimates,
                                   const DynamicNetwork& truth, double threshold) {
  if (static_cast<int>(estimates.size()) > truth.num_intervals())
    fail("E_DIM", "more estimates than ground-truth intervals");
  std::vector<MetricRecord> out;
  out.reserve(estimates.size());
  for (const auto& est : estimates) {
    const int t = est.interval_index();
    if (t < 1 || t > truth.num_intervals())
      fail("E_DIM", "estimate interval " + std::to_string(t) + " outside ground truth horizon");
    const Matrix& truth_a = truth.adjacency(t - 1);
    MetricRecord rec;
    rec.t = t;
    rec.mse = mse(est.adjacency(), truth_a);
    rec.nnz = edge_count(est.adjacency(), threshold);
    const auto support = support_metrics(est.adjacency(), truth_a, threshold);
    rec.precision = support.precision;
    rec.recall = support.recall;
    out.push_back(rec);
  }
  return out;
}

std::vector<MetricRecord> evaluate_nnz_only(const std::vector<TopologyEstimate>& estimates,
                                            double threshold) {
  std::vector<MetricRecord> out;
  out.reserve(estimates.size());
  for (const auto& est : estimates) {
    MetricRecord rec;
    rec.t = est.interval_index();
    rec.nnz = edge_count(est.adjacency(), threshold);
    out.push_back(rec);
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRecord>& records, bool with_truth) {
  std::string out = with_truth ? "t,mse,nnz,precision,recall\n" : "t,nnz\n";
  for (const auto& rec : records) {
    out += std::to_string(rec.t);
    if (with_truth) {
      out += ',';
      out += format_double(rec.mse);
    }
    out += ',';
    out += std::to_string(rec.nnz);
    if (with_truth) {
      out += ',';
      out += format_double(rec.precision);
      out += ',';
      out += format_double(rec.recall);
    }
    out += '\n';
  }
  return out;
}

}  // namespace semtrack
