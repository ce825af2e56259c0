#include "semtrack/types.hpp"

#include "semtrack/rng.hpp"

#include <cmath>
#include <sstream>

namespace semtrack {

void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

namespace {

std::string shape_of(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

}  // namespace

TopologyEstimate::TopologyEstimate(Matrix adjacency, Vector external_influence,
                                   int interval_index)
    : adjacency_(std::move(adjacency)),
      external_influence_(std::move(external_influence)),
      interval_index_(interval_index) {
  if (adjacency_.rows() != adjacency_.cols())
    fail("E_DIM", "adjacency must be square, got " + shape_of(adjacency_));
  if (external_influence_.size() != adjacency_.rows())
    fail("E_DIM", "external influence length " + std::to_string(external_influence_.size()) +
                      " does not match adjacency dimension " + std::to_string(adjacency_.rows()));
  if (interval_index_ < 0)
    fail("E_RANGE", "interval index must be nonnegative");
  for (int i = 0; i < adjacency_.rows(); ++i) {
    if (adjacency_(i, i) != 0.0)
      fail("E_DIM", "adjacency diagonal must be exactly zero; entry (" + std::to_string(i) +
                        "," + std::to_string(i) + ") is " + std::to_string(adjacency_(i, i)));
  }
}

std::vector<TopologyEstimate::Triplet> TopologyEstimate::nonzero_triplets() const {
  std::vector<Triplet> out;
  for (int i = 0; i < adjacency_.rows(); ++i)
    for (int j = 0; j < adjacency_.cols(); ++j)
      if (i != j && adjacency_(i, j) != 0.0) out.push_back({i, j, adjacency_(i, j)});
  return out;
}

IntervalObservations::IntervalObservations(Matrix infection_times, int interval_index)
    : infection_times_(std::move(infection_times)), interval_index_(interval_index) {
  if (infection_times_.size() == 0)
    fail("E_EMPTY", "interval observations must be nonempty");
  if (!infection_times_.allFinite())
    fail("E_DIM", "interval " + std::to_string(interval_index_) +
                      " contains non-finite infection times");
  if (interval_index_ < 0) fail("E_RANGE", "interval index must be nonnegative");
}

Susceptibility::Susceptibility(Matrix values) : values_(std::move(values)) {
  if (values_.size() == 0) fail("E_EMPTY", "susceptibility must be nonempty");
  if (!values_.allFinite() || (values_.array() < 0.0).any())
    fail("E_DIM", "susceptibility entries must be finite and nonnegative");
}

Susceptibility Susceptibility::uniform(int num_nodes, int num_contagions, double low,
                                       double high, std::uint64_t seed) {
  if (num_nodes < 1 || num_contagions < 1)
    fail("E_RANGE", "susceptibility dimensions must be positive");
  if (low < 0.0 || high < low)
    fail("E_RANGE", "susceptibility range must satisfy 0 <= low <= high");
  auto rng = make_engine(seed, 0x5e5u);
  std::uniform_real_distribution<double> dist(low, high);
  Matrix x(num_nodes, num_contagions);
  for (int i = 0; i < num_nodes; ++i)
    for (int c = 0; c < num_contagions; ++c) x(i, c) = dist(rng);
  return Susceptibility(std::move(x));
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::ista: return "ista";
    case SolverKind::fista: return "fista";
    case SolverKind::rt_fista: return "rt-fista";
    case SolverKind::sgd: return "sgd";
  }
  fail("E_RANGE", "unknown solver kind");
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "ista") return SolverKind::ista;
  if (name == "fista") return SolverKind::fista;
  if (name == "rt-fista" || name == "rt_fista") return SolverKind::rt_fista;
  if (name == "sgd") return SolverKind::sgd;
  fail("E_CONFIG", "unknown solver '" + name + "' (expected ista|fista|rt-fista|sgd)");
}

void SolverConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) fail("E_CONFIG", "beta must lie in (0,1]");
  if (lambda0 < 0.0) fail("E_CONFIG", "lambda0 must be nonnegative");
  if (!(tol > 0.0)) fail("E_CONFIG", "tol must be positive");
  if (max_inner < 1) fail("E_CONFIG", "max_inner must be at least 1");
  if (solver == SolverKind::sgd && !(eta > 0.0))
    fail("E_CONFIG", "eta must be positive for the sgd solver");
  if (threads < 1) fail("E_CONFIG", "threads must be at least 1");
}

double lambda_at(const SolverConfig& config, int t) {
  if (t < 1) fail("E_RANGE", "interval index must be >= 1");
  switch (config.lambda_schedule) {
    case LambdaSchedule::constant: return config.lambda0;
    case LambdaSchedule::sqrt_t: return config.lambda0 * std::sqrt(static_cast<double>(t));
  }
  fail("E_RANGE", "unknown lambda schedule");
}

DynamicNetwork::DynamicNetwork(std::vector<Matrix> adjacency_seq,
                               std::vector<Vector> influence_seq)
    : adjacency_seq_(std::move(adjacency_seq)), influence_seq_(std::move(influence_seq)) {
  if (adjacency_seq_.empty()) fail("E_EMPTY", "network sequence must be nonempty");
  if (influence_seq_.size() != adjacency_seq_.size())
    fail("E_DIM", "adjacency and influence sequences differ in length");
  const auto n = adjacency_seq_.front().rows();
  for (std::size_t t = 0; t < adjacency_seq_.size(); ++t) {
    const Matrix& a = adjacency_seq_[t];
    if (a.rows() != n || a.cols() != n)
      fail("E_DIM", "adjacency at index " + std::to_string(t) + " is " + shape_of(a) +
                        ", expected " + std::to_string(n) + "x" + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i)
      if (a(i, i) != 0.0)
        fail("E_DIM", "adjacency at index " + std::to_string(t) + " has nonzero diagonal");
    if (influence_seq_[t].size() != n)
      fail("E_DIM", "influence at index " + std::to_string(t) + " has wrong length");
  }
}

int DynamicNetwork::num_nodes() const {
  return static_cast<int>(adjacency_seq_.front().rows());
}

Dataset::Dataset(std::vector<IntervalObservations> intervals, Susceptibility susceptibility,
                 int n, int c)
    : intervals_(std::move(intervals)),
      susceptibility_(std::move(susceptibility)),
      num_nodes_(n),
      num_contagions_(c) {}

Dataset validate_dataset(std::vector<IntervalObservations> intervals,
                         Susceptibility susceptibility) {
  if (intervals.empty()) fail("E_EMPTY", "dataset has no intervals");
  const int n = intervals.front().num_nodes();
  const int c = intervals.front().num_contagions();
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto& obs = intervals[k];
    if (obs.num_nodes() != n || obs.num_contagions() != c)
      fail("E_DIM", "interval " + std::to_string(obs.interval_index()) + " is " +
                        std::to_string(obs.num_nodes()) + "x" +
                        std::to_string(obs.num_contagions()) + ", expected " +
                        std::to_string(n) + "x" + std::to_string(c));
    if (obs.interval_index() != static_cast<int>(k) + 1)
      fail("E_DIM", "interval at position " + std::to_string(k) + " has index " +
                        std::to_string(obs.interval_index()) + ", expected " +
                        std::to_string(k + 1));
  }
  if (susceptibility.num_nodes() != n || susceptibility.num_contagions() != c)
    fail("E_DIM", "susceptibility is " + std::to_string(susceptibility.num_nodes()) + "x" +
                      std::to_string(susceptibility.num_contagions()) + ", expected " +
                      std::to_string(n) + "x" + std::to_string(c));
  return Dataset(std::move(intervals), std::move(susceptibility), n, c);
}

}  // namespace semtrack
