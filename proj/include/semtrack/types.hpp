#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semtrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Error with a stable machine-parsable code ("E_DIM", "E_EMPTY", ...).
/// The CLI prints `<code>: <message>` on a single line and exits nonzero.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] void fail(const std::string& code, const std::string& message);

/// Inferred network for one time interval: a hollow (zero-diagonal),
/// generally asymmetric adjacency matrix whose entry (i,j) weighs the
/// directed edge j -> i, plus the diagonal of the external-influence
/// matrix stored as a vector. Immutable after construction.
class TopologyEstimate {
public:
  TopologyEstimate(Matrix adjacency, Vector external_influence, int interval_index);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Matrix& adjacency() const { return adjacency_; }
  const Vector& external_influence() const { return external_influence_; }
  int interval_index() const { return interval_index_; }

  struct Triplet {
    int row;
    int col;
    double value;
  };

  /// Off-diagonal nonzeros in row-major order, for sparse export.
  std::vector<Triplet> nonzero_triplets() const;

private:
  Matrix adjacency_;
  Vector external_influence_;
  int interval_index_ = 0;
};

/// N x C matrix of adoption times for one interval; entry (i,c) is the
/// time (hours since the observation origin) at which node i adopted
/// contagion c. Nodes that never adopt carry the ingest fill value, so
/// every entry is finite.
class IntervalObservations {
public:
  IntervalObservations(Matrix infection_times, int interval_index);

  int num_nodes() const { return static_cast<int>(infection_times_.rows()); }
  int num_contagions() const { return static_cast<int>(infection_times_.cols()); }
  const Matrix& infection_times() const { return infection_times_; }
  int interval_index() const { return interval_index_; }

private:
  Matrix infection_times_;
  int interval_index_ = 0;
};

/// N x C nonnegative matrix of per-node, per-contagion susceptibility to
/// external influence; time-invariant over the observation horizon.
class Susceptibility {
public:
  explicit Susceptibility(Matrix values);

  /// Entries drawn i.i.d. uniform over [low, high], 0 <= low <= high.
  static Susceptibility uniform(int num_nodes, int num_contagions, double low,
                                double high, std::uint64_t seed);

  int num_nodes() const { return static_cast<int>(values_.rows()); }
  int num_contagions() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }

private:
  Matrix values_;
};

enum class SolverKind { ista, fista, rt_fista, sgd };
enum class LambdaSchedule { constant, sqrt_t };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

struct SolverConfig {
  double beta = 0.98;                                        // forgetting factor in (0,1]
  double lambda0 = 0.0;                                      // base l1 penalty weight
  LambdaSchedule lambda_schedule = LambdaSchedule::constant; // lambda_t = lambda0 or lambda0*sqrt(t)
  SolverKind solver = SolverKind::fista;
  double tol = 1e-6;     // relative iterate-change stopping threshold
  int max_inner = 100;   // inner-iteration budget per interval
  double eta = 0.0;      // SGD step size, required > 0 for solver == sgd
  std::uint64_t rng_seed = 0;
  int threads = 1;       // worker cap for the per-node parallel updates

  void validate() const;
};

/// lambda_t for 1-based interval index t under the configured schedule.
double lambda_at(const SolverConfig& config, int t);

/// Ground-truth network sequence: per-interval hollow adjacency matrices
/// and external-influence diagonals, all of one dimension N.
class DynamicNetwork {
public:
  DynamicNetwork(std::vector<Matrix> adjacency_seq, std::vector<Vector> influence_seq);

  int num_nodes() const;
  int num_intervals() const { return static_cast<int>(adjacency_seq_.size()); }
  const std::vector<Matrix>& adjacency_seq() const { return adjacency_seq_; }
  const std::vector<Vector>& influence_seq() const { return influence_seq_; }
  const Matrix& adjacency(int index) const { return adjacency_seq_.at(index); }
  const Vector& influence(int index) const { return influence_seq_.at(index); }

private:
  std::vector<Matrix> adjacency_seq_;
  std::vector<Vector> influence_seq_;
};

/// Validated bundle of interval observations plus susceptibility with
/// uniform dimensions; the handle all tracking entry points consume.
class Dataset {
public:
  int num_nodes() const { return num_nodes_; }
  int num_contagions() const { return num_contagions_; }
  int num_intervals() const { return static_cast<int>(intervals_.size()); }
  const std::vector<IntervalObservations>& intervals() const { return intervals_; }
  const IntervalObservations& interval(int index) const { return intervals_.at(index); }
  const Susceptibility& susceptibility() const { return susceptibility_; }

  friend Dataset validate_dataset(std::vector<IntervalObservations> intervals,
                                  Susceptibility susceptibility);

private:
  Dataset(std::vector<IntervalObservations> intervals, Susceptibility susceptibility, int n, int c);

  std::vector<IntervalObservations> intervals_;
  Susceptibility susceptibility_;
  int num_nodes_ = 0;
  int num_contagions_ = 0;
};

/// Checks that every interval is N x C, matches the susceptibility shape,
/// and that interval indices run 1..T in order. Throws E_EMPTY / E_DIM
/// naming the offending interval.
Dataset validate_dataset(std::vector<IntervalObservations> intervals,
                         Susceptibility susceptibility);

}  // namespace semtrack
