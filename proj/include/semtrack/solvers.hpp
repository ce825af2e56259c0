#pragma once

#include "semtrack/stats.hpp"
#include "semtrack/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace semtrack {

/// Elementwise shrinkage sign(m)*max(|m|-mu, 0); the proximal operator of
/// mu*|.|_1. Produces exact zeros wherever |m| <= mu.
double soft_threshold(double value, double mu);
Matrix soft_threshold(const Matrix& values, double mu);

/// Next Nesterov momentum scalar: (1 + sqrt(4 c_prev^2 + 1)) / 2.
double momentum_next(double c_prev);

/// Per-interval cost evaluated directly from the raw history:
///   1/2 sum_tau beta^(t-tau) |Y^tau - A Y^tau - B X|_F^2 + lambda * |A|_1
/// with t = history length. Solvers never call this; it exists as the
/// reference the sufficient-statistics path is checked against.
double objective(const TopologyEstimate& estimate, std::span<const IntervalObservations> history,
                 const Susceptibility& x, double beta, double lambda);

/// Same cost evaluated from the sufficient statistics (including any seed
/// carried by sigma); what the inner solvers actually minimize.
double objective_from_stats(const SuffStats& stats, const Susceptibility& x,
                            const TopologyEstimate& estimate, double lambda);

/// Smooth-cost gradient w.r.t. the trimmed row a_{-i}:
///   sigma_{-i} a_{-i} + ybar_{-i} x_i b_ii - sigma_col_{-i}.
Vector gradient_a(const NodeView& view, const Vector& a_minus_i, double b_ii);

/// Smooth-cost gradient w.r.t. b_ii; beta_pow_sum supplies the geometric
/// weight sum (1-beta^t)/(1-beta), which equals t when beta = 1:
///   a_{-i}^T ybar_{-i} x_i + beta_pow_sum * b_ii * |x_i|^2 - ybar_row_i . x_i.
double gradient_b(const NodeView& view, const Vector& a_minus_i, double b_ii,
                  double beta_pow_sum);

/// Iterate pair plus Nesterov momentum scalars for one interval's inner
/// solve. `previous` and the momentum pair matter only to the accelerated
/// variants; the zero-diagonal invariant holds at every iteration because
/// rows are reassembled by zero-padding.
struct SolverState {
  TopologyEstimate current;
  TopologyEstimate previous;
  double momentum = 1.0;       // c[k]
  double momentum_prev = 1.0;  // c[k-1]
  int inner_iter = 0;

  static SolverState warm(const TopologyEstimate& start);
};

/// Parallel proximal-gradient iterations, one shrinkage step per node row,
/// until the relative iterate change |V[k]-V[k-1]|_F / max(1, |V[k-1]|_F)
/// drops to tol or max_inner is reached. Non-convergence is visible via
/// inner_iter == max_inner, never an error.
SolverState ista_inner(SolverState state, const std::vector<NodeView>& views,
                       double beta_pow_sum, double lambda, double lipschitz, double tol,
                       int max_inner, int threads = 1);

/// Accelerated variant: gradients are evaluated at the extrapolated point
/// V[k] + ((c[k-1]-1)/c[k]) (V[k]-V[k-1]) and the momentum scalars advance
/// each iteration. With c[0] = c[-1] = 1 the first step is exactly ISTA's.
SolverState fista_inner(SolverState state, const std::vector<NodeView>& views,
                        double beta_pow_sum, double lambda, double lipschitz, double tol,
                        int max_inner, int threads = 1);

/// Exactly one accelerated step; the streaming tracker calls this once per
/// arriving interval and keeps the momentum sequence running across
/// intervals.
SolverState rt_fista_step(SolverState state, const std::vector<NodeView>& views,
                          double beta_pow_sum, double lambda, double lipschitz,
                          int threads = 1);

/// Stochastic-gradient step on the instantaneous cost of one interval.
/// Works on the raw observations (no sufficient statistics); the shrinkage
/// threshold is lambda*eta, the proximal weight matching step size eta.
SolverState sgd_step(SolverState state, const IntervalObservations& obs,
                     const Susceptibility& x, double lambda, double eta, int threads = 1);

/// Count of exactly nonzero off-diagonal entries.
int nnz_offdiag(const Matrix& adjacency);

struct TrackingResult {
  std::vector<TopologyEstimate> estimates;
  std::vector<double> objective_trace;
  std::vector<int> inner_iters_used;
  std::vector<double> lipschitz_trace;
  std::vector<int> nnz_trace;
};

/// Streaming topology tracker. Feed intervals one at a time; each step
/// updates the sufficient statistics, refreshes the Lipschitz constant and
/// lambda_t, and runs the configured inner solver warm-started at the
/// previous interval's estimate. Initial state follows the tracking loop
/// convention: A = 0, b = 1, sigma seeded with the identity.
class Tracker {
public:
  Tracker(Susceptibility x, SolverConfig config);

  const TopologyEstimate& step(const IntervalObservations& obs);

  int t() const { return stats_.t(); }
  const TopologyEstimate& estimate() const { return state_.current; }
  const SuffStats& stats() const { return stats_; }
  const Susceptibility& susceptibility() const { return x_; }
  const SolverConfig& config() const { return config_; }

  double last_objective() const { return last_objective_; }
  int last_inner_iters() const { return last_inner_iters_; }
  double last_lipschitz() const { return last_lipschitz_; }
  int last_nnz() const { return last_nnz_; }

  /// Full state as JSON, sufficient to resume tracking bit-identically.
  std::string checkpoint_json() const;
  static Tracker restore(const std::string& checkpoint, Susceptibility x, SolverConfig config);

private:
  Susceptibility x_;
  SolverConfig config_;
  SuffStats stats_;
  SolverState state_;
  double last_objective_ = 0.0;
  int last_inner_iters_ = 0;
  double last_lipschitz_ = 0.0;
  int last_nnz_ = 0;
};

/// Runs the tracker over a validated dataset and collects per-interval
/// estimates and diagnostics.
TrackingResult track(const Dataset& dataset, const SolverConfig& config);

/// Diagnostics table with header t,objective,inner_iters,nnz,lipschitz.
std::string diagnostics_csv(const TrackingResult& result);

}  // namespace semtrack
