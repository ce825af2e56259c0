#pragma once

#include "semtrack/types.hpp"

#include <optional>
#include <vector>

namespace semtrack {

/// Exponentially weighted sufficient statistics of the observation stream:
///   sigma = sum_tau beta^(t-tau) Y^tau (Y^tau)^T        (N x N Gram EWMA)
///   ybar  = sum_tau beta^(t-tau) Y^tau                  (N x C data EWMA)
///   beta_pow_sum = sum_{tau=1..t} beta^(t-tau)
/// sigma is re-symmetrized after every update so downstream spectral code
/// sees an exactly symmetric matrix. A freshly constructed instance may be
/// seeded with sigma = I, matching the tracking loop's initialization; the
/// seed decays as beta^t.
class SuffStats {
public:
  static SuffStats zeros(int num_nodes, int num_contagions);
  static SuffStats identity_seeded(int num_nodes, int num_contagions);
  static SuffStats from_parts(Matrix sigma, Matrix ybar, double beta_pow_sum, int t);

  int num_nodes() const { return static_cast<int>(sigma_.rows()); }
  int num_contagions() const { return static_cast<int>(ybar_.cols()); }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& ybar() const { return ybar_; }
  double beta_pow_sum() const { return beta_pow_sum_; }
  int t() const { return t_; }

private:
  SuffStats(Matrix sigma, Matrix ybar, double beta_pow_sum, int t);

  Matrix sigma_;
  Matrix ybar_;
  double beta_pow_sum_ = 0.0;
  int t_ = 0;
  mutable std::optional<double> lipschitz_;  // cache, invalidated on update

  friend SuffStats update_suff_stats(const SuffStats& prev, const IntervalObservations& obs,
                                     double beta);
  friend double lipschitz_constant(const SuffStats& stats, const Susceptibility& x);
};

/// One recursion step:
///   sigma' = beta*sigma + Y^t (Y^t)^T,  ybar' = beta*ybar + Y^t,
///   beta_pow_sum' = beta*beta_pow_sum + 1, t' = t + 1.
SuffStats update_suff_stats(const SuffStats& prev, const IntervalObservations& obs, double beta);

/// The stacked Gram matrix M = [[sigma, C],[C^T, D]] with
/// C = ybar X^T and D = beta_pow_sum * X X^T, whose largest eigenvalue is
/// the Lipschitz constant of the smooth cost's gradient. C equals the
/// cross-term EWMA sum_tau beta^(t-tau) Y^tau X^T because X is constant.
Matrix stacked_gram(const SuffStats& stats, const Susceptibility& x);

/// Largest eigenvalue of M by power iteration (deterministic start vector,
/// relative tolerance 1e-8, cap 10,000 iterations). Cached in stats until
/// the next update. Throws E_NONCONVERGENT when the iteration cannot make
/// progress, which signals degenerate all-zero data.
double lipschitz_constant(const SuffStats& stats, const Susceptibility& x);

/// Power iteration for the dominant eigenvalue of a symmetric PSD matrix.
double power_iteration_lmax(const Matrix& m, double tol, int max_iter);

/// Per-node trimmed views of the sufficient statistics: everything the
/// row-i gradient needs with row/column i removed. The ybar products
/// against x_i are iterate-independent and cached here so inner solver
/// iterations do not recompute them.
struct NodeView {
  Matrix sigma_minus_i;       // (N-1) x (N-1)
  Vector sigma_col_minus_i;   // column i of sigma with entry i removed
  Matrix ybar_minus_i;        // (N-1) x C
  Vector ybar_row_i;          // row i of ybar
  Vector x_i;                 // row i of X
  double x_i_sq_norm = 0.0;
  Vector ybar_minus_i_x;      // ybar_minus_i * x_i
  double ybar_row_i_dot_x = 0.0;
  int node = 0;
};

NodeView node_view(const SuffStats& stats, const Susceptibility& x, int node);

/// All N views against one immutable snapshot; safe to consume in parallel.
std::vector<NodeView> node_views(const SuffStats& stats, const Susceptibility& x);

}  // namespace semtrack
