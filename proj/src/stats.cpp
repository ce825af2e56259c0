#include "semtrack/stats.hpp"

#include <cmath>

namespace semtrack {

SuffStats::SuffStats(Matrix sigma, Matrix ybar, double beta_pow_sum, int t)
    : sigma_(std::move(sigma)), ybar_(std::move(ybar)), beta_pow_sum_(beta_pow_sum), t_(t) {}

SuffStats SuffStats::zeros(int num_nodes, int num_contagions) {
  return SuffStats(Matrix::Zero(num_nodes, num_nodes), Matrix::Zero(num_nodes, num_contagions),
                   0.0, 0);
}

SuffStats SuffStats::identity_seeded(int num_nodes, int num_contagions) {
  return SuffStats(Matrix::Identity(num_nodes, num_nodes),
                   Matrix::Zero(num_nodes, num_contagions), 0.0, 0);
}

SuffStats SuffStats::from_parts(Matrix sigma, Matrix ybar, double beta_pow_sum, int t) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != ybar.rows())
    fail("E_DIM", "inconsistent sufficient-statistic dimensions");
  return SuffStats(std::move(sigma), std::move(ybar), beta_pow_sum, t);
}

SuffStats update_suff_stats(const SuffStats& prev, const IntervalObservations& obs, double beta) {
  if (obs.num_nodes() != prev.num_nodes() ||
      (prev.num_contagions() > 0 && obs.num_contagions() != prev.num_contagions()))
    fail("E_DIM", "interval " + std::to_string(obs.interval_index()) + " is " +
                      std::to_string(obs.num_nodes()) + "x" +
                      std::to_string(obs.num_contagions()) + ", expected " +
                      std::to_string(prev.num_nodes()) + "x" +
                      std::to_string(prev.num_contagions()));
  const Matrix& y = obs.infection_times();
  Matrix sigma = beta * prev.sigma_ + y * y.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();  // keep exactly symmetric
  Matrix ybar = beta * prev.ybar_ + y;
  return SuffStats(std::move(sigma), std::move(ybar), beta * prev.beta_pow_sum_ + 1.0,
                   prev.t_ + 1);
}

Matrix stacked_gram(const SuffStats& stats, const Susceptibility& x) {
  if (x.num_nodes() != stats.num_nodes() || x.num_contagions() != stats.num_contagions())
    fail("E_DIM", "susceptibility shape does not match sufficient statistics");
  const int n = stats.num_nodes();
  const Matrix& xm = x.values();
  Matrix m(2 * n, 2 * n);
  Matrix cross = stats.ybar() * xm.transpose();
  m.topLeftCorner(n, n) = stats.sigma();
  m.topRightCorner(n, n) = cross;
  m.bottomLeftCorner(n, n) = cross.transpose();
  m.bottomRightCorner(n, n) = stats.beta_pow_sum() * (xm * xm.transpose());
  return 0.5 * (m + m.transpose()).eval();
}

double power_iteration_lmax(const Matrix& m, double tol, int max_iter) {
  const Eigen::Index n = m.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 1e-6 * static_cast<double>(i);
  v.normalize();
  double rho = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0 || !std::isfinite(norm))
      fail("E_NONCONVERGENT", "power iteration stalled; data appears to be all zero");
    v = w / norm;
    const double rho_next = v.dot(m * v);
    if (k > 0 && std::abs(rho_next - rho) <= tol * std::max(std::abs(rho_next), 1e-300)) {
      return rho_next;
    }
    rho = rho_next;
  }
  fail("E_NONCONVERGENT", "power iteration did not converge within " +
                              std::to_string(max_iter) + " iterations");
}

double lipschitz_constant(const SuffStats& stats, const Susceptibility& x) {
  if (stats.t() < 1) fail("E_RANGE", "lipschitz constant requires at least one interval");
  if (stats.lipschitz_) return *stats.lipschitz_;
  const double value = power_iteration_lmax(stacked_gram(stats, x), 1e-8, 10000);
  stats.lipschitz_ = value;
  return value;
}

NodeView node_view(const SuffStats& stats, const Susceptibility& x, int node) {
  const int n = stats.num_nodes();
  const int c = stats.num_contagions();
  if (node < 0 || node >= n) fail("E_RANGE", "node index " + std::to_string(node) + " out of range");
  if (x.num_nodes() != n || x.num_contagions() != c)
    fail("E_DIM", "susceptibility shape does not match sufficient statistics");

  const Matrix& sigma = stats.sigma();
  const Matrix& ybar = stats.ybar();

  NodeView view;
  view.node = node;
  view.sigma_minus_i.resize(n - 1, n - 1);
  view.sigma_minus_i.topLeftCorner(node, node) = sigma.topLeftCorner(node, node);
  view.sigma_minus_i.topRightCorner(node, n - 1 - node) =
      sigma.topRightCorner(node, n - 1 - node);
  view.sigma_minus_i.bottomLeftCorner(n - 1 - node, node) =
      sigma.bottomLeftCorner(n - 1 - node, node);
  view.sigma_minus_i.bottomRightCorner(n - 1 - node, n - 1 - node) =
      sigma.bottomRightCorner(n - 1 - node, n - 1 - node);

  view.sigma_col_minus_i.resize(n - 1);
  view.sigma_col_minus_i.head(node) = sigma.col(node).head(node);
  view.sigma_col_minus_i.tail(n - 1 - node) = sigma.col(node).tail(n - 1 - node);

  view.ybar_minus_i.resize(n - 1, c);
  view.ybar_minus_i.topRows(node) = ybar.topRows(node);
  view.ybar_minus_i.bottomRows(n - 1 - node) = ybar.bottomRows(n - 1 - node);

  view.ybar_row_i = ybar.row(node).transpose();
  view.x_i = x.values().row(node).transpose();
  view.x_i_sq_norm = view.x_i.squaredNorm();
  view.ybar_minus_i_x = view.ybar_minus_i * view.x_i;
  view.ybar_row_i_dot_x = view.ybar_row_i.dot(view.x_i);
  return view;
}

std::vector<NodeView> node_views(const SuffStats& stats, const Susceptibility& x) {
  std::vector<NodeView> views;
  views.reserve(static_cast<std::size_t>(stats.num_nodes()));
  for (int i = 0; i < stats.num_nodes(); ++i) views.push_back(node_view(stats, x, i));
  return views;
}

}  // namespace semtrack
