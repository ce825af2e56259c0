#include "semtrack/solvers.hpp"

#include "semtrack/io.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

namespace semtrack {

namespace {

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

Vector trimmed_row(const Matrix& a, int i) {
  const Eigen::Index n = a.rows();
  Vector v(n - 1);
  v.head(i) = a.row(i).head(i).transpose();
  v.tail(n - 1 - i) = a.row(i).tail(n - 1 - i).transpose();
  return v;
}

void set_padded_row(Matrix& a, int i, const Vector& v) {
  const Eigen::Index n = a.rows();
  a.row(i).head(i) = v.head(i).transpose();
  a(i, i) = 0.0;
  a.row(i).tail(n - 1 - i) = v.tail(n - 1 - i).transpose();
}

double relative_change(const Matrix& a_new, const Vector& b_new, const Matrix& a_old,
                       const Vector& b_old) {
  const double delta =
      std::sqrt((a_new - a_old).squaredNorm() + (b_new - b_old).squaredNorm());
  const double base = std::sqrt(a_old.squaredNorm() + b_old.squaredNorm());
  return delta / std::max(1.0, base);
}

/// One parallel shrinkage sweep: gradient step of size 1/L at the
/// evaluation point, soft-threshold the trimmed rows, plain descent on b,
/// reassemble rows by zero-padding.
void prox_pass(const std::vector<NodeView>& views, double beta_pow_sum, double lambda,
               double lipschitz, const Matrix& a_eval, const Vector& b_eval, Matrix& a_next,
               Vector& b_next, int threads) {
  const int n = static_cast<int>(a_eval.rows());
  const double mu = lambda / lipschitz;
  parallel_for(n, threads, [&](int i) {
    const NodeView& view = views[static_cast<std::size_t>(i)];
    const Vector a_mi = trimmed_row(a_eval, i);
    const Vector grad = gradient_a(view, a_mi, b_eval(i));
    const double grad_b = gradient_b(view, a_mi, b_eval(i), beta_pow_sum);
    Vector stepped = a_mi - grad / lipschitz;
    for (Eigen::Index j = 0; j < stepped.size(); ++j)
      stepped(j) = soft_threshold(stepped(j), mu);
    set_padded_row(a_next, i, stepped);
    b_next(i) = b_eval(i) - grad_b / lipschitz;
  });
}

void check_inner_inputs(const SolverState& state, const std::vector<NodeView>& views,
                        double lipschitz) {
  if (!(lipschitz > 0.0)) fail("E_RANGE", "lipschitz constant must be positive");
  if (static_cast<int>(views.size()) != state.current.size())
    fail("E_DIM", "expected " + std::to_string(state.current.size()) + " node views, got " +
                      std::to_string(views.size()));
}

}  // namespace

double soft_threshold(double value, double mu) {
  if (value > mu) return value - mu;
  if (value < -mu) return value + mu;
  return 0.0;
}

Matrix soft_threshold(const Matrix& values, double mu) {
  return values.unaryExpr([mu](double v) { return soft_threshold(v, mu); });
}

double momentum_next(double c_prev) {
  return 0.5 * (1.0 + std::sqrt(4.0 * c_prev * c_prev + 1.0));
}

double objective(const TopologyEstimate& estimate, std::span<const IntervalObservations> history,
                 const Susceptibility& x, double beta, double lambda) {
  const int n = estimate.size();
  if (x.num_nodes() != n) fail("E_DIM", "susceptibility does not match estimate dimension");
  const Matrix& a = estimate.adjacency();
  const Matrix bx = estimate.external_influence().asDiagonal() * x.values();
  const int t = static_cast<int>(history.size());
  double smooth = 0.0;
  for (int tau = 0; tau < t; ++tau) {
    const Matrix& y = history[static_cast<std::size_t>(tau)].infection_times();
    if (y.rows() != n || y.cols() != x.num_contagions())
      fail("E_DIM", "interval " + std::to_string(history[tau].interval_index()) +
                        " does not match estimate/susceptibility dimensions");
    smooth += std::pow(beta, t - 1 - tau) * (y - a * y - bx).squaredNorm();
  }
  return 0.5 * smooth + lambda * a.cwiseAbs().sum();
}

double objective_from_stats(const SuffStats& stats, const Susceptibility& x,
                            const TopologyEstimate& estimate, double lambda) {
  const Matrix& a = estimate.adjacency();
  const Vector& b = estimate.external_influence();
  const Matrix& sigma = stats.sigma();
  const Matrix& xm = x.values();
  if (a.rows() != sigma.rows()) fail("E_DIM", "estimate does not match sufficient statistics");

  // Expansion of the weighted residual norm in terms of (sigma, ybar);
  // full products stand in for the trimmed ones because diag(A) = 0.
  const Matrix yx = stats.ybar() * xm.transpose();
  const Vector xsq = xm.rowwise().squaredNorm();
  double f = sigma.trace();
  f += (a * sigma).cwiseProduct(a).sum();                          // tr(A sigma A^T)
  f -= 2.0 * a.cwiseProduct(sigma).sum();                          // tr(A sigma), sigma symmetric
  f += stats.beta_pow_sum() * (b.array().square() * xsq.array()).sum();
  f -= 2.0 * (b.array() * yx.diagonal().array()).sum();
  f += 2.0 * (b.array() * a.cwiseProduct(yx.transpose()).rowwise().sum().array()).sum();
  return 0.5 * f + lambda * a.cwiseAbs().sum();
}

Vector gradient_a(const NodeView& view, const Vector& a_minus_i, double b_ii) {
  return view.sigma_minus_i * a_minus_i + view.ybar_minus_i_x * b_ii - view.sigma_col_minus_i;
}

double gradient_b(const NodeView& view, const Vector& a_minus_i, double b_ii,
                  double beta_pow_sum) {
  return a_minus_i.dot(view.ybar_minus_i_x) + beta_pow_sum * b_ii * view.x_i_sq_norm -
         view.ybar_row_i_dot_x;
}

SolverState SolverState::warm(const TopologyEstimate& start) {
  return SolverState{start, start, 1.0, 1.0, 0};
}

SolverState ista_inner(SolverState state, const std::vector<NodeView>& views,
                       double beta_pow_sum, double lambda, double lipschitz, double tol,
                       int max_inner, int threads) {
  check_inner_inputs(state, views, lipschitz);
  const int n = state.current.size();
  const int t_idx = state.current.interval_index();
  Matrix a_cur = state.current.adjacency();
  Vector b_cur = state.current.external_influence();
  Matrix a_next(n, n);
  Vector b_next(n);
  for (int k = 0; k < max_inner; ++k) {
    prox_pass(views, beta_pow_sum, lambda, lipschitz, a_cur, b_cur, a_next, b_next, threads);
    const double rel = relative_change(a_next, b_next, a_cur, b_cur);
    a_cur.swap(a_next);
    b_cur.swap(b_next);
    ++state.inner_iter;
    if (rel <= tol) break;
  }
  state.previous = TopologyEstimate(std::move(a_next), std::move(b_next), t_idx);
  state.current = TopologyEstimate(std::move(a_cur), std::move(b_cur), t_idx);
  return state;
}

namespace {

/// One accelerated sweep; advances the momentum pair. Buffers rotate so no
/// per-iteration allocation happens.
void fista_iteration(SolverState& state, const std::vector<NodeView>& views,
                     double beta_pow_sum, double lambda, double lipschitz, int threads,
                     Matrix& a_cur, Vector& b_cur, Matrix& a_prev, Vector& b_prev,
                     Matrix& a_next, Vector& b_next, double* rel_change_out) {
  const double w = (state.momentum_prev - 1.0) / state.momentum;
  const Matrix a_eval = a_cur + w * (a_cur - a_prev);
  const Vector b_eval = b_cur + w * (b_cur - b_prev);
  prox_pass(views, beta_pow_sum, lambda, lipschitz, a_eval, b_eval, a_next, b_next, threads);
  if (rel_change_out) *rel_change_out = relative_change(a_next, b_next, a_cur, b_cur);
  a_prev.swap(a_cur);
  b_prev.swap(b_cur);
  a_cur.swap(a_next);
  b_cur.swap(b_next);
  ++state.inner_iter;
  const double c_next = momentum_next(state.momentum);
  state.momentum_prev = state.momentum;
  state.momentum = c_next;
}

}  // namespace

SolverState fista_inner(SolverState state, const std::vector<NodeView>& views,
                        double beta_pow_sum, double lambda, double lipschitz, double tol,
                        int max_inner, int threads) {
  check_inner_inputs(state, views, lipschitz);
  if (state.previous.size() != state.current.size())
    fail("E_DIM", "solver state iterates disagree in dimension");
  const int n = state.current.size();
  const int t_idx = state.current.interval_index();
  Matrix a_cur = state.current.adjacency();
  Vector b_cur = state.current.external_influence();
  Matrix a_prev = state.previous.adjacency();
  Vector b_prev = state.previous.external_influence();
  Matrix a_next(n, n);
  Vector b_next(n);
  for (int k = 0; k < max_inner; ++k) {
    double rel = 0.0;
    fista_iteration(state, views, beta_pow_sum, lambda, lipschitz, threads, a_cur, b_cur,
                    a_prev, b_prev, a_next, b_next, &rel);
    if (rel <= tol) break;
  }
  state.previous = TopologyEstimate(std::move(a_prev), std::move(b_prev), t_idx);
  state.current = TopologyEstimate(std::move(a_cur), std::move(b_cur), t_idx);
  return state;
}

SolverState rt_fista_step(SolverState state, const std::vector<NodeView>& views,
                          double beta_pow_sum, double lambda, double lipschitz, int threads) {
  return fista_inner(std::move(state), views, beta_pow_sum, lambda, lipschitz, /*tol=*/0.0,
                     /*max_inner=*/1, threads);
}

SolverState sgd_step(SolverState state, const IntervalObservations& obs,
                     const Susceptibility& x, double lambda, double eta, int threads) {
  if (!(eta > 0.0)) fail("E_RANGE", "eta must be positive");
  const int n = state.current.size();
  if (obs.num_nodes() != n || x.num_nodes() != n ||
      obs.num_contagions() != x.num_contagions())
    fail("E_DIM", "observations/susceptibility do not match solver state");
  const Matrix& y = obs.infection_times();
  const Matrix& xm = x.values();
  const Matrix& a_cur = state.current.adjacency();
  const Vector& b_cur = state.current.external_influence();
  Matrix a_next(n, n);
  Vector b_next(n);
  const double mu = lambda * eta;
  const int t_idx = state.current.interval_index();
  parallel_for(n, threads, [&](int i) {
    // Full-row products equal the trimmed ones since a(i,i) = 0.
    const Vector a_row = a_cur.row(i).transpose();
    const Vector x_i = xm.row(i).transpose();
    const Vector y_i = y.row(i).transpose();
    const Vector resid = y.transpose() * a_row + x_i * b_cur(i) - y_i;  // C-vector
    const Vector grad_full = y * resid;
    const Vector y_x = y * x_i;
    const double grad_b = a_row.dot(y_x) + b_cur(i) * x_i.squaredNorm() - y_i.dot(x_i);
    for (int j = 0; j < n; ++j) {
      a_next(i, j) =
          (j == i) ? 0.0 : soft_threshold(a_row(j) - eta * grad_full(j), mu);
    }
    b_next(i) = b_cur(i) - eta * grad_b;
  });
  ++state.inner_iter;
  state.previous = state.current;
  state.current = TopologyEstimate(std::move(a_next), std::move(b_next), t_idx);
  return state;
}

int nnz_offdiag(const Matrix& adjacency) {
  int count = 0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
      if (i != j && adjacency(i, j) != 0.0) ++count;
  return count;
}

Tracker::Tracker(Susceptibility x, SolverConfig config)
    : x_(std::move(x)),
      config_(config),
      stats_(SuffStats::identity_seeded(x_.num_nodes(), x_.num_contagions())),
      state_{TopologyEstimate(Matrix::Zero(x_.num_nodes(), x_.num_nodes()),
                              Vector::Ones(x_.num_nodes()), 0),
             TopologyEstimate(Matrix::Zero(x_.num_nodes(), x_.num_nodes()),
                              Vector::Ones(x_.num_nodes()), 0),
             1.0, 1.0, 0} {
  config_.validate();
}

const TopologyEstimate& Tracker::step(const IntervalObservations& obs) {
  const int t = stats_.t() + 1;
  const double lam = lambda_at(config_, t);
  stats_ = update_suff_stats(stats_, obs, config_.beta);
  const double lipschitz = lipschitz_constant(stats_, x_);
  const auto views = node_views(stats_, x_);
  const double bps = stats_.beta_pow_sum();

  TopologyEstimate warm_cur(state_.current.adjacency(), state_.current.external_influence(), t);
  switch (config_.solver) {
    case SolverKind::ista: {
      SolverState s = SolverState::warm(warm_cur);
      s = ista_inner(std::move(s), views, bps, lam, lipschitz, config_.tol, config_.max_inner,
                     config_.threads);
      last_inner_iters_ = s.inner_iter;
      state_ = std::move(s);
      break;
    }
    case SolverKind::fista: {
      // Fresh subproblem per interval: momentum resets, both iterates start
      // at the warm-start point.
      SolverState s = SolverState::warm(warm_cur);
      s = fista_inner(std::move(s), views, bps, lam, lipschitz, config_.tol, config_.max_inner,
                      config_.threads);
      last_inner_iters_ = s.inner_iter;
      state_ = std::move(s);
      break;
    }
    case SolverKind::rt_fista: {
      // Continuous stream: momentum and the previous iterate carry over,
      // and the inner-iteration index coincides with t.
      SolverState s{warm_cur,
                    TopologyEstimate(state_.previous.adjacency(),
                                     state_.previous.external_influence(), t),
                    state_.momentum, state_.momentum_prev, state_.inner_iter};
      s = rt_fista_step(std::move(s), views, bps, lam, lipschitz, config_.threads);
      last_inner_iters_ = 1;
      state_ = std::move(s);
      break;
    }
    case SolverKind::sgd: {
      SolverState s{warm_cur, warm_cur, 1.0, 1.0, state_.inner_iter};
      s = sgd_step(std::move(s), obs, x_, lam, config_.eta, config_.threads);
      last_inner_iters_ = 1;
      state_ = std::move(s);
      break;
    }
  }
  last_lipschitz_ = lipschitz;
  last_nnz_ = nnz_offdiag(state_.current.adjacency());
  last_objective_ = objective_from_stats(stats_, x_, state_.current, lam);
  return state_.current;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const nlohmann::json& rows) {
  const auto r = rows.size();
  const auto c = rows.empty() ? 0 : rows.front().size();
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  return m;
}

Vector vector_from(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string Tracker::checkpoint_json() const {
  nlohmann::json obj;
  obj["version"] = 1;
  obj["solver"] = to_string(config_.solver);
  obj["t"] = stats_.t();
  obj["beta_pow_sum"] = stats_.beta_pow_sum();
  obj["sigma"] = matrix_json(stats_.sigma());
  obj["ybar"] = matrix_json(stats_.ybar());
  obj["current_a"] = matrix_json(state_.current.adjacency());
  obj["current_b"] = vector_json(state_.current.external_influence());
  obj["previous_a"] = matrix_json(state_.previous.adjacency());
  obj["previous_b"] = vector_json(state_.previous.external_influence());
  obj["momentum"] = state_.momentum;
  obj["momentum_prev"] = state_.momentum_prev;
  obj["inner_iter"] = state_.inner_iter;
  return obj.dump();
}

Tracker Tracker::restore(const std::string& checkpoint, Susceptibility x, SolverConfig config) {
  nlohmann::json obj = nlohmann::json::parse(checkpoint, nullptr, false);
  if (obj.is_discarded() || !obj.contains("version"))
    fail("E_PARSE", "invalid checkpoint JSON");
  if (obj["version"].get<int>() != 1) fail("E_PARSE", "unsupported checkpoint version");
  Tracker tracker(std::move(x), config);
  const int t = obj["t"].get<int>();
  Matrix sigma = matrix_from(obj["sigma"]);
  Matrix ybar = matrix_from(obj["ybar"]);
  if (sigma.rows() != tracker.x_.num_nodes() || ybar.cols() != tracker.x_.num_contagions())
    fail("E_DIM", "checkpoint dimensions do not match susceptibility");
  tracker.stats_ = SuffStats::from_parts(std::move(sigma), std::move(ybar),
                                         obj["beta_pow_sum"].get<double>(), t);
  tracker.state_ = SolverState{
      TopologyEstimate(matrix_from(obj["current_a"]), vector_from(obj["current_b"]), t),
      TopologyEstimate(matrix_from(obj["previous_a"]), vector_from(obj["previous_b"]), t),
      obj["momentum"].get<double>(), obj["momentum_prev"].get<double>(),
      obj["inner_iter"].get<int>()};
  return tracker;
}

TrackingResult track(const Dataset& dataset, const SolverConfig& config) {
  config.validate();
  Tracker tracker(dataset.susceptibility(), config);
  TrackingResult result;
  const auto horizon = static_cast<std::size_t>(dataset.num_intervals());
  result.estimates.reserve(horizon);
  result.objective_trace.reserve(horizon);
  result.inner_iters_used.reserve(horizon);
  result.lipschitz_trace.reserve(horizon);
  result.nnz_trace.reserve(horizon);
  for (const auto& obs : dataset.intervals()) {
    tracker.step(obs);
    result.estimates.push_back(tracker.estimate());
    result.objective_trace.push_back(tracker.last_objective());
    result.inner_iters_used.push_back(tracker.last_inner_iters());
    result.lipschitz_trace.push_back(tracker.last_lipschitz());
    result.nnz_trace.push_back(tracker.last_nnz());
  }
  return result;
}

std::string diagnostics_csv(const TrackingResult& result) {
  std::string out = "t,objective,inner_iters,nnz,lipschitz\n";
  for (std::size_t k = 0; k < result.estimates.size(); ++k) {
    out += std::to_string(result.estimates[k].interval_index());
    out += ',';
    out += format_double(result.objective_trace[k]);
    out += ',';
    out += std::to_string(result.inner_iters_used[k]);
    out += ',';
    out += std::to_string(result.nnz_trace[k]);
    out += ',';
    out += format_double(result.lipschitz_trace[k]);
    out += '\n';
  }
  return out;
}

}  // namespace semtrack
