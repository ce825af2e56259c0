#include "semtrack/solvers.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace semtrack;

namespace {

std::vector<IntervalObservations> make_history(const std::vector<Matrix>& ys) {
  std::vector<IntervalObservations> out;
  for (std::size_t k = 0; k < ys.size(); ++k)
    out.emplace_back(ys[k], static_cast<int>(k) + 1);
  return out;
}

SuffStats stats_of(const std::vector<IntervalObservations>& history, double beta) {
  auto stats =
      SuffStats::zeros(history.front().num_nodes(), history.front().num_contagions());
  for (const auto& obs : history) stats = update_suff_stats(stats, obs, beta);
  return stats;
}

// Scalar-loop oracle: the weighted residual cost expanded entry by entry,
// no matrix algebra shared with the implementation.
double objective_oracle(const Matrix& a, const Vector& b, const std::vector<Matrix>& ys,
                        const Matrix& x, double beta, double lambda) {
  const int n = static_cast<int>(a.rows());
  const int c = static_cast<int>(x.cols());
  const int horizon = static_cast<int>(ys.size());
  double smooth = 0.0;
  for (int tau = 0; tau < horizon; ++tau) {
    const double w = std::pow(beta, horizon - 1 - tau);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < c; ++k) {
        double pred = b(i) * x(i, k);
        for (int j = 0; j < n; ++j)
          if (j != i) pred += a(i, j) * ys[tau](j, k);
        const double r = ys[tau](i, k) - pred;
        smooth += w * r * r;
      }
    }
  }
  double l1 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l1 += std::abs(a(i, j));
  return 0.5 * smooth + lambda * l1;
}

double shrink_oracle(double v, double mu) {
  const double mag = std::abs(v) - mu;
  if (mag <= 0.0) return 0.0;
  return v > 0.0 ? mag : -mag;
}

// One full proximal sweep computed with scalar loops straight from the raw
// history (gradients, step, shrinkage, zero-padding).
void prox_sweep_oracle(const std::vector<Matrix>& ys, const Matrix& x, double beta,
                       const Matrix& a0, const Vector& b0, double lambda, double lf,
                       Matrix& a1, Vector& b1) {
  const int n = static_cast<int>(a0.rows());
  const int c = static_cast<int>(x.cols());
  const int horizon = static_cast<int>(ys.size());
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> ybar(n, std::vector<double>(c, 0.0));
  double bps = 0.0;
  for (int tau = 0; tau < horizon; ++tau) {
    const double w = std::pow(beta, horizon - 1 - tau);
    bps += w;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q)
        for (int k = 0; k < c; ++k) sigma[p][q] += w * ys[tau](p, k) * ys[tau](q, k);
      for (int k = 0; k < c; ++k) ybar[p][k] += w * ys[tau](p, k);
    }
  }
  a1 = Matrix::Zero(n, n);
  b1 = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double grad = -sigma[j][i];
      for (int k = 0; k < n; ++k)
        if (k != i) grad += sigma[j][k] * a0(i, k);
      double yx = 0.0;
      for (int k = 0; k < c; ++k) yx += ybar[j][k] * x(i, k);
      grad += yx * b0(i);
      a1(i, j) = shrink_oracle(a0(i, j) - grad / lf, lambda / lf);
    }
    double grad_b = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double yx = 0.0;
      for (int k = 0; k < c; ++k) yx += ybar[j][k] * x(i, k);
      grad_b += a0(i, j) * yx;
    }
    double xsq = 0.0, yixi = 0.0;
    for (int k = 0; k < c; ++k) {
      xsq += x(i, k) * x(i, k);
      yixi += ybar[i][k] * x(i, k);
    }
    grad_b += bps * b0(i) * xsq - yixi;
    b1(i) = b0(i) - grad_b / lf;
  }
}

struct Instance {
  std::vector<Matrix> ys;
  Susceptibility x;
  std::vector<IntervalObservations> history;
  SuffStats stats;
  std::vector<NodeView> views;
  double beta;
};

Instance make_instance(int n, int c, int horizon, double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> ys;
  for (int t = 0; t < horizon; ++t) ys.push_back(test::random_matrix(n, c, rng, 2.0));
  auto x = Susceptibility::uniform(n, c, 0.0, 2.0, seed + 1);
  auto history = make_history(ys);
  auto stats = stats_of(history, beta);
  auto views = node_views(stats, x);
  return Instance{std::move(ys), std::move(x), std::move(history), std::move(stats),
                  std::move(views), beta};
}

TopologyEstimate zero_estimate(int n, int t = 1) {
  return TopologyEstimate(Matrix::Zero(n, n), Vector::Ones(n), t);
}

}  // namespace

TEST_CASE("soft thresholding") {
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-1.2, 0.5) == -0.7);
  CHECK(soft_threshold(0.5, 0.5) == 0.0);  // boundary collapses to exactly zero

  std::mt19937_64 rng(1);
  Matrix m = test::random_matrix(4, 4, rng);
  CHECK(soft_threshold(m, 0.0) == m);
}

TEST_CASE("momentum recursion values") {
  const double c1 = momentum_next(1.0);
  CHECK(c1 == doctest::Approx(1.618033988749895).epsilon(1e-15));
  const double c2 = momentum_next(c1);
  CHECK(c2 == doctest::Approx(2.193527085331054).epsilon(1e-15));
  CHECK(momentum_next(c2) == doctest::Approx(2.7497913401204452).epsilon(1e-15));
  for (double c = 1.0; c < 50.0; c *= 1.37) CHECK(momentum_next(c) > c);
}

TEST_CASE("objective with zero estimate is the weighted data energy") {
  auto inst = make_instance(4, 3, 3, 0.8, 2);
  TopologyEstimate zero(Matrix::Zero(4, 4), Vector::Zero(4), 3);
  double expected = 0.0;
  for (int tau = 0; tau < 3; ++tau)
    expected += 0.5 * std::pow(0.8, 2 - tau) * inst.ys[tau].squaredNorm();
  CHECK(test::rel_err(objective(zero, inst.history, inst.x, 0.8, 7.0), expected) < 1e-12);
}

TEST_CASE("objective vanishes on exactly generated noiseless data") {
  std::mt19937_64 rng(3);
  const int n = 5, c = 4;
  Matrix a_true = Matrix::Zero(n, n);
  a_true(0, 2) = 0.4;
  a_true(3, 1) = -0.3;
  a_true(4, 0) = 0.2;
  Vector b_true = test::random_matrix(n, 1, rng).col(0);
  auto x = Susceptibility::uniform(n, c, 0.0, 3.0, 4);
  const Matrix rhs = b_true.asDiagonal() * x.values();
  const Matrix y = (Matrix::Identity(n, n) - a_true).lu().solve(rhs);
  auto history = make_history({y});
  TopologyEstimate truth(a_true, b_true, 1);
  CHECK(objective(truth, history, x, 0.9, 0.0) < 1e-18 * y.squaredNorm());
}

TEST_CASE("objective matches the flattened scalar oracle") {
  std::mt19937_64 rng(5);
  auto inst = make_instance(3, 2, 4, 0.75, 6);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix a = test::random_hollow(3, rng);
    Vector b = test::random_matrix(3, 1, rng).col(0);
    TopologyEstimate est(a, b, 4);
    const double got = objective(est, inst.history, inst.x, 0.75, 1.3);
    const double want = objective_oracle(a, b, inst.ys, inst.x.values(), 0.75, 1.3);
    CHECK(test::rel_err(got, want) < 1e-10);
  }
}

TEST_CASE("objective from stats equals the direct evaluation") {
  std::mt19937_64 rng(7);
  auto inst = make_instance(6, 4, 5, 0.9, 8);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix a = test::random_hollow(6, rng);
    Vector b = test::random_matrix(6, 1, rng).col(0);
    TopologyEstimate est(a, b, 5);
    const double direct = objective(est, inst.history, inst.x, 0.9, 2.0);
    const double from_stats = objective_from_stats(inst.stats, inst.x, est, 2.0);
    CHECK(test::rel_err(from_stats, direct) < 1e-10);
  }
}

TEST_CASE("gradient_a at the origin is minus the trimmed sigma column") {
  auto inst = make_instance(5, 3, 2, 0.9, 9);
  for (int i = 0; i < 5; ++i) {
    const auto& view = inst.views[i];
    Vector grad = gradient_a(view, Vector::Zero(4), 0.0);
    CHECK((grad + view.sigma_col_minus_i).norm() == 0.0);
  }
}

TEST_CASE("gradient_a scalar hand instance") {
  // sigma_{-i} = 4, a = (1), x_i = (2), ybar_{-i} = (3), b_ii = 1,
  // sigma_col_{-i} = 5  ->  4*1 + 3*2*1 - 5 = 5
  NodeView view;
  view.node = 0;
  view.sigma_minus_i = Matrix::Constant(1, 1, 4.0);
  view.sigma_col_minus_i = Vector::Constant(1, 5.0);
  view.ybar_minus_i = Matrix::Constant(1, 1, 3.0);
  view.ybar_row_i = Vector::Constant(1, 0.0);
  view.x_i = Vector::Constant(1, 2.0);
  view.x_i_sq_norm = 4.0;
  view.ybar_minus_i_x = view.ybar_minus_i * view.x_i;
  view.ybar_row_i_dot_x = 0.0;
  Vector grad = gradient_a(view, Vector::Constant(1, 1.0), 1.0);
  CHECK(grad(0) == 5.0);
}

TEST_CASE("gradient_b scalar hand instance with the beta = 1 weight sum") {
  // beta = 1, t = 3 -> weight sum 3; b_ii = 1, |x_i|^2 = 2, other terms zero -> 6
  NodeView view;
  view.node = 0;
  view.sigma_minus_i = Matrix::Zero(1, 1);
  view.sigma_col_minus_i = Vector::Zero(1);
  view.ybar_minus_i = Matrix::Zero(1, 2);
  view.ybar_row_i = Vector::Zero(2);
  view.x_i = Vector::Constant(2, 1.0);
  view.x_i_sq_norm = 2.0;
  view.ybar_minus_i_x = Vector::Zero(1);
  view.ybar_row_i_dot_x = 0.0;
  CHECK(gradient_b(view, Vector::Zero(1), 1.0, 3.0) == 6.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng(11);
  auto inst = make_instance(5, 3, 4, 0.9, 12);
  const double h = 1e-5;
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = test::random_hollow(5, rng, 0.5);
    Vector b = test::random_matrix(5, 1, rng).col(0);
    const int i = static_cast<int>(rng() % 5);
    int j = static_cast<int>(rng() % 5);
    if (j == i) j = (j + 1) % 5;

    auto smooth = [&](const Matrix& am, const Vector& bv) {
      return objective(TopologyEstimate(am, bv, 4), inst.history, inst.x, 0.9, 0.0);
    };

    Matrix ap = a, am = a;
    ap(i, j) += h;
    am(i, j) -= h;
    const double fd_a = (smooth(ap, b) - smooth(am, b)) / (2.0 * h);

    Vector bp = b, bm = b;
    bp(i) += h;
    bm(i) -= h;
    const double fd_b = (smooth(a, bp) - smooth(a, bm)) / (2.0 * h);

    Vector a_mi(4);
    int r = 0;
    for (int k = 0; k < 5; ++k)
      if (k != i) a_mi(r++) = a(i, k);
    const Vector ga = gradient_a(inst.views[i], a_mi, b(i));
    const double gb = gradient_b(inst.views[i], a_mi, b(i), inst.stats.beta_pow_sum());

    const int j_trim = j < i ? j : j - 1;
    CHECK(test::rel_err(ga(j_trim), fd_a) < 1e-6);
    CHECK(test::rel_err(gb, fd_b) < 1e-6);
  }
}

TEST_CASE("a large enough lambda shrinks the first iterate to zero") {
  auto inst = make_instance(4, 3, 2, 0.9, 13);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  // From A = 0 the stepped entries are bounded by the largest gradient.
  double max_grad = 0.0;
  for (const auto& view : inst.views)
    max_grad = std::max(max_grad,
                        gradient_a(view, Vector::Zero(3), 1.0).cwiseAbs().maxCoeff());
  const double lambda = 2.0 * max_grad;
  auto out = ista_inner(SolverState::warm(zero_estimate(4)), inst.views,
                        inst.stats.beta_pow_sum(), lambda, lf, 0.0, 1);
  CHECK(out.current.adjacency() == Matrix::Zero(4, 4));
}

TEST_CASE("one ISTA sweep equals the scalar-loop oracle") {
  std::mt19937_64 rng(14);
  auto inst = make_instance(3, 2, 2, 0.8, 15);
  Matrix a0 = test::random_hollow(3, rng);
  Vector b0 = test::random_matrix(3, 1, rng).col(0);
  const double lambda = 0.7;
  const double lf = 5.0;  // any positive step scale works for a single sweep

  Matrix a1;
  Vector b1;
  prox_sweep_oracle(inst.ys, inst.x.values(), 0.8, a0, b0, lambda, lf, a1, b1);

  auto out = ista_inner(SolverState::warm(TopologyEstimate(a0, b0, 2)), inst.views,
                        inst.stats.beta_pow_sum(), lambda, lf, 0.0, 1);
  CHECK(test::rel_frob_err(out.current.adjacency(), a1) < 1e-12);
  CHECK((out.current.external_influence() - b1).norm() < 1e-12 * b1.norm());
  CHECK(out.inner_iter == 1);
}

TEST_CASE("ISTA objective trace is non-increasing") {
  auto inst = make_instance(6, 4, 3, 0.9, 16);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  const double lambda = 1.0;
  SolverState state = SolverState::warm(zero_estimate(6));
  double prev = objective_from_stats(inst.stats, inst.x, state.current, lambda);
  for (int k = 0; k < 40; ++k) {
    state = ista_inner(std::move(state), inst.views, inst.stats.beta_pow_sum(), lambda, lf,
                       0.0, 1);
    const double cur = objective_from_stats(inst.stats, inst.x, state.current, lambda);
    CHECK(cur <= prev + 1e-12 * std::abs(prev));
    prev = cur;
  }
}

TEST_CASE("FISTA's first step equals ISTA's bit for bit") {
  auto inst = make_instance(5, 3, 2, 0.95, 17);
  std::mt19937_64 rng(18);
  Matrix a0 = test::random_hollow(5, rng);
  Vector b0 = test::random_matrix(5, 1, rng).col(0);
  TopologyEstimate start(a0, b0, 2);
  const double lf = lipschitz_constant(inst.stats, inst.x);

  auto ista_out = ista_inner(SolverState::warm(start), inst.views, inst.stats.beta_pow_sum(),
                             0.8, lf, 0.0, 1);
  auto fista_out = fista_inner(SolverState::warm(start), inst.views, inst.stats.beta_pow_sum(),
                               0.8, lf, 0.0, 1);
  CHECK(fista_out.current.adjacency() == ista_out.current.adjacency());
  CHECK(fista_out.current.external_influence() == ista_out.current.external_influence());
  CHECK(fista_out.momentum_prev == 1.0);
  CHECK(fista_out.momentum == doctest::Approx(1.618033988749895).epsilon(1e-15));
}

TEST_CASE("FISTA momentum advances along the scalar recursion") {
  auto inst = make_instance(4, 2, 2, 0.9, 19);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  auto out = fista_inner(SolverState::warm(zero_estimate(4)), inst.views,
                         inst.stats.beta_pow_sum(), 0.1, lf, 0.0, 2);
  CHECK(out.momentum_prev == doctest::Approx(1.618033988749895).epsilon(1e-15));
  CHECK(out.momentum == doctest::Approx(2.193527085331054).epsilon(1e-15));
  CHECK(out.inner_iter == 2);
}

TEST_CASE("converged ISTA and FISTA agree on the objective") {
  auto inst = make_instance(8, 5, 3, 0.9, 20);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  const double lambda = 2.0;
  auto ista_out = ista_inner(SolverState::warm(zero_estimate(8)), inst.views,
                             inst.stats.beta_pow_sum(), lambda, lf, 1e-12, 20000);
  auto fista_out = fista_inner(SolverState::warm(zero_estimate(8)), inst.views,
                               inst.stats.beta_pow_sum(), lambda, lf, 1e-12, 20000);
  CHECK(ista_out.inner_iter < 20000);
  CHECK(fista_out.inner_iter < 20000);
  const double fi = objective_from_stats(inst.stats, inst.x, ista_out.current, lambda);
  const double ff = objective_from_stats(inst.stats, inst.x, fista_out.current, lambda);
  CHECK(test::rel_err(fi, ff) < 1e-6);
}

TEST_CASE("rt step is definitionally one FISTA iteration") {
  auto inst = make_instance(5, 3, 2, 0.9, 21);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  std::mt19937_64 rng(22);
  Matrix a0 = test::random_hollow(5, rng);
  Vector b0 = test::random_matrix(5, 1, rng).col(0);
  SolverState state{TopologyEstimate(a0, b0, 2), TopologyEstimate(a0 * 0.5, b0 * 0.5, 2),
                    1.7, 1.3, 6};

  auto rt = rt_fista_step(state, inst.views, inst.stats.beta_pow_sum(), 0.4, lf);
  auto one = fista_inner(state, inst.views, inst.stats.beta_pow_sum(), 0.4, lf, 0.0, 1);
  CHECK(rt.current.adjacency() == one.current.adjacency());
  CHECK(rt.current.external_influence() == one.current.external_influence());
  CHECK(rt.momentum == one.momentum);
  CHECK(rt.momentum_prev == one.momentum_prev);
  CHECK(rt.previous.adjacency() == a0);  // prior iterate kept for the next extrapolation
}

TEST_CASE("SGD gradient at the origin reduces to the data term") {
  std::mt19937_64 rng(23);
  const int n = 4, c = 3;
  Matrix y = test::random_matrix(n, c, rng);
  auto x = Susceptibility::uniform(n, c, 0.0, 2.0, 24);
  IntervalObservations obs(y, 1);
  const double eta = 0.01;
  SolverState start = SolverState::warm(TopologyEstimate(Matrix::Zero(n, n), Vector::Zero(n), 1));
  auto out = sgd_step(start, obs, x, 0.0, eta);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      // gradient -Y_{-i} y_i means the step lands at eta * (Y_{-i} y_i)
      const double expected = eta * y.row(j).dot(y.row(i));
      CHECK(test::rel_err(out.current.adjacency()(i, j), expected) < 1e-12);
      ++r;
    }
  }
}

TEST_CASE("a vanishing step leaves the iterate unchanged when lambda is zero") {
  auto inst = make_instance(4, 3, 1, 1.0, 25);
  std::mt19937_64 rng(26);
  Matrix a0 = test::random_hollow(4, rng);
  Vector b0 = test::random_matrix(4, 1, rng).col(0);
  SolverState start = SolverState::warm(TopologyEstimate(a0, b0, 1));
  auto out = sgd_step(start, inst.history.front(), inst.x, 0.0, 1e-300);
  CHECK(out.current.adjacency() == a0);
  CHECK(out.current.external_influence() == b0);
}

TEST_CASE("one SGD step matches the scalar-loop oracle") {
  std::mt19937_64 rng(27);
  const int n = 3, c = 2;
  Matrix y = test::random_matrix(n, c, rng);
  Matrix xm = test::random_nonneg(n, c, rng, 2.0);
  Matrix a0 = test::random_hollow(n, rng);
  Vector b0 = test::random_matrix(n, 1, rng).col(0);
  const double lambda = 0.4, eta = 0.05;

  // Scalar evaluation of the instantaneous-gradient update.
  Matrix a1 = Matrix::Zero(n, n);
  Vector b1 = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double grad = 0.0;
      for (int k = 0; k < c; ++k) {
        double inner = b0(i) * xm(i, k) - y(i, k);
        for (int l = 0; l < n; ++l)
          if (l != i) inner += a0(i, l) * y(l, k);
        grad += y(j, k) * inner;
      }
      a1(i, j) = shrink_oracle(a0(i, j) - eta * grad, lambda * eta);
    }
    double grad_b = 0.0;
    for (int k = 0; k < c; ++k) {
      double inner = b0(i) * xm(i, k) - y(i, k);
      for (int l = 0; l < n; ++l)
        if (l != i) inner += a0(i, l) * y(l, k);
      grad_b += xm(i, k) * inner;
    }
    b1(i) = b0(i) - eta * grad_b;
  }

  auto out = sgd_step(SolverState::warm(TopologyEstimate(a0, b0, 1)), IntervalObservations(y, 1),
                      Susceptibility(xm), lambda, eta);
  CHECK(test::rel_frob_err(out.current.adjacency(), a1) < 1e-13);
  CHECK((out.current.external_influence() - b1).norm() < 1e-13 * b1.norm());
}

TEST_CASE("sgd_step validates eta") {
  auto inst = make_instance(3, 2, 1, 1.0, 28);
  CHECK_THROWS_AS(sgd_step(SolverState::warm(zero_estimate(3)), inst.history.front(), inst.x,
                           1.0, 0.0),
                  Error);
}

TEST_CASE("subgradient iterates stay dense while proximal ones sparsify") {
  // The plain subgradient update a <- a - eta*(grad + lambda*sign(a)) never
  // produces exact zeros; the shrinkage update does. This is why the
  // proximal form is the user-facing solver.
  std::mt19937_64 rng(29);
  const int n = 6, c = 4;
  Matrix y = test::random_matrix(n, c, rng);
  Matrix xm = test::random_nonneg(n, c, rng, 2.0);
  Matrix a_start = test::random_hollow(n, rng, 0.3);
  Vector b_start = test::random_matrix(n, 1, rng).col(0);
  const double eta = 2e-3;
  const double lambda = 40.0;

  Matrix a_sub = a_start;
  Vector b_sub = b_start;
  for (int step = 0; step < 30; ++step) {
    Matrix a_next = a_sub;
    Vector b_next = b_sub;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double grad = 0.0;
        for (int k = 0; k < c; ++k) {
          double inner = b_sub(i) * xm(i, k) - y(i, k);
          for (int l = 0; l < n; ++l)
            if (l != i) inner += a_sub(i, l) * y(l, k);
          grad += y(j, k) * inner;
        }
        const double sign = a_sub(i, j) > 0 ? 1.0 : (a_sub(i, j) < 0 ? -1.0 : 0.0);
        a_next(i, j) = a_sub(i, j) - eta * (grad + lambda * sign);
      }
      double grad_b = 0.0;
      for (int k = 0; k < c; ++k) {
        double inner = b_sub(i) * xm(i, k) - y(i, k);
        for (int l = 0; l < n; ++l)
          if (l != i) inner += a_sub(i, l) * y(l, k);
        grad_b += xm(i, k) * inner;
      }
      b_next(i) = b_sub(i) - eta * grad_b;
    }
    a_sub = a_next;
    b_sub = b_next;
  }

  SolverState prox = SolverState::warm(TopologyEstimate(a_start, b_start, 1));
  IntervalObservations obs(y, 1);
  Susceptibility x(xm);
  for (int step = 0; step < 30; ++step) prox = sgd_step(std::move(prox), obs, x, lambda, eta);

  const int dense_nnz = nnz_offdiag(a_sub);
  const int prox_nnz = nnz_offdiag(prox.current.adjacency());
  CHECK(dense_nnz == n * (n - 1));  // no exact zeros anywhere
  CHECK(prox_nnz < n * (n - 1) / 2);
}

TEST_CASE("every solver preserves the zero diagonal exactly") {
  auto inst = make_instance(6, 4, 3, 0.9, 30);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  const double bps = inst.stats.beta_pow_sum();

  auto check_diag = [](const Matrix& a) {
    for (int i = 0; i < a.rows(); ++i) CHECK(a(i, i) == 0.0);
  };

  auto ista_out = ista_inner(SolverState::warm(zero_estimate(6)), inst.views, bps, 0.5, lf,
                             1e-10, 50);
  check_diag(ista_out.current.adjacency());
  auto fista_out = fista_inner(SolverState::warm(zero_estimate(6)), inst.views, bps, 0.5, lf,
                               1e-10, 50);
  check_diag(fista_out.current.adjacency());
  auto sgd_out = sgd_step(SolverState::warm(zero_estimate(6)), inst.history.front(), inst.x,
                          0.5, 1e-3);
  check_diag(sgd_out.current.adjacency());
}

TEST_CASE("sparsity is non-increasing along a lambda sweep and hits zero") {
  auto inst = make_instance(8, 6, 3, 0.9, 31);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  const double bps = inst.stats.beta_pow_sum();

  int prev_nnz = 8 * 7 + 1;
  for (double lambda : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    auto out = fista_inner(SolverState::warm(zero_estimate(8)), inst.views, bps, lambda, lf,
                           1e-10, 5000);
    const int nnz = nnz_offdiag(out.current.adjacency());
    CHECK(nnz <= prev_nnz);
    prev_nnz = nnz;
  }

  bool fully_sparse = false;
  for (double lambda = 1000.0; lambda < 1e14; lambda *= 8.0) {
    auto out = fista_inner(SolverState::warm(zero_estimate(8)), inst.views, bps, lambda, lf,
                           1e-10, 5000);
    if (nnz_offdiag(out.current.adjacency()) == 0) {
      fully_sparse = true;
      break;
    }
  }
  CHECK(fully_sparse);
}

TEST_CASE("inner solvers report non-convergence through the iteration count") {
  auto inst = make_instance(5, 3, 2, 0.9, 32);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  auto out = ista_inner(SolverState::warm(zero_estimate(5)), inst.views,
                        inst.stats.beta_pow_sum(), 0.1, lf, 0.0, 3);
  CHECK(out.inner_iter == 3);
}

TEST_CASE("inner solvers validate their inputs") {
  auto inst = make_instance(4, 2, 1, 1.0, 33);
  CHECK_THROWS_AS(ista_inner(SolverState::warm(zero_estimate(4)), inst.views, 1.0, 0.1, 0.0,
                             1e-6, 10),
                  Error);
  CHECK_THROWS_AS(ista_inner(SolverState::warm(zero_estimate(3)), inst.views, 1.0, 0.1, 1.0,
                             1e-6, 10),
                  Error);
}

TEST_CASE("threaded and serial sweeps agree bit for bit") {
  auto inst = make_instance(9, 4, 3, 0.9, 34);
  const double lf = lipschitz_constant(inst.stats, inst.x);
  const double bps = inst.stats.beta_pow_sum();
  auto serial = fista_inner(SolverState::warm(zero_estimate(9)), inst.views, bps, 0.7, lf,
                            1e-9, 60, 1);
  auto threaded = fista_inner(SolverState::warm(zero_estimate(9)), inst.views, bps, 0.7, lf,
                              1e-9, 60, 4);
  CHECK(serial.current.adjacency() == threaded.current.adjacency());
  CHECK(serial.current.external_influence() == threaded.current.external_influence());
}
