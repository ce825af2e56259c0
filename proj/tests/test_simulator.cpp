#include "semtrack/simulator.hpp"

#include "semtrack/solvers.hpp"
#include "semtrack/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace semtrack;

TEST_CASE("a single-node seed collapses to an empty support") {
  CHECK(kronecker_support(Matrix::Ones(1, 1), 3) == Matrix::Zero(1, 1));
}

TEST_CASE("the default seed at power three spans 64 nodes") {
  const Matrix support = kronecker_support(default_seed_graph(), 3);
  REQUIRE(support.rows() == 64);
  REQUIRE(support.cols() == 64);
  for (int i = 0; i < 64; ++i) CHECK(support(i, i) == 0.0);
  // 9 seed edges cubed; the seed diagonal is zero so no support is lost.
  CHECK(support.sum() == 729.0);
}

TEST_CASE("kronecker entries follow the product-index rule") {
  Matrix seed(2, 2);
  seed << 1, 1,
          0, 1;
  const Matrix support = kronecker_support(seed, 2);
  REQUIRE(support.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double expected = i == j ? 0.0 : seed(i / 2, j / 2) * seed(i % 2, j % 2);
      CHECK(support(i, j) == expected);
    }
  }
}

TEST_CASE("kronecker power validates its inputs") {
  CHECK_THROWS_AS(kronecker_support(Matrix::Ones(2, 3), 2), Error);
  CHECK_THROWS_AS(kronecker_support(Matrix::Ones(2, 2), 0), Error);
}

TEST_CASE("unsupported edges stay exactly zero under every pattern") {
  Matrix support = kronecker_support(default_seed_graph(), 1);
  for (auto pattern : {EdgePattern::bernoulli(0.5, 3), EdgePattern::smooth(3),
                       EdgePattern::nonsmooth(3)}) {
    auto seq = evolve_edges(support, pattern, 40);
    REQUIRE(seq.size() == 40);
    for (const auto& a : seq)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (support(i, j) == 0.0) CHECK(a(i, j) == 0.0);
  }
}

TEST_CASE("the smooth set contains the decaying exponential profile") {
  const Matrix support = kronecker_support(default_seed_graph(), 2);
  auto seq = evolve_edges(support, EdgePattern::smooth(5), 150);
  bool found_exp = false;
  for (int i = 0; i < support.rows() && !found_exp; ++i) {
    for (int j = 0; j < support.cols() && !found_exp; ++j) {
      if (support(i, j) == 0.0 || i == j) continue;
      if (seq[0](i, j) == 1.0 && std::abs(seq[100](i, j) - std::exp(-1.0)) < 1e-12) {
        found_exp = true;
        // spot-check two more points along the trajectory
        CHECK(std::abs(seq[50](i, j) - std::exp(-0.5)) < 1e-12);
        CHECK(std::abs(seq[149](i, j) - std::exp(-1.49)) < 1e-12);
      }
    }
  }
  CHECK(found_exp);
}

TEST_CASE("every smooth trajectory follows one of the four profiles") {
  Matrix support(2, 2);
  support << 0, 1,
             1, 0;
  auto seq = evolve_edges(support, EdgePattern::smooth(9), 30);
  for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 0}}) {
    bool matched = false;
    for (int which = 0; which < 4; ++which) {
      bool all = true;
      for (int k = 0; k < 30; ++k) {
        const double t = static_cast<double>(k);
        const double expected = which == 0   ? 0.5 + 0.5 * std::sin(0.1 * t)
                                : which == 1 ? 0.5 + 0.5 * std::cos(0.1 * t)
                                : which == 2 ? std::exp(-0.01 * t)
                                             : 0.0;
        if (seq[static_cast<std::size_t>(k)](i, j) != expected) {
          all = false;
          break;
        }
      }
      matched = matched || all;
    }
    CHECK(matched);
  }
}

TEST_CASE("bernoulli trajectories have the right empirical mean") {
  Matrix support = Matrix::Zero(2, 2);
  support(0, 1) = 1.0;
  auto seq = evolve_edges(support, EdgePattern::bernoulli(0.5, 11), 10000);
  double sum = 0.0;
  for (const auto& a : seq) {
    const double v = a(0, 1);
    CHECK((v == 0.0 || v == 1.0));
    sum += v;
  }
  CHECK(std::abs(sum / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("nonsmooth profiles are constant within quarters and jump at the marks") {
  const Matrix support = kronecker_support(default_seed_graph(), 2);
  const int horizon = 1000;
  auto seq = evolve_edges(support, EdgePattern::nonsmooth(13), horizon);
  for (int i = 0; i < support.rows(); ++i) {
    for (int j = 0; j < support.cols(); ++j) {
      if (support(i, j) == 0.0 || i == j) continue;
      for (int q = 0; q < 4; ++q) {
        const int start = q * 250;
        for (int k = start; k < start + 250; ++k)
          CHECK(seq[static_cast<std::size_t>(k)](i, j) == seq[static_cast<std::size_t>(start)](i, j));
      }
      CHECK(seq[249](i, j) != seq[250](i, j));
      CHECK(seq[499](i, j) != seq[500](i, j));
      CHECK(seq[749](i, j) != seq[750](i, j));
      const double v = seq[0](i, j);
      CHECK((v == 0.0 || v == 0.5 || v == 1.0));
    }
  }
}

TEST_CASE("with no adjacency and no noise the observations equal B X") {
  const int n = 3, c = 2;
  std::vector<Matrix> adj(4, Matrix::Zero(n, n));
  auto influences = draw_influences(n, 4, 17);
  DynamicNetwork network(adj, influences);
  auto x = Susceptibility::uniform(n, c, 0.0, 3.0, 18);
  auto obs = synthesize_cascades(network, x, 0.0, 19);
  REQUIRE(obs.size() == 4);
  for (int t = 0; t < 4; ++t) {
    const Matrix expected = influences[static_cast<std::size_t>(t)].asDiagonal() * x.values();
    CHECK(test::rel_frob_err(obs[static_cast<std::size_t>(t)].infection_times(), expected) <
          1e-14);
  }
}

TEST_CASE("two-node chain solves to the hand-computed cascade times") {
  Matrix a(2, 2);
  a << 0.0, 0.5,
       0.0, 0.0;
  DynamicNetwork network({a}, {Vector::Ones(2)});
  Susceptibility x(Matrix::Ones(2, 1));
  auto obs = synthesize_cascades(network, x, 0.0, 20);
  CHECK(obs[0].infection_times()(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(obs[0].infection_times()(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generated data satisfies the model identity") {
  SimConfig config;
  config.seed_matrix = default_seed_graph();
  config.kron_power = 2;
  config.T = 12;
  config.C = 10;
  config.noise_std = 0.0;
  config.rng_seed = 21;
  auto out = simulate(config, EdgePattern::smooth(22));
  for (int t = 0; t < config.T; ++t) {
    const Matrix& y = out.observations[static_cast<std::size_t>(t)].infection_times();
    const Matrix resid = y - out.network.adjacency(t) * y -
                         out.network.influence(t).asDiagonal() * out.susceptibility.values();
    CHECK(resid.norm() <= 1e-9 * y.norm());
  }
}

TEST_CASE("a singular system is reported with its interval") {
  Matrix a(2, 2);
  a << 0.0, 1.0,
       1.0, 0.0;  // I - A is rank one
  DynamicNetwork network({Matrix::Zero(2, 2), a}, {Vector::Ones(2), Vector::Ones(2)});
  Susceptibility x(Matrix::Ones(2, 1));
  try {
    synthesize_cascades(network, x, 0.0, 23);
    FAIL("expected E_SINGULAR");
  } catch (const Error& e) {
    CHECK(e.code() == "E_SINGULAR");
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("simulation is bit-identical under a fixed seed") {
  SimConfig config;
  config.seed_matrix = default_seed_graph();
  config.kron_power = 2;
  config.T = 8;
  config.C = 6;
  config.rng_seed = 24;
  auto first = simulate(config, EdgePattern::nonsmooth(25));
  auto second = simulate(config, EdgePattern::nonsmooth(25));
  for (int t = 0; t < config.T; ++t) {
    CHECK(first.network.adjacency(t) == second.network.adjacency(t));
    CHECK(first.network.influence(t) == second.network.influence(t));
    CHECK(first.observations[static_cast<std::size_t>(t)].infection_times() ==
          second.observations[static_cast<std::size_t>(t)].infection_times());
  }
  CHECK(first.susceptibility.values() == second.susceptibility.values());
}

TEST_CASE("noiseless identifiable instances are recovered by the solver") {
  // 16 nodes, C >= N, sigma = 0, lambda = 0: the least-squares problem has
  // the true network as its unique minimizer.
  const int n = 16, c = 48;
  SimConfig config;
  config.seed_matrix = default_seed_graph();
  config.kron_power = 2;
  config.T = 1;
  config.C = c;
  config.noise_std = 0.0;
  config.rng_seed = 26;
  auto out = simulate(config, EdgePattern::smooth(27));

  auto stats = SuffStats::zeros(n, c);
  stats = update_suff_stats(stats, out.observations[0], 1.0);
  const double lf = lipschitz_constant(stats, out.susceptibility);
  auto views = node_views(stats, out.susceptibility);
  auto solved = fista_inner(
      SolverState::warm(TopologyEstimate(Matrix::Zero(n, n), Vector::Ones(n), 1)), views,
      stats.beta_pow_sum(), 0.0, lf, 1e-13, 60000);
  CHECK(mse(solved.current.adjacency(), out.network.adjacency(0)) <= 1e-3);
}
