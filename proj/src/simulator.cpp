#include "semtrack/simulator.hpp"

#include "semtrack/rng.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

namespace semtrack {

EdgePattern EdgePattern::bernoulli(double p, std::uint64_t seed) {
  EdgePattern pattern{Kind::bernoulli, p, seed};
  pattern.validate();
  return pattern;
}

EdgePattern EdgePattern::smooth(std::uint64_t seed) { return {Kind::smooth, 0.5, seed}; }

EdgePattern EdgePattern::nonsmooth(std::uint64_t seed) { return {Kind::nonsmooth, 0.5, seed}; }

void EdgePattern::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) fail("E_CONFIG", "bernoulli probability must lie in [0,1]");
}

EdgePattern::Kind pattern_kind_from_string(const std::string& name) {
  if (name == "bernoulli") return EdgePattern::Kind::bernoulli;
  if (name == "smooth") return EdgePattern::Kind::smooth;
  if (name == "nonsmooth") return EdgePattern::Kind::nonsmooth;
  fail("E_CONFIG", "unknown edge pattern '" + name + "' (expected bernoulli|smooth|nonsmooth)");
}

std::string to_string(EdgePattern::Kind kind) {
  switch (kind) {
    case EdgePattern::Kind::bernoulli: return "bernoulli";
    case EdgePattern::Kind::smooth: return "smooth";
    case EdgePattern::Kind::nonsmooth: return "nonsmooth";
  }
  fail("E_RANGE", "unknown pattern kind");
}

void SimConfig::validate() const {
  if (seed_matrix.size() == 0 || seed_matrix.rows() != seed_matrix.cols())
    fail("E_CONFIG", "seed matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < seed_matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < seed_matrix.cols(); ++j)
      if (seed_matrix(i, j) != 0.0 && seed_matrix(i, j) != 1.0)
        fail("E_CONFIG", "seed matrix entries must be 0 or 1");
  if (kron_power < 1) fail("E_CONFIG", "kron_power must be at least 1");
  if (T < 1 || C < 1) fail("E_CONFIG", "T and C must be positive");
  if (noise_std < 0.0) fail("E_CONFIG", "noise_std must be nonnegative");
  if (x_low < 0.0 || x_high < x_low)
    fail("E_CONFIG", "susceptibility range must satisfy 0 <= x_low <= x_high");
}

Matrix default_seed_graph() {
  Matrix m(4, 4);
  m << 0, 0, 1, 1,
       0, 0, 1, 1,
       0, 1, 0, 1,
       1, 0, 1, 0;
  return m;
}

Matrix kronecker_support(const Matrix& seed, int power) {
  if (seed.rows() != seed.cols()) fail("E_DIM", "seed matrix must be square");
  if (power < 1) fail("E_RANGE", "kronecker power must be at least 1");
  Matrix result = seed;
  for (int k = 1; k < power; ++k) {
    Matrix next(result.rows() * seed.rows(), result.cols() * seed.cols());
    for (Eigen::Index i = 0; i < result.rows(); ++i)
      for (Eigen::Index j = 0; j < result.cols(); ++j)
        next.block(i * seed.rows(), j * seed.cols(), seed.rows(), seed.cols()) =
            result(i, j) * seed;
    result = std::move(next);
  }
  result.diagonal().setZero();  // no self-loops
  return result;
}

namespace {

constexpr int kProfilesPerKind = 4;

double smooth_profile(int which, double t) {
  switch (which) {
    case 0: return 0.5 + 0.5 * std::sin(0.1 * t);
    case 1: return 0.5 + 0.5 * std::cos(0.1 * t);
    case 2: return std::exp(-0.01 * t);
    default: return 0.0;
  }
}

// Piecewise-constant levels per quarter of the horizon, abrupt change at
// every quarter mark, distinct arrangement per profile.
constexpr double kNonsmoothLevels[kProfilesPerKind][4] = {
    {1.0, 0.5, 1.0, 0.5},
    {0.5, 1.0, 0.0, 1.0},
    {0.0, 1.0, 0.5, 0.0},
    {1.0, 0.0, 1.0, 0.0},
};

double nonsmooth_profile(int which, int k, int T) {
  const int quarter = std::min(3, (4 * k) / std::max(T, 1));
  return kNonsmoothLevels[which][quarter];
}

}  // namespace

std::vector<Matrix> evolve_edges(const Matrix& support, const EdgePattern& pattern, int T) {
  if (support.rows() != support.cols()) fail("E_DIM", "support must be square");
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    if (support(i, i) != 0.0) fail("E_DIM", "support must be hollow");
  pattern.validate();
  if (T < 1) fail("E_RANGE", "horizon must be positive");

  const Eigen::Index n = support.rows();
  std::vector<Matrix> seq(static_cast<std::size_t>(T), Matrix::Zero(n, n));

  // Each supported edge owns an independent RNG stream keyed by its
  // row-major index, so trajectories do not depend on scan order.
  std::uint64_t edge_counter = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || support(i, j) == 0.0) continue;
      auto rng = make_engine(pattern.rng_seed, edge_counter++);
      switch (pattern.kind) {
        case EdgePattern::Kind::bernoulli: {
          std::bernoulli_distribution draw(pattern.p);
          for (int k = 0; k < T; ++k) seq[static_cast<std::size_t>(k)](i, j) = draw(rng) ? 1.0 : 0.0;
          break;
        }
        case EdgePattern::Kind::smooth: {
          std::uniform_int_distribution<int> pick(0, kProfilesPerKind - 1);
          const int which = pick(rng);
          for (int k = 0; k < T; ++k)
            seq[static_cast<std::size_t>(k)](i, j) = smooth_profile(which, static_cast<double>(k));
          break;
        }
        case EdgePattern::Kind::nonsmooth: {
          std::uniform_int_distribution<int> pick(0, kProfilesPerKind - 1);
          const int which = pick(rng);
          for (int k = 0; k < T; ++k)
            seq[static_cast<std::size_t>(k)](i, j) = nonsmooth_profile(which, k, T);
          break;
        }
      }
    }
  }
  return seq;
}

std::vector<Vector> draw_influences(int num_nodes, int T, std::uint64_t seed) {
  if (num_nodes < 1 || T < 1) fail("E_RANGE", "dimensions must be positive");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k) {
    auto rng = make_engine(seed, 0xb000000ULL + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector b(num_nodes);
    for (int i = 0; i < num_nodes; ++i) b(i) = gauss(rng);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<IntervalObservations> synthesize_cascades(const DynamicNetwork& network,
                                                      const Susceptibility& x, double noise_std,
                                                      std::uint64_t seed) {
  const int n = network.num_nodes();
  if (x.num_nodes() != n) fail("E_DIM", "susceptibility does not match network dimension");
  if (noise_std < 0.0) fail("E_RANGE", "noise_std must be nonnegative");
  const int c = x.num_contagions();
  std::vector<IntervalObservations> out;
  out.reserve(static_cast<std::size_t>(network.num_intervals()));
  for (int k = 0; k < network.num_intervals(); ++k) {
    Matrix rhs = network.influence(k).asDiagonal() * x.values();
    if (noise_std > 0.0) {
      auto rng = make_engine(seed, 0xe000000ULL + static_cast<std::uint64_t>(k));
      std::normal_distribution<double> gauss(0.0, noise_std);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) rhs(i, j) += gauss(rng);
    }
    const Matrix system = Matrix::Identity(n, n) - network.adjacency(k);
    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible())
      fail("E_SINGULAR", "I - A is singular at interval " + std::to_string(k + 1));
    out.emplace_back(lu.solve(rhs), k + 1);
  }
  return out;
}

SimOutput simulate(const SimConfig& config, const EdgePattern& pattern) {
  config.validate();
  const Matrix support = kronecker_support(config.seed_matrix, config.kron_power);
  const int n = static_cast<int>(support.rows());
  auto adjacency = evolve_edges(support, pattern, config.T);
  auto influence = draw_influences(n, config.T, mix_seed(config.rng_seed, 0x1fULL));
  DynamicNetwork network(std::move(adjacency), std::move(influence));
  auto x = Susceptibility::uniform(n, config.C, config.x_low, config.x_high,
                                   mix_seed(config.rng_seed, 0x2fULL));
  auto observations =
      synthesize_cascades(network, x, config.noise_std, mix_seed(config.rng_seed, 0x3fULL));
  return SimOutput{std::move(network), std::move(x), std::move(observations)};
}

}  // namespace semtrack
