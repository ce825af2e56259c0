#pragma once

#include "semtrack/types.hpp"

#include <cstdint>
#include <vector>

namespace semtrack {

/// How the weights of supported edges evolve over the horizon. Every
/// supported edge is independently assigned one trajectory:
///   bernoulli  - fresh Bernoulli(p) draw in {0,1} each interval
///   smooth     - one of four smooth profiles chosen uniformly per edge
///   nonsmooth  - one of four piecewise-constant profiles with jumps at the
///                quarter marks of the horizon
struct EdgePattern {
  enum class Kind { bernoulli, smooth, nonsmooth };

  Kind kind = Kind::smooth;
  double p = 0.5;  // bernoulli success probability
  std::uint64_t rng_seed = 0;

  static EdgePattern bernoulli(double p, std::uint64_t seed);
  static EdgePattern smooth(std::uint64_t seed);
  static EdgePattern nonsmooth(std::uint64_t seed);

  void validate() const;
};

EdgePattern::Kind pattern_kind_from_string(const std::string& name);
std::string to_string(EdgePattern::Kind kind);

struct SimConfig {
  Matrix seed_matrix;   // small 0/1 square matrix
  int kron_power = 3;   // N = dim(seed)^kron_power
  int T = 1000;
  int C = 80;
  double noise_std = 1.0;
  double x_low = 0.0;
  double x_high = 3.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// The library's default 4x4 seed graph; its third Kronecker power gives
/// the standard 64-node benchmark support.
Matrix default_seed_graph();

/// Deterministic Kronecker power of a 0/1 seed matrix, diagonal zeroed
/// afterwards so the result carries no self-loops.
Matrix kronecker_support(const Matrix& seed, int power);

/// Per-edge weight trajectories over T intervals; entry [k] is the
/// adjacency for interval t = k+1 and trajectory functions are evaluated
/// at the 0-based offset k. Unsupported edges stay zero throughout.
std::vector<Matrix> evolve_edges(const Matrix& support, const EdgePattern& pattern, int T);

/// External-influence diagonals b^t, standard Gaussian, redrawn per interval.
std::vector<Vector> draw_influences(int num_nodes, int T, std::uint64_t seed);

/// Observations from the model: Y^t solves (I - A^t) Y^t = B^t X + E^t with
/// E^t i.i.d. Gaussian(0, noise_std^2). Throws E_SINGULAR naming the first
/// interval whose system matrix is not invertible.
std::vector<IntervalObservations> synthesize_cascades(const DynamicNetwork& network,
                                                      const Susceptibility& x, double noise_std,
                                                      std::uint64_t seed);

struct SimOutput {
  DynamicNetwork network;
  Susceptibility susceptibility;
  std::vector<IntervalObservations> observations;
};

/// Full synthetic protocol: Kronecker support, edge evolution, uniform X,
/// Gaussian influences, and the per-interval linear solves. Deterministic
/// in (config.rng_seed, pattern.rng_seed).
SimOutput simulate(const SimConfig& config, const EdgePattern& pattern);

}  // namespace semtrack
