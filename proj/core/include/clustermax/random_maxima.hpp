#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "clustermax/evt.hpp"
#include "clustermax/laws.hpp"
#include "clustermax/random_stream.hpp"
#include "clustermax/stats.hpp"

namespace clustermax {

// Maximum number of (W, X) draws a single stopping time may consume.
inline constexpr std::uint64_t kStoppingTimeCap = 10'000'000;

// Joint law of (W_j, X_j) for the geometric stopping rule.
enum class Coupling {
  Independent,  // W and X drawn independently
  Comonotone,   // W = F_W^-1(U), X = F_X^-1(U) from the same uniform
  Shift,        // W = X + shift
};

// K = k.
struct Deterministic {
  std::uint64_t k;
};

// K drawn from a count law, independent of the X sequence.
struct IndependentCount {
  CountLaw law;
};

// K = inf{k : X_k > W_k} with i.i.d. pairs (W_j, X_j).
struct GeometricStopping {
  MarkModel threshold;
  Coupling coupling = Coupling::Independent;
  double shift = 0.0;
};

// K = inf{k : X_k > W_1}, W independent of X.
struct FixedThreshold {
  MarkModel threshold;
};

using ClusterSizePolicy = std::variant<Deterministic, IndependentCount, GeometricStopping, FixedThreshold>;

struct MaximaSample {
  double h = 0.0;             // max of the k draws; meaningless when empty
  std::uint64_t k = 0;        // number of X draws in the block
  std::uint64_t block_end = 0;  // T(l): draws consumed through the end of this block
  bool empty = false;         // k == 0
};

// E[K] when known in closed form.
std::optional<double> closed_form_mean_draws(const ClusterSizePolicy& policy, const MarkModel& marks);

// Monte Carlo estimate of P(X > W) for a geometric stopping rule.
double estimate_stop_probability(const GeometricStopping& policy, const MarkModel& marks, std::uint64_t draws,
                                 RandomStream& rng);

// Throws ConfigError for parameter combinations that cannot stop
// (P(X > W) = 0 for the geometric rule).
void validate_policy(const ClusterSizePolicy& policy, const MarkModel& marks);

MaximaSample sample_h(const ClusterSizePolicy& policy, const MarkModel& marks, RandomStream& rng);

// n_blocks consecutive blocks cut from one (W, X) stream by restarting the
// stopping time after each block.
std::vector<MaximaSample> sample_blocks(const ClusterSizePolicy& policy, const MarkModel& marks,
                                        std::uint64_t n_blocks, RandomStream& rng);

struct TailRatioEstimate {
  std::uint64_t n = 0;
  double x = 0.0;
  double threshold = 0.0;  // c_n x + d_n
  std::uint64_t exceedances = 0;
  std::uint64_t replications = 0;

  double estimate() const noexcept;   // n * p_hat
  double std_error() const noexcept;  // n * sqrt(p_hat (1 - p_hat) / R)
};

// Pools two estimates at the same (n, x); associative and commutative.
TailRatioEstimate merge(const TailRatioEstimate& a, const TailRatioEstimate& b);

TailRatioEstimate tail_ratio(const ClusterSizePolicy& policy, const MarkModel& marks,
                             const AdjustedSequences& adj, std::uint64_t n, double x,
                             std::uint64_t replications, RandomStream& rng);

struct DivergenceReport {
  std::vector<TailRatioEstimate> estimates;
  stats::TrendVerdict verdict = stats::TrendVerdict::Flat;
  bool diverging = false;  // estimates grow monotonically in n
};

// Tail ratio across several n; each n uses its own substream of rng.
DivergenceReport tail_ratio_trend(const ClusterSizePolicy& policy, const MarkModel& marks,
                                  const AdjustedSequences& adj, const std::vector<std::uint64_t>& ns, double x,
                                  std::uint64_t replications, const RandomStream& rng);

}  // namespace clustermax
