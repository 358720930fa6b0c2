#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "clustermax/cluster_process.hpp"
#include "clustermax/laws.hpp"
#include "clustermax/random_stream.hpp"

namespace clustermax {

inline constexpr std::uint64_t kGenerationCap = 10'000;
inline constexpr std::uint64_t kClusterSizeCap = 10'000'000;
inline constexpr std::uint64_t kWalkCap = 10'000'000;

// Fertility h(s, a) = kappa * g(a) * w(s), where w is a probability density
// on [0, inf) that is nonincreasing in s:
//   exponential: w(s) = theta * exp(-theta s)
//   power law:   w(s) = beta * (1 + s)^(-beta - 1)
class FertilityModel {
 public:
  enum class Kernel { Exponential, PowerLaw };

  static FertilityModel none();
  static FertilityModel exponential(double kappa, double theta, MarkScaling g = MarkScaling::constant());
  static FertilityModel power_law(double kappa, double beta, MarkScaling g = MarkScaling::constant());

  Kernel kernel() const noexcept { return kernel_; }
  double h(double s, double mark) const;
  // kappa_a = integral of h(., a) over [0, inf).
  double kappa_of(double mark) const { return kappa_ * g_(mark); }
  // E[kappa_A].
  double kappa() const noexcept { return kappa_; }
  double kernel_parameter() const noexcept { return rate_; }
  const MarkScaling& scaling() const noexcept { return g_; }

  // Waiting-time density h(s, a) / kappa_a and its survival function.
  double delay_density(double s) const noexcept;
  double delay_survival(double s) const noexcept;
  // Exact inverse-cdf draw from the waiting-time density.
  double sample_delay(RandomStream& rng) const noexcept;

 private:
  FertilityModel(Kernel kernel, double kappa, double rate, MarkScaling g);

  Kernel kernel_;
  double kappa_;
  double rate_;  // theta or beta
  MarkScaling g_;
};

struct HawkesPoint {
  double offset;
  double mark;
  std::uint32_t generation;
  std::int64_t parent;  // -1 for the ancestor
};

struct HawkesCluster {
  std::vector<HawkesPoint> points;  // breadth-first; points[0] is the ancestor
  std::uint64_t total_size() const noexcept { return points.size(); }
};

// Branching construction: a point with mark a has Poisson(kappa_a) children
// at i.i.d. delays from the waiting-time density, each with a fresh mark.
HawkesCluster sample_hawkes_cluster(const FertilityModel& fert, const MarkModel& marks, double ancestral_mark,
                                    RandomStream& rng);

// First hitting time of 0 by S_0 = 1, S_n = S_{n-1} + L_n - 1 with
// L_n ~ Poisson(kappa_{A_n}) and fresh marks A_n.
std::uint64_t sample_hitting_time(const FertilityModel& fert, const MarkModel& marks, RandomStream& rng);
std::vector<std::uint64_t> hitting_time_size_law(const FertilityModel& fert, const MarkModel& marks,
                                                 std::uint64_t draws, RandomStream& rng);

struct TimedMark {
  double time;
  double mark;
};

// Ogata thinning on [0, horizon] for intensity nu + sum h(t - tau_i, A_i).
std::vector<TimedMark> simulate_hawkes_by_thinning(const FertilityModel& fert, const MarkModel& marks, double nu,
                                                   double horizon, RandomStream& rng);

// Cluster generator running the branching construction; ancestor first.
class HawkesMechanism final : public ClusterMechanism {
 public:
  explicit HawkesMechanism(FertilityModel fert) : fert_(std::move(fert)) {}

  void generate(double ancestral_mark, const MarkModel& marks, RandomStream& rng,
                std::vector<ClusterPoint>& out) const override;
  std::optional<double> mean_cluster_size(const MarkModel&) const override;
  std::string name() const override;

  const FertilityModel& fertility() const noexcept { return fert_; }

 private:
  FertilityModel fert_;
};

std::shared_ptr<const ClusterMechanism> hawkes_mechanism(FertilityModel fert);

// e^{-kappa n} (kappa n)^{n-1} / n!, n >= 1.
double borel_pmf(double kappa, std::uint64_t n) noexcept;

// CSV with header offset,mark,generation,parentIndex.
void write_cluster_csv(std::ostream& os, const HawkesCluster& cluster);

}  // namespace clustermax
