#include "clustermax/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "clustermax/errors.hpp"
#include "clustermax/evt.hpp"
#include "clustermax/format.hpp"

namespace clustermax {

FertilityModel::FertilityModel(Kernel kernel, double kappa, double rate, MarkScaling g)
    : kernel_(kernel), kappa_(kappa), rate_(rate), g_(std::move(g)) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw ConfigError("fertility: branching ratio kappa must lie in [0, 1), got " + format_double(kappa));
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("fertility: kernel parameter must be finite and > 0, got " + format_double(rate));
  }
}

FertilityModel FertilityModel::none() { return {Kernel::Exponential, 0.0, 1.0, MarkScaling::constant()}; }

FertilityModel FertilityModel::exponential(double kappa, double theta, MarkScaling g) {
  return {Kernel::Exponential, kappa, theta, std::move(g)};
}

FertilityModel FertilityModel::power_law(double kappa, double beta, MarkScaling g) {
  return {Kernel::PowerLaw, kappa, beta, std::move(g)};
}

double FertilityModel::h(double s, double mark) const {
  if (s < 0.0) return 0.0;
  return kappa_of(mark) * delay_density(s);
}

double FertilityModel::delay_density(double s) const noexcept {
  if (s < 0.0) return 0.0;
  if (kernel_ == Kernel::Exponential) return rate_ * std::exp(-rate_ * s);
  return rate_ * std::pow(1.0 + s, -rate_ - 1.0);
}

double FertilityModel::delay_survival(double s) const noexcept {
  if (s <= 0.0) return 1.0;
  if (kernel_ == Kernel::Exponential) return std::exp(-rate_ * s);
  return std::pow(1.0 + s, -rate_);
}

double FertilityModel::sample_delay(RandomStream& rng) const noexcept {
  const double u = rng.uniform();
  if (kernel_ == Kernel::Exponential) return -std::log(u) / rate_;
  return std::pow(u, -1.0 / rate_) - 1.0;
}

HawkesCluster sample_hawkes_cluster(const FertilityModel& fert, const MarkModel& marks, double ancestral_mark,
                                    RandomStream& rng) {
  HawkesCluster cluster;
  cluster.points.push_back({0.0, ancestral_mark, 0, -1});
  // Breadth-first: points are appended generation by generation, so the
  // queue is the tail of the vector itself.
  for (std::size_t i = 0; i < cluster.points.size(); ++i) {
    const HawkesPoint parent = cluster.points[i];
    const std::uint64_t children = rng.poisson(fert.kappa_of(parent.mark));
    if (children == 0) continue;
    if (parent.generation + 1 > kGenerationCap) {
      throw CappedRealizationError("hawkes cluster exceeded the generation cap", cluster.points.size(),
                                   ancestral_mark);
    }
    if (cluster.points.size() + children > kClusterSizeCap) {
      throw CappedRealizationError("hawkes cluster exceeded the size cap", cluster.points.size(), ancestral_mark);
    }
    for (std::uint64_t c = 0; c < children; ++c) {
      const double delay = fert.sample_delay(rng);
      cluster.points.push_back(
          {parent.offset + delay, marks.sample(rng), parent.generation + 1, static_cast<std::int64_t>(i)});
    }
  }
  return cluster;
}

std::uint64_t sample_hitting_time(const FertilityModel& fert, const MarkModel& marks, RandomStream& rng) {
  std::int64_t level = 1;
  std::uint64_t steps = 0;
  while (level > 0) {
    if (steps == kWalkCap) throw CappedRealizationError("random walk did not hit 0 within cap", steps, 0.0);
    const double mark = marks.sample(rng);
    level += static_cast<std::int64_t>(rng.poisson(fert.kappa_of(mark))) - 1;
    ++steps;
  }
  return steps;
}

std::vector<std::uint64_t> hitting_time_size_law(const FertilityModel& fert, const MarkModel& marks,
                                                 std::uint64_t draws, RandomStream& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(draws);
  for (std::uint64_t i = 0; i < draws; ++i) out.push_back(sample_hitting_time(fert, marks, rng));
  return out;
}

std::vector<TimedMark> simulate_hawkes_by_thinning(const FertilityModel& fert, const MarkModel& marks, double nu,
                                                   double horizon, RandomStream& rng) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("thinning: immigrant rate must be finite and > 0");
  if (!(horizon > 0.0)) throw DomainError("thinning: horizon must be > 0");
  std::vector<TimedMark> points;
  const bool exponential = fert.kernel() == FertilityModel::Kernel::Exponential;

  // Exponential kernel: the excitation sum decays as a whole, so one scalar
  // carries the state. Other kernels are summed over the history.
  double excitation = 0.0;
  double excitation_time = 0.0;
  auto excitation_at = [&](double s) {
    if (exponential) return excitation * std::exp(-fert.kernel_parameter() * (s - excitation_time));
    double sum = 0.0;
    for (const TimedMark& p : points) sum += fert.h(s - p.time, p.mark);
    return sum;
  };

  double s = 0.0;
  std::uint64_t proposals = 0;
  while (true) {
    // Kernels are nonincreasing, so the intensity at s bounds it until the next event.
    const double bound = nu + excitation_at(s);
    s += rng.exponential(bound);
    if (s > horizon) break;
    if (++proposals > kClusterSizeCap * 10) throw CappedRealizationError("thinning exceeded the proposal cap", proposals, 0.0);
    const double current = excitation_at(s);
    if (rng.uniform() * bound <= nu + current) {
      const double mark = marks.sample(rng);
      points.push_back({s, mark});
      if (exponential) {
        excitation = current + fert.h(0.0, mark);
        excitation_time = s;
      }
    }
  }
  return points;
}

void HawkesMechanism::generate(double ancestral_mark, const MarkModel& marks, RandomStream& rng,
                               std::vector<ClusterPoint>& out) const {
  const HawkesCluster cluster = sample_hawkes_cluster(fert_, marks, ancestral_mark, rng);
  out.reserve(out.size() + cluster.points.size());
  for (const HawkesPoint& p : cluster.points) out.push_back({p.offset, p.mark});
}

std::optional<double> HawkesMechanism::mean_cluster_size(const MarkModel&) const {
  return hawkes_mean_cluster_size(fert_.kappa());
}

std::string HawkesMechanism::name() const {
  const char* kernel = fert_.kernel() == FertilityModel::Kernel::Exponential ? "exponential" : "power-law";
  return std::string("hawkes[kernel=") + kernel + "(" + format_double(fert_.kernel_parameter()) +
         "), kappa=" + format_double(fert_.kappa()) + ", g=" + fert_.scaling().name() + "]";
}

std::shared_ptr<const ClusterMechanism> hawkes_mechanism(FertilityModel fert) {
  return std::make_shared<HawkesMechanism>(std::move(fert));
}

double borel_pmf(double kappa, std::uint64_t n) noexcept {
  if (n == 0) return 0.0;
  if (kappa == 0.0) return n == 1 ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  return std::exp(-kappa * nn + (nn - 1.0) * std::log(kappa * nn) - std::lgamma(nn + 1.0));
}

void write_cluster_csv(std::ostream& os, const HawkesCluster& cluster) {
  os << "offset,mark,generation,parentIndex\n";
  for (const HawkesPoint& p : cluster.points) {
    os << format_double(p.offset) << ',' << format_double(p.mark) << ',' << p.generation << ',' << p.parent << '\n';
  }
}

}  // namespace clustermax
