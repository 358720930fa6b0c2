#include "clustermax/random_maxima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clustermax/errors.hpp"

namespace clustermax {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Pair {
  double w;
  double x;
};

Pair draw_pair(const GeometricStopping& policy, const MarkModel& marks, RandomStream& rng) {
  switch (policy.coupling) {
    case Coupling::Independent: {
      const double w = policy.threshold.sample(rng);
      return {w, marks.sample(rng)};
    }
    case Coupling::Comonotone: {
      const double u = rng.uniform();
      return {policy.threshold.quantile(u), marks.quantile(u)};
    }
    case Coupling::Shift: {
      const double x = marks.sample(rng);
      return {x + policy.shift, x};
    }
  }
  return {0.0, 0.0};
}

[[noreturn]] void cap_exceeded(std::uint64_t steps, double partial_max) {
  std::ostringstream os;
  os << "stopping time not reached within " << kStoppingTimeCap << " draws";
  throw CappedRealizationError(os.str(), steps, partial_max);
}

MaximaSample next_block(const ClusterSizePolicy& policy, const MarkModel& marks, RandomStream& rng) {
  MaximaSample s;
  s.h = kNegInf;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Deterministic> || std::is_same_v<P, IndependentCount>) {
          std::uint64_t k;
          if constexpr (std::is_same_v<P, Deterministic>) {
            k = p.k;
          } else {
            k = p.law.sample(rng);
          }
          if (k > kStoppingTimeCap) cap_exceeded(k, kNegInf);
          for (std::uint64_t j = 0; j < k; ++j) s.h = std::max(s.h, marks.sample(rng));
          s.k = k;
        } else if constexpr (std::is_same_v<P, GeometricStopping>) {
          std::uint64_t k = 0;
          while (true) {
            if (k == kStoppingTimeCap) cap_exceeded(k, s.h);
            const Pair pair = draw_pair(p, marks, rng);
            ++k;
            s.h = std::max(s.h, pair.x);
            if (pair.x > pair.w) break;
          }
          s.k = k;
        } else {
          // Every X before the stopping index is <= W_1 < X_K, so H = X_K is
          // X conditioned to exceed W_1 and K is geometric given W_1.
          const double w1 = p.threshold.sample(rng);
          const double stop = marks.survival(w1);
          if (!(stop > 0.0)) cap_exceeded(kStoppingTimeCap, kNegInf);
          s.k = rng.geometric_trials(stop);
          s.h = marks.sample_above(w1, rng);
        }
      },
      policy);
  s.empty = s.k == 0;
  return s;
}

}  // namespace

std::optional<double> closed_form_mean_draws(const ClusterSizePolicy& policy, const MarkModel& marks) {
  return std::visit(
      [&](const auto& p) -> std::optional<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Deterministic>) {
          return static_cast<double>(p.k);
        } else if constexpr (std::is_same_v<P, IndependentCount>) {
          return p.law.mean();
        } else if constexpr (std::is_same_v<P, GeometricStopping>) {
          if (p.coupling == Coupling::Shift) {
            if (p.shift < 0.0) return 1.0;
            return std::nullopt;
          }
          // i.i.d. continuous pair: P(X > W) = 1/2.
          if (p.coupling == Coupling::Independent && p.threshold.family() == marks.family()) return 2.0;
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      policy);
}

double estimate_stop_probability(const GeometricStopping& policy, const MarkModel& marks, std::uint64_t draws,
                                 RandomStream& rng) {
  if (draws == 0) throw DomainError("estimate_stop_probability: need at least one draw");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const Pair pair = draw_pair(policy, marks, rng);
    if (pair.x > pair.w) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

void validate_policy(const ClusterSizePolicy& policy, const MarkModel& marks) {
  if (const auto* g = std::get_if<GeometricStopping>(&policy)) {
    if (g->coupling == Coupling::Shift) {
      if (g->shift >= 0.0) throw ConfigError("geometric stopping: W = X + shift with shift >= 0 never stops");
      return;
    }
    if (closed_form_mean_draws(policy, marks)) return;
    RandomStream pre(StreamId{0x5eed, 0, 0, 0});
    if (estimate_stop_probability(*g, marks, 1'000'000, pre) == 0.0) {
      throw ConfigError("geometric stopping: estimated P(X > W) = 0");
    }
  }
}

MaximaSample sample_h(const ClusterSizePolicy& policy, const MarkModel& marks, RandomStream& rng) {
  MaximaSample s = next_block(policy, marks, rng);
  s.block_end = s.k;
  return s;
}

std::vector<MaximaSample> sample_blocks(const ClusterSizePolicy& policy, const MarkModel& marks,
                                        std::uint64_t n_blocks, RandomStream& rng) {
  if (n_blocks == 0) throw DomainError("sample_blocks: need at least one block");
  std::vector<MaximaSample> out;
  out.reserve(n_blocks);
  std::uint64_t consumed = 0;
  for (std::uint64_t l = 0; l < n_blocks; ++l) {
    MaximaSample s = next_block(policy, marks, rng);
    consumed += s.k;
    s.block_end = consumed;
    out.push_back(s);
  }
  return out;
}

double TailRatioEstimate::estimate() const noexcept {
  if (replications == 0) return 0.0;
  return static_cast<double>(n) * static_cast<double>(exceedances) / static_cast<double>(replications);
}

double TailRatioEstimate::std_error() const noexcept {
  if (replications == 0) return 0.0;
  const double r = static_cast<double>(replications);
  const double p = static_cast<double>(exceedances) / r;
  return static_cast<double>(n) * std::sqrt(p * (1.0 - p) / r);
}

TailRatioEstimate merge(const TailRatioEstimate& a, const TailRatioEstimate& b) {
  if (a.n != b.n || a.x != b.x) throw DomainError("merge: tail ratio estimates at different (n, x)");
  TailRatioEstimate m = a;
  m.exceedances += b.exceedances;
  m.replications += b.replications;
  return m;
}

TailRatioEstimate tail_ratio(const ClusterSizePolicy& policy, const MarkModel& marks,
                             const AdjustedSequences& adj, std::uint64_t n, double x,
                             std::uint64_t replications, RandomStream& rng) {
  if (n == 0) throw DomainError("tail_ratio: n must be >= 1");
  if (replications == 0) throw DomainError("tail_ratio: need at least one replication");
  TailRatioEstimate est;
  est.n = n;
  est.x = x;
  est.threshold = adj.scale(n) * x + adj.center(n);
  est.replications = replications;
  for (std::uint64_t r = 0; r < replications; ++r) {
    const MaximaSample s = sample_h(policy, marks, rng);
    if (!s.empty && s.h > est.threshold) ++est.exceedances;
  }
  return est;
}

DivergenceReport tail_ratio_trend(const ClusterSizePolicy& policy, const MarkModel& marks,
                                  const AdjustedSequences& adj, const std::vector<std::uint64_t>& ns, double x,
                                  std::uint64_t replications, const RandomStream& rng) {
  DivergenceReport report;
  std::vector<stats::TrendPoint> points;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    RandomStream sub = rng.substream(rng.id().substream + 1 + i);
    report.estimates.push_back(tail_ratio(policy, marks, adj, ns[i], x, replications, sub));
    points.push_back({static_cast<double>(ns[i]), report.estimates.back().estimate(),
                      report.estimates.back().std_error()});
  }
  report.verdict = stats::trend_report(points);
  report.diverging = report.verdict == stats::TrendVerdict::Increasing;
  return report;
}

}  // namespace clustermax
