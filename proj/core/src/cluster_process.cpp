#include "clustermax/cluster_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "clustermax/errors.hpp"
#include "clustermax/format.hpp"
#include "clustermax/random_maxima.hpp"

namespace clustermax {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

ParentProcess::ParentProcess(PositiveLaw inter_arrival) : inter_arrival_(std::move(inter_arrival)) {
  const double m = inter_arrival_.mean();
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw ConfigError("parent inter-arrival law " + inter_arrival_.name() + " must have 0 < E[Y] < inf");
  }
}

std::vector<ParentArrival> simulate_parent(const ParentProcess& parent, const MarkModel& marks, double horizon,
                                           RandomStream& rng) {
  if (!(horizon > 0.0)) throw DomainError("simulate_parent: horizon must be > 0");
  std::vector<ParentArrival> out;
  out.reserve(static_cast<std::size_t>(parent.nu() * horizon * 1.1) + 8);
  double time = 0.0;
  while (true) {
    time += parent.inter_arrival().sample(rng);
    out.push_back({time, marks.sample(rng)});
    if (time > horizon) break;
  }
  return out;
}

double OffsetLaw::sample(double ancestral_mark, RandomStream& rng) const {
  if (mark_scaled_) return law_.sample(rng) * (1.0 + ancestral_mark);
  return law_.sample(rng);
}

double OffsetLaw::survival(double s, double ancestral_mark) const noexcept {
  if (mark_scaled_) return law_.survival(s / (1.0 + ancestral_mark));
  return law_.survival(s);
}

std::string OffsetLaw::name() const { return mark_scaled_ ? "mark-scaled " + law_.name() : law_.name(); }

OffspringMechanism::OffspringMechanism(OffspringLayout layout, SizeLaw size, OffsetLaw offsets)
    : layout_(layout), size_(std::move(size)), offsets_(std::move(offsets)) {
  if (const auto* mp = std::get_if<MarkPoissonSize>(&size_)) {
    if (!(mp->kappa >= 0.0) || !std::isfinite(mp->kappa)) {
      throw ConfigError("mark-dependent cluster size: kappa must be finite and >= 0");
    }
  }
}

void OffspringMechanism::generate(double ancestral_mark, const MarkModel& marks, RandomStream& rng,
                                  std::vector<ClusterPoint>& out) const {
  out.push_back({0.0, ancestral_mark});
  double clock = 0.0;
  auto next_offset = [&]() {
    const double v = offsets_.sample(ancestral_mark, rng);
    if (layout_ == OffspringLayout::RenewalCluster) {
      clock += v;
      return clock;
    }
    return v;
  };

  if (const auto* stop = std::get_if<ExceedanceStopSize>(&size_)) {
    std::uint64_t k = 0;
    double running_max = ancestral_mark;
    while (true) {
      if (k == kStoppingTimeCap) {
        throw CappedRealizationError("cluster size stopping time not reached within cap", k, running_max);
      }
      const double mark = marks.sample(rng);
      out.push_back({next_offset(), mark});
      running_max = std::max(running_max, mark);
      ++k;
      if (mark > stop->level) break;
    }
    return;
  }

  const std::uint64_t k = std::visit(Overloaded{
                                         [&](const IndependentSize& s) { return s.law.sample(rng); },
                                         [&](const MarkPoissonSize& s) { return rng.poisson(s.kappa * s.g(ancestral_mark)); },
                                         [](const ExceedanceStopSize&) { return std::uint64_t{0}; },
                                     },
                                     size_);
  if (k > kStoppingTimeCap) throw CappedRealizationError("cluster size above cap", k, ancestral_mark);
  for (std::uint64_t j = 0; j < k; ++j) {
    const double mark = marks.sample(rng);
    out.push_back({next_offset(), mark});
  }
}

std::optional<double> OffspringMechanism::mean_cluster_size(const MarkModel& marks) const {
  return std::visit(Overloaded{
                        [](const IndependentSize& s) -> std::optional<double> { return 1.0 + s.law.mean(); },
                        [](const MarkPoissonSize& s) -> std::optional<double> { return 1.0 + s.kappa; },
                        [&](const ExceedanceStopSize& s) -> std::optional<double> {
                          const double q = marks.survival(s.level);
                          if (!(q > 0.0)) return std::nullopt;
                          return 1.0 + 1.0 / q;
                        },
                    },
                    size_);
}

std::string OffspringMechanism::name() const {
  std::string size = std::visit(Overloaded{
                                    [](const IndependentSize& s) { return s.law.name(); },
                                    [](const MarkPoissonSize& s) {
                                      return "mark-poisson(" + format_double(s.kappa) + ", " + s.g.name() + ")";
                                    },
                                    [](const ExceedanceStopSize& s) {
                                      return "exceedance-stop(" + format_double(s.level) + ")";
                                    },
                                },
                                size_);
  const char* layout = layout_ == OffspringLayout::MixedBinomial ? "mixed-binomial" : "renewal-cluster";
  return std::string(layout) + "[size=" + size + ", offsets=" + offsets_.name() + "]";
}

std::vector<ClusterPoint> simulate_cluster(const ClusterMechanism& mech, const MarkModel& marks,
                                           double ancestral_mark, RandomStream& rng) {
  std::vector<ClusterPoint> out;
  mech.generate(ancestral_mark, marks, rng, out);
  return out;
}

ProcessRealization simulate_process(const ParentProcess& parent, const ClusterMechanism& mech,
                                    const MarkModel& marks, double horizon, RandomStream& rng,
                                    RetainPoints retain) {
  const auto arrivals = simulate_parent(parent, marks, horizon, rng);
  ProcessRealization r;
  r.horizon = horizon;
  r.tau_t = arrivals.size();
  r.ancestor_times.reserve(arrivals.size());

  double m_t = kNegInf;
  double leftover = kNegInf;
  double m_tau = kNegInf;
  std::vector<ClusterPoint> cluster;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const std::uint64_t id = i + 1;
    const bool is_tau = id == r.tau_t;
    const double gamma = arrivals[i].time;
    r.ancestor_times.push_back(gamma);
    cluster.clear();
    mech.generate(arrivals[i].mark, marks, rng, cluster);

    double h = kNegInf;
    for (std::size_t j = 0; j < cluster.size(); ++j) {
      const double arrival = gamma + cluster[j].offset;
      const double claim = marks.claim(cluster[j].mark);
      h = std::max(h, claim);
      if (!is_tau) {
        if (arrival <= horizon) {
          m_t = std::max(m_t, claim);
          ++r.points_by_t;
        } else {
          leftover = std::max(leftover, claim);
          ++r.j_t;
        }
      }
      if (retain == RetainPoints::All) r.points.push_back({arrival, claim, id, j == 0});
    }
    if (is_tau) r.h_tau = h;
    m_tau = std::max(m_tau, h);
  }
  if (m_t > kNegInf) r.m_t = m_t;
  if (leftover > kNegInf) r.leftover = leftover;
  r.m_tau = m_tau;
  check_decomposition(r);
  return r;
}

std::uint64_t leftover_count(const ProcessRealization& realization) {
  std::uint64_t count = 0;
  for (const ProcessPoint& p : realization.points) {
    if (p.cluster == 0 || p.cluster > realization.ancestor_times.size()) {
      throw InvariantViolation("leftover_count: point refers to an unknown cluster");
    }
    const double gamma = realization.ancestor_times[p.cluster - 1];
    if (gamma <= realization.horizon && p.arrival > realization.horizon) ++count;
  }
  return count;
}

void check_decomposition(const ProcessRealization& r) {
  const double recombined = std::max({r.m_t.value_or(kNegInf), r.h_tau, r.leftover.value_or(kNegInf)});
  if (recombined != r.m_tau) {
    std::ostringstream os;
    os << "decomposition identity violated: M_tau(t) = " << r.m_tau << " but max(M(t), H_tau, eps_t) = "
       << recombined;
    throw InvariantViolation(os.str());
  }
}

void write_realization_csv(std::ostream& os, const ProcessRealization& realization) {
  os << "arrivalTime,claim,clusterId,isAncestor\n";
  for (const ProcessPoint& p : realization.points) {
    os << format_double(p.arrival) << ',' << format_double(p.claim) << ',' << p.cluster << ','
       << (p.ancestor ? 1 : 0) << '\n';
  }
}

}  // namespace clustermax
