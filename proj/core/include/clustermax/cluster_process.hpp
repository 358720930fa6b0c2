#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clustermax/laws.hpp"
#include "clustermax/random_stream.hpp"

namespace clustermax {

// Renewal process of ancestor arrivals; nu = 1 / E[Y].
class ParentProcess {
 public:
  explicit ParentProcess(PositiveLaw inter_arrival);

  static ParentProcess poisson(double nu) { return ParentProcess(PositiveLaw::exponential(nu)); }

  const PositiveLaw& inter_arrival() const noexcept { return inter_arrival_; }
  double nu() const noexcept { return 1.0 / inter_arrival_.mean(); }

 private:
  PositiveLaw inter_arrival_;
};

struct ParentArrival {
  double time;
  double mark;
};

// All arrivals with time <= horizon followed by the first arrival after it.
std::vector<ParentArrival> simulate_parent(const ParentProcess& parent, const MarkModel& marks, double horizon,
                                           RandomStream& rng);

struct ClusterPoint {
  double offset;
  double mark;
};

// Generator of one cluster, ancestor included.
class ClusterMechanism {
 public:
  virtual ~ClusterMechanism() = default;

  // Appends (0, ancestral_mark) followed by the K offspring to `out`.
  virtual void generate(double ancestral_mark, const MarkModel& marks, RandomStream& rng,
                        std::vector<ClusterPoint>& out) const = 0;
  // E[K] + 1 when known in closed form.
  virtual std::optional<double> mean_cluster_size(const MarkModel& marks) const = 0;
  virtual std::string name() const = 0;
};

// K independent of the marks.
struct IndependentSize {
  CountLaw law;
};

// K | A_0 ~ Poisson(kappa * g(A_0)).
struct MarkPoissonSize {
  double kappa;
  MarkScaling g;
};

// K = inf{k >= 1 : A_k > level}: a stopping time over the offspring marks.
struct ExceedanceStopSize {
  double level;
};

using SizeLaw = std::variant<IndependentSize, MarkPoissonSize, ExceedanceStopSize>;

// Offset law given the ancestral mark.
class OffsetLaw {
 public:
  static OffsetLaw unconditional(PositiveLaw law) { return OffsetLaw(std::move(law), false); }
  // V | A_0 = a ~ Exponential(rate / (1 + a)).
  static OffsetLaw mark_scaled_exponential(double rate) {
    return OffsetLaw(PositiveLaw::exponential(rate), true);
  }

  double sample(double ancestral_mark, RandomStream& rng) const;
  double survival(double s, double ancestral_mark) const noexcept;
  bool mark_dependent() const noexcept { return mark_scaled_; }
  const PositiveLaw& base() const noexcept { return law_; }
  std::string name() const;

 private:
  OffsetLaw(PositiveLaw law, bool mark_scaled) : law_(std::move(law)), mark_scaled_(mark_scaled) {}

  PositiveLaw law_;
  bool mark_scaled_;
};

enum class OffspringLayout {
  MixedBinomial,   // T_j = V_j, i.i.d. given A_0
  RenewalCluster,  // T_j = V_1 + ... + V_j
};

class OffspringMechanism final : public ClusterMechanism {
 public:
  OffspringMechanism(OffspringLayout layout, SizeLaw size, OffsetLaw offsets);

  void generate(double ancestral_mark, const MarkModel& marks, RandomStream& rng,
                std::vector<ClusterPoint>& out) const override;
  std::optional<double> mean_cluster_size(const MarkModel& marks) const override;
  std::string name() const override;

  OffspringLayout layout() const noexcept { return layout_; }
  const SizeLaw& size_law() const noexcept { return size_; }
  const OffsetLaw& offsets() const noexcept { return offsets_; }

 private:
  OffspringLayout layout_;
  SizeLaw size_;
  OffsetLaw offsets_;
};

std::vector<ClusterPoint> simulate_cluster(const ClusterMechanism& mech, const MarkModel& marks,
                                           double ancestral_mark, RandomStream& rng);

struct ProcessPoint {
  double arrival;
  double claim;
  std::uint64_t cluster;  // 1-based parent index
  bool ancestor;
};

// One run of the cluster process on [0, t]. Clusters 1..tau_t are fully
// simulated; cluster tau_t is the first whose ancestor arrives after t.
struct ProcessRealization {
  double horizon = 0.0;
  std::vector<ProcessPoint> points;    // generation order; empty in streaming mode
  std::vector<double> ancestor_times;  // ancestor_times[i - 1] = Gamma_i, i = 1..tau_t
  std::optional<double> m_t;           // max claim over arrivals <= t
  double m_tau = 0.0;                  // max over clusters 1..tau_t
  double h_tau = 0.0;                  // max over cluster tau_t
  std::optional<double> leftover;      // eps_t
  std::uint64_t j_t = 0;
  std::uint64_t tau_t = 0;
  std::uint64_t points_by_t = 0;
};

enum class RetainPoints { All, None };

// Throws InvariantViolation if m_tau != max(m_t, h_tau, eps_t).
ProcessRealization simulate_process(const ParentProcess& parent, const ClusterMechanism& mech,
                                    const MarkModel& marks, double horizon, RandomStream& rng,
                                    RetainPoints retain = RetainPoints::All);

// J_t recounted from the stored points.
std::uint64_t leftover_count(const ProcessRealization& realization);

void check_decomposition(const ProcessRealization& realization);

// CSV with header arrivalTime,claim,clusterId,isAncestor.
void write_realization_csv(std::ostream& os, const ProcessRealization& realization);

}  // namespace clustermax
