#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace clustermax {

enum class EvKind { Frechet, Gumbel, Weibull };

// One of the three extreme-value laws G. Weibull uses upper endpoint 0:
// G(x) = exp(-(-x)^alpha) for x < 0 and G(x) = 1 for x >= 0.
class ExtremeValueFamily {
 public:
  static ExtremeValueFamily frechet(double alpha);
  static ExtremeValueFamily gumbel();
  static ExtremeValueFamily weibull(double alpha);

  EvKind kind() const noexcept { return kind_; }
  std::optional<double> shape() const noexcept;

  double cdf(double x) const noexcept;
  // x in E = {y : G(y) > 0}.
  bool in_support(double x) const noexcept;
  // mu_G(x, inf) = -log G(x). Throws DomainError outside E.
  double tail_measure(double x) const;
  // Inverse of G on (0, 1).
  double quantile(double p) const;
  std::string name() const;

 private:
  ExtremeValueFamily(EvKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  EvKind kind_;
  double alpha_;  // unused for Gumbel
};

inline double eval_cdf(const ExtremeValueFamily& family, double x) noexcept { return family.cdf(x); }
inline double tail_measure(const ExtremeValueFamily& family, double x) { return family.tail_measure(x); }

// Parametric claim laws shipped with the library, one per domain of attraction:
//   Pareto(alpha):    P(X > x) = x^-alpha, x >= 1          -> Frechet(alpha)
//   Exponential(rate)                                      -> Gumbel
//   Uniform(0, theta)                                      -> Weibull(1)
struct MarkFamily {
  enum class Kind { Pareto, Exponential, Uniform };
  Kind kind;
  double parameter;  // alpha, rate or theta

  static MarkFamily pareto(double alpha) { return {Kind::Pareto, alpha}; }
  static MarkFamily exponential(double rate) { return {Kind::Exponential, rate}; }
  static MarkFamily uniform(double theta) { return {Kind::Uniform, theta}; }

  std::string name() const;
  friend bool operator==(const MarkFamily&, const MarkFamily&) = default;
};

// Scale a_n > 0 and center b_n as functions of n >= 1.
class NormalizationSequences {
 public:
  using Fn = std::function<double(std::uint64_t)>;

  NormalizationSequences(Fn scale, Fn center) : scale_(std::move(scale)), center_(std::move(center)) {}

  double scale(std::uint64_t n) const;
  double center(std::uint64_t n) const;

 private:
  Fn scale_;
  Fn center_;
};

struct StandardLimit {
  NormalizationSequences sequences;
  ExtremeValueFamily limit;
};

// Closed-form (a_n, b_n) and limit law for a shipped claim family; the
// defining tail limit holds with equality wherever a_n x + b_n lies in the
// family's tail region.
StandardLimit standard_sequences(const MarkFamily& family);

// c_n = a_floor(m n), d_n = b_floor(m n) with m = E[K] + 1.
class AdjustedSequences {
 public:
  AdjustedSequences(NormalizationSequences base, double mean_cluster_size);

  std::uint64_t index(std::uint64_t n) const;
  double scale(std::uint64_t n) const { return base_.scale(index(n)); }
  double center(std::uint64_t n) const { return base_.center(index(n)); }
  double mean_cluster_size() const noexcept { return mean_cluster_size_; }
  const NormalizationSequences& base() const noexcept { return base_; }

 private:
  NormalizationSequences base_;
  double mean_cluster_size_;
};

inline AdjustedSequences adjust_sequences(NormalizationSequences seq, double mean_cluster_size) {
  return AdjustedSequences(std::move(seq), mean_cluster_size);
}

// E[K] + 1 for a subcritical branching cluster with offspring mean kappa.
double hawkes_mean_cluster_size(double kappa);

}  // namespace clustermax
