#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clustermax/evt.hpp"
#include "clustermax/random_stream.hpp"

namespace clustermax {

// Mark law Q on S = [0, inf) together with the claim map. Claims are the
// marks themselves (f = identity), so the normalization sequences of the
// underlying family apply to claims unchanged.
class MarkModel {
 public:
  explicit MarkModel(MarkFamily family);

  const MarkFamily& family() const noexcept { return family_; }

  double sample(RandomStream& rng) const noexcept;
  // Draw from the law of X conditioned on X > w. Throws DomainError when
  // P(X > w) = 0.
  double sample_above(double w, RandomStream& rng) const;
  double quantile(double u) const noexcept;
  double cdf(double x) const noexcept;
  double survival(double x) const noexcept;
  // Infinite for Pareto with alpha <= 1.
  double mean() const noexcept;
  double claim(double mark) const noexcept { return mark; }

  StandardLimit standard_limit() const { return standard_sequences(family_); }

 private:
  MarkFamily family_;
};

// Law on {0, 1, 2, ...}.
class CountLaw {
 public:
  enum class Kind { Fixed, Poisson, Geometric, Table };

  static CountLaw fixed(std::uint64_t k);
  static CountLaw poisson(double mean);
  // P(K = k) = (1 - p)^k p, k >= 0.
  static CountLaw geometric(double p);
  static CountLaw table(std::vector<double> pmf);

  Kind kind() const noexcept { return kind_; }
  std::uint64_t sample(RandomStream& rng) const;
  double pmf(std::uint64_t k) const noexcept;
  double mean() const noexcept;
  std::string name() const;

 private:
  CountLaw(Kind kind, double parameter, std::vector<double> table)
      : kind_(kind), parameter_(parameter), table_(std::move(table)) {}

  Kind kind_;
  double parameter_;
  std::vector<double> table_;  // cumulative for Table
};

// Law on [0, inf) for inter-arrival times and cluster offsets.
class PositiveLaw {
 public:
  enum class Kind { Exponential, Deterministic, Uniform, Gamma, Lomax };

  static PositiveLaw exponential(double rate);
  static PositiveLaw deterministic(double value);
  static PositiveLaw uniform(double lower, double upper);
  static PositiveLaw gamma(double shape, double rate);
  // P(V > s) = (1 + s)^-beta.
  static PositiveLaw lomax(double beta);

  Kind kind() const noexcept { return kind_; }
  double sample(RandomStream& rng) const;
  double survival(double s) const noexcept;
  double mean() const noexcept;
  std::string name() const;

 private:
  PositiveLaw(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

// Nonnegative mark weight g with E[g(A)] = 1 under the bound mark law.
class MarkScaling {
 public:
  static MarkScaling constant();
  // g(a) = a / E[A]; needs a finite mark mean.
  static MarkScaling linear(const MarkModel& marks);
  // g(a) = 1{a > level} / P(A > level).
  static MarkScaling above(const MarkModel& marks, double level);
  // Arbitrary g; normalization is checked by a Monte Carlo pre-pass.
  static MarkScaling custom(std::function<double(double)> g, const MarkModel& marks);

  double operator()(double mark) const { return fn_(mark); }
  std::string name() const { return name_; }
  bool is_constant() const noexcept { return name_ == "constant"; }

  // Sample mean of g(A) over `draws` marks.
  static double normalization_check(const std::function<double(double)>& g, const MarkModel& marks,
                                    std::uint64_t draws, RandomStream& rng);

 private:
  MarkScaling(std::function<double(double)> fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

  std::function<double(double)> fn_;
  std::string name_;
};

}  // namespace clustermax
