#include "clustermax/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "clustermax/errors.hpp"

namespace clustermax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

MarkModel::MarkModel(MarkFamily family) : family_(family) {
  require(family.parameter > 0.0 && std::isfinite(family.parameter),
          "mark family " + family.name() + ": parameter must be finite and > 0");
}

double MarkModel::sample(RandomStream& rng) const noexcept {
  const double v = rng.uniform();
  switch (family_.kind) {
    case MarkFamily::Kind::Pareto:
      return std::pow(v, -1.0 / family_.parameter);
    case MarkFamily::Kind::Exponential:
      return -std::log(v) / family_.parameter;
    case MarkFamily::Kind::Uniform:
      return family_.parameter * v;
  }
  return 0.0;
}

double MarkModel::sample_above(double w, RandomStream& rng) const {
  const double p = family_.parameter;
  switch (family_.kind) {
    case MarkFamily::Kind::Pareto:
      if (w < 1.0) return sample(rng);
      return w * std::pow(rng.uniform(), -1.0 / p);
    case MarkFamily::Kind::Exponential:
      if (w < 0.0) return sample(rng);
      return w - std::log(rng.uniform()) / p;
    case MarkFamily::Kind::Uniform:
      if (w >= p) throw DomainError("sample_above: P(X > " + fmt(w) + ") = 0 for " + family_.name());
      if (w < 0.0) return sample(rng);
      return w + (p - w) * rng.uniform();
  }
  return 0.0;
}

double MarkModel::quantile(double u) const noexcept {
  const double p = family_.parameter;
  switch (family_.kind) {
    case MarkFamily::Kind::Pareto:
      return std::pow(1.0 - u, -1.0 / p);
    case MarkFamily::Kind::Exponential:
      return -std::log1p(-u) / p;
    case MarkFamily::Kind::Uniform:
      return p * u;
  }
  return 0.0;
}

double MarkModel::cdf(double x) const noexcept { return 1.0 - survival(x); }

double MarkModel::survival(double x) const noexcept {
  const double p = family_.parameter;
  switch (family_.kind) {
    case MarkFamily::Kind::Pareto:
      return x <= 1.0 ? 1.0 : std::pow(x, -p);
    case MarkFamily::Kind::Exponential:
      return x <= 0.0 ? 1.0 : std::exp(-p * x);
    case MarkFamily::Kind::Uniform:
      if (x <= 0.0) return 1.0;
      return x >= p ? 0.0 : 1.0 - x / p;
  }
  return 0.0;
}

double MarkModel::mean() const noexcept {
  const double p = family_.parameter;
  switch (family_.kind) {
    case MarkFamily::Kind::Pareto:
      return p > 1.0 ? p / (p - 1.0) : kInf;
    case MarkFamily::Kind::Exponential:
      return 1.0 / p;
    case MarkFamily::Kind::Uniform:
      return p / 2.0;
  }
  return kInf;
}

CountLaw CountLaw::fixed(std::uint64_t k) { return {Kind::Fixed, static_cast<double>(k), {}}; }

CountLaw CountLaw::poisson(double mean) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson count law: mean must be finite and >= 0");
  return {Kind::Poisson, mean, {}};
}

CountLaw CountLaw::geometric(double p) {
  require(p > 0.0 && p <= 1.0, "geometric count law: p must lie in (0, 1]");
  return {Kind::Geometric, p, {}};
}

CountLaw CountLaw::table(std::vector<double> pmf) {
  require(!pmf.empty(), "table count law: pmf must be non-empty");
  double total = 0.0;
  for (double q : pmf) {
    require(q >= 0.0 && std::isfinite(q), "table count law: probabilities must be finite and >= 0");
    total += q;
  }
  require(std::abs(total - 1.0) < 1e-9, "table count law: probabilities must sum to 1");
  std::vector<double> cumulative(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cumulative.begin());
  cumulative.back() = 1.0;
  return {Kind::Table, 0.0, std::move(cumulative)};
}

std::uint64_t CountLaw::sample(RandomStream& rng) const {
  switch (kind_) {
    case Kind::Fixed:
      return static_cast<std::uint64_t>(parameter_);
    case Kind::Poisson:
      return rng.poisson(parameter_);
    case Kind::Geometric:
      return rng.geometric_trials(parameter_) - 1;
    case Kind::Table: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(table_.begin(), table_.end(), u);
      return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - table_.begin(),
                                                                 static_cast<std::ptrdiff_t>(table_.size()) - 1));
    }
  }
  return 0;
}

double CountLaw::pmf(std::uint64_t k) const noexcept {
  switch (kind_) {
    case Kind::Fixed:
      return static_cast<double>(k) == parameter_ ? 1.0 : 0.0;
    case Kind::Poisson:
      if (parameter_ == 0.0) return k == 0 ? 1.0 : 0.0;
      return std::exp(static_cast<double>(k) * std::log(parameter_) - parameter_ -
                      std::lgamma(static_cast<double>(k) + 1.0));
    case Kind::Geometric:
      return std::pow(1.0 - parameter_, static_cast<double>(k)) * parameter_;
    case Kind::Table:
      if (k >= table_.size()) return 0.0;
      return k == 0 ? table_[0] : table_[k] - table_[k - 1];
  }
  return 0.0;
}

double CountLaw::mean() const noexcept {
  switch (kind_) {
    case Kind::Fixed:
    case Kind::Poisson:
      return parameter_;
    case Kind::Geometric:
      return (1.0 - parameter_) / parameter_;
    case Kind::Table: {
      double m = 0.0;
      for (std::size_t k = 1; k < table_.size(); ++k) m += static_cast<double>(k) * (table_[k] - table_[k - 1]);
      return m;
    }
  }
  return 0.0;
}

std::string CountLaw::name() const {
  switch (kind_) {
    case Kind::Fixed:
      return "fixed(" + fmt(parameter_) + ")";
    case Kind::Poisson:
      return "poisson(" + fmt(parameter_) + ")";
    case Kind::Geometric:
      return "geometric(" + fmt(parameter_) + ")";
    case Kind::Table:
      return "table(" + std::to_string(table_.size()) + " cells)";
  }
  return "?";
}

PositiveLaw PositiveLaw::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential law: rate must be finite and > 0");
  return {Kind::Exponential, rate, 0.0};
}

PositiveLaw PositiveLaw::deterministic(double value) {
  require(value >= 0.0 && std::isfinite(value), "deterministic law: value must be finite and >= 0");
  return {Kind::Deterministic, value, 0.0};
}

PositiveLaw PositiveLaw::uniform(double lower, double upper) {
  require(lower >= 0.0 && upper > lower && std::isfinite(upper), "uniform law: need 0 <= lower < upper < inf");
  return {Kind::Uniform, lower, upper};
}

PositiveLaw PositiveLaw::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0 && std::isfinite(shape) && std::isfinite(rate),
          "gamma law: shape and rate must be finite and > 0");
  return {Kind::Gamma, shape, rate};
}

PositiveLaw PositiveLaw::lomax(double beta) {
  require(beta > 0.0 && std::isfinite(beta), "lomax law: beta must be finite and > 0");
  return {Kind::Lomax, beta, 0.0};
}

double PositiveLaw::sample(RandomStream& rng) const {
  switch (kind_) {
    case Kind::Exponential:
      return rng.exponential(p1_);
    case Kind::Deterministic:
      return p1_;
    case Kind::Uniform:
      return p1_ + (p2_ - p1_) * rng.uniform();
    case Kind::Gamma:
      return rng.gamma(p1_, 1.0 / p2_);
    case Kind::Lomax:
      return std::pow(rng.uniform(), -1.0 / p1_) - 1.0;
  }
  return 0.0;
}

double PositiveLaw::survival(double s) const noexcept {
  if (s < 0.0) return 1.0;
  switch (kind_) {
    case Kind::Exponential:
      return std::exp(-p1_ * s);
    case Kind::Deterministic:
      return s < p1_ ? 1.0 : 0.0;
    case Kind::Uniform:
      if (s <= p1_) return 1.0;
      return s >= p2_ ? 0.0 : (p2_ - s) / (p2_ - p1_);
    case Kind::Gamma:
      return boost::math::gamma_q(p1_, p2_ * s);
    case Kind::Lomax:
      return std::pow(1.0 + s, -p1_);
  }
  return 0.0;
}

double PositiveLaw::mean() const noexcept {
  switch (kind_) {
    case Kind::Exponential:
      return 1.0 / p1_;
    case Kind::Deterministic:
      return p1_;
    case Kind::Uniform:
      return 0.5 * (p1_ + p2_);
    case Kind::Gamma:
      return p1_ / p2_;
    case Kind::Lomax:
      return p1_ > 1.0 ? 1.0 / (p1_ - 1.0) : kInf;
  }
  return kInf;
}

std::string PositiveLaw::name() const {
  switch (kind_) {
    case Kind::Exponential:
      return "exponential(" + fmt(p1_) + ")";
    case Kind::Deterministic:
      return "deterministic(" + fmt(p1_) + ")";
    case Kind::Uniform:
      return "uniform(" + fmt(p1_) + ", " + fmt(p2_) + ")";
    case Kind::Gamma:
      return "gamma(" + fmt(p1_) + ", " + fmt(p2_) + ")";
    case Kind::Lomax:
      return "lomax(" + fmt(p1_) + ")";
  }
  return "?";
}

MarkScaling MarkScaling::constant() {
  return {[](double) { return 1.0; }, "constant"};
}

MarkScaling MarkScaling::linear(const MarkModel& marks) {
  const double m = marks.mean();
  require(std::isfinite(m) && m > 0.0, "linear mark scaling needs a finite, positive mark mean");
  return {[m](double a) { return a / m; }, "linear"};
}

MarkScaling MarkScaling::above(const MarkModel& marks, double level) {
  const double q = marks.survival(level);
  require(q > 0.0, "threshold mark scaling: P(A > level) must be > 0");
  return {[level, q](double a) { return a > level ? 1.0 / q : 0.0; }, "above(" + fmt(level) + ")"};
}

MarkScaling MarkScaling::custom(std::function<double(double)> g, const MarkModel& marks) {
  RandomStream pre(StreamId{0x9a11, 0, 0, 0});
  const double mean = normalization_check(g, marks, 1'000'000, pre);
  require(std::abs(mean - 1.0) <= 1e-3, "custom mark scaling: E[g(A)] = " + fmt(mean) + ", expected 1 +- 1e-3");
  return {std::move(g), "custom"};
}

double MarkScaling::normalization_check(const std::function<double(double)>& g, const MarkModel& marks,
                                        std::uint64_t draws, RandomStream& rng) {
  double sum = 0.0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double v = g(marks.sample(rng));
    require(v >= 0.0 && std::isfinite(v), "mark scaling must be finite and nonnegative");
    sum += v;
  }
  return draws > 0 ? sum / static_cast<double>(draws) : 0.0;
}

}  // namespace clustermax
