#include "clustermax/evt.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "clustermax/errors.hpp"

namespace clustermax {

namespace {

void require_positive_shape(double alpha, const char* who) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << who << ": shape must be finite and > 0, got " << alpha;
    throw DomainError(os.str());
  }
}

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ExtremeValueFamily ExtremeValueFamily::frechet(double alpha) {
  require_positive_shape(alpha, "frechet");
  return {EvKind::Frechet, alpha};
}

ExtremeValueFamily ExtremeValueFamily::gumbel() { return {EvKind::Gumbel, 0.0}; }

ExtremeValueFamily ExtremeValueFamily::weibull(double alpha) {
  require_positive_shape(alpha, "weibull");
  return {EvKind::Weibull, alpha};
}

std::optional<double> ExtremeValueFamily::shape() const noexcept {
  if (kind_ == EvKind::Gumbel) return std::nullopt;
  return alpha_;
}

double ExtremeValueFamily::cdf(double x) const noexcept {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  switch (kind_) {
    case EvKind::Frechet:
      if (x <= 0.0) return 0.0;
      return std::exp(-std::pow(x, -alpha_));
    case EvKind::Gumbel:
      return std::exp(-std::exp(-x));
    case EvKind::Weibull:
      if (x >= 0.0) return 1.0;
      return std::exp(-std::pow(-x, alpha_));
  }
  return 0.0;
}

bool ExtremeValueFamily::in_support(double x) const noexcept {
  if (std::isnan(x)) return false;
  switch (kind_) {
    case EvKind::Frechet:
      return x > 0.0;
    case EvKind::Gumbel:
    case EvKind::Weibull:
      return std::isfinite(x) || x > 0.0;
  }
  return false;
}

double ExtremeValueFamily::tail_measure(double x) const {
  if (!in_support(x)) {
    throw DomainError("tail_measure: x = " + format_param(x) + " outside the support of " + name());
  }
  switch (kind_) {
    case EvKind::Frechet:
      return std::pow(x, -alpha_);
    case EvKind::Gumbel:
      return std::exp(-x);
    case EvKind::Weibull:
      return x >= 0.0 ? 0.0 : std::pow(-x, alpha_);
  }
  return 0.0;
}

double ExtremeValueFamily::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  const double m = -std::log(p);
  switch (kind_) {
    case EvKind::Frechet:
      return std::pow(m, -1.0 / alpha_);
    case EvKind::Gumbel:
      return -std::log(m);
    case EvKind::Weibull:
      return -std::pow(m, 1.0 / alpha_);
  }
  return 0.0;
}

std::string ExtremeValueFamily::name() const {
  switch (kind_) {
    case EvKind::Frechet:
      return "frechet(" + format_param(alpha_) + ")";
    case EvKind::Gumbel:
      return "gumbel";
    case EvKind::Weibull:
      return "weibull(" + format_param(alpha_) + ")";
  }
  return "?";
}

std::string MarkFamily::name() const {
  switch (kind) {
    case Kind::Pareto:
      return "pareto(" + format_param(parameter) + ")";
    case Kind::Exponential:
      return "exponential(" + format_param(parameter) + ")";
    case Kind::Uniform:
      return "uniform(" + format_param(parameter) + ")";
  }
  return "?";
}

double NormalizationSequences::scale(std::uint64_t n) const {
  if (n == 0) throw DomainError("normalization sequences are indexed from n = 1");
  return scale_(n);
}

double NormalizationSequences::center(std::uint64_t n) const {
  if (n == 0) throw DomainError("normalization sequences are indexed from n = 1");
  return center_(n);
}

StandardLimit standard_sequences(const MarkFamily& family) {
  const double p = family.parameter;
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw ConfigError("mark family " + family.name() + ": parameter must be finite and > 0");
  }
  switch (family.kind) {
    case MarkFamily::Kind::Pareto:
      return {NormalizationSequences([p](std::uint64_t n) { return std::pow(static_cast<double>(n), 1.0 / p); },
                                     [](std::uint64_t) { return 0.0; }),
              ExtremeValueFamily::frechet(p)};
    case MarkFamily::Kind::Exponential:
      return {NormalizationSequences([p](std::uint64_t) { return 1.0 / p; },
                                     [p](std::uint64_t n) { return std::log(static_cast<double>(n)) / p; }),
              ExtremeValueFamily::gumbel()};
    case MarkFamily::Kind::Uniform:
      return {NormalizationSequences([p](std::uint64_t n) { return p / static_cast<double>(n); },
                                     [p](std::uint64_t) { return p; }),
              ExtremeValueFamily::weibull(1.0)};
  }
  throw ConfigError("unknown mark family");
}

AdjustedSequences::AdjustedSequences(NormalizationSequences base, double mean_cluster_size)
    : base_(std::move(base)), mean_cluster_size_(mean_cluster_size) {
  if (!std::isfinite(mean_cluster_size) || !(mean_cluster_size >= 1.0)) {
    throw DomainError("mean cluster size must be finite and >= 1, got " + format_param(mean_cluster_size));
  }
}

std::uint64_t AdjustedSequences::index(std::uint64_t n) const {
  const double scaled = mean_cluster_size_ * static_cast<double>(n);
  // 1/(1 - kappa) often lands one ulp below an integer ratio; snap rounding noise.
  const double nearest = std::round(scaled);
  const double idx = std::abs(scaled - nearest) <= 1e-9 * scaled ? nearest : std::floor(scaled);
  return static_cast<std::uint64_t>(idx);
}

double hawkes_mean_cluster_size(double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw DomainError("branching ratio must lie in [0, 1), got " + format_param(kappa));
  }
  return 1.0 / (1.0 - kappa);
}

}  // namespace clustermax
