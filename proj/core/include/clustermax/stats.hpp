#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clustermax::stats {

// Sorted sample; the cdf is right-continuous.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> values);
  // Rejects unsorted or NaN input with InvariantViolation.
  static EmpiricalDistribution from_sorted(std::vector<double> sorted_values);

  std::span<const double> sorted_values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double cdf(double x) const noexcept;

 private:
  struct Sorted {};
  EmpiricalDistribution(Sorted, std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> values_;
};

struct GofReport {
  std::string test;
  double statistic = 0.0;
  double critical = 0.0;  // at the 1% level
  bool pass = false;      // statistic < critical
  std::vector<std::uint64_t> n;
  std::optional<double> p_value;
  std::optional<double> total_variation;
  std::optional<std::uint64_t> degrees_of_freedom;
  std::string notes;
};

inline constexpr double kKsCoefficient01 = 1.628;
inline constexpr double kNormalTwoSided01 = 2.5758293035489;

// Asymptotic Kolmogorov tail P(sup|B| > lambda).
double kolmogorov_survival(double lambda) noexcept;

GofReport ks_one_sample(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf);
GofReport ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

class IntegerHistogram {
 public:
  void add(std::int64_t value, std::uint64_t count = 1) {
    counts_[value] += count;
    total_ += count;
  }
  std::uint64_t count(std::int64_t value) const noexcept;
  std::uint64_t total() const noexcept { return total_; }
  const std::map<std::int64_t, std::uint64_t>& cells() const noexcept { return counts_; }

 private:
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Chi-square goodness of fit of a histogram against a pmf on the nonnegative
// integers. Cells in
// [lo, hi] are taken individually, mass outside the range forms one pooled
// cell per side, and adjacent cells are merged left to right until each
// expected count reaches 5. Also reports the total variation distance over
// the unmerged cells.
GofReport discrete_gof(const IntegerHistogram& counts, const std::function<double(std::int64_t)>& pmf,
                       std::int64_t lo, std::int64_t hi);

// Chi-square test that two histograms come from the same law, with the same
// pooling rule applied to the smaller expected count of each cell.
GofReport chi2_homogeneity(const IntegerHistogram& a, const IntegerHistogram& b, std::int64_t lo,
                           std::int64_t hi);

struct SampleSummary {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double fourth_central_moment = 0.0;
  double std_error() const noexcept;
};

SampleSummary summarize(std::span<const double> values);

// Large-sample z tests at the 1% level.
GofReport two_sample_mean_test(const SampleSummary& a, const SampleSummary& b);
GofReport two_sample_variance_test(const SampleSummary& a, const SampleSummary& b);

enum class TrendVerdict { Decreasing, Flat, Increasing };

struct TrendPoint {
  double scale;
  double estimate;
  double std_error;
};

// Monotone only if every successive step moves beyond two combined standard
// errors in the same direction; anything else is flat.
TrendVerdict trend_report(std::span<const TrendPoint> values);
std::string to_string(TrendVerdict verdict);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

double chi2_quantile(double p, double degrees_of_freedom);

}  // namespace clustermax::stats
