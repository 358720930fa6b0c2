#include "clustermax/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "clustermax/errors.hpp"

namespace clustermax::stats {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values) : values_(std::move(values)) {
  if (std::any_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); })) {
    throw InvariantViolation("empirical distribution: NaN in sample");
  }
  std::sort(values_.begin(), values_.end());
}

EmpiricalDistribution EmpiricalDistribution::from_sorted(std::vector<double> sorted_values) {
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    if (std::isnan(sorted_values[i]) || (i > 0 && sorted_values[i] < sorted_values[i - 1])) {
      throw InvariantViolation("empirical distribution: input is not sorted");
    }
  }
  return EmpiricalDistribution(Sorted{}, std::move(sorted_values));
}

double EmpiricalDistribution::cdf(double x) const noexcept {
  if (values_.empty()) return 0.0;
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double kolmogorov_survival(double lambda) noexcept {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

GofReport ks_one_sample(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
  const auto values = emp.sorted_values();
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    // Step over ties so the empirical cdf jumps once per distinct value.
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double f = cdf(values[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  GofReport r;
  r.test = "ks-one-sample";
  r.statistic = d;
  r.n = {values.size()};
  r.critical = values.empty() ? 0.0 : kKsCoefficient01 / std::sqrt(n);
  r.pass = d < r.critical;
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  return r;
}

GofReport ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto x = a.sorted_values();
  const auto y = b.sorted_values();
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  GofReport r;
  r.test = "ks-two-sample";
  r.statistic = d;
  r.n = {x.size(), y.size()};
  r.critical = kKsCoefficient01 * std::sqrt((m + n) / (m * n));
  r.pass = d < r.critical;
  r.p_value = kolmogorov_survival(std::sqrt(m * n / (m + n)) * d);
  return r;
}

std::uint64_t IntegerHistogram::count(std::int64_t value) const noexcept {
  const auto it = counts_.find(value);
  return it == counts_.end() ? 0 : it->second;
}

namespace {

struct Cell {
  double observed_a = 0.0;
  double observed_b = 0.0;
  double expected = 0.0;  // merge criterion
};

// Left-to-right merging; a trailing undersized group joins its predecessor.
std::vector<Cell> pool_cells(const std::vector<Cell>& cells, double min_expected) {
  std::vector<Cell> groups;
  Cell open;
  bool has_open = false;
  for (const Cell& c : cells) {
    open.observed_a += c.observed_a;
    open.observed_b += c.observed_b;
    open.expected += c.expected;
    has_open = true;
    if (open.expected >= min_expected) {
      groups.push_back(open);
      open = Cell{};
      has_open = false;
    }
  }
  if (has_open && (open.expected > 0.0 || open.observed_a > 0.0 || open.observed_b > 0.0)) {
    if (groups.empty()) {
      groups.push_back(open);
    } else {
      groups.back().observed_a += open.observed_a;
      groups.back().observed_b += open.observed_b;
      groups.back().expected += open.expected;
    }
  }
  return groups;
}

std::uint64_t observed_below(const IntegerHistogram& h, std::int64_t lo) {
  std::uint64_t s = 0;
  for (auto it = h.cells().begin(); it != h.cells().end() && it->first < lo; ++it) s += it->second;
  return s;
}

std::uint64_t observed_above(const IntegerHistogram& h, std::int64_t hi) {
  std::uint64_t s = 0;
  for (auto it = h.cells().upper_bound(hi); it != h.cells().end(); ++it) s += it->second;
  return s;
}

}  // namespace

double chi2_quantile(double p, double degrees_of_freedom) {
  boost::math::chi_squared dist(degrees_of_freedom);
  return boost::math::quantile(dist, p);
}

GofReport discrete_gof(const IntegerHistogram& counts, const std::function<double(std::int64_t)>& pmf,
                       std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw DomainError("discrete_gof: empty support range");
  const double total = static_cast<double>(counts.total());
  if (total == 0.0) throw DomainError("discrete_gof: empty histogram");

  std::vector<double> probs;
  double inside = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    probs.push_back(pmf(k));
    inside += probs.back();
  }
  double below = 0.0;
  for (std::int64_t k = 0; k < lo; ++k) below += pmf(k);
  const double above = std::max(0.0, 1.0 - inside - below);

  std::vector<Cell> cells;
  cells.push_back({static_cast<double>(observed_below(counts, lo)), 0.0, total * below});
  double tv = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double o = static_cast<double>(counts.count(k));
    const double p = probs[static_cast<std::size_t>(k - lo)];
    cells.push_back({o, 0.0, total * p});
    tv += std::abs(o / total - p);
  }
  cells.push_back({static_cast<double>(observed_above(counts, hi)), 0.0, total * above});
  tv += std::abs(cells.front().observed_a / total - below) + std::abs(cells.back().observed_a / total - above);

  const auto groups = pool_cells(cells, 5.0);
  if (groups.size() < 2) throw DomainError("discrete_gof: fewer than two cells after pooling");

  // Observations where the pmf puts no mass reject outright; pooling would hide them.
  const bool impossible =
      std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.expected == 0.0 && c.observed_a > 0.0; });
  double chi2 = impossible ? std::numeric_limits<double>::infinity() : 0.0;
  for (const Cell& g : groups) {
    if (g.expected > 0.0) {
      chi2 += (g.observed_a - g.expected) * (g.observed_a - g.expected) / g.expected;
    } else if (g.observed_a > 0.0) {
      chi2 = std::numeric_limits<double>::infinity();
    }
  }
  GofReport r;
  r.test = "chi2-gof";
  r.statistic = chi2;
  r.n = {counts.total()};
  r.degrees_of_freedom = groups.size() - 1;
  r.critical = chi2_quantile(0.99, static_cast<double>(groups.size() - 1));
  r.pass = chi2 < r.critical;
  r.total_variation = std::min(1.0, 0.5 * tv);
  return r;
}

GofReport chi2_homogeneity(const IntegerHistogram& a, const IntegerHistogram& b, std::int64_t lo,
                           std::int64_t hi) {
  if (hi < lo) throw DomainError("chi2_homogeneity: empty support range");
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  if (na == 0.0 || nb == 0.0) throw DomainError("chi2_homogeneity: empty histogram");
  const double small = std::min(na, nb) / (na + nb);

  std::vector<Cell> cells;
  auto push = [&](double oa, double ob) { cells.push_back({oa, ob, small * (oa + ob)}); };
  push(static_cast<double>(observed_below(a, lo)), static_cast<double>(observed_below(b, lo)));
  for (std::int64_t k = lo; k <= hi; ++k) push(static_cast<double>(a.count(k)), static_cast<double>(b.count(k)));
  push(static_cast<double>(observed_above(a, hi)), static_cast<double>(observed_above(b, hi)));

  const auto groups = pool_cells(cells, 5.0);
  if (groups.size() < 2) throw DomainError("chi2_homogeneity: fewer than two cells after pooling");

  double chi2 = 0.0;
  double tv = 0.0;
  for (const Cell& g : groups) {
    const double pooled = g.observed_a + g.observed_b;
    const double ea = na * pooled / (na + nb);
    const double eb = nb * pooled / (na + nb);
    chi2 += (g.observed_a - ea) * (g.observed_a - ea) / ea + (g.observed_b - eb) * (g.observed_b - eb) / eb;
    tv += std::abs(g.observed_a / na - g.observed_b / nb);
  }
  GofReport r;
  r.test = "chi2-homogeneity";
  r.statistic = chi2;
  r.n = {a.total(), b.total()};
  r.degrees_of_freedom = groups.size() - 1;
  r.critical = chi2_quantile(0.99, static_cast<double>(groups.size() - 1));
  r.pass = chi2 < r.critical;
  r.total_variation = 0.5 * tv;
  return r;
}

double SampleSummary::std_error() const noexcept {
  return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  s.mean = mean;
  s.variance = values.size() > 1 ? m2 / (n - 1.0) : 0.0;
  s.fourth_central_moment = m4 / n;
  return s;
}

GofReport two_sample_mean_test(const SampleSummary& a, const SampleSummary& b) {
  const double se = std::sqrt(a.std_error() * a.std_error() + b.std_error() * b.std_error());
  GofReport r;
  r.test = "z-mean";
  r.statistic = se > 0.0 ? std::abs(a.mean - b.mean) / se : (a.mean == b.mean ? 0.0 : HUGE_VAL);
  r.critical = kNormalTwoSided01;
  r.pass = r.statistic < r.critical;
  r.n = {a.n, b.n};
  return r;
}

GofReport two_sample_variance_test(const SampleSummary& a, const SampleSummary& b) {
  // Var(s^2) ~ (m4 - sigma^4) / n for large n.
  auto var_of_var = [](const SampleSummary& s) {
    return s.n > 0 ? std::max(0.0, s.fourth_central_moment - s.variance * s.variance) / static_cast<double>(s.n)
                   : 0.0;
  };
  const double se = std::sqrt(var_of_var(a) + var_of_var(b));
  GofReport r;
  r.test = "z-variance";
  r.statistic = se > 0.0 ? std::abs(a.variance - b.variance) / se : (a.variance == b.variance ? 0.0 : HUGE_VAL);
  r.critical = kNormalTwoSided01;
  r.pass = r.statistic < r.critical;
  r.n = {a.n, b.n};
  return r;
}

TrendVerdict trend_report(std::span<const TrendPoint> values) {
  if (values.size() < 3) throw DomainError("trend_report: need at least three scales");
  bool all_down = true;
  bool all_up = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double diff = values[i].estimate - values[i - 1].estimate;
    const double band =
        2.0 * std::sqrt(values[i].std_error * values[i].std_error + values[i - 1].std_error * values[i - 1].std_error);
    all_down = all_down && diff < -band;
    all_up = all_up && diff > band;
  }
  if (all_down) return TrendVerdict::Decreasing;
  if (all_up) return TrendVerdict::Increasing;
  return TrendVerdict::Flat;
}

std::string to_string(TrendVerdict verdict) {
  switch (verdict) {
    case TrendVerdict::Decreasing:
      return "decreasing";
    case TrendVerdict::Flat:
      return "flat";
    case TrendVerdict::Increasing:
      return "increasing";
  }
  return "?";
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman: need two equal-length samples, n >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace clustermax::stats
