#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "clustermax/errors.hpp"
#include "clustermax/format.hpp"
#include "clustermax/harness/experiment.hpp"
#include "clustermax/version.hpp"

namespace clustermax::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kSeedRule = "philox4x64-10 key={masterSeed,0} counter={block,substream,replication,horizonIndex}";

// One (replication, horizon) unit of work. Fills `out` with one value per column.
using TaskFn = std::function<void(std::uint64_t rep, std::size_t h_idx, RandomStream& rng, double* out)>;

struct Plan {
  std::vector<std::string> columns;
  TaskFn task;
};

// Values of all tasks, task index = h_idx * replications + rep.
struct Table {
  std::uint64_t replications = 0;
  std::size_t horizons = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t h_idx, std::uint64_t rep, std::size_t col) const {
    return values[(h_idx * replications + rep) * width + col];
  }
  std::vector<double> column(std::size_t h_idx, std::size_t col) const {
    std::vector<double> out(replications);
    for (std::uint64_t r = 0; r < replications; ++r) out[r] = at(h_idx, r, col);
    return out;
  }
};

struct CheckList {
  nlohmann::json items = nlohmann::json::array();
  bool all_pass = true;

  void add(const std::string& label, const stats::GofReport& report) {
    nlohmann::json j = to_json(report);
    j["label"] = label;
    items.push_back(std::move(j));
    all_pass = all_pass && report.pass;
  }
};

stats::GofReport bound_check(const std::string& test, double statistic, double critical, std::uint64_t n,
                             std::string notes = {}) {
  stats::GofReport r;
  r.test = test;
  r.statistic = statistic;
  r.critical = critical;
  r.pass = statistic < critical;
  r.n = {n};
  r.notes = std::move(notes);
  return r;
}

// |estimate - target| in standard errors; infinite when the estimate is
// degenerate and misses the target.
double z_distance(double estimate, double target, double se) {
  const double diff = std::abs(estimate - target);
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : kInf;
}

unsigned resolve_workers(const ExperimentConfig& config, const RunOptions& options) {
  if (options.workers) return std::max(1u, *options.workers);
  if (config.workers) return *config.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct TaskFailure {
  std::size_t index;
  std::exception_ptr error;
};

Table run_tasks(const Plan& plan, std::uint64_t seed, std::uint64_t replications, std::size_t horizons,
                unsigned workers) {
  Table table{replications, horizons, plan.columns.size(), {}};
  const std::size_t total = static_cast<std::size_t>(replications) * horizons;
  table.values.assign(total * table.width, 0.0);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<TaskFailure> failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= total) return;
      const std::size_t h_idx = i / replications;
      const std::uint64_t rep = i % replications;
      try {
        RandomStream rng = derive_stream(seed, rep, h_idx);
        plan.task(rep, h_idx, rng, table.values.data() + i * table.width);
      } catch (const CappedRealizationError& e) {
        const CappedRealizationError tagged("replication " + std::to_string(rep) + ", horizon index " +
                                                std::to_string(h_idx) + ": " + e.what(),
                                            e.steps_taken(), e.partial_max());
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failure->index) failure = TaskFailure{i, std::make_exception_ptr(tagged)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failure->index) failure = TaskFailure{i, std::current_exception()};
      }
    }
  };

  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // The lowest failing index is reported regardless of scheduling.
  if (failure) std::rethrow_exception(failure->error);
  return table;
}

std::string csv_text(const std::string& experiment, const ExperimentConfig& config, std::uint64_t seed,
                     const Plan& plan, const Table& table) {
  std::string out = "experiment,horizon,replication,seedHigh,seedLow";
  for (const auto& c : plan.columns) out += "," + c;
  out += "\n";
  for (std::size_t h = 0; h < table.horizons; ++h) {
    const std::string horizon = format_double(config.horizons[h]);
    for (std::uint64_t r = 0; r < table.replications; ++r) {
      out += experiment;
      out += ",";
      out += horizon;
      out += ",";
      out += std::to_string(r);
      out += ",";
      out += std::to_string(seed);
      out += ",";
      out += std::to_string((r << 32) | h);
      for (std::size_t c = 0; c < table.width; ++c) {
        out += ",";
        out += format_double(table.at(h, r, c));
      }
      out += "\n";
    }
  }
  return out;
}

using PlotMap = std::map<std::string, std::vector<std::pair<double, double>>>;

void add_ecdf(PlotMap& plots, const std::string& name, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto& pts = plots[name];
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    if (!std::isfinite(values[i])) continue;
    pts.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
}

void add_curve(PlotMap& plots, const std::string& name, double lo, double hi, const std::function<double(double)>& f) {
  auto& pts = plots[name];
  constexpr int kPoints = 200;
  for (int i = 0; i <= kPoints; ++i) {
    const double x = lo + (hi - lo) * i / kPoints;
    pts.emplace_back(x, f(x));
  }
}

stats::SampleSummary summarize_column(const Table& table, std::size_t h_idx, std::size_t col) {
  const auto values = table.column(h_idx, col);
  return stats::summarize(values);
}

nlohmann::json summary_json(const stats::SampleSummary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"variance", s.variance}, {"stdError", s.std_error()}};
}

// ---------------------------------------------------------------- tail-ratio

struct Evaluation {
  Plan plan;
  std::function<void(const Table&, CheckList&, nlohmann::json&, PlotMap&)> evaluate;
};

Evaluation tail_ratio_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const ClusterSizePolicy policy = *c.policy;
  const StandardLimit limit = marks.standard_limit();
  const AdjustedSequences adj(limit.sequences, c.mean_draws);
  std::vector<std::uint64_t> ns;
  for (double h : c.horizons) ns.push_back(static_cast<std::uint64_t>(h));

  Evaluation e;
  e.plan.columns = {"h", "k", "z"};
  e.plan.task = [=](std::uint64_t, std::size_t h_idx, RandomStream& rng, double* out) {
    const MaximaSample s = sample_h(policy, marks, rng);
    const std::uint64_t n = ns[h_idx];
    out[0] = s.empty ? -kInf : s.h;
    out[1] = static_cast<double>(s.k);
    out[2] = s.empty ? -kInf : (s.h - adj.center(n)) / adj.scale(n);
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    const auto* det = std::get_if<Deterministic>(&policy);
    nlohmann::json rows = nlohmann::json::array();
    for (double x : c.x_values) {
      std::vector<stats::TrendPoint> trend;
      auto& curve = plots["tail_ratio_x" + format_double(x)];
      for (std::size_t h = 0; h < t.horizons; ++h) {
        TailRatioEstimate est;
        est.n = ns[h];
        est.x = x;
        est.threshold = adj.scale(est.n) * x + adj.center(est.n);
        est.replications = t.replications;
        for (std::uint64_t r = 0; r < t.replications; ++r) {
          if (t.at(h, r, 2) > x) ++est.exceedances;
        }
        const double target = limit.limit.tail_measure(x);
        nlohmann::json row = {{"n", est.n},
                              {"x", x},
                              {"threshold", est.threshold},
                              {"exceedances", est.exceedances},
                              {"estimate", est.estimate()},
                              {"stdError", est.std_error()},
                              {"tailMeasure", target}};
        if (det) {
          // n (1 - F(u)^k) at the same threshold.
          const double cdf = marks.cdf(est.threshold);
          row["exactFiniteN"] = static_cast<double>(est.n) * -std::expm1(static_cast<double>(det->k) * std::log1p(-(1.0 - cdf)));
        }
        rows.push_back(row);
        curve.emplace_back(static_cast<double>(est.n), est.estimate());
        trend.push_back({static_cast<double>(est.n), est.estimate(), est.std_error()});
        if (c.expect == TailExpectation::Converge) {
          checks.add("n=" + std::to_string(est.n) + " x=" + format_double(x),
                     [&] {
                       auto r = bound_check("tail-ratio-z", z_distance(est.estimate(), target, est.std_error()), 3.0,
                                            t.replications, "|estimate - tail measure| / standard error");
                       r.pass = r.statistic <= r.critical;
                       return r;
                     }());
        }
      }
      if (c.expect == TailExpectation::Diverge) {
        const auto verdict = stats::trend_report(trend);
        stats::GofReport r;
        r.test = "trend";
        r.statistic = trend.back().estimate;
        r.critical = trend.front().estimate;
        r.pass = verdict == stats::TrendVerdict::Increasing;
        r.n = {t.replications};
        r.notes = "verdict " + stats::to_string(verdict) + "; divergence expected";
        checks.add("x=" + format_double(x), r);
        summary["trend"][format_double(x)] = stats::to_string(verdict);
      }
    }
    summary["tailRatio"] = rows;
    summary["meanDraws"] = c.mean_draws;
    summary["limit"] = limit.limit.name();
  };
  return e;
}

// ----------------------------------------------------------- cluster sizes

Evaluation cluster_size_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const FertilityModel fert = *c.fertility;
  Evaluation e;
  e.plan.columns = {"totalSize", "maxClaim"};
  e.plan.task = [=](std::uint64_t, std::size_t, RandomStream& rng, double* out) {
    const double a0 = marks.sample(rng);
    const HawkesCluster cl = sample_hawkes_cluster(fert, marks, a0, rng);
    double m = -kInf;
    for (const auto& p : cl.points) m = std::max(m, p.mark);
    out[0] = static_cast<double>(cl.total_size());
    out[1] = m;
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    stats::IntegerHistogram hist;
    for (std::uint64_t r = 0; r < t.replications; ++r) hist.add(static_cast<std::int64_t>(t.at(0, r, 0)));
    const auto s = summarize_column(t, 0, 0);
    const double target = hawkes_mean_cluster_size(fert.kappa());
    summary["totalSize"] = summary_json(s);
    summary["expectedMean"] = target;
    checks.add("mean", bound_check("relative-mean", std::abs(s.mean / target - 1.0), c.mean_tolerance, s.n,
                                   "|mean / (1/(1-kappa)) - 1|"));
    const double kappa = fert.kappa();
    auto& emp = plots["size_pmf"];
    for (const auto& [v, n] : hist.cells()) {
      if (v <= c.support_max) emp.emplace_back(static_cast<double>(v), static_cast<double>(n) / hist.total());
    }
    if (fert.scaling().is_constant()) {
      const auto gof = stats::discrete_gof(hist, [kappa](std::int64_t n) {
        return n >= 1 ? borel_pmf(kappa, static_cast<std::uint64_t>(n)) : 0.0;
      }, 1, c.support_max);
      summary["borelChiSquare"] = to_json(gof);
      checks.add("borel-tv", bound_check("total-variation", *gof.total_variation, c.tv_threshold, s.n,
                                         "total variation against Borel(kappa) on 1..supportMax"));
      auto& ref = plots["borel_pmf"];
      for (std::int64_t n = 1; n <= c.support_max; ++n) {
        ref.emplace_back(static_cast<double>(n), borel_pmf(kappa, static_cast<std::uint64_t>(n)));
      }
    } else {
      summary["notes"] = "mark-dependent fertility: total size is not Borel; only the mean is checked";
    }
  };
  return e;
}

Evaluation hitting_time_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const FertilityModel fert = *c.fertility;
  Evaluation e;
  e.plan.columns = {"zeta", "totalSize"};
  e.plan.task = [=](std::uint64_t, std::size_t, RandomStream& rng, double* out) {
    RandomStream walk = rng.substream(0);
    RandomStream tree = rng.substream(1);
    out[0] = static_cast<double>(sample_hitting_time(fert, marks, walk));
    const double a0 = marks.sample(tree);
    out[1] = static_cast<double>(sample_hawkes_cluster(fert, marks, a0, tree).total_size());
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    stats::IntegerHistogram zeta;
    stats::IntegerHistogram size;
    for (std::uint64_t r = 0; r < t.replications; ++r) {
      zeta.add(static_cast<std::int64_t>(t.at(0, r, 0)));
      size.add(static_cast<std::int64_t>(t.at(0, r, 1)));
    }
    checks.add("zeta-vs-size", stats::chi2_homogeneity(zeta, size, 1, c.support_max));
    summary["zeta"] = summary_json(summarize_column(t, 0, 0));
    summary["totalSize"] = summary_json(summarize_column(t, 0, 1));
    for (const auto& [name, hist] : {std::pair{"zeta_pmf", &zeta}, std::pair{"size_pmf", &size}}) {
      auto& pts = plots[name];
      for (const auto& [v, n] : hist->cells()) {
        if (v <= c.support_max) pts.emplace_back(static_cast<double>(v), static_cast<double>(n) / hist->total());
      }
    }
  };
  return e;
}

// --------------------------------------------------------- process maxima

Evaluation process_maxima_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const ParentProcess parent = *c.parent;
  const auto mech = c.mechanism;
  const StandardLimit limit = marks.standard_limit();
  const AdjustedSequences adj(limit.sequences, c.mean_cluster_size);
  const AdjustedSequences raw(limit.sequences, 1.0);
  const auto horizons = c.horizons;

  Evaluation e;
  e.plan.columns = {"mT", "mTau", "hTau", "leftover", "jT", "tauT", "pointsByT", "z", "zRaw"};
  e.plan.task = [=](std::uint64_t, std::size_t h_idx, RandomStream& rng, double* out) {
    const double t = horizons[h_idx];
    const ProcessRealization p = simulate_process(parent, *mech, marks, t, rng, RetainPoints::None);
    const auto n = static_cast<std::uint64_t>(std::floor(parent.nu() * t));
    const double m = p.m_t.value_or(-kInf);
    out[0] = m;
    out[1] = p.m_tau;
    out[2] = p.h_tau;
    out[3] = p.leftover.value_or(-kInf);
    out[4] = static_cast<double>(p.j_t);
    out[5] = static_cast<double>(p.tau_t);
    out[6] = static_cast<double>(p.points_by_t);
    out[7] = (m - adj.center(n)) / adj.scale(n);
    out[8] = (m - raw.center(n)) / raw.scale(n);
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    const auto g = limit.limit;
    auto cdf = [g](double x) { return g.cdf(x); };
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t h = 0; h < t.horizons; ++h) {
      const std::string tag = "t=" + format_double(horizons[h]);
      auto z = t.column(h, 7);
      auto ks = stats::ks_one_sample(stats::EmpiricalDistribution(z), cdf);
      if (c.ks_threshold) {
        ks.critical = *c.ks_threshold;
        ks.pass = ks.statistic < ks.critical;
        ks.notes = "critical value set by ks_threshold";
      }
      checks.add(tag + " adjusted", ks);
      nlohmann::json row = {{"horizon", horizons[h]},
                            {"n", static_cast<std::uint64_t>(std::floor(parent.nu() * horizons[h]))},
                            {"ks", to_json(ks)},
                            {"jT", summary_json(summarize_column(t, h, 4))},
                            {"pointsByT", summary_json(summarize_column(t, h, 6))}};
      if (c.compare_unadjusted) {
        const auto ks_raw = stats::ks_one_sample(stats::EmpiricalDistribution(t.column(h, 8)), cdf);
        row["ksUnadjusted"] = to_json(ks_raw);
        stats::GofReport cmp;
        cmp.test = "adjustment-improves";
        cmp.statistic = ks.statistic;
        cmp.critical = ks_raw.statistic;
        cmp.pass = ks.statistic < ks_raw.statistic;
        cmp.n = {t.replications};
        cmp.notes = "adjusted KS statistic must be below the unadjusted one";
        checks.add(tag + " adjustment", cmp);
      }
      per.push_back(row);
      add_ecdf(plots, "ecdf_z_h" + std::to_string(h), std::move(z));
    }
    const double lo = g.quantile(0.001);
    const double hi = g.quantile(0.995);
    add_curve(plots, "limit_cdf", lo, hi, cdf);
    summary["horizons"] = per;
    summary["meanClusterSize"] = c.mean_cluster_size;
    summary["limit"] = g.name();
  };
  return e;
}

// ------------------------------------------------------ hawkes cross-check

Evaluation hawkes_cross_check_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const ParentProcess parent = *c.parent;
  const auto mech = c.mechanism;
  const FertilityModel fert = *c.fertility;
  const auto horizons = c.horizons;
  Evaluation e;
  e.plan.columns = {"thinningCount", "branchingCount"};
  e.plan.task = [=](std::uint64_t, std::size_t h_idx, RandomStream& rng, double* out) {
    const double t = horizons[h_idx];
    RandomStream a = rng.substream(0);
    RandomStream b = rng.substream(1);
    out[0] = static_cast<double>(simulate_hawkes_by_thinning(fert, marks, parent.nu(), t, a).size());
    out[1] = static_cast<double>(simulate_process(parent, *mech, marks, t, b, RetainPoints::None).points_by_t);
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t h = 0; h < t.horizons; ++h) {
      const std::string tag = "t=" + format_double(horizons[h]);
      const auto thin = summarize_column(t, h, 0);
      const auto branch = summarize_column(t, h, 1);
      const double target = parent.nu() * horizons[h] / (1.0 - fert.kappa());
      checks.add(tag + " mean", stats::two_sample_mean_test(thin, branch));
      checks.add(tag + " thinning", bound_check("relative-mean", std::abs(thin.mean / target - 1.0), c.mean_tolerance,
                                                thin.n, "|mean / (nu t / (1 - kappa)) - 1|"));
      checks.add(tag + " branching", bound_check("relative-mean", std::abs(branch.mean / target - 1.0),
                                                 c.mean_tolerance, branch.n, "|mean / (nu t / (1 - kappa)) - 1|"));
      per.push_back({{"horizon", horizons[h]},
                     {"target", target},
                     {"thinning", summary_json(thin)},
                     {"branching", summary_json(branch)},
                     {"variance", to_json(stats::two_sample_variance_test(thin, branch))}});
      add_ecdf(plots, "ecdf_thinning_h" + std::to_string(h), t.column(h, 0));
      add_ecdf(plots, "ecdf_branching_h" + std::to_string(h), t.column(h, 1));
    }
    summary["horizons"] = per;
  };
  return e;
}

// ------------------------------------------------------------ leftovers

// E[J_t] = nu E[K] (1 - e^{-theta t}) / theta when parents are Poisson, offsets
// are i.i.d. Exponential(theta) and K does not depend on the marks.
std::optional<std::function<double(double)>> closed_form_leftover(const ExperimentConfig& c) {
  const auto* mech = dynamic_cast<const OffspringMechanism*>(c.mechanism.get());
  if (!mech || mech->layout() != OffspringLayout::MixedBinomial) return std::nullopt;
  if (c.parent->inter_arrival().kind() != PositiveLaw::Kind::Exponential) return std::nullopt;
  const auto* size = std::get_if<IndependentSize>(&mech->size_law());
  if (!size || mech->offsets().mark_dependent()) return std::nullopt;
  const PositiveLaw& v = mech->offsets().base();
  if (v.kind() != PositiveLaw::Kind::Exponential) return std::nullopt;
  const double theta = 1.0 / v.mean();
  const double nu = c.parent->nu();
  const double mean_k = size->law.mean();
  return [=](double t) { return nu * mean_k * -std::expm1(-theta * t) / theta; };
}

Evaluation leftover_experiment(const ExperimentConfig& c) {
  const MarkModel marks = *c.marks;
  const ParentProcess parent = *c.parent;
  const auto mech = c.mechanism;
  const auto horizons = c.horizons;
  const auto closed = closed_form_leftover(c);
  Evaluation e;
  e.plan.columns = {"jT", "jTOverT", "tauT"};
  e.plan.task = [=](std::uint64_t, std::size_t h_idx, RandomStream& rng, double* out) {
    const double t = horizons[h_idx];
    const ProcessRealization p = simulate_process(parent, *mech, marks, t, rng, RetainPoints::None);
    out[0] = static_cast<double>(p.j_t);
    out[1] = static_cast<double>(p.j_t) / t;
    out[2] = static_cast<double>(p.tau_t);
  };
  e.evaluate = [=](const Table& t, CheckList& checks, nlohmann::json& summary, PlotMap& plots) {
    std::vector<stats::TrendPoint> trend;
    nlohmann::json per = nlohmann::json::array();
    auto& curve = plots["jt_over_t"];
    for (std::size_t h = 0; h < t.horizons; ++h) {
      const auto j = summarize_column(t, h, 0);
      const auto ratio = summarize_column(t, h, 1);
      trend.push_back({horizons[h], ratio.mean, ratio.std_error()});
      curve.emplace_back(horizons[h], ratio.mean);
      nlohmann::json row = {{"horizon", horizons[h]}, {"jT", summary_json(j)}, {"jTOverT", summary_json(ratio)}};
      if (closed) {
        const double expected = (*closed)(horizons[h]);
        row["expectedJT"] = expected;
        auto r = bound_check("closed-form-mean-z", z_distance(j.mean, expected, j.std_error()), 3.0, j.n,
                             "|mean J_t - closed form| / standard error");
        r.pass = r.statistic <= r.critical;
        checks.add("t=" + format_double(horizons[h]) + " closed-form", r);
      }
      per.push_back(row);
    }
    const auto verdict = stats::trend_report(trend);
    stats::GofReport r;
    r.test = "trend";
    r.statistic = trend.back().estimate;
    r.critical = trend.front().estimate;
    r.pass = verdict == stats::TrendVerdict::Decreasing;
    r.n = {t.replications};
    r.notes = "verdict " + stats::to_string(verdict) + "; J_t / t must decrease";
    checks.add("jT/t trend", r);
    summary["horizons"] = per;
    summary["trend"] = stats::to_string(verdict);
  };
  return e;
}

Evaluation make_evaluation(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::TailRatio:
      return tail_ratio_experiment(c);
    case ExperimentKind::ClusterSizeLaw:
      return cluster_size_experiment(c);
    case ExperimentKind::HittingTimeEquivalence:
      return hitting_time_experiment(c);
    case ExperimentKind::ProcessMaxima:
      return process_maxima_experiment(c);
    case ExperimentKind::HawkesCrossCheck:
      return hawkes_cross_check_experiment(c);
    case ExperimentKind::LeftoverTrend:
      return leftover_experiment(c);
  }
  throw ConfigError("unknown experiment kind");
}

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

nlohmann::json to_json(const stats::GofReport& report) {
  nlohmann::json j = {{"test", report.test},
                      {"statistic", report.statistic},
                      {"critical", report.critical},
                      {"pass", report.pass},
                      {"n", report.n}};
  if (report.p_value) j["pValue"] = *report.p_value;
  if (report.total_variation) j["totalVariation"] = *report.total_variation;
  if (report.degrees_of_freedom) j["degreesOfFreedom"] = *report.degrees_of_freedom;
  if (!report.notes.empty()) j["notes"] = report.notes;
  return j;
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options) {
  if (options.out) return *options.out;
  if (const char* env = std::getenv(kOutputEnvVar); env && *env) return env;
  return config.output;
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::system_clock::now();
  const std::uint64_t seed = options.seed.value_or(config.master_seed);
  const std::string name = to_string(config.kind);
  const Evaluation eval = make_evaluation(config);

  RunOutcome outcome;
  outcome.out_dir = resolve_output_dir(config, options);

  Table table;
  try {
    table = run_tasks(eval.plan, seed, config.replications, config.horizons.size(), resolve_workers(config, options));
  } catch (const CappedRealizationError& e) {
    outcome.exit_code = 3;
    outcome.message = std::string(e.what()) + " (master seed " + std::to_string(seed) + ")";
    outcome.summary = {{"experiment", name}, {"masterSeed", seed}, {"pass", false}, {"error", outcome.message}};
    return outcome;
  }

  CheckList checks;
  nlohmann::json details = nlohmann::json::object();
  PlotMap plots;
  eval.evaluate(table, checks, details, plots);

  outcome.exit_code = checks.all_pass ? 0 : 1;
  outcome.message = checks.all_pass ? "all checks passed" : "one or more checks failed";
  outcome.summary = {{"experiment", name},
                     {"masterSeed", seed},
                     {"replications", config.replications},
                     {"horizons", config.horizons},
                     {"pass", checks.all_pass},
                     {"checks", checks.items},
                     {"details", details}};

  if (options.write_files) {
    namespace fs = std::filesystem;
    fs::create_directories(outcome.out_dir / "plots");
    write_file(outcome.out_dir / "results.csv", csv_text(name, config, seed, eval.plan, table));
    write_file(outcome.out_dir / "summary.json", outcome.summary.dump(2) + "\n");
    for (const auto& [plot, pts] : plots) {
      std::string text = "# x y\n";
      for (const auto& [x, y] : pts) text += format_double(x) + " " + format_double(y) + "\n";
      write_file(outcome.out_dir / "plots" / (plot + ".dat"), text);
    }
    const nlohmann::json manifest = {{"configHash", "sha256:" + sha256_hex(config.canonical_text)},
                                     {"masterSeed", seed},
                                     {"toolVersion", kVersion},
                                     {"perReplicationSeeds", kSeedRule},
                                     {"experiment", name},
                                     {"timestamps",
                                      {{"started", utc_timestamp(started)},
                                       {"finished", utc_timestamp(std::chrono::system_clock::now())}}}};
    write_file(outcome.out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return outcome;
}

}  // namespace clustermax::harness
