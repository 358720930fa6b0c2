#include <cmath>
#include <limits>
#include <numeric>

#include "clustermax/errors.hpp"
#include "clustermax/harness/experiment.hpp"

namespace clustermax::harness {

namespace {

// Library constructors validate parameters but know nothing about lines;
// attach the line of the block being built.
template <class F>
auto guarded(const BlockReader& block, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("line ", 0) == 0) throw;
    block.fail_block(e.what());
  } catch (const DomainError& e) {
    block.fail_block(e.what());
  }
}

MarkModel build_marks(BlockReader b) {
  const std::string family = b.get_string("family");
  MarkModel m = guarded(b, [&] {
    if (family == "pareto") return MarkModel(MarkFamily::pareto(b.get_double("alpha")));
    if (family == "exponential") return MarkModel(MarkFamily::exponential(b.get_double("rate")));
    if (family == "uniform") return MarkModel(MarkFamily::uniform(b.get_double("theta")));
    b.fail("family", "unknown mark family '" + family + "' (pareto, exponential, uniform)");
  });
  b.finish();
  return m;
}

CountLaw read_count_law(BlockReader& b, const std::string& law) {
  return guarded(b, [&] {
    if (law == "poisson") return CountLaw::poisson(b.get_double("mean"));
    if (law == "geometric") return CountLaw::geometric(b.get_double("p"));
    if (law == "fixed") return CountLaw::fixed(b.get_u64("k"));
    if (law == "table") return CountLaw::table(b.get_doubles("pmf"));
    b.fail("law", "unknown count law '" + law + "' (poisson, geometric, fixed, table)");
  });
}

ClusterSizePolicy build_policy(BlockReader b, const MarkModel& marks) {
  const std::string kind = b.get_string("kind");
  ClusterSizePolicy policy = Deterministic{1};
  if (kind == "deterministic") {
    policy = Deterministic{b.get_u64("k")};
  } else if (kind == "independent-count") {
    policy = IndependentCount{read_count_law(b, b.get_string("law"))};
  } else if (kind == "geometric-stopping") {
    const std::string coupling = b.get_string("coupling", "independent");
    GeometricStopping g{build_marks(b.block("threshold")), Coupling::Independent, 0.0};
    if (coupling == "independent") {
      g.coupling = Coupling::Independent;
    } else if (coupling == "comonotone") {
      g.coupling = Coupling::Comonotone;
    } else if (coupling == "shift") {
      g.coupling = Coupling::Shift;
      g.shift = b.get_double("shift");
    } else {
      b.fail("coupling", "unknown coupling '" + coupling + "' (independent, comonotone, shift)");
    }
    policy = g;
  } else if (kind == "fixed-threshold") {
    policy = FixedThreshold{build_marks(b.block("threshold"))};
  } else {
    b.fail("kind", "unknown policy '" + kind + "' (deterministic, independent-count, geometric-stopping, fixed-threshold)");
  }
  guarded(b, [&] { validate_policy(policy, marks); });
  b.finish();
  return policy;
}

ParentProcess build_parent(BlockReader b) {
  const std::string law = b.get_string("law", "exponential");
  const double nu = b.get_double("nu");
  if (!(nu > 0.0) || !std::isfinite(nu)) b.fail("nu", "rate must be finite and > 0");
  ParentProcess p = guarded(b, [&] {
    if (law == "exponential") return ParentProcess(PositiveLaw::exponential(nu));
    if (law == "deterministic") return ParentProcess(PositiveLaw::deterministic(1.0 / nu));
    if (law == "uniform") return ParentProcess(PositiveLaw::uniform(0.0, 2.0 / nu));
    if (law == "gamma") {
      const double shape = b.get_double("shape");
      return ParentProcess(PositiveLaw::gamma(shape, shape * nu));
    }
    b.fail("law", "unknown inter-arrival law '" + law + "' (exponential, deterministic, uniform, gamma)");
  });
  b.finish();
  return p;
}

MarkScaling read_scaling(BlockReader& b, const MarkModel& marks) {
  const std::string scaling = b.get_string("scaling", "constant");
  return guarded(b, [&] {
    if (scaling == "constant") return MarkScaling::constant();
    if (scaling == "linear") return MarkScaling::linear(marks);
    if (scaling == "above") return MarkScaling::above(marks, b.get_double("level"));
    b.fail("scaling", "unknown mark scaling '" + scaling + "' (constant, linear, above)");
  });
}

FertilityModel build_fertility(BlockReader b, const MarkModel& marks) {
  const std::string kernel = b.get_string("kernel");
  FertilityModel f = FertilityModel::none();
  if (kernel == "none") {
    f = FertilityModel::none();
  } else {
    const double kappa = b.get_double("kappa");
    MarkScaling g = read_scaling(b, marks);
    f = guarded(b, [&] {
      if (kernel == "exponential") return FertilityModel::exponential(kappa, b.get_double("theta"), g);
      if (kernel == "power-law") return FertilityModel::power_law(kappa, b.get_double("beta"), g);
      b.fail("kernel", "unknown kernel '" + kernel + "' (exponential, power-law, none)");
    });
  }
  b.finish();
  return f;
}

SizeLaw build_size(BlockReader b, const MarkModel& marks) {
  const std::string law = b.get_string("law");
  SizeLaw size = IndependentSize{CountLaw::fixed(0)};
  if (law == "mark-poisson") {
    const double kappa = b.get_double("kappa");
    size = MarkPoissonSize{kappa, read_scaling(b, marks)};
  } else if (law == "exceedance-stop") {
    const double level = b.get_double("level");
    if (!(marks.survival(level) > 0.0)) b.fail("level", "claims never exceed this level");
    size = ExceedanceStopSize{level};
  } else {
    size = IndependentSize{read_count_law(b, law)};
  }
  b.finish();
  return size;
}

OffsetLaw build_offset(BlockReader b) {
  const std::string law = b.get_string("law");
  OffsetLaw o = guarded(b, [&] {
    if (law == "exponential") return OffsetLaw::unconditional(PositiveLaw::exponential(b.get_double("rate")));
    if (law == "deterministic") return OffsetLaw::unconditional(PositiveLaw::deterministic(b.get_double("value")));
    if (law == "uniform") {
      return OffsetLaw::unconditional(PositiveLaw::uniform(b.get_double("lower"), b.get_double("upper")));
    }
    if (law == "gamma") {
      return OffsetLaw::unconditional(PositiveLaw::gamma(b.get_double("shape"), b.get_double("rate")));
    }
    if (law == "lomax") return OffsetLaw::unconditional(PositiveLaw::lomax(b.get_double("beta")));
    if (law == "mark-scaled-exponential") return OffsetLaw::mark_scaled_exponential(b.get_double("rate"));
    b.fail("law", "unknown offset law '" + law + "'");
  });
  b.finish();
  return o;
}

std::shared_ptr<const ClusterMechanism> build_mechanism(BlockReader b, const MarkModel& marks,
                                                        std::optional<FertilityModel>& fertility_out) {
  const std::string kind = b.get_string("kind");
  std::shared_ptr<const ClusterMechanism> mech;
  if (kind == "mixed-binomial" || kind == "renewal-cluster") {
    const auto layout = kind == "mixed-binomial" ? OffspringLayout::MixedBinomial : OffspringLayout::RenewalCluster;
    SizeLaw size = build_size(b.block("size"), marks);
    OffsetLaw offsets = build_offset(b.block("offset"));
    mech = guarded(b, [&] { return std::make_shared<OffspringMechanism>(layout, std::move(size), std::move(offsets)); });
  } else if (kind == "hawkes") {
    fertility_out = build_fertility(b.block("fertility"), marks);
    mech = hawkes_mechanism(*fertility_out);
  } else {
    b.fail("kind", "unknown mechanism '" + kind + "' (mixed-binomial, renewal-cluster, hawkes)");
  }
  b.finish();
  return mech;
}

ExperimentKind parse_kind(BlockReader& root) {
  const std::string name = root.get_string("experiment");
  if (name == "tail-ratio") return ExperimentKind::TailRatio;
  if (name == "cluster-size-law") return ExperimentKind::ClusterSizeLaw;
  if (name == "hitting-time-equivalence") return ExperimentKind::HittingTimeEquivalence;
  if (name == "process-maxima") return ExperimentKind::ProcessMaxima;
  if (name == "hawkes-cross-check") return ExperimentKind::HawkesCrossCheck;
  if (name == "leftover-trend") return ExperimentKind::LeftoverTrend;
  root.fail("experiment", "unknown experiment '" + name + "'");
}

// Mean number of draws per cluster maximum from a pre-pass.
double estimate_mean_draws(const ClusterSizePolicy& policy, const MarkModel& marks) {
  RandomStream rng(StreamId{0xC0FFEE, 0, 0, 7});
  constexpr std::uint64_t kDraws = 100'000;
  double total = 0.0;
  for (std::uint64_t i = 0; i < kDraws; ++i) total += static_cast<double>(sample_h(policy, marks, rng).k);
  return total / static_cast<double>(kDraws);
}

double estimate_mean_cluster_size(const ClusterMechanism& mech, const MarkModel& marks) {
  RandomStream rng(StreamId{0xC0FFEE, 0, 0, 8});
  constexpr std::uint64_t kDraws = 100'000;
  double total = 0.0;
  std::vector<ClusterPoint> buf;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    buf.clear();
    mech.generate(marks.sample(rng), marks, rng, buf);
    total += static_cast<double>(buf.size());
  }
  return total / static_cast<double>(kDraws);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TailRatio:
      return "tail-ratio";
    case ExperimentKind::ClusterSizeLaw:
      return "cluster-size-law";
    case ExperimentKind::HittingTimeEquivalence:
      return "hitting-time-equivalence";
    case ExperimentKind::ProcessMaxima:
      return "process-maxima";
    case ExperimentKind::HawkesCrossCheck:
      return "hawkes-cross-check";
    case ExperimentKind::LeftoverTrend:
      return "leftover-trend";
  }
  return "?";
}

ExperimentConfig build_experiment(const ConfigNode& root_node) {
  BlockReader root(root_node, "");
  ExperimentConfig c;
  c.canonical_text = canonicalize(root_node);
  c.kind = parse_kind(root);
  c.replications = root.get_u64("replications");
  if (c.replications == 0) root.fail("replications", "must be >= 1");
  c.master_seed = root.get_u64("master_seed");
  c.output = root.get_string("output", "results");
  if (root.has("workers")) {
    const auto w = root.get_u64("workers");
    if (w == 0) root.fail("workers", "must be >= 1");
    c.workers = static_cast<unsigned>(w);
  }
  c.marks = build_marks(root.block("marks"));
  const MarkModel& marks = *c.marks;

  const bool needs_horizons = c.kind != ExperimentKind::ClusterSizeLaw && c.kind != ExperimentKind::HittingTimeEquivalence;
  if (needs_horizons) {
    c.horizons = root.get_doubles("horizons");
    if (c.horizons.empty()) root.fail("horizons", "at least one horizon required");
    for (double h : c.horizons) {
      if (!(h > 0.0) || !std::isfinite(h)) root.fail("horizons", "horizons must be finite and > 0");
    }
  } else {
    c.horizons = {0.0};
  }

  switch (c.kind) {
    case ExperimentKind::TailRatio: {
      for (double n : c.horizons) {
        if (n != std::floor(n) || n < 1.0) root.fail("horizons", "tail-ratio horizons are integers n >= 1");
      }
      c.policy = build_policy(root.block("policy"), marks);
      c.x_values = root.has("x") ? root.get_doubles("x") : std::vector<double>{1.0};
      const std::string expect = root.get_string("expect", "converge");
      if (expect == "converge") {
        c.expect = TailExpectation::Converge;
      } else if (expect == "diverge") {
        c.expect = TailExpectation::Diverge;
        if (c.horizons.size() < 3) root.fail("horizons", "a divergence check needs at least three horizons");
      } else {
        root.fail("expect", "expected 'converge' or 'diverge'");
      }
      const auto limit = marks.standard_limit().limit;
      for (double x : c.x_values) {
        if (!limit.in_support(x)) root.fail("x", "x = " + std::to_string(x) + " lies outside the support of " + limit.name());
      }
      const std::string md = root.get_string("mean_draws", "auto");
      if (md != "auto") {
        c.mean_draws = root.get_double("mean_draws");
      } else if (auto closed = closed_form_mean_draws(*c.policy, marks)) {
        c.mean_draws = *closed;
      } else if (c.expect == TailExpectation::Diverge) {
        c.mean_draws = 1.0;
      } else {
        c.mean_draws = guarded(root, [&] { return estimate_mean_draws(*c.policy, marks); });
      }
      if (!(c.mean_draws >= 1.0) || !std::isfinite(c.mean_draws)) {
        root.fail("policy", "mean number of draws per cluster must be finite and >= 1");
      }
      break;
    }
    case ExperimentKind::ClusterSizeLaw:
    case ExperimentKind::HittingTimeEquivalence: {
      c.fertility = build_fertility(root.block("fertility"), marks);
      const auto support = root.get_u64("support_max", 20);
      if (support < 1) root.fail("support_max", "must be >= 1");
      c.support_max = static_cast<std::int64_t>(support);
      if (c.kind == ExperimentKind::ClusterSizeLaw) {
        c.tv_threshold = root.get_double("tv_threshold", 0.01);
        c.mean_tolerance = root.get_double("mean_tolerance", 0.01);
      }
      break;
    }
    case ExperimentKind::ProcessMaxima:
    case ExperimentKind::HawkesCrossCheck:
    case ExperimentKind::LeftoverTrend: {
      c.parent = build_parent(root.block("parent"));
      c.mechanism = build_mechanism(root.block("mechanism"), marks, c.fertility);
      if (auto m = c.mechanism->mean_cluster_size(marks)) {
        c.mean_cluster_size = *m;
      } else {
        c.mean_cluster_size = guarded(root, [&] { return estimate_mean_cluster_size(*c.mechanism, marks); });
      }
      if (c.kind == ExperimentKind::ProcessMaxima) {
        for (double t : c.horizons) {
          if (std::floor(c.parent->nu() * t) < 1.0) root.fail("horizons", "need floor(nu t) >= 1 for every horizon");
        }
        if (root.has("ks_threshold")) c.ks_threshold = root.get_double("ks_threshold");
        c.compare_unadjusted = root.get_bool("compare_unadjusted", true);
      }
      if (c.kind == ExperimentKind::HawkesCrossCheck) {
        if (!c.fertility) root.fail("mechanism", "hawkes-cross-check needs mechanism kind = hawkes");
        if (c.parent->inter_arrival().kind() != PositiveLaw::Kind::Exponential) {
          root.fail("parent", "hawkes-cross-check needs Poisson immigrants (law = exponential)");
        }
        c.mean_tolerance = root.get_double("mean_tolerance", 0.01);
        if (!(c.mean_tolerance > 0.0)) root.fail("mean_tolerance", "must be positive");
      }
      if (c.kind == ExperimentKind::LeftoverTrend && c.horizons.size() < 3) {
        root.fail("horizons", "leftover-trend needs at least three horizons");
      }
      break;
    }
  }
  root.finish();
  return c;
}

ExperimentConfig load_experiment(const std::string& path) { return build_experiment(load_config_file(path)); }

}  // namespace clustermax::harness
