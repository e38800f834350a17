#ifndef LOWRANKBP_HARNESS_HPP
#define LOWRANKBP_HARNESS_HPP

#include "lowrankbp/bp.hpp"
#include "lowrankbp/gen.hpp"
#include "lowrankbp/parallel.hpp"
#include "lowrankbp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lowrankbp::harness {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
inline Interval wilson_interval(long successes, long trials, double z = 1.959963984540054) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw Error(ErrorKind::InvalidArgument, "wilson_interval needs 0 <= successes <= trials, trials > 0");
  }
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

enum class SubspaceKind { Gaussian, Axis };

inline const char* to_string(SubspaceKind k) { return k == SubspaceKind::Axis ? "axis" : "gaussian"; }

inline SubspaceKind parse_subspace_kind(const std::string& s) {
  if (s == "gaussian") return SubspaceKind::Gaussian;
  if (s == "axis") return SubspaceKind::Axis;
  throw Error(ErrorKind::ParseError, "unknown subspace kind '" + s + "' (gaussian|axis)");
}

/// Adversary of the given kind at scale b; LargeSpike uses `spike` instead.
inline gen::Adversary make_adversary(gen::AdversaryKind kind, double b, double spike) {
  switch (kind) {
    case gen::AdversaryKind::ZeroOut: return gen::Adversary::zero_out();
    case gen::AdversaryKind::RandomSign: return gen::Adversary::random_sign(b);
    case gen::AdversaryKind::WorstCase1D: return gen::Adversary::worst_case_1d(b);
    case gen::AdversaryKind::LargeSpike: return gen::Adversary::large_spike(spike);
  }
  throw Error(ErrorKind::InternalInvariant, "unhandled adversary kind");
}

inline GaussianModel make_model(SubspaceKind kind, int d, int k, double b, std::uint64_t seed, Vector mean = {}) {
  return kind == SubspaceKind::Axis ? gen::axis_model(d, k, b, std::move(mean))
                                    : gen::random_model(d, k, seed, b, std::move(mean));
}

struct TailConfig {
  int d = 600;
  int k = 2;
  int s = 3;
  double b = 1.0;
  gen::AdversaryKind adversary = gen::AdversaryKind::RandomSign;
  double spike = 1e6;
  SubspaceKind subspace = SubspaceKind::Gaussian;
  long trials = 1000;
  std::uint64_t seed = 1;
  std::vector<double> t_grid{0.01, 1.0, 4.0, 8.0};
  unsigned threads = 1;
  bp::Encoding encoding = bp::Encoding::Dual;

  void validate() const {
    if (d < 1 || k < 1 || k > d) throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= d");
    if (s < 0 || s > d) throw Error(ErrorKind::InvalidArgument, "need 0 <= s <= d");
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
    if (!(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "B must be positive");
    for (double t : t_grid) {
      if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t-grid values must be positive");
    }
  }
};

struct TailRow {
  double t = 0.0;
  long trials = 0;
  long exceed_count = 0;
  double empirical_p = 0.0;
  Interval wilson;
  double bound_factorial = kNaN;  ///< NaN when s = 0
  double bound_uniform = kNaN;
  double bound_geometric = kNaN;  ///< NaN when the geometric bound does not apply
  double bound_min = kNaN;
};

struct TailResult {
  std::vector<double> errors;  ///< per trial, ||x* - x||_1
  std::vector<TailRow> rows;
};

/// Fresh model, point and support per trial, all derived from trial_seed(seed, trial).
inline TailResult run_bp_tail(const TailConfig& cfg) {
  cfg.validate();
  TailResult out;
  out.errors.assign(static_cast<std::size_t>(cfg.trials), 0.0);
  const gen::Adversary adv = make_adversary(cfg.adversary, cfg.b, cfg.spike);
  parallel_for(out.errors.size(), worker_count(cfg.threads), [&](std::size_t i) {
    const std::uint64_t seed = trial_seed(cfg.seed, i);
    const auto inst = gen::sample_instance(make_model(cfg.subspace, cfg.d, cfg.k, cfg.b, seed), 1, cfg.s, adv, seed);
    out.errors[i] = *bp::recover(inst.subspace, inst.corrupted.row(0).transpose(), inst.clean.row(0).transpose(),
                                 cfg.encoding)
                         .l1_error;
  });
  for (double t : cfg.t_grid) {
    TailRow row;
    row.t = t;
    row.trials = cfg.trials;
    for (double e : out.errors) row.exceed_count += e >= t;
    row.empirical_p = static_cast<double>(row.exceed_count) / static_cast<double>(cfg.trials);
    row.wilson = wilson_interval(row.exceed_count, cfg.trials);
    if (cfg.s >= 1) {
      const auto bounds = bp::theorem1_bounds(cfg.k, cfg.s, cfg.d, t);
      row.bound_factorial = bounds.bound_factorial;
      row.bound_uniform = bounds.bound_uniform;
      row.bound_min = std::min(bounds.bound_factorial, bounds.bound_uniform);
      if (bounds.bound_geometric) {
        row.bound_geometric = *bounds.bound_geometric;
        row.bound_min = std::min(row.bound_min, row.bound_geometric);
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

struct PipelineTrialConfig {
  int d = 60;
  int k = 3;
  int s = 2;
  int n = 2000;
  double b = 1.0;
  gen::AdversaryKind adversary = gen::AdversaryKind::RandomSign;
  double spike = 1e6;
  SubspaceKind subspace = SubspaceKind::Gaussian;
  /// ||mu||_inf; the direction is Gaussian, so mu generically lies outside U.
  double mean_offset = 0.0;
  long trials = 20;
  std::uint64_t seed = 1;
  double distance_tolerance = 1e-6;
  /// Skip subspace recovery and hand BP the true subspace.
  bool oracle_subspace = false;
  pipeline::PipelineConfig pipeline;
  unsigned threads = 1;

  void validate() const {
    if (d < 1 || k < 1 || k > d) throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= d");
    if (s < 0 || s > d) throw Error(ErrorKind::InvalidArgument, "need 0 <= s <= d");
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "need n >= 2");
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
    if (!(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "B must be positive");
    if (mean_offset < 0.0) throw Error(ErrorKind::InvalidArgument, "mean offset must be non-negative");
  }
};

/// One row per trial.
struct ExperimentRecord {
  long trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  ///< "ok", or the ErrorKind name of a regime failure
  double subspace_distance = kNaN;
  bool subspace_ok = false;
  double mean_error = kNaN;  ///< average per-point ||x^ - x||_1
  double median_error = kNaN;
  double max_error = kNaN;
  double mean_l1_error = kNaN;  ///< ||mu^ - mu||_1
  long clipped_entries = 0;
  long micros = 0;
};

inline gen::ProblemInstance pipeline_instance(const PipelineTrialConfig& cfg, std::uint64_t seed) {
  Vector mean = Vector::Zero(cfg.d);
  if (cfg.mean_offset > 0.0) {
    Rng rng = substream(seed, 0x6d65616e);
    for (int j = 0; j < cfg.d; ++j) mean(j) = rng.gaussian();
    mean *= cfg.mean_offset / mean.cwiseAbs().maxCoeff();
  }
  const auto model = make_model(cfg.subspace, cfg.d, cfg.k, cfg.b, seed, mean);
  return gen::sample_instance(model, cfg.n, cfg.s, make_adversary(cfg.adversary, cfg.b, cfg.spike), seed);
}

inline bool is_regime_failure(ErrorKind kind) {
  return kind == ErrorKind::ConsensusFailure || kind == ErrorKind::DegenerateSample;
}

/// Regime failures (ConsensusFailure, DegenerateSample) are recorded in `status`; other errors propagate.
inline std::vector<ExperimentRecord> run_pipeline_trials(const PipelineTrialConfig& cfg, bool subspace_only = false) {
  cfg.validate();
  std::vector<ExperimentRecord> records(static_cast<std::size_t>(cfg.trials));
  parallel_for(records.size(), worker_count(cfg.threads), [&](std::size_t i) {
    ExperimentRecord& rec = records[i];
    rec.trial = static_cast<long>(i);
    rec.seed = trial_seed(cfg.seed, i);
    const auto inst = pipeline_instance(cfg, rec.seed);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (subspace_only) {
        const auto res = subrec::recover_subspace(inst.corrupted, cfg.pipeline.subrec);
        rec.subspace_distance = principal_angle_distance(res.recovered, inst.subspace);
      } else {
        pipeline::PipelineConfig pc = cfg.pipeline;
        pc.per_point_errors = true;
        pc.threads = 1;
        if (cfg.oracle_subspace) pc.subspace_override = inst.subspace;
        const pipeline::GroundTruth truth{inst.clean, inst.model.mean()};
        const auto report = pipeline::recover_dataset(inst.corrupted, pc, cfg.b, &truth);
        rec.subspace_distance = principal_angle_distance(report.subspace_used, inst.subspace);
        std::vector<double> errs(report.per_point_l1->data(), report.per_point_l1->data() + report.per_point_l1->size());
        rec.mean_error = report.per_point_l1->mean();
        rec.max_error = report.per_point_l1->maxCoeff();
        std::nth_element(errs.begin(), errs.begin() + static_cast<long>(errs.size() / 2), errs.end());
        rec.median_error = errs[errs.size() / 2];
        rec.mean_l1_error = *report.mean_l1_error;
        rec.clipped_entries = report.clipped_entries;
      }
      rec.subspace_ok = rec.subspace_distance < cfg.distance_tolerance;
    } catch (const Error& e) {
      if (!is_regime_failure(e.kind())) throw;
      rec.status = to_string(e.kind());
    }
    rec.micros = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  });
  return records;
}

}  // namespace lowrankbp::harness

#endif  // LOWRANKBP_HARNESS_HPP
