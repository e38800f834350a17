#ifndef LOWRANKBP_PIPELINE_HPP
#define LOWRANKBP_PIPELINE_HPP

#include "lowrankbp/bp.hpp"
#include "lowrankbp/core.hpp"
#include "lowrankbp/parallel.hpp"
#include "lowrankbp/subrec.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace lowrankbp::pipeline {

enum class MeanEstimator { Mean, Median };

struct PipelineConfig {
  /// B0 = multiplier * B * sqrt(log(n d)).
  double truncation_radius_multiplier = 3.0;
  /// Skips subspace recovery when set.
  std::optional<Subspace> subspace_override;
  bool per_point_errors = true;
  MeanEstimator mean_estimator = MeanEstimator::Mean;
  subrec::SubrecConfig subrec;
  bp::Encoding encoding = bp::Encoding::Dual;
  unsigned threads = 1;
};

struct GroundTruth {
  Matrix clean;
  Vector mean;
};

struct RecoveryReport {
  Matrix estimates;                     ///< n×d, row i is x^(i)
  Vector per_point_objective;           ///< ||x^(i) - clipped x~^(i)||_1
  std::optional<Vector> per_point_l1;   ///< ||estimate - clean||_1 per row, given ground truth
  Vector mean_estimate;
  std::optional<double> mean_l1_error;  ///< ||mu^ - mu||_1
  Subspace subspace_used;
  double scale = 0.0;                   ///< the B behind the clipping radius
  double clip_radius = 0.0;             ///< B0
  long clipped_entries = 0;
};

/// 1.4826 * MAD per coordinate, maximized over coordinates.
inline double mad_scale(const Matrix& data) {
  double best = 0.0;
  std::vector<double> col(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) col[static_cast<std::size_t>(i)] = data(i, j);
    const double med = subrec::robust_median(col);
    for (auto& v : col) v = std::abs(v - med);
    best = std::max(best, 1.4826 * subrec::robust_median(col));
  }
  return best;
}

inline Vector estimate_mean(const Matrix& estimates, MeanEstimator estimator = MeanEstimator::Mean) {
  if (estimates.rows() == 0) throw Error(ErrorKind::EmptyReport, "no estimates to average");
  if (estimator == MeanEstimator::Mean) return estimates.colwise().mean().transpose();
  Vector out(estimates.cols());
  std::vector<double> col(static_cast<std::size_t>(estimates.rows()));
  for (Eigen::Index j = 0; j < estimates.cols(); ++j) {
    for (Eigen::Index i = 0; i < estimates.rows(); ++i) col[static_cast<std::size_t>(i)] = estimates(i, j);
    out(j) = subrec::robust_median(col);
  }
  return out;
}

inline Vector estimate_mean(const RecoveryReport& report, MeanEstimator estimator = MeanEstimator::Mean) {
  return estimate_mean(report.estimates, estimator);
}

/// Subspace recovery, per-coordinate median clipping to [m_j - B0, m_j + B0], then BP on every row.
/// `model_b` is B, the largest coordinate standard deviation; pass a non-positive value to use
/// the MAD estimate instead.
inline RecoveryReport recover_dataset(const Matrix& corrupted, const PipelineConfig& config, double model_b,
                                      const GroundTruth* truth = nullptr) {
  const Eigen::Index n = corrupted.rows();
  const Eigen::Index d = corrupted.cols();
  if (n < 1 || d < 1) throw Error(ErrorKind::EmptyInput, "empty data matrix");
  if (!(config.truncation_radius_multiplier > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "truncation multiplier must be positive");
  }
  if (truth) {
    require_same_dim(truth->clean.rows(), n, "ground truth rows");
    require_same_dim(truth->clean.cols(), d, "ground truth columns");
    require_same_dim(truth->mean.size(), d, "ground truth mean");
  }

  Subspace subspace = config.subspace_override ? *config.subspace_override
                                               : subrec::recover_subspace(corrupted, config.subrec).recovered;
  require_same_dim(subspace.ambient_dim(), d, "subspace vs data dimension");

  const double b = model_b > 0.0 ? model_b : mad_scale(corrupted);
  const double radius =
      config.truncation_radius_multiplier * b * std::sqrt(std::max(1.0, std::log(static_cast<double>(n * d))));

  Matrix clipped = corrupted;
  long clipped_entries = 0;
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = corrupted(i, j);
    const double m = subrec::robust_median(col);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = std::clamp(corrupted(i, j), m - radius, m + radius);
      if (v != corrupted(i, j)) ++clipped_entries;
      clipped(i, j) = v;
    }
  }

  Matrix estimates(n, d);
  Vector objective(n);
  parallel_for(static_cast<std::size_t>(n), config.threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto res = bp::recover(subspace, clipped.row(r).transpose(), config.encoding);
    estimates.row(r) = res.estimate.transpose();
    objective(r) = res.objective;
  });

  RecoveryReport report{estimates, objective, std::nullopt, estimate_mean(estimates, config.mean_estimator),
                        std::nullopt, std::move(subspace), b, radius, clipped_entries};
  if (truth) {
    Vector errors(n);
    for (Eigen::Index i = 0; i < n; ++i) errors(i) = (estimates.row(i) - truth->clean.row(i)).cwiseAbs().sum();
    if (config.per_point_errors) report.per_point_l1 = errors;
    report.mean_l1_error = l1_norm(report.mean_estimate - truth->mean);
  }
  return report;
}

}  // namespace lowrankbp::pipeline

#endif  // LOWRANKBP_PIPELINE_HPP
