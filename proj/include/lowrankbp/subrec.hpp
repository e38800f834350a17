#ifndef LOWRANKBP_SUBREC_HPP
#define LOWRANKBP_SUBREC_HPP

#include "lowrankbp/core.hpp"
#include "lowrankbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace lowrankbp::subrec {

/// Lower median: the ceil(n/2)-th order statistic.
inline double robust_median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "median of nothing");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() + 1) / 2 - 1);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

enum class Verdict { FullRank, Dependent };

inline const char* to_string(Verdict v) { return v == Verdict::FullRank ? "full-rank" : "dependent"; }

struct RegressOutcome {
  Verdict verdict = Verdict::FullRank;
  Vector weights;  ///< c with y_last = c^T y_prefix, when Dependent
  double consensus_fraction = 0.0;
};

struct RegressOptions {
  int iterations = 200;            ///< minimum number of random exact fits
  double tolerance = 1e-6;         ///< relative agreement tolerance
  double condition_limit = 1e8;    ///< on the consensus-row covariance of the prefix
  std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Rows where y_last = c^T y_prefix holds to relative tolerance.
inline std::vector<Eigen::Index> agreeing_rows(const Matrix& samples, const Vector& c, double tol, double floor) {
  const Eigen::Index j = samples.cols() - 1;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    const double target = samples(r, j);
    double fit = 0.0;
    double scale = std::abs(target);
    for (Eigen::Index l = 0; l < j; ++l) {
      fit += c(l) * samples(r, l);
      scale += std::abs(c(l) * samples(r, l));
    }
    if (std::abs(target - fit) <= tol * scale + floor) rows.push_back(r);
  }
  return rows;
}

/// Enough exact-fit draws that an all-clean draw is missed with probability below 1e-9.
inline int iteration_count(int base, int j, double eps) {
  const double clean_draw = std::pow(1.0 - eps, j);
  if (clean_draw >= 1.0) return base;
  const double needed = std::ceil(std::log(1e-9) / std::log1p(-clean_draw));
  return std::max(base, static_cast<int>(std::min(needed, 1e6)));
}

}  // namespace detail

/// Decides whether the last column of `samples` is an exact linear function of the others on a
/// strict majority of rows, by consensus over exact fits to random |prefix|-row subsets.
/// `eps` bounds the corrupted row fraction and only sets how many fits are tried.
inline RegressOutcome robust_rank_and_regress(const Matrix& samples, double eps,
                                              const RegressOptions& opts = {}) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index j = samples.cols() - 1;
  if (j < 0) throw Error(ErrorKind::InvalidArgument, "samples need at least one column");
  if (!(eps >= 0.0 && eps < 0.5)) throw Error(ErrorKind::InvalidArgument, "eps must lie in [0, 1/2)");
  if (m < j + 1) throw Error(ErrorKind::DegenerateSample, "fewer rows than unknowns + 1");
  const double floor = 1e-12 * samples.cwiseAbs().maxCoeff();

  RegressOutcome out;
  std::vector<Eigen::Index> consensus;
  if (j == 0) {
    consensus = detail::agreeing_rows(samples, Vector(), opts.tolerance, floor);
  } else {
    Rng rng(opts.seed);
    const int iterations = detail::iteration_count(opts.iterations, static_cast<int>(j), eps);
    Matrix a(j, j);
    Vector b(j);
    std::vector<Eigen::Index> pick;
    bool any_regular = false;
    for (int it = 0; it < iterations; ++it) {
      pick.clear();
      while (static_cast<Eigen::Index>(pick.size()) < j) {
        const auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
        if (std::find(pick.begin(), pick.end(), r) == pick.end()) pick.push_back(r);
      }
      for (Eigen::Index t = 0; t < j; ++t) {
        a.row(t) = samples.row(pick[t]).head(j);
        b(t) = samples(pick[t], j);
      }
      Eigen::FullPivLU<Matrix> lu(a);
      if (lu.rank() < j) continue;
      any_regular = true;
      auto rows = detail::agreeing_rows(samples, lu.solve(b), opts.tolerance, floor);
      if (rows.size() > consensus.size()) consensus = std::move(rows);
      if (2 * static_cast<Eigen::Index>(consensus.size()) > m) break;
    }
    if (!any_regular) throw Error(ErrorKind::DegenerateSample, "every candidate fit was singular");
  }

  out.consensus_fraction = static_cast<double>(consensus.size()) / static_cast<double>(m);
  if (2 * static_cast<Eigen::Index>(consensus.size()) <= m) return out;

  out.verdict = Verdict::Dependent;
  out.weights = Vector::Zero(j);
  if (j == 0) return out;
  Matrix prefix(consensus.size(), j);
  Vector target(consensus.size());
  for (std::size_t r = 0; r < consensus.size(); ++r) {
    prefix.row(static_cast<Eigen::Index>(r)) = samples.row(consensus[r]).head(j);
    target(static_cast<Eigen::Index>(r)) = samples(consensus[r], j);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(prefix.transpose() * prefix);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= opts.condition_limit) {
    throw Error(ErrorKind::DegenerateSample, "consensus covariance is ill-conditioned");
  }
  out.weights = prefix.colPivHouseholderQr().solve(target);
  out.consensus_fraction = static_cast<double>(detail::agreeing_rows(samples, out.weights, opts.tolerance, floor).size()) /
                           static_cast<double>(m);
  return out;
}

struct SubrecConfig {
  /// Regime constant in ks <= c0 d; a pair-difference row touching |J|+1 <= k+1 coordinates is
  /// corrupted with probability at most 4 c0, which is the eps handed to the regressor.
  double c0 = 0.05;
  RegressOptions regress;
  double vote_tolerance = 1e-6;
};

struct SubspaceRecoveryResult {
  IndexSet pivot_set;                     ///< J
  std::vector<Vector> complement_vectors; ///< V, each orthogonal to U
  std::vector<int> complement_pivots;     ///< the coordinate i (1-based) with v_i = -1, per v
  Subspace recovered;                     ///< Span(U^ ∪ {alpha})
  Vector anchor;                          ///< alpha
};

namespace detail {

/// Center of the largest cluster of values within relative width `tol`; needs a strict majority.
inline double majority_value(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::size_t best_lo = 0;
  std::size_t best_len = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < values.size(); ++hi) {
    while (values[hi] - values[lo] > tol * std::max({1.0, std::abs(values[lo]), std::abs(values[hi])})) ++lo;
    if (hi - lo + 1 > best_len) {
      best_len = hi - lo + 1;
      best_lo = lo;
    }
  }
  if (2 * best_len <= values.size()) {
    throw Error(ErrorKind::ConsensusFailure, "no value is shared by a majority of the samples");
  }
  return values[best_lo + best_len / 2];
}

}  // namespace detail

/// Greedy pivot search over coordinates, consensus regression on pair differences, then a
/// majority vote for the offset.
inline SubspaceRecoveryResult recover_subspace(const Matrix& corrupted, const SubrecConfig& config = {}) {
  const Eigen::Index n = corrupted.rows();
  const int d = static_cast<int>(corrupted.cols());
  if (n < 2) throw Error(ErrorKind::DegenerateSample, "pair differencing needs at least two samples");
  if (d < 1) throw Error(ErrorKind::EmptyInput, "zero-dimensional data");
  const double eps = 4.0 * config.c0;
  if (!(config.c0 > 0.0 && eps < 0.5)) throw Error(ErrorKind::InvalidArgument, "c0 must lie in (0, 1/8)");

  const Eigen::Index pairs = n / 2;
  Matrix diffs(pairs, d);
  for (Eigen::Index p = 0; p < pairs; ++p) diffs.row(p) = corrupted.row(2 * p) - corrupted.row(2 * p + 1);

  std::vector<int> pivots;  // 0-based J
  std::vector<Vector> complement;
  std::vector<int> complement_pivots;
  for (int i = 0; i < d; ++i) {
    Matrix samples(pairs, static_cast<Eigen::Index>(pivots.size()) + 1);
    for (std::size_t t = 0; t < pivots.size(); ++t) samples.col(static_cast<Eigen::Index>(t)) = diffs.col(pivots[t]);
    samples.col(samples.cols() - 1) = diffs.col(i);
    RegressOptions opts = config.regress;
    opts.seed = splitmix64(config.regress.seed ^ static_cast<std::uint64_t>(i));
    const auto outcome = robust_rank_and_regress(samples, eps, opts);
    if (outcome.verdict == Verdict::FullRank) {
      pivots.push_back(i);
      continue;
    }
    Vector v = Vector::Zero(d);
    for (std::size_t t = 0; t < pivots.size(); ++t) v(pivots[t]) = outcome.weights(static_cast<Eigen::Index>(t));
    v(i) = -1.0;
    complement.push_back(std::move(v));
    complement_pivots.push_back(i + 1);
  }

  // Kernel of V: w_j = e_j + sum_{v} v_j e_{pivot(v)} for j in J.
  Matrix w = Matrix::Zero(d, static_cast<Eigen::Index>(pivots.size()));
  for (std::size_t t = 0; t < pivots.size(); ++t) w(pivots[t], static_cast<Eigen::Index>(t)) = 1.0;
  for (std::size_t q = 0; q < complement.size(); ++q) {
    const int i = complement_pivots[q] - 1;
    for (std::size_t t = 0; t < pivots.size(); ++t) {
      w(i, static_cast<Eigen::Index>(t)) = complement[q](pivots[t]);
    }
  }

  // alpha_J = 0 and alpha_i = -y_v solves v^T alpha = y_v one equation at a time.
  Vector anchor = Vector::Zero(d);
  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::size_t q = 0; q < complement.size(); ++q) {
    const Vector projected = corrupted * complement[q];
    for (Eigen::Index r = 0; r < n; ++r) values[static_cast<std::size_t>(r)] = projected(r);
    anchor(complement_pivots[q] - 1) = -detail::majority_value(values, config.vote_tolerance);
  }

  // Typical data magnitude from per-coordinate medians of |x~|, which sparse spikes cannot move.
  Vector typical(d);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    for (Eigen::Index r = 0; r < n; ++r) col[static_cast<std::size_t>(r)] = std::abs(corrupted(r, j));
    typical(j) = robust_median(col);
  }
  const double scale = std::max(anchor.norm(), typical.norm());
  Vector outside = anchor;
  if (!pivots.empty()) {
    const Subspace u_hat = orthonormalize(w);
    outside -= project(u_hat, anchor);
  }
  const bool add_anchor = outside.norm() > 1e-9 * scale;
  if (pivots.empty() && !add_anchor) throw Error(ErrorKind::AllZero, "recovered subspace is {0}");
  Matrix cols(d, w.cols() + (add_anchor ? 1 : 0));
  cols.leftCols(w.cols()) = w;
  if (add_anchor) cols.col(w.cols()) = outside / outside.norm();

  std::vector<int> pivot_elems(pivots.size());
  for (std::size_t t = 0; t < pivots.size(); ++t) pivot_elems[t] = pivots[t] + 1;
  return SubspaceRecoveryResult{IndexSet(d, std::move(pivot_elems)), std::move(complement),
                                std::move(complement_pivots), orthonormalize(cols), std::move(anchor)};
}

}  // namespace lowrankbp::subrec

#endif  // LOWRANKBP_SUBREC_HPP
