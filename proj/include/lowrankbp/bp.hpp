#ifndef LOWRANKBP_BP_HPP
#define LOWRANKBP_BP_HPP

#include "lowrankbp/core.hpp"
#include "lowrankbp/lp.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace lowrankbp::bp {

struct BpResult {
  Vector estimate;                 ///< x*, a point of U
  double objective = 0.0;          ///< ||x* - x~||_1
  std::optional<double> l1_error;  ///< ||x* - x||_1 when the clean point is known
};

/// Which linear program is handed to the simplex solver.
enum class Encoding {
  /// min sum(p + q) s.t. U z - p + q = x~, z free, p, q >= 0   (d rows, k + 2d columns).
  Primal,
  /// max x~^T w s.t. U^T w = 0, -1 <= w <= 1                   (k rows, d columns);
  /// the coefficient vector z is read off the row multipliers.
  Dual,
};

/// LP over coefficients z and the positive/negative parts of the residual U z - x~.
inline lp::LinearProgram primal_program(const Subspace& u, const Vector& corrupted) {
  const int d = u.ambient_dim();
  const int k = u.dim();
  lp::LinearProgram prog;
  prog.objective = Vector::Zero(k + 2 * d);
  prog.objective.tail(2 * d).setOnes();
  prog.eq_matrix = Matrix::Zero(d, k + 2 * d);
  prog.eq_matrix.leftCols(k) = u.basis();
  prog.eq_matrix.block(0, k, d, d) = -Matrix::Identity(d, d);
  prog.eq_matrix.block(0, k + d, d, d) = Matrix::Identity(d, d);
  prog.eq_rhs = corrupted;
  prog.lower = Vector::Zero(k + 2 * d);
  prog.lower.head(k).setConstant(-lp::kInf);
  prog.upper = Vector::Constant(k + 2 * d, lp::kInf);
  return prog;
}

/// The LP dual of the primal program, posed as a minimization.
inline lp::LinearProgram dual_program(const Subspace& u, const Vector& corrupted) {
  const int d = u.ambient_dim();
  lp::LinearProgram prog;
  prog.objective = -corrupted;
  prog.eq_matrix = u.basis().transpose();
  prog.eq_rhs = Vector::Zero(u.dim());
  prog.lower = Vector::Constant(d, -1.0);
  prog.upper = Vector::Constant(d, 1.0);
  return prog;
}

namespace detail {

inline BpResult finish(const Subspace& u, const Vector& coefficients, const Vector& corrupted) {
  BpResult out;
  out.estimate = u.basis() * coefficients;
  out.objective = l1_norm(out.estimate - corrupted);
  return out;
}

inline BpResult recover_primal(const Subspace& u, const Vector& corrupted) {
  const auto sol = lp::solve(primal_program(u, corrupted));
  if (sol.status != lp::LpStatus::Optimal) {
    throw Error(ErrorKind::InternalInvariant,
                std::string("basis pursuit LP reported ") + lp::to_string(sol.status));
  }
  return finish(u, sol.point.head(u.dim()), corrupted);
}

inline std::optional<BpResult> recover_dual(const Subspace& u, const Vector& corrupted) {
  const auto sol = lp::solve(dual_program(u, corrupted));
  if (sol.status != lp::LpStatus::Optimal) {
    throw Error(ErrorKind::InternalInvariant,
                std::string("basis pursuit dual LP reported ") + lp::to_string(sol.status));
  }
  BpResult out = finish(u, -sol.duals, corrupted);
  // Strong duality: the dual value equals the l1 objective of the recovered primal point.
  const double dual_value = -sol.objective_value;
  if (std::abs(out.objective - dual_value) > 1e-9 * (1.0 + std::abs(dual_value))) return std::nullopt;
  return out;
}

}  // namespace detail

/// Basis Pursuit: an optimum of  min ||x^ - x~||_1  subject to  x^ ∈ U.
/// Non-unique optima are resolved by the solver's deterministic pivoting.
inline BpResult recover(const Subspace& u, const Vector& corrupted, Encoding encoding = Encoding::Dual) {
  require_same_dim(corrupted.size(), u.ambient_dim(), "recover: corrupted point vs ambient dimension");
  if (encoding == Encoding::Dual) {
    if (auto res = detail::recover_dual(u, corrupted)) return *res;
  }
  return detail::recover_primal(u, corrupted);
}

inline BpResult recover(const Subspace& u, const Vector& corrupted, const Vector& clean,
                        Encoding encoding = Encoding::Dual) {
  require_same_dim(clean.size(), u.ambient_dim(), "recover: clean point vs ambient dimension");
  BpResult out = recover(u, corrupted, encoding);
  out.l1_error = l1_norm(out.estimate - clean);
  return out;
}

/// argmin_a sum_i w_i |a - loc_i|; the left endpoint when the minimizers form an interval.
inline double weighted_median(const std::vector<double>& locations, const std::vector<double>& weights) {
  if (locations.empty()) throw Error(ErrorKind::EmptyInput, "weighted_median of nothing");
  if (locations.size() != weights.size()) {
    throw Error(ErrorKind::DimensionMismatch, "weighted_median: locations vs weights");
  }
  std::vector<std::size_t> order(locations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return locations[a] < locations[b];
  });
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "weights must be positive");
    total += w;
  }
  const double half = 0.5 * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    cumulative += weights[idx];
    if (cumulative >= half) return locations[idx];
  }
  return locations[order.back()];
}

/// One-dimensional BP along `direction` via the weighted median of x~_i / u_i with weights |u_i|.
inline BpResult recover_1d(const Vector& direction, const Vector& corrupted) {
  require_same_dim(corrupted.size(), direction.size(), "recover_1d: direction vs corrupted");
  const double norm1 = l1_norm(direction);
  if (!(norm1 > 0.0)) throw Error(ErrorKind::ZeroDirection, "direction is the zero vector");
  const Vector u = direction / norm1;
  std::vector<double> locations;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) != 0.0) {
      locations.push_back(corrupted(i) / u(i));
      weights.push_back(std::abs(u(i)));
    }
  }
  const double alpha = weighted_median(locations, weights);
  BpResult out;
  out.estimate = alpha * u;
  out.objective = l1_norm(out.estimate - corrupted);
  return out;
}

struct TailBounds {
  double bound_factorial = 0.0;
  double bound_uniform = 0.0;
  std::optional<double> bound_geometric;  ///< only when s <= sqrt(d/2)
  double minimum = 0.0;                   ///< min of the applicable bounds, capped at 1
};

/// The three upper bounds on P(||x* - x||_1 >= t) for B = 1 over a uniformly random support.
inline TailBounds theorem1_bounds(int k, int s, int d, double t) {
  if (d < 1 || k < 1 || k > d || s < 1 || s > d || !(t > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tail bounds need 1 <= k, s <= d and t > 0");
  }
  const double kd = k;
  const double sd = s;
  const double dd = d;
  TailBounds b;
  const double m = std::floor(t / 4.0) + 1.0;
  b.bound_factorial = std::exp(m * std::log(12.0 * sd * sd * kd / dd) - std::lgamma(m + 1.0));
  b.bound_uniform = 24.0 * kd * sd / dd;
  if (sd <= std::sqrt(dd / 2.0)) {
    const double e = 1.0 + std::floor(t / (48.0 * kd));
    b.bound_geometric = 12.0 * kd * std::pow(2.0 * sd / dd, e);
  }
  b.minimum = std::min(b.bound_factorial, b.bound_uniform);
  if (b.bound_geometric) b.minimum = std::min(b.minimum, *b.bound_geometric);
  b.minimum = std::min(b.minimum, 1.0);
  return b;
}

/// Smallest integer t0 >= 1 with 12 e k s^2 / (d t0) <= 1/2 and 2^-t0 <= 1/d.
inline int expected_error_threshold(int k, int s, int d) {
  const double need = 24.0 * std::exp(1.0) * k * static_cast<double>(s) * s / d;
  int t0 = std::max(1, static_cast<int>(std::ceil(need)));
  while (12.0 * std::exp(1.0) * k * static_cast<double>(s) * s / (static_cast<double>(d) * t0) > 0.5) ++t0;
  while (std::ldexp(1.0, t0) < d) ++t0;
  return t0;
}

/// Explicit finite form of the expected l1 error bound: B (t0 * 96ks/d + 4 * 2^-t0).
inline double expected_error_bound(int k, int s, int d, double coord_bound) {
  if (d < 1 || k < 1 || k > d || s < 1 || s > d || !(coord_bound > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "expected_error_bound needs 1 <= k, s <= d and B > 0");
  }
  const int t0 = expected_error_threshold(k, s, d);
  return coord_bound * (t0 * 96.0 * k * s / d + 4.0 * std::ldexp(1.0, -t0));
}

}  // namespace lowrankbp::bp

#endif  // LOWRANKBP_BP_HPP
