#ifndef LOWRANKBP_LP_HPP
#define LOWRANKBP_LP_HPP

#include "lowrankbp/core.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lowrankbp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize c^T z  subject to  E z = f,  lower <= z <= upper  (bounds may be infinite).
struct LinearProgram {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Vector lower;
  Vector upper;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return eq_matrix.rows(); }

  void validate() const {
    const auto n = objective.size();
    require_same_dim(eq_matrix.cols(), n, "LP: constraint columns vs objective length");
    require_same_dim(eq_rhs.size(), eq_matrix.rows(), "LP: rhs length vs constraint rows");
    require_same_dim(lower.size(), n, "LP: lower bound length");
    require_same_dim(upper.size(), n, "LP: upper bound length");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j)) {
        throw Error(ErrorKind::InvalidArgument, "LP: lower bound exceeds upper bound at variable " +
                                                    std::to_string(j));
      }
      if (lower(j) == kInf || upper(j) == -kInf) {
        throw Error(ErrorKind::InvalidArgument, "LP: empty bound interval");
      }
    }
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector point;              ///< primal optimum (Optimal only)
  double objective_value = 0.0;
  Vector duals;              ///< row multipliers y of the final basis, original row scale
  Vector reduced_costs;      ///< c - E^T y
  long iterations = 0;
};

/// Dual objective of a certificate (y, c - E^T y): f^T y plus the bound terms of the reduced costs.
/// Equals the primal objective at an optimal basis.
inline double dual_objective(const LinearProgram& lp, const Vector& duals, const Vector& reduced) {
  double value = lp.eq_rhs.dot(duals);
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    const double r = reduced(j);
    if (r > 0.0) {
      value += r * lp.lower(j);
    } else if (r < 0.0) {
      value += r * lp.upper(j);
    }
  }
  return value;
}

/// Dense bounded-variable revised simplex. Phase 1 uses one artificial per row; pricing and the
/// ratio test follow Bland's smallest-index rule. One instance solves one program.
class RevisedSimplex {
 public:
  static constexpr double kPivotTolerance = 1e-9;
  static constexpr double kOptimalityTolerance = 1e-9;
  static constexpr double kFeasibilityTolerance = 1e-8;
  static constexpr int kRefactorInterval = 64;

  explicit RevisedSimplex(const LinearProgram& lp) : lp_(lp) { lp_.validate(); }

  LpSolution solve() {
    setup();
    const long cap = 50L * (m_ + n_);
    iterations_ = 0;

    // Phase 1: drive the artificials to zero.
    Vector phase1_cost = Vector::Zero(n_ + m_);
    phase1_cost.tail(m_).setOnes();
    if (run_phase(phase1_cost, /*allow_artificial=*/true, cap) == PhaseResult::Unbounded) {
      throw Error(ErrorKind::InternalInvariant, "phase 1 cannot be unbounded");
    }
    refactor();
    double infeasibility = 0.0;
    for (int i = 0; i < m_; ++i) infeasibility = std::max(infeasibility, x_(n_ + i));
    LpSolution out;
    if (infeasibility > kFeasibilityTolerance) {
      out.status = LpStatus::Infeasible;
      out.iterations = iterations_;
      return out;
    }
    for (int i = 0; i < m_; ++i) {
      lower_(n_ + i) = 0.0;
      upper_(n_ + i) = 0.0;
      if (pos_[n_ + i] < 0) x_(n_ + i) = 0.0;
    }

    // Phase 2.
    Vector phase2_cost = Vector::Zero(n_ + m_);
    phase2_cost.head(n_) = lp_.objective;
    const PhaseResult result = run_phase(phase2_cost, /*allow_artificial=*/false, cap);
    out.iterations = iterations_;
    if (result == PhaseResult::Unbounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    refactor();
    out.status = LpStatus::Optimal;
    out.point = x_.head(n_);
    // Basic variables may sit a rounding error outside their box.
    for (int j = 0; j < n_; ++j) out.point(j) = std::clamp(out.point(j), lp_.lower(j), lp_.upper(j));
    out.objective_value = lp_.objective.dot(out.point);

    const Vector y_scaled = multipliers(phase2_cost);
    out.duals = row_scale_.cwiseProduct(y_scaled);
    out.reduced_costs = lp_.objective - lp_.eq_matrix.transpose() * out.duals;
    return out;
  }

 private:
  enum class PhaseResult { Optimal, Unbounded };

  void setup() {
    m_ = static_cast<int>(lp_.num_rows());
    n_ = static_cast<int>(lp_.num_vars());
    row_scale_ = Vector::Ones(m_);
    for (int i = 0; i < m_; ++i) {
      const double mx = lp_.eq_matrix.row(i).cwiseAbs().maxCoeff();
      if (mx > 0.0) row_scale_(i) = 1.0 / mx;
    }
    a_ = row_scale_.asDiagonal() * lp_.eq_matrix;
    rhs_ = row_scale_.cwiseProduct(lp_.eq_rhs);

    lower_.resize(n_ + m_);
    upper_.resize(n_ + m_);
    lower_.head(n_) = lp_.lower;
    upper_.head(n_) = lp_.upper;
    lower_.tail(m_).setZero();
    upper_.tail(m_).setConstant(kInf);

    x_ = Vector::Zero(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      const bool lo = std::isfinite(lower_(j));
      const bool hi = std::isfinite(upper_(j));
      if (lo && hi) {
        x_(j) = lp_.objective(j) >= 0.0 ? lower_(j) : upper_(j);
      } else if (lo) {
        x_(j) = lower_(j);
      } else if (hi) {
        x_(j) = upper_(j);
      }
    }
    const Vector residual = rhs_ - a_ * x_.head(n_);
    art_sign_ = Vector::Ones(m_);
    head_.assign(m_, 0);
    pos_.assign(n_ + m_, -1);
    for (int i = 0; i < m_; ++i) {
      art_sign_(i) = residual(i) >= 0.0 ? 1.0 : -1.0;
      x_(n_ + i) = std::abs(residual(i));
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
    }
    binv_ = art_sign_.asDiagonal();
    since_refactor_ = 0;
  }

  /// Column j of the working (row-scaled, artificial-augmented) matrix, multiplied by x.
  double column_dot(int j, const Vector& v) const {
    if (j < n_) return a_.col(j).dot(v);
    return art_sign_(j - n_) * v(j - n_);
  }

  Vector column(int j) const {
    if (j < n_) return a_.col(j);
    Vector e = Vector::Zero(m_);
    e(j - n_) = art_sign_(j - n_);
    return e;
  }

  Vector multipliers(const Vector& cost) const {
    Vector cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost(head_[i]);
    return binv_.transpose() * cb;
  }

  void refactor() {
    if (m_ == 0) return;
    Matrix basis(m_, m_);
    for (int i = 0; i < m_; ++i) basis.col(i) = column(head_[i]);
    Eigen::PartialPivLU<Matrix> lu(basis);
    binv_ = lu.inverse();
    Vector rhs = rhs_;
    for (int j = 0; j < n_ + m_; ++j) {
      if (pos_[j] < 0 && x_(j) != 0.0) rhs -= column(j) * x_(j);
    }
    const Vector xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_(head_[i]) = xb(i);
    since_refactor_ = 0;
  }

  PhaseResult run_phase(const Vector& cost, bool allow_artificial, long cap) {
    const int limit = allow_artificial ? n_ + m_ : n_;
    while (true) {
      const Vector y = multipliers(cost);

      int entering = -1;
      double direction = 0.0;
      for (int j = 0; j < limit; ++j) {
        if (pos_[j] >= 0 || lower_(j) == upper_(j)) continue;
        const double reduced = cost(j) - column_dot(j, y);
        if (reduced < -kOptimalityTolerance && x_(j) < upper_(j)) {
          entering = j;
          direction = 1.0;
          break;
        }
        if (reduced > kOptimalityTolerance && x_(j) > lower_(j)) {
          entering = j;
          direction = -1.0;
          break;
        }
      }
      if (entering < 0) return PhaseResult::Optimal;

      if (++iterations_ > cap) {
        throw Error(ErrorKind::IterationLimit,
                    "simplex exceeded " + std::to_string(cap) + " iterations");
      }

      const Vector alpha = binv_ * column(entering);
      // Moving the entering variable by theta*direction changes basic row i by -theta*direction*alpha_i.
      double theta = upper_(entering) - lower_(entering);
      int leaving_row = -1;
      int leaving_var = std::numeric_limits<int>::max();
      bool to_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double delta = -direction * alpha(i);
        const int var = head_[i];
        double limit_i = kInf;
        bool hits_upper = false;
        if (delta < -kPivotTolerance && std::isfinite(lower_(var))) {
          limit_i = std::max(0.0, x_(var) - lower_(var)) / -delta;
        } else if (delta > kPivotTolerance && std::isfinite(upper_(var))) {
          limit_i = std::max(0.0, upper_(var) - x_(var)) / delta;
          hits_upper = true;
        }
        if (!std::isfinite(limit_i)) continue;
        if (!std::isfinite(theta)) {
          theta = limit_i;
          leaving_row = i;
          leaving_var = var;
          to_upper = hits_upper;
          continue;
        }
        const double tie = 1e-12 * std::max(1.0, theta);
        if (limit_i < theta - tie || (limit_i <= theta + tie && leaving_row >= 0 && var < leaving_var)) {
          theta = limit_i;
          leaving_row = i;
          leaving_var = var;
          to_upper = hits_upper;
        }
      }
      if (!std::isfinite(theta)) return PhaseResult::Unbounded;

      for (int i = 0; i < m_; ++i) x_(head_[i]) -= theta * direction * alpha(i);
      x_(entering) += theta * direction;

      if (leaving_row < 0) {
        // Bound flip: entering variable moved across its whole box.
        x_(entering) = direction > 0 ? upper_(entering) : lower_(entering);
        continue;
      }

      const int out_var = head_[leaving_row];
      x_(out_var) = to_upper ? upper_(out_var) : lower_(out_var);
      pos_[out_var] = -1;
      head_[leaving_row] = entering;
      pos_[entering] = leaving_row;

      const double pivot = alpha(leaving_row);
      binv_.row(leaving_row) /= pivot;
      for (int i = 0; i < m_; ++i) {
        if (i != leaving_row && alpha(i) != 0.0) binv_.row(i) -= alpha(i) * binv_.row(leaving_row);
      }
      if (++since_refactor_ >= kRefactorInterval) refactor();
    }
  }

  LinearProgram lp_;
  int m_ = 0;
  int n_ = 0;
  Matrix a_;
  Vector rhs_;
  Vector row_scale_;
  Vector art_sign_;
  Vector lower_;
  Vector upper_;
  Vector x_;
  std::vector<int> head_;
  std::vector<int> pos_;
  Matrix binv_;
  int since_refactor_ = 0;
  long iterations_ = 0;
};

inline LpSolution solve(const LinearProgram& lp) { return RevisedSimplex(lp).solve(); }

/// Max |E z - f| after scaling each row by its largest coefficient.
inline double scaled_residual(const LinearProgram& lp, const Vector& z) {
  double worst = 0.0;
  const Vector r = lp.eq_matrix * z - lp.eq_rhs;
  for (Eigen::Index i = 0; i < lp.num_rows(); ++i) {
    const double mx = lp.eq_matrix.row(i).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::abs(r(i)) / (mx > 0.0 ? mx : 1.0));
  }
  return worst;
}

}  // namespace lowrankbp::lp

#endif  // LOWRANKBP_LP_HPP
