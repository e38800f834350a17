#ifndef LOWRANKBP_COMBINAT_DOMINANCE_HPP
#define LOWRANKBP_COMBINAT_DOMINANCE_HPP

#include "lowrankbp/core.hpp"
#include "lowrankbp/lp.hpp"

#include <cmath>
#include <vector>

namespace lowrankbp::combinat {

inline constexpr double kDominanceSlack = 1e-7;

struct DominanceCertificate {
  bool dominant = false;
  Vector witness;          ///< u ∈ U with ||u||_1 = 1; empty when no nonzero maximizer exists
  double mass_on_s = 0.0;  ///< sum over S of |u_i| 1{|u_i| <= 1/t}
};

/// sum_{i in S} |u_i| 1{|u_i| <= 1/t} for ||u||_1 = 1.
inline double dominated_mass(const Vector& u, const IndexSet& s, double t) {
  double mass = 0.0;
  for (int i : s) {
    const double a = std::abs(u(i - 1));
    if (a <= 1.0 / t + 1e-12) mass += a;
  }
  return mass;
}

/// 1-dominance: max ||u_S||_1 over u ∈ U with ||u||_1 <= 1, as one LP per sign pattern on S.
/// Patterns sigma and -sigma give the same value, so the first sign is fixed.
inline DominanceCertificate is_dominant_t1(const Subspace& u, const IndexSet& s) {
  if (s.size() > 20) throw Error(ErrorKind::TooLarge, "|S| > 20 needs more than 2^19 sign-pattern LPs");
  if (s.universe() != u.ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "S universe vs ambient dimension");
  const int d = u.ambient_dim();
  const int k = u.dim();
  DominanceCertificate best;
  if (s.empty()) return best;

  // Variables (z, p, q, r): U z - p + q = 0, 1^T p + 1^T q + r = 1, p, q, r >= 0.
  lp::LinearProgram prog;
  const int n = k + 2 * d + 1;
  prog.eq_matrix = Matrix::Zero(d + 1, n);
  prog.eq_matrix.topLeftCorner(d, k) = u.basis();
  prog.eq_matrix.block(0, k, d, d) = -Matrix::Identity(d, d);
  prog.eq_matrix.block(0, k + d, d, d) = Matrix::Identity(d, d);
  prog.eq_matrix.row(d).tail(2 * d + 1).setOnes();
  prog.eq_rhs = Vector::Zero(d + 1);
  prog.eq_rhs(d) = 1.0;
  prog.lower = Vector::Zero(n);
  prog.lower.head(k).setConstant(-lp::kInf);
  prog.upper = Vector::Constant(n, lp::kInf);

  const std::size_t m = s.size();
  double best_value = -1.0;
  Vector best_u;
  for (unsigned long pattern = 0; pattern < (1ul << (m - 1)); ++pattern) {
    Vector sigma = Vector::Zero(d);
    for (std::size_t j = 0; j < m; ++j) sigma(s[j] - 1) = (j > 0 && ((pattern >> (j - 1)) & 1ul)) ? -1.0 : 1.0;
    prog.objective = Vector::Zero(n);
    prog.objective.head(k) = -(u.basis().transpose() * sigma);
    const auto sol = lp::solve(prog);
    if (sol.status != lp::LpStatus::Optimal) {
      throw Error(ErrorKind::InternalInvariant, std::string("dominance LP reported ") + lp::to_string(sol.status));
    }
    if (-sol.objective_value > best_value) {
      best_value = -sol.objective_value;
      best_u = u.basis() * sol.point.head(k);
    }
  }
  const double norm = l1_norm(best_u);
  if (norm > 1e-12) {
    best.witness = best_u / norm;
    best.mass_on_s = dominated_mass(best.witness, s, 1.0);
  }
  best.dominant = best.mass_on_s >= 0.5 - kDominanceSlack;
  return best;
}

/// For U = span(e_1..e_k) and t <= k: S is t-dominant iff |S ∩ [k]| >= t/2.
inline bool axis_dominance(int k, double t, const IndexSet& s) {
  if (!(t > 0.0) || t > k) throw Error(ErrorKind::InvalidArgument, "axis rule needs 0 < t <= k");
  int overlap = 0;
  for (int i : s) overlap += i <= k;
  return overlap >= t / 2.0;
}

/// Witness for the axis rule: weight 1/ceil(t) on ceil(t) coordinates of [k], as many of them in S
/// as possible. Every entry is <= 1/t, and the mass on S is >= 1/2 exactly when the rule holds.
inline Vector axis_witness(int d, int k, double t, const IndexSet& s) {
  if (!(t > 0.0) || t > k || k > d) throw Error(ErrorKind::InvalidArgument, "axis witness needs 0 < t <= k <= d");
  const int width = static_cast<int>(std::ceil(t - 1e-12));
  Vector u = Vector::Zero(d);
  int placed = 0;
  for (int i : s) {
    if (i <= k && placed < width) {
      u(i - 1) = 1.0 / width;
      ++placed;
    }
  }
  for (int i = 1; i <= k && placed < width; ++i) {
    if (u(i - 1) == 0.0) {
      u(i - 1) = 1.0 / width;
      ++placed;
    }
  }
  return u;
}

/// Sound but incomplete t-dominance test: the 1-dominance witness, scored with the 1/t cap.
/// A true verdict is a certificate; false means "not certified".
inline DominanceCertificate dominance_heuristic(const Subspace& u, const IndexSet& s, double t) {
  if (!(t >= 1.0)) throw Error(ErrorKind::InvalidArgument, "t must be at least 1");
  DominanceCertificate cert = is_dominant_t1(u, s);
  if (cert.witness.size() == 0) return cert;
  cert.mass_on_s = dominated_mass(cert.witness, s, t);
  cert.dominant = cert.mass_on_s >= 0.5 - kDominanceSlack;
  return cert;
}

/// Column aggregation: column l of A is negated when its entry in the row owning its part is
/// negative, then the columns of each part are summed. Result is k'×k' with k' = number of parts.
inline Matrix aggregate_columns(const Matrix& a, const std::vector<IndexSet>& parts) {
  if (static_cast<Eigen::Index>(parts.size()) != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "need one part per row");
  }
  std::vector<char> used(static_cast<std::size_t>(a.cols()), 0);
  Matrix out = Matrix::Zero(a.rows(), a.rows());
  for (std::size_t j = 0; j < parts.size(); ++j) {
    for (int l : parts[j]) {
      if (l > a.cols()) throw Error(ErrorKind::DimensionMismatch, "part index beyond the column count");
      if (used[l - 1]) throw Error(ErrorKind::OverlappingParts, "column in two parts");
      used[l - 1] = 1;
      const double sign = a(static_cast<Eigen::Index>(j), l - 1) < 0.0 ? -1.0 : 1.0;
      out.col(static_cast<Eigen::Index>(j)) += sign * a.col(l - 1);
    }
  }
  return out;
}

enum class DiagonalDominance { None, Weak, Strict };

/// Row dominance: |a_ii| vs sum_{j != i} |a_ij|.
inline DiagonalDominance diagonal_dominance(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "square matrix required");
  bool strict = true;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double diag = std::abs(a(i, i));
    const double off = a.row(i).cwiseAbs().sum() - diag;
    if (diag < off) return DiagonalDominance::None;
    if (!(diag > off)) strict = false;
  }
  return strict ? DiagonalDominance::Strict : DiagonalDominance::Weak;
}

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_DOMINANCE_HPP
