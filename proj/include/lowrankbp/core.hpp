#ifndef LOWRANKBP_CORE_HPP
#define LOWRANKBP_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lowrankbp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  AllZero,
  DimensionMismatch,
  InvalidArgument,
  EmptyInput,
  ZeroDirection,
  IterationLimit,
  Infeasible,
  DegenerateSample,
  ConsensusFailure,
  EmptyReport,
  TooLarge,
  NoValidQ,
  OverlappingParts,
  ParseError,
  InternalInvariant,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ZeroDirection: return "ZeroDirection";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ConsensusFailure: return "ConsensusFailure";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NoValidQ: return "NoValidQ";
    case ErrorKind::OverlappingParts: return "OverlappingParts";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InternalInvariant: return "InternalInvariant";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

/// Sorted, duplicate-free subset of {1, ..., universe}. Elements are 1-based.
class IndexSet {
 public:
  IndexSet() = default;

  IndexSet(int universe, std::vector<int> elements) : universe_(universe), elements_(std::move(elements)) {
    if (universe_ < 0) throw Error(ErrorKind::InvalidArgument, "negative universe");
    std::sort(elements_.begin(), elements_.end());
    if (std::adjacent_find(elements_.begin(), elements_.end()) != elements_.end()) {
      throw Error(ErrorKind::InvalidArgument, "duplicate element in index set");
    }
    if (!elements_.empty() && (elements_.front() < 1 || elements_.back() > universe_)) {
      throw Error(ErrorKind::InvalidArgument, "index outside [1, universe]");
    }
  }

  IndexSet(int universe, std::initializer_list<int> elements)
      : IndexSet(universe, std::vector<int>(elements)) {}

  int universe() const noexcept { return universe_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  const std::vector<int>& elements() const noexcept { return elements_; }
  int operator[](std::size_t i) const { return elements_[i]; }
  auto begin() const noexcept { return elements_.begin(); }
  auto end() const noexcept { return elements_.end(); }

  bool contains(int element) const {
    return std::binary_search(elements_.begin(), elements_.end(), element);
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.universe_ == b.universe_ && a.elements_ == b.elements_;
  }
  friend bool operator<(const IndexSet& a, const IndexSet& b) { return a.elements_ < b.elements_; }

 private:
  int universe_ = 0;
  std::vector<int> elements_;
};

/// |a ∩ b| by sorted merge.
inline std::size_t intersection_size(const IndexSet& a, const IndexSet& b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

/// Orthonormal basis of a k-dimensional subspace of R^d, stored as a d×k matrix.
class Subspace {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  /// Wraps an existing orthonormal basis; throws if the columns are not orthonormal.
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {
    if (basis_.cols() < 1 || basis_.cols() > basis_.rows()) {
      throw Error(ErrorKind::InvalidArgument, "subspace dimension must satisfy 1 <= k <= d");
    }
    const Matrix gram = basis_.transpose() * basis_;
    const Matrix deviation = gram - Matrix::Identity(dim(), dim());
    if (deviation.cwiseAbs().maxCoeff() > kOrthonormalTolerance) {
      throw Error(ErrorKind::InvalidArgument, "basis columns are not orthonormal");
    }
  }

  int ambient_dim() const noexcept { return static_cast<int>(basis_.rows()); }
  int dim() const noexcept { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const noexcept { return basis_; }

  /// span(e_1, ..., e_k) in R^d.
  static Subspace axis(int d, int k) {
    Matrix basis = Matrix::Zero(d, k);
    for (int i = 0; i < k; ++i) basis(i, i) = 1.0;
    return Subspace(std::move(basis));
  }

 private:
  Matrix basis_;
};

/// Rank cutoff on singular values, relative to the largest one.
inline constexpr double kRankTolerance = 1e-9;

/// Orthonormal basis of the column span of `vectors` (one vector per column).
inline Subspace orthonormalize(const Matrix& vectors) {
  if (vectors.cols() == 0 || vectors.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument, "orthonormalize needs at least one non-empty vector");
  }
  bool all_zero = true;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    if (vectors.col(j).norm() >= 1e-12) all_zero = false;
  }
  if (all_zero) throw Error(ErrorKind::AllZero, "every input vector has norm < 1e-12");

  Eigen::JacobiSVD<Matrix> svd(vectors, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > kRankTolerance * sigma(0)) ++rank;
  }
  return Subspace(svd.matrixU().leftCols(rank));
}

inline Subspace orthonormalize(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::InvalidArgument, "no vectors given");
  const auto d = vectors.front().size();
  Matrix m(d, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    require_same_dim(vectors[j].size(), d, "vector lengths differ");
    m.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return orthonormalize(m);
}

/// Orthogonal projection of v onto U.
inline Vector project(const Subspace& u, const Vector& v) {
  require_same_dim(v.size(), u.ambient_dim(), "project: vector length vs ambient dimension");
  return u.basis() * (u.basis().transpose() * v);
}

/// Sine of the largest principal angle between U and V, i.e. ||P_U - P_V||_2.
/// Subspaces of different dimension are at distance 1.
inline double principal_angle_distance(const Subspace& u, const Subspace& v) {
  require_same_dim(u.ambient_dim(), v.ambient_dim(), "principal_angle_distance: ambient dimensions");
  if (u.dim() != v.dim()) return 1.0;
  const Matrix residual = v.basis() - u.basis() * (u.basis().transpose() * v.basis());
  Eigen::JacobiSVD<Matrix> svd(residual);
  return std::min(1.0, svd.singularValues()(0));
}

/// Largest |entry| of (x - P_U x); zero when x lies in U.
inline double subspace_residual(const Subspace& u, const Vector& x) {
  return (x - project(u, x)).cwiseAbs().maxCoeff();
}

/// N(mu, A^T A) with A a k×d factor; coord_bound B = sqrt(max_i Sigma_ii).
class GaussianModel {
 public:
  GaussianModel(Vector mean, Matrix factor) : mean_(std::move(mean)), factor_(std::move(factor)) {
    require_same_dim(mean_.size(), factor_.cols(), "GaussianModel: mean length vs factor columns");
    if (factor_.rows() < 1) throw Error(ErrorKind::InvalidArgument, "factor must have k >= 1 rows");
    Eigen::JacobiSVD<Matrix> svd(factor_);
    const Vector& sigma = svd.singularValues();
    if (sigma(0) <= 0.0 || sigma(sigma.size() - 1) <= kRankTolerance * sigma(0)) {
      throw Error(ErrorKind::InvalidArgument, "factor must have full row rank k");
    }
    coord_bound_ = std::sqrt(factor_.colwise().squaredNorm().maxCoeff());
  }

  int ambient_dim() const noexcept { return static_cast<int>(factor_.cols()); }
  int rank() const noexcept { return static_cast<int>(factor_.rows()); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& factor() const noexcept { return factor_; }
  double coord_bound() const noexcept { return coord_bound_; }
  Matrix covariance() const { return factor_.transpose() * factor_; }

  /// Column space of Sigma.
  Subspace noise_subspace() const { return orthonormalize(Matrix(factor_.transpose())); }

  /// Span(U ∪ {mu}); equals the noise subspace when mu ∈ U.
  Subspace data_subspace() const {
    Matrix vectors(ambient_dim(), rank() + 1);
    vectors.leftCols(rank()) = factor_.transpose();
    vectors.col(rank()) = mean_;
    if (mean_.norm() < 1e-12) return noise_subspace();
    return orthonormalize(vectors);
  }

 private:
  Vector mean_;
  Matrix factor_;
  double coord_bound_ = 0.0;
};

inline double l1_norm(const Vector& v) { return v.cwiseAbs().sum(); }

}  // namespace lowrankbp

#endif  // LOWRANKBP_CORE_HPP
