#ifndef LOWRANKBP_GEN_HPP
#define LOWRANKBP_GEN_HPP

#include "lowrankbp/core.hpp"
#include "lowrankbp/rng.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lowrankbp::gen {

enum class AdversaryKind { ZeroOut, RandomSign, WorstCase1D, LargeSpike };

inline const char* to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::ZeroOut: return "zero-out";
    case AdversaryKind::RandomSign: return "random-sign";
    case AdversaryKind::WorstCase1D: return "worst-case-1d";
    case AdversaryKind::LargeSpike: return "large-spike";
  }
  return "unknown";
}

inline AdversaryKind parse_adversary_kind(std::string_view name) {
  for (auto kind : {AdversaryKind::ZeroOut, AdversaryKind::RandomSign, AdversaryKind::WorstCase1D,
                    AdversaryKind::LargeSpike}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::ParseError, "unknown adversary '" + std::string(name) + "'");
}

/// How the entries on a support are rewritten.
///   ZeroOut      x~_j = 0
///   RandomSign   x~_j = x_j ± B, fair independent signs
///   WorstCase1D  x~_j = x_j + B sgn(u_j), sgn(0) = +1
///   LargeSpike   x~_j = x_j ± magnitude, same sign draws as RandomSign
struct Adversary {
  AdversaryKind kind = AdversaryKind::RandomSign;
  double magnitude = 1.0;
  /// WorstCase1D direction; when empty the first basis vector of the instance subspace is used.
  Vector direction;

  static Adversary zero_out() { return {AdversaryKind::ZeroOut, 0.0, {}}; }
  static Adversary random_sign(double b) { return {AdversaryKind::RandomSign, b, {}}; }
  static Adversary worst_case_1d(double b, Vector u = {}) { return {AdversaryKind::WorstCase1D, b, std::move(u)}; }
  static Adversary large_spike(double magnitude) { return {AdversaryKind::LargeSpike, magnitude, {}}; }

  bool bounded() const { return kind == AdversaryKind::RandomSign || kind == AdversaryKind::WorstCase1D; }
};

struct ProblemInstance {
  GaussianModel model;
  Subspace subspace;
  Matrix clean;      ///< n×d
  std::vector<IndexSet> supports;
  Matrix corrupted;  ///< n×d
  std::uint64_t seed = 0;
  int s = 0;
  Adversary adversary;

  int n() const { return static_cast<int>(clean.rows()); }
  int d() const { return static_cast<int>(clean.cols()); }
};

namespace salt {
inline constexpr std::uint64_t kClean = 1;
inline constexpr std::uint64_t kSupport = 2;
inline constexpr std::uint64_t kAdversary = 3;
inline constexpr std::uint64_t kModel = 4;
}  // namespace salt

/// Uniform size-s subset of [d]: the first s entries of a partial Fisher-Yates shuffle.
inline IndexSet sample_support(Rng& rng, int d, int s) {
  if (s < 0 || s > d) throw Error(ErrorKind::InvalidArgument, "support size must lie in [0, d]");
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i + 1;
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(s);
  return IndexSet(d, std::move(perm));
}

inline int sign_of(double v) { return v < 0.0 ? -1 : 1; }

/// x with the entries on S shifted by B sgn(u_i).
inline Vector worst_case_1d_corrupt(const Vector& u, const Vector& x, const IndexSet& support, double b) {
  require_same_dim(u.size(), x.size(), "worst_case_1d_corrupt: direction vs point");
  if (support.universe() != x.size()) {
    throw Error(ErrorKind::DimensionMismatch, "worst_case_1d_corrupt: support universe vs point");
  }
  Vector out = x;
  for (int i : support) out(i - 1) += b * sign_of(u(i - 1));
  return out;
}

/// Applies the adversary to one row in place; `rng` is the adversary stream.
inline void corrupt_row(const Adversary& adv, const Vector& direction, const IndexSet& support, Rng& rng,
                        Eigen::Ref<Vector> row) {
  for (int i : support) {
    const Eigen::Index j = i - 1;
    switch (adv.kind) {
      case AdversaryKind::ZeroOut: row(j) = 0.0; break;
      case AdversaryKind::RandomSign:
      case AdversaryKind::LargeSpike: row(j) += rng.coin() ? adv.magnitude : -adv.magnitude; break;
      case AdversaryKind::WorstCase1D: row(j) += adv.magnitude * sign_of(direction(j)); break;
    }
  }
}

/// n rows of mu + A^T g with uniformly random size-s supports rewritten by the adversary.
/// Clean data, supports and adversary draw from separate streams, so two adversaries run
/// at the same seed see the same clean rows and supports.
inline ProblemInstance sample_instance(const GaussianModel& model, int n, int s, const Adversary& adversary,
                                       std::uint64_t seed, bool span_mean = true) {
  const int d = model.ambient_dim();
  const int k = model.rank();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1 samples");
  if (s < 0 || s > d) throw Error(ErrorKind::InvalidArgument, "support size must lie in [0, d]");
  Subspace subspace = span_mean ? model.data_subspace() : model.noise_subspace();
  Vector direction;
  if (adversary.kind == AdversaryKind::WorstCase1D) {
    direction = adversary.direction.size() > 0 ? adversary.direction : Vector(subspace.basis().col(0));
    require_same_dim(direction.size(), d, "worst-case direction vs ambient dimension");
    direction /= l1_norm(direction);
  }

  Rng clean_rng = substream(seed, salt::kClean);
  Rng support_rng = substream(seed, salt::kSupport);
  Rng adv_rng = substream(seed, salt::kAdversary);

  Matrix clean(n, d);
  Matrix corrupted(n, d);
  std::vector<IndexSet> supports;
  supports.reserve(n);
  Vector g(k);
  const Matrix factor_t = model.factor().transpose();
  for (int r = 0; r < n; ++r) {
    for (int i = 0; i < k; ++i) g(i) = clean_rng.gaussian();
    clean.row(r) = (model.mean() + factor_t * g).transpose();
    supports.push_back(sample_support(support_rng, d, s));
    Vector row = clean.row(r).transpose();
    corrupt_row(adversary, direction, supports.back(), adv_rng, row);
    corrupted.row(r) = row.transpose();
  }
  return ProblemInstance{model, std::move(subspace), std::move(clean), std::move(supports),
                         std::move(corrupted), seed, s, adversary};
}

/// Gaussian k×d factor rescaled so that sqrt(max_i Sigma_ii) = coord_bound.
inline GaussianModel random_model(int d, int k, std::uint64_t seed, double coord_bound = 1.0,
                                  Vector mean = {}) {
  if (k < 1 || k > d) throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= d");
  Rng rng = substream(seed, salt::kModel);
  Matrix a(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.gaussian();
  a *= coord_bound / std::sqrt(a.colwise().squaredNorm().maxCoeff());
  if (mean.size() == 0) mean = Vector::Zero(d);
  return GaussianModel(std::move(mean), std::move(a));
}

/// Sigma = B^2 diag(1, ..., 1, 0, ..., 0): noise on the first k coordinates.
inline GaussianModel axis_model(int d, int k, double coord_bound = 1.0, Vector mean = {}) {
  if (k < 1 || k > d) throw Error(ErrorKind::InvalidArgument, "need 1 <= k <= d");
  Matrix a = Matrix::Zero(k, d);
  a.leftCols(k) = coord_bound * Matrix::Identity(k, k);
  if (mean.size() == 0) mean = Vector::Zero(d);
  return GaussianModel(std::move(mean), std::move(a));
}

}  // namespace lowrankbp::gen

#endif  // LOWRANKBP_GEN_HPP
