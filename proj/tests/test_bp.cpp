#include "lowrankbp/bp.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace lowrankbp;
using bp::Encoding;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// Scan every breakpoint; return the leftmost minimizer of sum w_i |a - loc_i|.
double breakpoint_scan(const std::vector<double>& loc, const std::vector<double>& w) {
  double best_val = std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (double a : loc) {
    double val = 0.0;
    for (std::size_t i = 0; i < loc.size(); ++i) val += w[i] * std::abs(a - loc[i]);
    if (val < best_val - 1e-12 || (std::abs(val - best_val) <= 1e-12 && a < best)) {
      best_val = val;
      best = a;
    }
  }
  return best;
}

/// x with s random coordinates shifted by +-B.
Vector random_sign_corruption(std::mt19937_64& rng, const Vector& x, int s, double b) {
  Vector out = x;
  for (int i : testutil::random_subset(rng, static_cast<int>(x.size()), s)) {
    out(i) += (rng() & 1u) ? b : -b;
  }
  return out;
}

}  // namespace

TEST(Recover, SeparableAxisExample) {
  const auto res = bp::recover(Subspace::axis(3, 1), vec({5, 0.3, -0.2}));
  EXPECT_NEAR((res.estimate - vec({5, 0, 0})).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  EXPECT_NEAR(res.objective, 0.5, 1e-9);
}

TEST(Recover, PointInsideSubspaceIsReturned) {
  std::mt19937_64 rng(3);
  const auto u = testutil::random_subspace(rng, 12, 3);
  const Vector x = u.basis() * testutil::gaussian_vector(rng, 3);
  for (auto enc : {Encoding::Dual, Encoding::Primal}) {
    const auto res = bp::recover(u, x, enc);
    EXPECT_NEAR(res.objective, 0.0, 1e-9);
    EXPECT_LE((res.estimate - x).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Recover, DiagonalLineMatchesWeightedMedian) {
  const auto u = orthonormalize(std::vector<Vector>{vec({1, 1, 1})});
  const Vector xt = vec({1, 1, 4});
  // Oracle: along (1,1,1) the objective is sum |a - xt_i| with breakpoints {1, 1, 4}.
  const double a = breakpoint_scan({1, 1, 4}, {1, 1, 1});
  EXPECT_DOUBLE_EQ(a, 1.0);
  for (auto enc : {Encoding::Dual, Encoding::Primal}) {
    const auto res = bp::recover(u, xt, enc);
    EXPECT_NEAR(res.objective, 3.0, 1e-9);
    EXPECT_LE((res.estimate - vec({1, 1, 1})).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Recover, DimensionMismatch) {
  EXPECT_THROW(bp::recover(Subspace::axis(3, 1), vec({1, 2})), Error);
}

TEST(WeightedMedian, Examples) {
  const std::vector<double> loc{2, 2, -1};
  const std::vector<double> w{0.5, 0.25, 0.25};
  EXPECT_DOUBLE_EQ(breakpoint_scan(loc, w), 2.0);
  EXPECT_DOUBLE_EQ(bp::weighted_median(loc, w), 2.0);
  EXPECT_DOUBLE_EQ(bp::weighted_median({7}, {1}), 7.0);
  EXPECT_DOUBLE_EQ(bp::weighted_median({0, 1}, {1, 1}), 0.0);
  try {
    bp::weighted_median({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}

TEST(WeightedMedian, AgreesWithBreakpointScan) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    std::vector<double> loc(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      loc[i] = static_cast<double>(static_cast<int>(rng() % 7)) - 3.0;  // many ties
      w[i] = (rng() % 2) ? 1.0 : unif(rng);
    }
    EXPECT_DOUBLE_EQ(bp::weighted_median(loc, w), breakpoint_scan(loc, w)) << "trial " << trial;
  }
}

TEST(Recover1d, Examples) {
  auto res = bp::recover_1d(vec({1, 0}), vec({3, 0.2}));
  EXPECT_TRUE(res.estimate.isApprox(vec({3, 0})));
  res = bp::recover_1d(vec({0.5, 0.25, 0.25}), vec({1, 0.5, -0.25}));
  EXPECT_NEAR((res.estimate - vec({1, 0.5, 0.5})).norm(), 0.0, 1e-12);
  const Vector u = vec({0.2, -0.3, 0.5});
  res = bp::recover_1d(u, 4.0 * u);
  EXPECT_NEAR((res.estimate - 4.0 * u).norm(), 0.0, 1e-12);
  EXPECT_THROW(bp::recover_1d(Vector::Zero(3), vec({1, 2, 3})), Error);
}

TEST(Recover1d, MatchesLpOnRandomLines) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 40);
    Vector u = testutil::gaussian_vector(rng, d);
    if (trial % 3 == 0) u(static_cast<Eigen::Index>(rng() % d)) = 0.0;
    const Vector xt = testutil::gaussian_vector(rng, d);
    const auto line = orthonormalize(std::vector<Vector>{u});
    const auto fast = bp::recover_1d(u, xt);
    const auto lp = bp::recover(line, xt);
    EXPECT_NEAR(fast.objective, lp.objective, 1e-7) << "trial " << trial;
  }
}

TEST(Recover, EncodingsAgree) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 4 + static_cast<int>(rng() % 30);
    const int k = 1 + static_cast<int>(rng() % std::min(d - 1, 6));
    const auto u = testutil::random_subspace(rng, d, k);
    const Vector x = u.basis() * testutil::gaussian_vector(rng, k);
    const Vector xt = random_sign_corruption(rng, x, 1 + static_cast<int>(rng() % 4), 1.0);
    const auto a = bp::recover(u, xt, Encoding::Dual);
    const auto b = bp::recover(u, xt, Encoding::Primal);
    EXPECT_NEAR(a.objective, b.objective, 1e-7 * (1.0 + b.objective));
    EXPECT_LE(subspace_residual(u, a.estimate), 1e-7);
    EXPECT_LE(subspace_residual(u, b.estimate), 1e-7);
  }
}

TEST(RecoverProperties, BeatsRandomProbes) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 5 + static_cast<int>(rng() % 60);
    const int k = 1 + static_cast<int>(rng() % std::min(10, d - 1));
    const auto u = testutil::random_subspace(rng, d, k);
    const Vector xt = testutil::gaussian_vector(rng, d);
    const auto res = bp::recover(u, xt);
    for (int probe = 0; probe < 100; ++probe) {
      const Vector y = u.basis() * (res.estimate.norm() + 1.0) * testutil::gaussian_vector(rng, k) / std::sqrt(k);
      EXPECT_LE(res.objective, l1_norm(y - xt) + 1e-6);
    }
  }
}

TEST(RecoverProperties, TranslationAndScaleEquivariance) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 5 + static_cast<int>(rng() % 40);
    const int k = 1 + static_cast<int>(rng() % std::min(6, d - 1));
    const auto u = testutil::random_subspace(rng, d, k);
    const Vector xt = testutil::gaussian_vector(rng, d);
    const Vector shift = u.basis() * testutil::gaussian_vector(rng, k);
    const auto base = bp::recover(u, xt);
    const auto moved = bp::recover(u, xt + shift);
    EXPECT_NEAR(moved.objective, base.objective, 1e-7 * (1.0 + base.objective));
    EXPECT_NEAR(l1_norm(base.estimate + shift - (xt + shift)), base.objective, 1e-7 * (1.0 + base.objective));
    const double c = 0.1 + 5.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto scaled = bp::recover(u, c * xt);
    EXPECT_NEAR(scaled.objective, c * base.objective, 1e-7 * c * (1.0 + base.objective));
  }
}

TEST(RecoverProperties, ErrorNeverExceedsTwoBs) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 10 + static_cast<int>(rng() % 50);
    const int k = 1 + static_cast<int>(rng() % 5);
    const int s = 1 + static_cast<int>(rng() % 6);
    const double b = 0.5 + static_cast<double>(rng() % 4);
    const auto u = testutil::random_subspace(rng, d, k);
    const Vector x = u.basis() * testutil::gaussian_vector(rng, k);
    const auto res = bp::recover(u, random_sign_corruption(rng, x, s, b), x);
    ASSERT_TRUE(res.l1_error.has_value());
    EXPECT_LE(*res.l1_error, 2.0 * b * s + 1e-6);
  }
}

TEST(RecoverProperties, AxisSubspaceZeroesTail) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 5 + static_cast<int>(rng() % 50);
    const int k = 1 + static_cast<int>(rng() % (d - 1));
    const Vector xt = testutil::gaussian_vector(rng, d);
    const auto res = bp::recover(Subspace::axis(d, k), xt);
    Vector expected = Vector::Zero(d);
    expected.head(k) = xt.head(k);
    EXPECT_LE((res.estimate - expected).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(TailBounds, WorkedExample) {
  // Oracle values from the formulas: m = floor(4/4)+1 = 2, (12*9*2/600)^2/2! = 0.0648,
  // 24*2*3/600 = 0.24, 12*2*(6/600)^(1+0) = 0.24.
  const auto b = bp::theorem1_bounds(2, 3, 600, 4.0);
  EXPECT_NEAR(b.bound_factorial, 0.0648, 1e-12);
  EXPECT_NEAR(b.bound_uniform, 0.24, 1e-12);
  ASSERT_TRUE(b.bound_geometric.has_value());
  EXPECT_NEAR(*b.bound_geometric, 0.24, 1e-12);
  EXPECT_NEAR(b.minimum, 0.0648, 1e-12);
}

TEST(TailBounds, UniformBoundAtSmallT) {
  const auto b = bp::theorem1_bounds(1, 1, 500, 1e-9);
  EXPECT_NEAR(b.bound_uniform, 24.0 / 500, 1e-15);
}

TEST(TailBounds, GeometricRequiresSmallS) {
  EXPECT_FALSE(bp::theorem1_bounds(1, 10, 100, 1.0).bound_geometric.has_value());
  EXPECT_TRUE(bp::theorem1_bounds(1, 7, 100, 1.0).bound_geometric.has_value());
  EXPECT_DOUBLE_EQ(bp::theorem1_bounds(3, 10, 20, 1.0).minimum, 1.0);
  EXPECT_THROW(bp::theorem1_bounds(0, 1, 10, 1.0), Error);
}

TEST(ExpectedError, WorkedExample) {
  // t0 = max(ceil(24e/1024) = 1, log2(1024) = 10) = 10; 10*96/1024 + 4/1024.
  EXPECT_EQ(bp::expected_error_threshold(1, 1, 1024), 10);
  EXPECT_NEAR(bp::expected_error_bound(1, 1, 1024, 1.0), 10.0 * 96 / 1024 + 4.0 / 1024, 1e-15);
  EXPECT_DOUBLE_EQ(bp::expected_error_bound(1, 1, 1024, 2.0), 2.0 * bp::expected_error_bound(1, 1, 1024, 1.0));
  EXPECT_THROW(bp::expected_error_bound(0, 1, 1024, 1.0), Error);
}

TEST(ExpectedError, ThresholdIsSmallestAdmissible) {
  for (int d : {10, 100, 1000}) {
    for (int k : {1, 2, 5}) {
      for (int s : {1, 3, 7}) {
        if (s > d || k > d) continue;
        const int t0 = bp::expected_error_threshold(k, s, d);
        auto ok = [&](int t) {
          return 12.0 * std::exp(1.0) * k * s * s / (static_cast<double>(d) * t) <= 0.5 && std::pow(2.0, -t) <= 1.0 / d;
        };
        EXPECT_TRUE(ok(t0));
        if (t0 > 1) EXPECT_FALSE(ok(t0 - 1));
      }
    }
  }
}
