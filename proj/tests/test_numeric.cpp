#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "treelstm/numeric.hpp"

using namespace treelstm;

TEST(Affine, ZeroWeightsGiveZeroVector) {
  const Matrix w(3, 3);
  const Vector y = affine(w, Vector{0.7, -2.0});
  EXPECT_EQ(y, Vector(3));
}

TEST(Affine, IdentityWithZeroBiasIsIdentity) {
  Matrix w(3, 4);
  for (std::size_t i = 0; i < 3; ++i) w(i, i) = 1.0;
  const Vector x{0.5, -1.25, 3.0};
  EXPECT_EQ(affine(w, x), x);
}

TEST(Affine, BiasColumnIsAddedLast) {
  const Matrix w(1, 3, std::vector<Real>{1, 2, 3});
  EXPECT_EQ(affine(w, Vector{1, 1}), Vector{6});
}

TEST(Affine, ShapeMismatchNamesBothShapes) {
  const Matrix w(2, 4);
  try {
    affine(w, Vector{1, 2});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("size 2"), std::string::npos) << msg;
  }
}

TEST(Affine, LinearInWeightsAndAffineInInput) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gaussian_init(rng, 4, 4, 1.0);
    const Matrix b = gaussian_init(rng, 4, 4, 1.0);
    const Vector x = gaussian_vector(rng, 3, 1.0);
    const Vector y = gaussian_vector(rng, 3, 1.0);
    Matrix sum(4, 4);
    for (std::size_t k = 0; k < sum.size(); ++k) sum.flat()[k] = a.flat()[k] + b.flat()[k];
    const Vector lhs = affine(sum, x);
    const Vector ra = affine(a, x);
    const Vector rb = affine(b, x);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(lhs[i], ra[i] + rb[i], 1e-12);

    // affine in x: A[(x+y)/2;1] = (A[x;1] + A[y;1]) / 2
    Vector mid(3);
    for (std::size_t k = 0; k < 3; ++k) mid[k] = 0.5 * (x[k] + y[k]);
    const Vector am = affine(a, mid);
    const Vector ay = affine(a, y);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(am[i], 0.5 * (ra[i] + ay[i]), 1e-12);
  }
}

TEST(Activations, ClosedFormValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(tanh(Vector{0.0})[0], 0.0);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
}

TEST(Activations, SaturateWithoutOverflow) {
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-745.0)));
  const Vector t = tanh(Vector{-50.0, 50.0});
  EXPECT_EQ(t[0], -1.0);
  EXPECT_EQ(t[1], 1.0);
  for (Real v = -30.0; v <= 30.0; v += 0.37) {
    EXPECT_GE(sigmoid(v), 0.0);
    EXPECT_LE(sigmoid(v), 1.0);
  }
}

TEST(MaskedSoftmax, SymmetricPair) {
  const std::vector<Real> logits{0.0, 9.0, 0.0, -4.0};
  const std::vector<std::size_t> active{0, 2};
  EXPECT_EQ(masked_softmax(logits, active), (Vector{0.5, 0.0, 0.5, 0.0}));
}

TEST(MaskedSoftmax, Singleton) {
  const std::vector<Real> logits{1.0, 2.0, 3.0, 4.0};
  const std::vector<std::size_t> active{3};
  EXPECT_EQ(masked_softmax(logits, active), (Vector{0.0, 0.0, 0.0, 1.0}));
}

TEST(MaskedSoftmax, ClosedFormTwoThirds) {
  const std::vector<Real> logits{std::log(2.0), 0.0};
  const std::vector<std::size_t> active{0, 1};
  const Vector a = masked_softmax(logits, active);
  EXPECT_NEAR(a[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(a[1], 1.0 / 3.0, 1e-15);
}

TEST(MaskedSoftmax, EmptyActiveSetThrows) {
  const std::vector<Real> logits{1.0};
  EXPECT_THROW(masked_softmax(logits, std::span<const std::size_t>{}), InvalidArgument);
}

TEST(MaskedSoftmax, SumsToOneAndShiftInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Real> logits(8);
    for (auto& v : logits) v = 40.0 * (rng.uniform() - 0.5);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < 8; ++i) {
      if (rng.uniform() < 0.5 || i == 0) active.push_back(i);
    }
    const Vector a = masked_softmax(logits, active);
    Real sum = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const bool on = std::find(active.begin(), active.end(), i) != active.end();
      if (!on) {
        EXPECT_EQ(a[i], 0.0);
      }
      sum += a[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);

    std::vector<Real> shifted = logits;
    for (const std::size_t i : active) shifted[i] += 123.25;
    const Vector b = masked_softmax(shifted, active);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(GaussianInit, VarianceIsOneHundredth) {
  Rng rng(2024);
  const Matrix m = gaussian_init(rng, 1000, 1000, 1e-2);
  Real sum = 0.0;
  Real sq = 0.0;
  for (const Real v : m.flat()) {
    sum += v;
    sq += v * v;
  }
  const Real n = static_cast<Real>(m.size());
  const Real mean = sum / n;
  const Real sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd, 0.1, 0.002);
  EXPECT_NEAR(mean, 0.0, 1e-3);
}

TEST(GaussianInit, DeterministicPerSeed) {
  Rng a(77);
  Rng b(77);
  EXPECT_EQ(gaussian_init(a, 5, 6, 1e-2), gaussian_init(b, 5, 6, 1e-2));
}

TEST(GaussianInit, DifferentSeedsDiffer) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng a(s);
    Rng b(s + 1000);
    EXPECT_NE(gaussian_init(a, 3, 3, 1e-2), gaussian_init(b, 3, 3, 1e-2)) << "seed " << s;
  }
}

TEST(GaussianInit, RejectsNonPositiveVariance) {
  Rng rng(1);
  EXPECT_THROW(gaussian_init(rng, 2, 2, 0.0), InvalidArgument);
  EXPECT_THROW(gaussian_init(rng, 2, 2, -1.0), InvalidArgument);
}

TEST(Rng, KnownStreamIsStable) {
  // First outputs for seed 0, pinned so a platform or refactor change is caught.
  Rng rng(0);
  const std::uint64_t first = rng.next_u64();
  Rng again(0);
  EXPECT_EQ(first, again.next_u64());
  EXPECT_EQ(first, 0x99ec5f36cb75f2b4ULL);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[rng.below(7)];
  for (const int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(rng.below(0), InvalidArgument);
}

TEST(FiniteDiff, QuadraticIsExact) {
  const auto f = [](std::span<const Real> t) { return t[0] * t[0]; };
  const std::vector<Real> theta{3.0};
  EXPECT_NEAR(finite_diff_grad(f, theta, 1e-5)[0], 6.0, 1e-8);
}

TEST(FiniteDiff, ConstantGivesZero) {
  const auto f = [](std::span<const Real>) { return 4.5; };
  const std::vector<Real> theta{1.0, -2.0, 3.0};
  for (const Real g : finite_diff_grad(f, theta, 1e-4)) EXPECT_EQ(g, 0.0);
}

TEST(FiniteDiff, SineMatchesCosine) {
  const auto f = [](std::span<const Real> t) { return std::sin(t[0]); };
  const std::vector<Real> theta{1.0};
  EXPECT_NEAR(finite_diff_grad(f, theta, 1e-5)[0], std::cos(1.0), 1e-9);
}
