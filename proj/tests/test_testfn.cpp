#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dklab/errors.hpp"
#include "dklab/testfn.hpp"

using namespace dklab;

namespace {

// Central differences of the value, h = 1e-4.
Point fd_gradient(const TestFunction& f, const Point& x, double h = 1e-4) {
  Point g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

double fd_laplacian(const TestFunction& f, const Point& x, double h = 1e-4) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    s += (f.value(xp) - 2.0 * f.value(x) + f.value(xm)) / (h * h);
  }
  return s;
}

std::vector<TestFunction> families(int d) {
  return {make_gaussian_bump(d, Point(d, 0.3), 0.8, 1.5), make_compact_bump(d, Point(d, -0.2), 1.3, 2.0),
          make_kappa(d)};
}

}  // namespace

TEST(GaussianBump, ClosedFormAtCentre) {
  const auto g = make_gaussian_bump(1, {0.0}, 1.0, 1.0);
  const Point x{0.0};
  EXPECT_EQ(g.value(x), 1.0);
  EXPECT_EQ(g.gradient(x)[0], 0.0);
  EXPECT_EQ(g.laplacian(x), -1.0);
}

TEST(GaussianBump, ZeroAmplitude) {
  const auto g = make_gaussian_bump(1, {0.0}, 1.0, 0.0);
  for (double x : {-3.0, 0.0, 0.4}) {
    EXPECT_EQ(g.value(Point{x}), 0.0);
    EXPECT_EQ(g.gradient(Point{x})[0], 0.0);
  }
}

TEST(GaussianBump, TwoDimensionalLaplacianMatchesDifferences) {
  const auto g = make_gaussian_bump(2, {1.0, 0.0}, 2.0, 3.0);
  EXPECT_EQ(g.value(Point{1.0, 0.0}), 3.0);
  for (const Point& x : {Point{1.0, 0.0}, Point{0.3, -1.2}, Point{2.5, 1.0}})
    EXPECT_NEAR(g.laplacian(x), fd_laplacian(g, x), 1e-6);
}

TEST(GaussianBump, RejectsBadParameters) {
  EXPECT_THROW(make_gaussian_bump(1, {0.0}, 0.0, 1.0), ParameterError);
  EXPECT_THROW(make_gaussian_bump(2, {0.0}, 1.0, 1.0), ParameterError);
  EXPECT_THROW(make_gaussian_bump(0, {}, 1.0, 1.0), ParameterError);
}

TEST(CompactBump, ValueAtCentre) {
  EXPECT_NEAR(make_compact_bump(1, {0.0}, 1.0, std::numbers::e).value(Point{0.0}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(make_compact_bump(1, {0.0}, 1.0, 1.0).value(Point{0.0}), std::exp(-1.0));
}

TEST(CompactBump, GradientMatchesDifferences) {
  const auto f = make_compact_bump(1, {0.0}, 1.0, 1.0);
  const Point x{0.5};
  EXPECT_NEAR(f.gradient(x)[0], fd_gradient(f, x)[0], 1e-5);
}

TEST(CompactBump, ExactlyZeroOutsideSupport) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto f = make_compact_bump(2, {0.5, -0.5}, 0.7, 3.0);
  for (int i = 0; i < 500; ++i) {
    Point dir{u(gen), u(gen)};
    const double n = std::hypot(dir[0], dir[1]);
    const double r = 0.7 * (1.0 + 2.0 * (u(gen) + 1.0));
    const Point x{0.5 + r * dir[0] / n, -0.5 + r * dir[1] / n};
    if (std::hypot(x[0] - 0.5, x[1] + 0.5) < 0.7) continue;
    EXPECT_EQ(f.value(x), 0.0);
    EXPECT_EQ(f.laplacian(x), 0.0);
    const Point g = f.gradient(x);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 0.0);
  }
  EXPECT_EQ(f.value(Point{1.2, -0.5}), 0.0);  // on the boundary
}

TEST(Kappa, ValueAtOriginAndExponentialBound) {
  const auto k = make_kappa(1);
  EXPECT_NEAR(k.value(Point{0.0}), 0.367879441171442, 1e-15);
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    EXPECT_GT(k.value(Point{x}), 0.0);
    EXPECT_LE(k.value(Point{x}), std::numbers::e * std::exp(-std::abs(x)));
  }
}

TEST(Kappa, StrictlyPositiveAtRandomProbes) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  const auto k = make_kappa(3);
  for (int i = 0; i < 1000; ++i) EXPECT_GT(k.value(Point{u(gen), u(gen), u(gen)}), 0.0);
}

// Analytic derivatives against central differences (h = 1e-4) at 100 random
// points in the support, relative error < 1e-5 of the local derivative scale.
class DerivativeProperty : public ::testing::TestWithParam<int> {};

TEST_P(DerivativeProperty, AnalyticMatchesFiniteDifferences) {
  const int d = GetParam();
  std::mt19937_64 gen(11 + d);
  for (const auto& f : families(d)) {
    const double radius = f.support() ? std::min(f.support()->radius, 3.0) : 3.0;
    const Point c = f.support() ? f.support()->center : Point(d, 0.0);
    std::uniform_real_distribution<double> u(-radius, radius);
    int probes = 0;
    while (probes < 100) {
      Point x(d);
      for (int k = 0; k < d; ++k) x[k] = c[k] + u(gen);
      if (f.support() && std::sqrt(squared_distance(x, c)) > 0.95 * f.support()->radius) continue;
      ++probes;
      const Point g = f.gradient(x), gfd = fd_gradient(f, x);
      for (int k = 0; k < d; ++k)
        EXPECT_LE(std::abs(g[k] - gfd[k]), 1e-5 * std::max(1.0, std::abs(g[k]))) << to_string(f.family());
      const double lap = f.laplacian(x);
      EXPECT_LE(std::abs(lap - fd_laplacian(f, x)), 1e-5 * std::max(1.0, std::abs(lap))) << to_string(f.family());
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, DerivativeProperty, ::testing::Values(1, 2, 3));

TEST(Arithmetic, LinearCombinationsAndFamilies) {
  const auto g = make_gaussian_bump(1, {0.0}, 1.0, 1.0);
  const auto c = make_compact_bump(1, {1.0}, 1.0, 1.0);
  EXPECT_EQ((2.0 * g).family(), Family::GaussianBump);
  EXPECT_EQ((2.0 * c).family(), Family::CompactBump);
  const auto s = g + c;
  EXPECT_EQ(s.family(), Family::Custom);
  ASSERT_EQ(s.terms().size(), 2u);
  const Point x{0.6};
  EXPECT_DOUBLE_EQ(s.value(x), g.value(x) + c.value(x));
  EXPECT_DOUBLE_EQ((s - g).value(x), c.value(x));
  EXPECT_EQ((3.0 * s).terms().size(), 2u);
  EXPECT_DOUBLE_EQ((3.0 * s).terms()[1].coefficient, 3.0);
  EXPECT_DOUBLE_EQ(s.feature_radius(), 1.0);
}

TEST(Seminorm, ZeroFunction) {
  EXPECT_EQ(seminorm_sup(make_constant(1, 0.0), {{2}, 3}, Rectangle::cube(1, -5.0, 5.0), 0.01), 0.0);
}

TEST(Seminorm, GaussianSupIsAmplitude) {
  EXPECT_DOUBLE_EQ(
      seminorm_sup(make_gaussian_bump(1, {0.0}, 1.0, 1.0), {{0}, 0}, Rectangle::cube(1, -10.0, 10.0), 1e-3), 1.0);
}

TEST(Seminorm, WeightedSupMatchesCalculus) {
  // max of x^2 exp(-x^2/2) is 2/e at |x| = sqrt 2.
  const double v =
      seminorm_sup(make_gaussian_bump(1, {0.0}, 1.0, 1.0), {{0}, 2}, Rectangle::cube(1, -10.0, 10.0), 1e-3);
  EXPECT_NEAR(v, 2.0 / std::numbers::e, 1e-6);
}

TEST(Seminorm, MonotoneInTheBox) {
  const auto f = make_compact_bump(2, {0.3, 0.1}, 1.0, 1.0) + make_gaussian_bump(2, {-1.0, 0.5}, 0.5, 2.0);
  double previous = 0.0;
  for (double half : {0.5, 1.0, 2.0, 4.0}) {
    const double v = seminorm_sup(f, {{1, 0}, 1}, Rectangle::cube(2, -half, half), 0.05);
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(Seminorm, ThirdDerivativesUnsupported) {
  EXPECT_THROW(seminorm_sup(make_kappa(1), {{3}, 0}, Rectangle::cube(1, -1.0, 1.0), 0.1), UnsupportedError);
}

TEST(KappaBounds, FiniteOnWideBox) {
  const auto b = kappa_bound_check(make_kappa(1), Rectangle::cube(1, -20.0, 20.0), 1e-3);
  // Dense-grid oracle, written out independently.
  double grad = 0.0, lap = 0.0;
  for (double x = -20.0; x <= 20.0; x += 1e-3) {
    const double s = std::sqrt(1.0 + x * x), k = std::exp(-s);
    const double d1 = -x / s * k;
    const double d2 = k * (x * x / (s * s) - 1.0 / s + x * x / (s * s * s));
    grad = std::max(grad, d1 * d1 / k);
    lap = std::max(lap, std::abs(d2) / k);
  }
  EXPECT_NEAR(b.gradient_ratio, grad, 1e-6);
  EXPECT_NEAR(b.laplacian_ratio, lap, 1e-6);
  EXPECT_LT(b.gradient_ratio, 10.0);
  EXPECT_LT(b.laplacian_ratio, 10.0);
}

TEST(KappaBounds, Homogeneity) {
  const auto box = Rectangle::cube(1, -20.0, 20.0);
  const auto a = kappa_bound_check(make_kappa(1), box, 1e-2);
  const auto b = kappa_bound_check(2.0 * make_kappa(1), box, 1e-2);
  EXPECT_NEAR(b.gradient_ratio, 2.0 * a.gradient_ratio, 1e-12);
  EXPECT_NEAR(b.laplacian_ratio, a.laplacian_ratio, 1e-12);
}

TEST(KappaBounds, NonPositiveFunctionRejected) {
  EXPECT_THROW(kappa_bound_check(make_compact_bump(1, {0.0}, 1.0, 1.0), Rectangle::cube(1, -2.0, 2.0), 0.1),
               InvariantError);
}
