#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dklab/errors.hpp"
#include "dklab/measure.hpp"
#include "dklab/rng.hpp"
#include "oracles.hpp"

using namespace dklab;

TEST(Pairing, EdgeCases) {
  const auto g = make_gaussian_bump(1, {0.0}, 1.0, 1.0);
  EXPECT_EQ(pair(AtomicMeasure(1.0, 1), g), 0.0);
  EXPECT_EQ(pair(AtomicMeasure(1.0, 1, {0.0}), g), 1.0);
  EXPECT_EQ(pair(AtomicMeasure(2.0, 1, {0.0, 0.0}), g), 1.0);
}

TEST(Pairing, LinearInTheTestFunction) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  std::vector<double> coords(2 * 40);
  for (double& c : coords) c = n(gen);
  const AtomicMeasure mu(3.0, 2, coords);
  const auto f = make_gaussian_bump(2, {0.1, 0.2}, 0.7, 1.0);
  const auto g = make_compact_bump(2, {-0.3, 0.0}, 1.2, 2.0);
  const double a = 1.7, b = -0.4;
  EXPECT_NEAR(pair(mu, a * f + b * g), a * pair(mu, f) + b * pair(mu, g), 1e-14);
}

TEST(Counting, DirectCountAndHalfOpenBoundary) {
  const auto a = Rectangle::cube(1, 0.0, 2.0);
  EXPECT_EQ(count_in_rect(AtomicMeasure(1.0, 1), a), 0.0);
  EXPECT_EQ(count_in_rect(AtomicMeasure(1.0, 1, {0.5, 1.5, 2.5}), a), 2.0);
  EXPECT_EQ(count_atoms(AtomicMeasure(1.0, 1, {0.0}), a), 1u);
  EXPECT_EQ(count_atoms(AtomicMeasure(1.0, 1, {2.0}), a), 0u);
}

TEST(Counting, AlphaTimesCountIsAnExactInteger) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.0, 3.0);
  for (double alpha : {0.3, 1.0, 7.0, 1.0 / 3.0}) {
    std::vector<double> coords(200);
    for (double& c : coords) c = u(gen);
    const AtomicMeasure mu(alpha, 1, coords);
    const double scaled = alpha * count_in_rect(mu, Rectangle::cube(1, 0.0, 1.5));
    EXPECT_EQ(scaled, static_cast<double>(count_atoms(mu, Rectangle::cube(1, 0.0, 1.5))));
  }
}

TEST(Measure, RejectsBadInput) {
  EXPECT_THROW(AtomicMeasure(0.0, 1), ParameterError);
  EXPECT_THROW(AtomicMeasure(1.0, 2, {0.0, 1.0, 2.0}), ParameterError);
  EXPECT_THROW(AtomicMeasure(1.0, 1, {std::nan("")}), ParameterError);
}

TEST(Poisson, EmptyBoxHasNoAtoms) {
  ReplicaRng rng(1, 0);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_poisson(3.0, Rectangle::cube(2, 1.0, 1.0), 0.0, rng).empty());
}

TEST(Poisson, MeanCount) {
  const auto box = Rectangle::cube(1, 0.0, 1.0);
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    ReplicaRng rng(17, r);
    counts.push_back(static_cast<double>(sample_poisson(2.0, box, 0.0, rng).size()));
  }
  EXPECT_LE(std::abs(oracle::mean(counts) - 2.0), 3.0 * std::sqrt(2.0 / 1e5));
}

TEST(Poisson, CampbellFormula) {
  // E <Xi, phi> = lambda * integral of phi.
  const auto phi = make_compact_bump(1, {0.5}, 0.4, 1.0);
  const double lambda = 3.0;
  const double integral = oracle::trapezoid([&](double x) { return phi.value(Point{x}); }, 0.1, 0.9, 1e-5);
  std::vector<double> v;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    ReplicaRng rng(23, r);
    v.push_back(pair(sample_poisson(lambda, Rectangle::cube(1, 0.0, 1.0), 0.0, rng), phi));
  }
  const double se = std::sqrt(oracle::variance(v) / static_cast<double>(v.size()));
  EXPECT_LE(std::abs(oracle::mean(v) - lambda * integral), 3.0 * se);
}

TEST(Poisson, DisjointSubBoxesUncorrelated) {
  const auto box = Rectangle::cube(2, 0.0, 2.0);
  const Rectangle left({0.0, 0.0}, {1.0, 2.0}), right({1.0, 0.0}, {2.0, 2.0});
  std::vector<double> a, b;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    ReplicaRng rng(29, r);
    const auto xi = sample_poisson(1.5, box, 0.0, rng);
    a.push_back(count_in_rect(xi, left));
    b.push_back(count_in_rect(xi, right));
  }
  EXPECT_LT(std::abs(oracle::correlation(a, b)), 0.05);
}

TEST(Poisson, PaddedBoxScalesTheMean) {
  const auto box = Rectangle::cube(1, 0.0, 1.0);
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    ReplicaRng rng(31, r);
    counts.push_back(static_cast<double>(sample_poisson(2.0, box, 0.5, rng).size()));
  }
  EXPECT_LE(std::abs(oracle::mean(counts) - 4.0), 3.0 * std::sqrt(4.0 / 2e4));
}

TEST(SqrtLog, SmallFamilies) {
  EXPECT_EQ(make_sqrt_log_family(1, 1).atoms.coordinates()[0], 0.0);
  const auto f = make_sqrt_log_family(3, 1);
  ASSERT_EQ(f.atoms.size(), 3u);
  EXPECT_NEAR(f.atoms.atom(1)[0], 0.83255, 5e-6);
  EXPECT_NEAR(f.atoms.atom(2)[0], 1.04815, 5e-6);
  const auto f2 = make_sqrt_log_family(5, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(f2.atoms.atom(i)[0], std::sqrt(std::log(static_cast<double>(i + 1))));
    EXPECT_EQ(f2.atoms.atom(i)[1], 0.0);
    EXPECT_EQ(f2.atoms.atom(i)[2], 0.0);
  }
}

TEST(SqrtLog, NonDecreasing) {
  const auto f = make_sqrt_log_family(100000, 1);
  for (std::size_t i = 1; i < f.atoms.size(); ++i) EXPECT_LE(f.atoms.atom(i - 1)[0], f.atoms.atom(i)[0]);
}

TEST(AtomsCsv, RoundTripIsExact) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> n;
  std::vector<double> coords(30);
  for (double& c : coords) c = n(gen);
  const AtomicMeasure mu(0.1, 3, coords);
  std::stringstream s;
  write_atoms_csv(s, mu);
  EXPECT_EQ(read_atoms_csv(s), mu);
}
