#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ispcav/estimate.hpp"
#include "ispcav/measure.hpp"
#include "ispcav/rng.hpp"
#include "ispcav/sampling.hpp"
#include "support/oracles.hpp"

using namespace ispcav;

namespace {

EmpiricalMeasure random_measure(RngStream rng, std::size_t size) {
  std::vector<double> v(size);
  for (auto& x : v) x = rng.uniform() < 0.2 ? std::round(rng.uniform() * 4) / 4 : rng.uniform();
  return EmpiricalMeasure(std::move(v));
}

}  // namespace

TEST(RngStream, DeterministicPerPath) {
  RngStream a = RngStream(42).substream(3, 9), b = RngStream(42).substream(3).substream(9);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
  EXPECT_EQ(a.path(), (std::vector<std::uint64_t>{3, 9}));
}

TEST(RngStream, DistinctLabelsGiveDistinctKeys) {
  const RngStream root(1);
  std::set<std::uint64_t> keys;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) keys.insert(root.substream(a, b).key());
  }
  EXPECT_EQ(keys.size(), 2500u);
  EXPECT_NE(root.substream(1, 2).key(), root.substream(2, 1).key());
  EXPECT_NE(RngStream(1).key(), RngStream(2).key());
}

TEST(RngStream, UniformRanges) {
  RngStream rng(3);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform(), v = rng.uniform_open();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(rng.uniform_index(7), 7u);
  }
}

TEST(Estimate, Summary) {
  const std::vector<double> c(10, 0.3);
  const auto e = summarize(c);
  EXPECT_EQ(e.mean, 0.3);
  EXPECT_EQ(e.std_error, 0.0);
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std_error, std::sqrt(5.0 / 3.0 / 4.0));
  EXPECT_EQ(s.num_samples, 4u);
  EXPECT_THROW(summarize(std::vector<double>{}), ParameterError);
}

TEST(EmpiricalMeasure, SortsAndValidates) {
  const EmpiricalMeasure m({0.7, 0.1, 0.4});
  EXPECT_EQ(m[0], 0.1);
  EXPECT_EQ(m[2], 0.7);
  EXPECT_THROW(EmpiricalMeasure({}), ParameterError);
  EXPECT_THROW(EmpiricalMeasure({0.5, 1.5}), ParameterError);
  EXPECT_THROW(EmpiricalMeasure({-0.1}), ParameterError);
  EXPECT_THROW(EmpiricalMeasure({std::nan("")}), ParameterError);
  EXPECT_EQ(EmpiricalMeasure::uniform_grid(4)[0], 0.125);
}

TEST(EmpiricalMeasure, TextRoundTrip) {
  const auto m = random_measure(RngStream(5), 100);
  std::stringstream ss;
  write_measure(ss, m);
  EXPECT_EQ(read_measure(ss), m);
  std::stringstream bad("0.5\nabc\n");
  EXPECT_THROW(read_measure(bad), ParameterError);
  EXPECT_THROW(load_measure("/nonexistent/m.txt"), IoError);
}

TEST(Wasserstein1, Examples) {
  const auto m = random_measure(RngStream(1), 50);
  EXPECT_EQ(wasserstein1(m, m), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure::point_mass(0.2), EmpiricalMeasure::point_mass(0.9)), 0.7);
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure({0.0, 1.0}), EmpiricalMeasure({0.5, 0.5})), 0.5);
  // Unequal sizes: a point mass against a two-point measure.
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure({0.0, 1.0}), EmpiricalMeasure::point_mass(0.25)), 0.5);
  EXPECT_DOUBLE_EQ(wasserstein1(EmpiricalMeasure({0.0, 1.0}), EmpiricalMeasure({0.0, 0.0, 1.0})), 1.0 / 6.0);
}

TEST(Wasserstein1, MetricAxioms) {
  RngStream rng(17);
  for (std::uint64_t k = 0; k < 200; ++k) {
    auto s = rng.substream(k);
    const auto a = random_measure(s.substream(0), 1 + s.uniform_index(40));
    const auto b = random_measure(s.substream(1), 1 + s.uniform_index(40));
    const auto c = random_measure(s.substream(2), 1 + s.uniform_index(40));
    const double ab = wasserstein1(a, b), ba = wasserstein1(b, a);
    EXPECT_EQ(ab, ba);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_LE(wasserstein1(a, c), ab + wasserstein1(b, c) + 1e-12);
    EXPECT_EQ(wasserstein1(a, a), 0.0);
    if (a != b && a.size() == b.size()) {
      EXPECT_GT(ab, 0.0);
    }
  }
}

TEST(Wasserstein1, CdfPathAgreesWithSortedPath) {
  RngStream rng(23);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto a = random_measure(rng.substream(k, 0), 64), b = random_measure(rng.substream(k, 1), 64);
    EXPECT_NEAR(detail::wasserstein1_cdf(a.values(), b.values()), detail::wasserstein1_sorted(a.values(), b.values()),
                1e-12);
  }
}

TEST(Wasserstein1, ZeroOnlyForEqualMultisets) {
  const EmpiricalMeasure a({0.2, 0.4}), b({0.2, 0.2, 0.4, 0.4});
  EXPECT_EQ(wasserstein1(a, b), 0.0);
  EXPECT_GT(wasserstein1(a, EmpiricalMeasure({0.2, 0.4, 0.4})), 0.0);
}

TEST(SamplePoisson, ZeroRate) {
  RngStream rng(1);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_poisson(0.0, rng), 0u);
  EXPECT_THROW(sample_poisson(-1.0, rng), ParameterError);
}

TEST(SamplePoisson, MomentsAtThree) {
  RngStream rng(2);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = static_cast<double>(sample_poisson(3.0, rng));
  const auto e = summarize(xs);
  EXPECT_NEAR(e.mean, 3.0, 3.0 * std::sqrt(3.0 / 1e5));
  double var = 0.0;
  for (double x : xs) var += (x - e.mean) * (x - e.mean);
  var /= static_cast<double>(xs.size() - 1);
  // Var of the sample variance for Poisson: (mu4 - sigma^4 (n-3)/(n-1)) / n with mu4 = 3 lambda^2 + lambda.
  EXPECT_NEAR(var, 3.0, 3.0 * std::sqrt((27.0 + 3.0 - 9.0) / 1e5));
}

TEST(SamplePoisson, RejectionBranchMoments) {
  RngStream rng(3);
  for (double lambda : {12.0, 50.0, 400.0}) {
    std::vector<double> xs(50000);
    for (auto& x : xs) x = static_cast<double>(sample_poisson(lambda, rng));
    const auto e = summarize(xs);
    EXPECT_NEAR(e.mean, lambda, 4.0 * std::sqrt(lambda / 5e4));
  }
}

TEST(SamplePoisson, DeterministicPerStream) {
  RngStream a(99), b(99);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample_poisson(25.0, a), sample_poisson(25.0, b));
}

TEST(TvPoissonBinomial, Examples) {
  const auto zero = tv_poisson_binomial(20, 0.0);
  EXPECT_EQ(zero.exact_tv, 0.0);
  EXPECT_EQ(zero.bound, 0.0);
  // n = 1, p = 0.1: Bernoulli vs Poisson(0.1).
  const double p = 0.1, q0 = std::exp(-p), q1 = p * std::exp(-p);
  const double hand = 0.5 * (std::abs(0.9 - q0) + std::abs(0.1 - q1) + (1.0 - q0 - q1));
  EXPECT_NEAR(tv_poisson_binomial(1, 0.1).exact_tv, hand, 1e-15);
  const auto mid = tv_poisson_binomial(100, 0.03);
  EXPECT_LE(mid.exact_tv, 0.09);
  EXPECT_NEAR(mid.bound, 0.09, 1e-15);
  EXPECT_THROW(tv_poisson_binomial(5, 1.5), ParameterError);
}

TEST(TvPoissonBinomial, BoundHoldsOnGrid) {
  for (std::uint64_t n : {10, 100, 1000}) {
    for (double c : {1.0, 3.0, 10.0}) {
      const auto tv = tv_poisson_binomial(n, c / static_cast<double>(n));
      EXPECT_GT(tv.exact_tv, 0.0);
      EXPECT_LE(tv.exact_tv, tv.bound);
    }
  }
}

TEST(BinomialMoment, TrivialCase) {
  RngStream rng(1);
  const auto m = binomial_exp_moment_check(1, 1.0, 0.0, 100, rng);
  EXPECT_EQ(m.mc.mean, 1.0);
  EXPECT_EQ(m.bound, 5.0);
}

TEST(BinomialMoment, ThirdMomentAtZeroBeta) {
  RngStream rng(4);
  const auto m = binomial_exp_moment_check(20, 0.1, 0.0, 200000, rng);
  const double alpha = 2.0;
  EXPECT_NEAR(m.mc.mean, oracle::binomial_third_moment(20, 0.1), 4.0 * m.mc.std_error);
  EXPECT_DOUBLE_EQ(m.bound, alpha * alpha * alpha + 3 * alpha * alpha + alpha);
  EXPECT_LE(m.mc.mean, m.bound);
}

TEST(BinomialMoment, BoundWithMargin) {
  RngStream rng(5);
  const auto m = binomial_exp_moment_check(50, 0.04, 0.5, 100000, rng);
  EXPECT_LE(m.mc.mean + 3.0 * m.mc.std_error, m.bound);
  EXPECT_THROW(binomial_exp_moment_check(5, 0.1, -1.0, 10, rng), ParameterError);
}
