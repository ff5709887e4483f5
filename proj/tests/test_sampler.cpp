#include "hyperdpp/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <string>

using namespace hyperdpp;

namespace {

RadialKernel<RegularTree> identity_kernel() {
  const double edge = 2.0 * std::sqrt(2.0);
  return tree_spectral_kernel(RegularTree(3), -edge, edge, 16);
}

RadialKernel<RegularTree> fixture_kernel() { return tree_spectral_kernel(RegularTree(3), -1.0, 1.0); }

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) {
    if (const char* old = std::getenv("HYPERDPP_THREADS")) saved_ = old;
    setenv("HYPERDPP_THREADS", value, 1);
  }
  ~ThreadsEnv() {
    if (saved_.empty()) unsetenv("HYPERDPP_THREADS");
    else setenv("HYPERDPP_THREADS", saved_.c_str(), 1);
  }

 private:
  std::string saved_;
};

}  // namespace

// --- discretize --------------------------------------------------------------

TEST(Discretize, TreeIdentityIsTheIdentityMatrix) {
  const auto op = discretize(identity_kernel(), 2.0);
  ASSERT_EQ(op.size(), 10u);
  EXPECT_EQ(op.trace(), 10.0);
  for (double e : op.eigenvalues()) EXPECT_EQ(e, 1.0);
  EXPECT_EQ(op.hermitian_residual(), 0.0);
}

TEST(Discretize, BergmanTraceIsTheExpectation) {
  for (double alpha : {0.0, 1.0}) {
    const auto K = bergman_kernel(alpha);
    const auto op = discretize(K, 2.0);
    EXPECT_NEAR(op.trace() / expectation(K, 2.0), 1.0, 1e-10);
    EXPECT_LE(op.hermitian_residual(), 1e-12);
    for (double e : op.eigenvalues()) {
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, 1.0);
    }
  }
}

TEST(Discretize, TreeTraceIsExact) {
  const auto K = fixture_kernel();
  for (int R = 0; R <= 4; ++R) EXPECT_NEAR(discretize(K, R).trace(), expectation(K, R), 1e-12);
}

TEST(Discretize, ModesAreOrthonormalEigenvectors) {
  const auto op = build_operator(bergman_kernel(0.0), 1.0);
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      m(i, j) = std::sqrt(op.weights()[a] * op.weights()[b]) *
                bergman_kernel(0.0)(op.nodes()[a], op.nodes()[b]);
    }
  }
  for (std::size_t i : {0ul, 7ul, op.size() / 2, op.size() - 1}) {
    const Eigen::VectorXcd v = op.mode(i);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LE((m * v - op.eigenvalues()[i] * v).norm(), 1e-10);
  }
}

TEST(Discretize, CoarseGridIsRejected) {
  const auto K = bergman_kernel(0.0);
  try {
    discretize(K, 3.0, QuadratureGrid{2, 4});
    FAIL() << "expected a coarse-grid error";
  } catch (const DiscretizationTooCoarseError& e) {
    EXPECT_NE(std::string(e.what()).find("radial_nodes=4"), std::string::npos) << e.what();
  }
}

TEST(Discretize, Preconditions) {
  EXPECT_THROW(discretize(fixture_kernel(), 2.5), DomainError);
  EXPECT_THROW(discretize(bergman_kernel(0.0), 0.0), DomainError);
  EXPECT_THROW(discretize(bergman_kernel(0.0), 2.0, QuadratureGrid{-1, 8}), DomainError);
  EXPECT_THROW(discretize(scaled_kernel(fixture_kernel(), 1.5), 3.0), DiscretizationTooCoarseError);
}

// --- sample ------------------------------------------------------------------

TEST(Sample, IdentityGivesTheWholeBall) {
  const auto op = discretize(identity_kernel(), 2.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = sample(op, seed);
    ASSERT_EQ(c.size(), 10u);
    std::set<TreeVertex> distinct(c.points.begin(), c.points.end());
    EXPECT_EQ(distinct.size(), 10u);
  }
}

TEST(Sample, VanishingOperatorGivesNothing) {
  const auto op = discretize(scaled_kernel(identity_kernel(), 1e-300), 3.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(sample(op, seed).size(), 0u);
}

TEST(Sample, PointsAreDistinctNodesInsideTheBall) {
  const auto op = discretize(bergman_kernel(0.0), 2.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = sample(op, seed);
    std::set<std::pair<double, double>> seen;
    for (const auto& p : c.points) {
      EXPECT_LE(dist(PoincareDisk{}, DiskPoint{}, p), 2.0 + 1e-12);
      EXPECT_TRUE(seen.emplace(p.z().real(), p.z().imag()).second);
    }
    EXPECT_EQ(c.region_radius, 2.0);
  }
}

TEST(Sample, SizeIsTheNumberOfSelectedModes) {
  // replay the Bernoulli selection from the same stream
  const auto op = discretize(fixture_kernel(), 3.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t selected = 0;
    for (double e : op.eigenvalues()) selected += unit(rng) < e ? 1 : 0;
    EXPECT_EQ(sample(op, seed).size(), selected);
  }
}

TEST(Sample, Deterministic) {
  const auto op = discretize(bergman_kernel(0.0), 2.0);
  const auto a = sample(op, 99);
  const auto b = sample(op, 99);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);
}

TEST(Sample, SmallBallInclusionProbabilities) {
  // on a 4-vertex ball the chance that a vertex is drawn is K(x, x)
  const auto K = fixture_kernel();
  const auto op = discretize(K, 1.0);
  std::map<TreeVertex, int> hits;
  const int n = 20000;
  for (int s = 0; s < n; ++s) {
    for (const auto& v : sample(op, split_seed(1, static_cast<std::uint64_t>(s))).points) ++hits[v];
  }
  const double p = K.koo();
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (const auto& v : op.nodes()) EXPECT_NEAR(hits[v] / static_cast<double>(n), p, 4.0 * se) << v.to_string();
}

// --- empirical statistics ----------------------------------------------------

TEST(Empirical, JackknifeOnKnownData) {
  std::vector<double> counts;
  for (int i = 0; i < 10; ++i) counts.push_back(i);
  const auto s = count_statistics(counts);
  EXPECT_DOUBLE_EQ(s.mean, 4.5);
  EXPECT_NEAR(s.variance, 55.0 / 6.0, 1e-12);
  // the jackknife standard error of the mean is the classical s / sqrt(n)
  EXPECT_NEAR(s.stderr_mean, std::sqrt(55.0 / 6.0 / 10.0), 1e-12);
  EXPECT_GT(s.stderr_variance, 0.0);
}

TEST(Empirical, IdentityHasNoVariance) {
  const auto s = empirical_stats(identity_kernel(), 2.0, 200, 3);
  EXPECT_EQ(s.mean, 10.0);
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_EQ(s.stderr_mean, 0.0);
}

TEST(Empirical, TooFewSamples) {
  EXPECT_THROW(empirical_stats(bergman_kernel(0.0), 2.0, 50, 1), DomainError);
}

TEST(Empirical, BergmanMeanAndVariance) {
  const auto K = bergman_kernel(0.0);
  const auto s = empirical_stats(K, 2.0, 10000, 2024);
  EXPECT_NEAR(s.mean, std::pow(std::sinh(1.0), 2), 3.0 * s.stderr_mean);
  EXPECT_NEAR(s.variance, variance_lunule(K, 2.0), 4.0 * s.stderr_variance);
}

TEST(Empirical, TreeVarianceMatchesSpectrum) {
  const auto op = discretize(fixture_kernel(), 3.0);
  double expected = 0.0;
  for (double e : op.eigenvalues()) expected += e * (1.0 - e);
  const auto s = empirical_stats(op, 5000, 8);
  EXPECT_NEAR(s.mean, op.trace(), 4.0 * s.stderr_mean);
  EXPECT_NEAR(s.variance, expected, 4.0 * s.stderr_variance);
}

TEST(Empirical, IndependentOfThreadCount) {
  const auto op = discretize(bergman_kernel(0.0), 1.5);
  EmpiricalStats one, many;
  {
    ThreadsEnv env("1");
    one = empirical_stats(op, 300, 17);
  }
  {
    ThreadsEnv env("5");
    many = empirical_stats(op, 300, 17);
  }
  EXPECT_EQ(one.mean, many.mean);
  EXPECT_EQ(one.variance, many.variance);
  EXPECT_EQ(one.stderr_variance, many.stderr_variance);
}
