#include "hyperdpp/bounds.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace hyperdpp;

namespace {

const double ln_silver = std::log(1.0 + std::sqrt(2.0));

GrowthProfile disk_profile() { return fit_growth_profile(PoincareDisk{}, ln_silver, 1.0, 10.0, 0.1); }
GrowthProfile tree_profile() { return fit_growth_profile(RegularTree(3), 0.0, 0.0, 10.0, 1.0); }

RadialKernel<RegularTree> fixture_kernel() { return tree_spectral_kernel(RegularTree(3), -1.0, 1.0); }

RadialKernel<RegularTree> identity_kernel() {
  const double edge = 2.0 * std::sqrt(2.0);
  return tree_spectral_kernel(RegularTree(3), -edge, edge, 16);
}

}  // namespace

// --- constant C --------------------------------------------------------------

TEST(ConstantC, BergmanMatchesMidpointFixture) {
  const auto p = disk_profile();
  for (const auto& row : oracle::read_table(HYPERDPP_FIXTURES "/bergman_C.txt")) {
    const auto bc = constant_C(bergman_kernel(row[0]), p);
    EXPECT_FALSE(bc.degenerate);
    EXPECT_GT(bc.C, 0.0);
    EXPECT_NEAR(bc.C / row[1], 1.0, 1e-6) << "alpha " << row[0];
  }
}

TEST(ConstantC, BergmanAgainstFreshMidpointRule) {
  // k(r) = koo sech^2(r/2) for alpha = 0
  const auto p = disk_profile();
  const double r0 = p.r0();
  auto integrand = [&](double r) {
    const double k = 1.0 / (4.0 * std::numbers::pi) * std::pow(std::cosh(0.5 * r), -2.0);
    return k * k * 2.0 * std::numbers::pi * std::sinh(r) * (1.0 - p.decay(r));
  };
  const double integral = oracle::midpoint(integrand, r0, r0 + 80.0, 2000000);
  const double koo = 1.0 / (4.0 * std::numbers::pi);
  EXPECT_NEAR(constant_C(bergman_kernel(0.0), p).C / (integral / (p.c * p.c * koo)), 1.0, 1e-6);
}

TEST(ConstantC, TreeFixtureAgainstDirectSum) {
  const auto K = fixture_kernel();
  const auto p = tree_profile();
  double sum = 0.0;
  for (int r = static_cast<int>(std::ceil(p.r0())); r <= 2048; ++r) {
    sum += K.coefficient(r) * K.coefficient(r) * (1.0 - p.decay(r));
  }
  const auto bc = constant_C(K, p);
  EXPECT_GT(bc.C, 0.0);
  EXPECT_NEAR(bc.C / (sum / (p.c * p.c * K.koo())), 1.0, 1e-3);
  EXPECT_NEAR(bc.r0, 4.0 * std::log(3.03) / std::log(2.0), 1e-12);
}

TEST(ConstantC, IntegrandVanishesAtR0) {
  for (const auto& p : {disk_profile(), tree_profile()}) EXPECT_NEAR(p.decay(p.r0()), 1.0, 1e-14);
}

TEST(ConstantC, IdentityKernelIsDegenerate) {
  const auto bc = constant_C(identity_kernel(), tree_profile());
  EXPECT_EQ(bc.C, 0.0);
  EXPECT_TRUE(bc.degenerate);
  EXPECT_FALSE(bc.warning.empty());
}

TEST(ConstantC, BoundedByOne) {
  for (double alpha : {0.0, 1.0, 2.0, 5.0}) {
    const double C = constant_C(bergman_kernel(alpha), disk_profile()).C;
    EXPECT_GT(C, 0.0);
    EXPECT_LE(C, 1.0);
  }
  const double C = constant_C(fixture_kernel(), tree_profile()).C;
  EXPECT_GT(C, 0.0);
  EXPECT_LE(C, 1.0);
}

TEST(ConstantC, MonotoneInCAndDelta) {
  const auto K = bergman_kernel(0.0);
  const auto base = disk_profile();
  double previous = std::numeric_limits<double>::infinity();
  for (double f : {1.0, 1.2, 1.5}) {
    GrowthProfile p = base;
    p.c *= f;
    const double C = constant_C(K, p).C;
    EXPECT_LE(C, previous);
    previous = C;
  }
  previous = std::numeric_limits<double>::infinity();
  for (double d : {ln_silver, ln_silver + 0.25, ln_silver + 0.5}) {
    GrowthProfile p = base;
    p.delta = d;
    const double C = constant_C(K, p).C;
    EXPECT_LE(C, previous);
    previous = C;
  }
  const auto T = fixture_kernel();
  previous = std::numeric_limits<double>::infinity();
  for (double d : {0.0, 0.5, 1.0}) {
    GrowthProfile p = tree_profile();
    p.delta = d;
    const double C = constant_C(T, p).C;
    EXPECT_LE(C, previous);
    previous = C;
  }
}

TEST(ConstantC, InvalidProfiles) {
  GrowthProfile p = disk_profile();
  p.c = 0.5;
  EXPECT_THROW(constant_C(bergman_kernel(0.0), p), DomainError);
  p = disk_profile();
  p.alpha = 0.0;
  EXPECT_THROW(constant_C(bergman_kernel(0.0), p), DomainError);
  p = disk_profile();
  p.delta = -1.0;
  EXPECT_THROW(constant_C(bergman_kernel(0.0), p), DomainError);
}

TEST(ConstantC, SearchKeepsTheFittedC) {
  const auto p = disk_profile();
  const auto s = search_c(bergman_kernel(0.0), p);
  EXPECT_EQ(s.best_c, p.c);
  EXPECT_EQ(s.points.size(), 5u);
  EXPECT_THROW(search_c(bergman_kernel(0.0), p, {0.9}), DomainError);
}

// --- lunule lower bound ------------------------------------------------------

TEST(LunuleBound, VanishesAtR0) {
  const auto p = disk_profile();
  EXPECT_NEAR(lunule_lower_bound(PoincareDisk{}, p, p.r0(), 3.0), 0.0, 1e-12);
}

// --- sweep -------------------------------------------------------------------

TEST(Sweep, BergmanPassesOnOneToEight) {
  const auto report = theorem1_sweep(bergman_kernel(0.0), disk_profile(), {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_TRUE(report.all_pass());
  EXPECT_GT(report.constant.C, 0.0);
  for (const auto& v : report.sweep) {
    EXPECT_TRUE(v.error.empty()) << v.error;
    EXPECT_GE(v.ratio, report.constant.C);
    EXPECT_GE(v.ratio, 0.0);
    EXPECT_LE(v.ratio, 1.0);
    EXPECT_EQ(v.pass, v.ratio >= v.C);
    EXPECT_NEAR(v.variance_lunule, v.variance_direct, 5e-3 * v.variance_direct);
    EXPECT_FALSE(v.variance_empirical.has_value());
  }
}

TEST(Sweep, TreeFixturePassesOnTwoToEight) {
  const auto report = theorem1_sweep(fixture_kernel(), tree_profile(), {2, 3, 4, 5, 6, 7, 8});
  EXPECT_TRUE(report.all_pass());
  for (const auto& v : report.sweep) {
    EXPECT_GE(v.ratio, report.constant.C);
    EXPECT_LE(v.ratio, 1.0);
    EXPECT_NEAR(v.variance_lunule, v.variance_direct, 1e-10);
  }
}

TEST(Sweep, DegenerateConstantFailsTheSweep) {
  const auto report = theorem1_sweep(identity_kernel(), tree_profile(), {2, 3});
  EXPECT_FALSE(report.all_pass());
  for (const auto& v : report.sweep) EXPECT_FALSE(v.pass);
}

TEST(Sweep, RadiusOutsideTheProfile) {
  EXPECT_THROW(theorem1_sweep(bergman_kernel(0.0), disk_profile(), {0.5}), DomainError);
  EXPECT_THROW(theorem1_sweep(bergman_kernel(0.0), disk_profile(), {11.0}), DomainError);
}

TEST(Sweep, ErrorsAreRecordedPerRadius) {
  std::vector<ProfileEntry> table = {{0, 0.1}, {1, 0.1 * std::exp(-0.25)}};
  const auto K = custom_radial_kernel(PoincareDisk{}, 0.1, table, Interpolation::linear, TailRule::exponential);
  EXPECT_THROW(theorem1_sweep(K, disk_profile(), {1, 2}), NonintegrableTailError);
  const auto v = variance_report(K, 2.0, {}, NumericPolicy{});
  EXPECT_FALSE(v.error.empty());
}

TEST(Sweep, EmpiricalColumnOnlyWhereRequested) {
  EmpiricalOptions e;
  e.n_samples = 500;
  e.seed = 4;
  e.radii = {2.0};
  const auto report = theorem1_sweep(bergman_kernel(0.0), disk_profile(), {1, 2}, e);
  EXPECT_FALSE(report.sweep[0].variance_empirical.has_value());
  ASSERT_TRUE(report.sweep[1].variance_empirical.has_value());
  EXPECT_GT(*report.sweep[1].stderr_empirical, 0.0);
}
