#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lyap/families.hpp"
#include "lyap/stability.hpp"
#include "oracle.hpp"

using namespace lyap;

TEST(ExactNorms, PsiMatchesSvd) {
  for (double r = -200.0; r <= 200.0; r += 0.37) {
    const double ref = oracle::op_norm(oracle::to_eigen(transfer(r)));
    EXPECT_NEAR(exact_transfer_norm(r) / ref, 1.0, 1e-12) << r;
  }
}

TEST(ExactNorms, PhiMatchesSvd) {
  for (double x = -60.0; x <= 60.0; x += 1.3)
    for (double y = -60.0; y <= 60.0; y += 1.7) {
      const double ref = oracle::op_norm(oracle::to_eigen(transfer(y) * transfer(x)));
      EXPECT_NEAR(exact_pair_norm(x, y) / ref, 1.0, 1e-12) << x << " " << y;
    }
  EXPECT_NEAR(phi(2.0, 3.0), 2.0 + 1.0 + 36.0, 1e-15);
}

TEST(OffSpectrum, ConstantSequence) {
  std::vector<double> r(10000, 32.0);
  const auto o = off_spectrum_sandwich(r);
  EXPECT_LE(o.measured_gap, std::log(32.0 * 32.0) / 1e4 + 1.2e3 / 1024.0);
  EXPECT_NEAR(*o.bound.term("ap_error"), 1.2e3 / 1024.0, 1e-15);
  EXPECT_NEAR(o.reference, std::log(32.0), 1e-14);
  // The exponent is log of the top eigenvalue of transfer(32) up to O(1/n).
  EXPECT_NEAR(o.exponent, std::log(0.5 * (32.0 + std::sqrt(1020.0))), 1e-3);
}

TEST(OffSpectrum, RandomSignsAndSizes) {
  Rng rng(2, 0);
  std::vector<double> r(3000);
  for (auto& x : r) x = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(32.0, 500.0);
  const auto o = off_spectrum_sandwich(r);
  EXPECT_LE(o.measured_gap, o.bound.value);
}

TEST(OffSpectrum, SmallR0Rejected) {
  std::vector<double> r(10, 20.0);
  try {
    off_spectrum_sandwich(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainError);
  }
}

TEST(RankOne, SandwichOnWorstFamily) {
  const auto f = rankone_worst_family(1e4, 2.0, 2.0, 30);
  const auto g = rankone_sandwich(f);
  EXPECT_LE(g.measured_gap, g.certified.value);
}

TEST(RankOne, ValidationRejectsBadProjection) {
  auto f = rankone_worst_family(1e4, 2.0, 2.0, 4);
  f.projection = RealSquareMatrix::identity(2);
  EXPECT_THROW(validate(f), Error);
}

TEST(RankOne, MinR0IsMonotoneThreshold) {
  const double r0 = find_min_r0(2.0, 2.0);
  const auto passes = [](double r) {
    const auto seq = rankone_sequence(rankone_worst_family(r, 2.0, 2.0, 16));
    return check_ap(std::span<const RealSquareMatrix>(seq), AP_V1).passed();
  };
  EXPECT_TRUE(passes(r0));
  EXPECT_FALSE(passes(r0 - 1.0));
  EXPECT_TRUE(passes(2.0 * r0));
}

TEST(Blocking, NuFormula) {
  const DiagonalClass cls{0.5, 0.1, 1.0, 2.0};
  EXPECT_EQ(blocking_plan(0.4, cls).nu, 14u);
  // ceil(log(4000/0.2)/log 2) = ceil(14.29) = 15.
  EXPECT_EQ(blocking_plan(0.2, cls).nu, 15u);
  EXPECT_THROW(blocking_plan(1.5, cls), Error);
  EXPECT_THROW(blocking_plan(0.4, DiagonalClass{1.0, 0.1, 1.0, 2.0}), Error);
}

TEST(Blocking, Delta0IsMinimumOfTerms) {
  const auto plan = blocking_plan(0.4, DiagonalClass{0.5, 0.1, 1.0, 2.0});
  double m = INFINITY;
  for (const auto& t : plan.delta0_terms) m = std::min(m, t.value);
  EXPECT_EQ(plan.delta0, m);
  EXPECT_NEAR(plan.c2, 14.0 * std::pow(4.0, 14.0), 1e-3);
}

TEST(Stability, ExactDiagonalHasZeroGap) {
  const auto plan = blocking_plan(0.4, DiagonalClass{0.5, 0.1, 1.0, 2.0});
  Rng rng(3, 0);
  const auto fam = random_diagonal_family(rng, plan.cls, 3, 500, 0.0);
  const auto r = stability2_gap(fam.d, fam.m, plan);
  EXPECT_EQ(r.measured_gap, 0.0);
  EXPECT_GE(r.min_log_block_gap, std::log(4000.0 / 0.4));
}

TEST(Stability, PerturbedFamilyWithinCertified) {
  const auto plan = blocking_plan(0.2, DiagonalClass{0.5, 0.1, 1.0, 2.0});
  Rng rng(4, 0);
  const auto fam = random_diagonal_family(rng, plan.cls, 2, 2000, 0.5 * plan.delta0);
  const auto r = stability2_gap(fam.d, fam.m, plan);
  EXPECT_LE(r.measured_gap, r.certified.value);
  EXPECT_LE(r.max_block_perturbation_ratio, 1.0);
}

TEST(Stability, LargePerturbationRejected) {
  const auto plan = blocking_plan(0.4, DiagonalClass{0.5, 0.1, 1.0, 2.0});
  Rng rng(5, 0);
  const auto fam = random_diagonal_family(rng, plan.cls, 2, 100, 1e-3);
  try {
    stability2_gap(fam.d, fam.m, plan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PerturbationTooLarge);
  }
}

TEST(Stability, OutOfClassRejected) {
  const auto plan = blocking_plan(0.4, DiagonalClass{0.5, 0.1, 1.0, 2.0});
  std::vector<RealSquareMatrix> d(20, RealSquareMatrix::diagonal({1.5, 1.0}));
  EXPECT_THROW(stability2_gap(d, d, plan), Error);
}

TEST(Jacobi, TransferShape) {
  EXPECT_EQ(jacobi_transfer(0.0, 2.0), (RealSquareMatrix{{-0.5, 0.0}, {0.0, -2.0}}));
  const auto d = jacobi_transfer(0.3, 1.7) - jacobi_transfer(0.0, 1.7);
  EXPECT_NEAR(d(0, 0), 0.09 / 1.7, 1e-15);
  EXPECT_NEAR(d(0, 1), -0.3 * 1.7, 1e-15);
  EXPECT_NEAR(d(1, 0), 0.3 / 1.7, 1e-15);
}

TEST(Jacobi, PerturbationConstant) {
  // ||M(E) - M(0)|| <= C |E| for |E| <= 1.
  const std::vector<double> th{0.3, 0.7, 0.9};
  const auto plan = jacobi_plan(th, 0.3);
  for (double t : th)
    for (double e : {-1.0, -0.4, 0.01, 0.5, 1.0})
      EXPECT_LE(op_norm(jacobi_transfer(e, t) - jacobi_transfer(0.0, t)), plan.c * std::abs(e) + 1e-15);
}

TEST(Jacobi, ZeroEnergyHasZeroGap) {
  Rng rng(6, 0);
  std::vector<double> th(500);
  for (auto& t : th) t = rng.uniform(1.5, 2.5);
  const auto r = jacobi_stability(0.0, th, 0.3);
  EXPECT_EQ(r.stability.measured_gap, 0.0);
  EXPECT_EQ(r.plan.regime, JacobiRegime::Above);
}

TEST(Jacobi, BelowOneRegime) {
  Rng rng(7, 0);
  std::vector<double> th(500);
  for (auto& t : th) t = rng.uniform(0.4, 0.6);
  const auto r = jacobi_stability(0.25 * jacobi_plan(th, 0.3).e0, th, 0.3);
  EXPECT_EQ(r.plan.regime, JacobiRegime::Below);
  EXPECT_LE(r.stability.measured_gap, r.stability.certified.value);
}

TEST(Jacobi, Guards) {
  std::vector<double> mixed{0.5, 1.5};
  try {
    jacobi_plan(mixed, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MixedRegime);
  }
  std::vector<double> th(100, 2.0);
  try {
    jacobi_stability(0.1, th, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EnergyTooLarge);
  }
}
