#include "rsmooth/errors.hpp"
#include "rsmooth/manifolds.hpp"
#include "rsmooth/smoothing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace rsmooth;

namespace {

double naive_lse(const std::vector<double>& x, double mu) {
  double s = 0.0;
  for (double v : x) s += std::exp(v / mu);
  return mu * std::log(s);
}

}  // namespace

TEST(Lse, FrozenValues) {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  EXPECT_NEAR(lse_value(x, 0.5), 3.07146, 1e-5);
  EXPECT_NEAR(lse_value(x, 0.5), naive_lse(x, 0.5), 1e-13);
  const std::vector<double> y = {0.0, 0.0, -1.0, -1.0};
  EXPECT_NEAR(lse_value(y, 1.0), 1.00641, 5e-6);
  const std::vector<double> z = {0.0, 0.0};
  EXPECT_NEAR(lse_value(z, 1.0), std::log(2.0), 1e-15);
}

TEST(Lse, ShiftPreventsOverflow) {
  const std::vector<double> x = {1000.0, 1000.0};
  EXPECT_NEAR(lse_value(x, 1.0), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> y = {-1000.0, -1001.0};
  EXPECT_NEAR(lse_value(y, 1.0), -1000.0 + std::log1p(std::exp(-1.0)), 1e-12);
}

TEST(Lse, SoftmaxFrozenValue) {
  const std::vector<double> x = {10.0, 0.0};
  const Eigen::VectorXd s = lse_gradient(x, 1.0);
  EXPECT_NEAR(s(0), 1.0 / (1.0 + std::exp(-10.0)), 1e-15);
  EXPECT_NEAR(s.sum(), 1.0, 1e-15);
}

TEST(Lse, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(7);
    for (double& v : x) v = nd(rng);
    const double mu = 0.05 + 0.3 * trial / 50.0;
    Eigen::VectorXd g;
    const double f = lse_value_and_gradient(x, mu, g);
    EXPECT_NEAR(f, lse_value(x, mu), 1e-14);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6;
      std::vector<double> xp = x;
      std::vector<double> xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (lse_value(xp, mu) - lse_value(xm, mu)) / (2.0 * h);
      EXPECT_NEAR(g(static_cast<Eigen::Index>(i)), fd, 1e-6);
    }
  }
}

TEST(Lse, EnvelopeWithStrictLowerBound) {
  Rng rng(4);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::uniform_real_distribution<double> ud(-6.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> x(1 + trial % 9);
    for (double& v : x) v = nd(rng);
    const double mu = std::pow(10.0, ud(rng));
    const double mx = *std::max_element(x.begin(), x.end());
    const double f = lse_value(x, mu);
    EXPECT_GE(f, mx);
    if (x.size() > 1) EXPECT_TRUE(std::isfinite(lse_log_excess(x, mu)));
    EXPECT_LE(f, mx + mu * std::log(static_cast<double>(x.size())) + 1e-12 * (1.0 + std::abs(mx)));
  }
}

TEST(Lse, LogExcessMatchesDirectDifference) {
  const std::vector<double> x = {0.3, -0.2, 0.1};
  const double mu = 0.7;
  EXPECT_NEAR(lse_log_excess(x, mu), std::log(lse_value(x, mu) - 0.3), 1e-12);
}

TEST(Lse, RejectsBadMu) {
  const std::vector<double> x = {1.0};
  EXPECT_THROW(lse_value(x, 0.0), DomainError);
  EXPECT_THROW(lse_value(x, -1.0), DomainError);
  EXPECT_THROW(lse_value(x, std::nan("")), DomainError);
  EXPECT_THROW(require_valid_mu(1e-13), DomainError);
  EXPECT_NO_THROW(require_valid_mu(kMinMu));
}

TEST(AbsSmoothers, ValuesAtZero) {
  const double mu = 0.3;
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f1, 0.0, mu), mu / 4.0);
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f2, 0.0, mu), mu);
  EXPECT_NEAR(abs_smoother_value(SmoothingKind::abs_f3, 0.0, mu), 2.0 * mu * std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f4, 0.0, mu), 0.0);
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f5, 0.0, mu), 0.0);
}

TEST(AbsSmoothers, PiecewiseQuadraticBranches) {
  const double mu = 1.0;
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f1, 0.5, mu), 0.5);  // both branches agree
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f1, 0.25, mu), 0.0625 + 0.25);
  EXPECT_DOUBLE_EQ(abs_smoother_value(SmoothingKind::abs_f1, -2.0, mu), 2.0);
  EXPECT_DOUBLE_EQ(abs_smoother_deriv(SmoothingKind::abs_f1, 0.25, mu), 0.5);
  EXPECT_DOUBLE_EQ(abs_smoother_deriv(SmoothingKind::abs_f1, -3.0, mu), -1.0);
}

TEST(AbsSmoothers, DerivativesMatchFiniteDifferences) {
  for (SmoothingKind kind : kAbsKinds) {
    for (double mu : {0.01, 0.3, 2.0}) {
      for (int i = -40; i <= 40; ++i) {
        const double t = 0.0731 * i;
        const double h = 1e-7 * std::max(1.0, mu);
        const double fd =
            (abs_smoother_value(kind, t + h, mu) - abs_smoother_value(kind, t - h, mu)) / (2 * h);
        EXPECT_NEAR(abs_smoother_deriv(kind, t, mu), fd, 1e-5)
            << to_string(kind) << " t=" << t << " mu=" << mu;
      }
    }
  }
}

TEST(AbsSmoothers, KappaOmegaEnvelopes) {
  Rng rng(5);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::uniform_real_distribution<double> ud(-5.0, 1.0);
  for (SmoothingKind kind : kAbsKinds) {
    const SmoothingFamily fam = smoothing_family(kind);
    int violations = 0;
    for (int s = 0; s < 10000; ++s) {
      const double t = nd(rng);
      const double mu = std::pow(10.0, ud(rng));
      const double gap = std::abs(abs_smoother_value(kind, t, mu) - std::abs(t));
      if (gap > fam.envelope(mu) * (1.0 + 1e-12) + 1e-15) ++violations;
    }
    EXPECT_EQ(violations, 0) << to_string(kind);
  }
}

TEST(AbsSmoothers, FamilyConstants) {
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::abs_f1).kappa, 0.25);
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::abs_f2).kappa, 1.0);
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::abs_f3).kappa, 2.0 * std::log(2.0));
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::abs_f4).kappa, 1.0);
  EXPECT_NEAR(smoothing_family(SmoothingKind::abs_f5).kappa, 2.0 / (std::exp(1.0) * std::sqrt(M_PI)),
              1e-15);
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::lse, 8).kappa, std::log(8.0));
  EXPECT_DOUBLE_EQ(smoothing_family(SmoothingKind::abs_f2).omega(0.3), 0.3);
}

TEST(Ap1, HoldsForFirstThreeAndLse) {
  for (SmoothingKind kind : {SmoothingKind::lse, SmoothingKind::abs_f1, SmoothingKind::abs_f2,
                             SmoothingKind::abs_f3}) {
    const auto grid = standard_ap1_grid(kind);
    const Ap1Report r = ap1_check(kind, grid);
    EXPECT_TRUE(r.holds) << to_string(kind);
    EXPECT_EQ(r.increases, 0u) << to_string(kind);
    EXPECT_GT(r.active_pairs, 0u);
    EXPECT_TRUE(smoothing_family(kind).satisfies_ap1);
  }
}

TEST(Ap1, FailsForLastTwo) {
  for (SmoothingKind kind : {SmoothingKind::abs_f4, SmoothingKind::abs_f5}) {
    const Ap1Report r = ap1_check(kind, standard_ap1_grid(kind));
    EXPECT_FALSE(r.holds) << to_string(kind);
    EXPECT_GT(r.increases, 0u) << to_string(kind);
    EXPECT_FALSE(smoothing_family(kind).satisfies_ap1);
  }
}

TEST(Ap1, F1OutsideQuadraticZoneIsInactive) {
  // |t| > mu_hi / 2: f~1 = |t| at both mu, nothing to decrease.
  const std::vector<Ap1Sample> s = {{{3.0}, 1.0, 0.5}};
  const Ap1Report r = ap1_check(SmoothingKind::abs_f1, s);
  EXPECT_EQ(r.active_pairs, 0u);
  EXPECT_TRUE(r.holds);
}

TEST(Separable, ValueAndGradient) {
  const std::vector<double> z = {0.5, -2.0, 0.0, 1e-3};
  for (SmoothingKind kind : kAbsKinds) {
    const double mu = 0.2;
    double sum = 0.0;
    for (double v : z) sum += abs_smoother_value(kind, v, mu);
    EXPECT_NEAR(separable_l1_value(z, mu, kind), sum, 1e-15);
    EXPECT_NEAR(smoothed_value(kind, z, mu), sum, 1e-15);
    const Eigen::VectorXd g = separable_l1_gradient(z, mu, kind);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_DOUBLE_EQ(g(static_cast<Eigen::Index>(i)), abs_smoother_deriv(kind, z[i], mu));
    }
  }
  EXPECT_DOUBLE_EQ(nonsmooth_value(SmoothingKind::abs_f2, z), 0.5 + 2.0 + 0.0 + 1e-3);
  EXPECT_DOUBLE_EQ(nonsmooth_value(SmoothingKind::lse, z), 0.5);
  EXPECT_THROW(separable_l1_value(z, 0.1, SmoothingKind::lse), DomainError);
}

TEST(Separable, PseudoHuberLimit) {
  // f~2 summed tends to the l1 norm as mu -> 0.
  const std::vector<double> z = {0.3, -0.4, 0.0};
  EXPECT_NEAR(separable_l1_value(z, 1e-9, SmoothingKind::abs_f2), 0.7, 1e-8);
}

TEST(Kinds, ParseAndPrint) {
  EXPECT_EQ(parse_smoothing_kind("lse"), SmoothingKind::lse);
  EXPECT_EQ(parse_smoothing_kind("f3"), SmoothingKind::abs_f3);
  EXPECT_EQ(parse_smoothing_kind("abs_f5"), SmoothingKind::abs_f5);
  EXPECT_EQ(to_string(SmoothingKind::abs_f1), "f1");
  EXPECT_THROW(parse_smoothing_kind("f6"), ParseError);
}

TEST(Softmax, ConcentratesOnArgmaxSet) {
  // At mu = 1e-3 * gap the mass outside the argmax set is at most
  // (n - k) exp(-1000), far below 1e-10.
  Rng rng(6);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    std::vector<double> x(2 + c % 7);
    for (double& v : x) v = nd(rng);
    x[c % x.size()] = *std::max_element(x.begin(), x.end());  // sometimes ties
    const double mx = *std::max_element(x.begin(), x.end());
    double second = -INFINITY;
    for (double v : x) {
      if (v < mx) second = std::max(second, v);
    }
    if (!std::isfinite(second)) continue;
    const double mu = 1e-3 * (mx - second);
    if (mu < kMinMu) continue;
    const Eigen::VectorXd s = lse_gradient(x, mu);
    double mass = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == mx) mass += s(static_cast<Eigen::Index>(i));
    }
    EXPECT_GE(mass, 1.0 - 1e-10);
  }
}
