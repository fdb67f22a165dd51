#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "brute_force.hpp"
#include "tqff/error.hpp"
#include "tqff/feature_map.hpp"
#include "tqff/oracle.hpp"
#include "tqff/spectral.hpp"

namespace {

using namespace tqff;
using ld = long double;

KernelSpec se(std::vector<double> theta, double scale = 1.0, double gamma = 1.15) {
  KernelSpec s;
  s.hyper.lengthscales = std::move(theta);
  s.hyper.scale = scale;
  s.gamma = gamma;
  return s;
}

// erfc(1.15 pi / sqrt 2) at 50 digits.
constexpr double kTailD1 = 0.00030287146923984691499;

TEST(KernelEval, ClosedForms) {
  const double zero[] = {0.0};
  EXPECT_DOUBLE_EQ(kernel_eval(se({0.3}, 2.5), zero), 2.5);
  const double one[] = {1.0};
  EXPECT_NEAR(kernel_eval(se({1.0}), one), 0.6065306597126334, 1e-15);
  const double t2[] = {0.1, 0.1};
  EXPECT_NEAR(kernel_eval(se({0.5, 0.25}, 2.0), t2), 2.0 * std::exp(-0.1), 1e-15);
}

TEST(KernelEval, Symmetric) {
  const auto s = se({0.3, 0.7}, 1.3);
  const auto X = ref::random_inputs(50, 2, -2, 2, 11);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double a[] = {X(i, 0), X(i, 1)};
    const double b[] = {-X(i, 0), -X(i, 1)};
    EXPECT_EQ(kernel_eval(s, a), kernel_eval(s, b));
  }
}

TEST(Hyperparams, ValidationRejectsNonPositive) {
  auto s = se({0.1});
  s.hyper.noise = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s = se({});
  EXPECT_THROW(s.validate(), Error);
  s = se({0.1}, 1.0, -1.0);
  EXPECT_THROW(s.validate(), Error);
}

TEST(StandardizedDensity, NormalAtZeroAndNormalized) {
  const auto sd = standardized_density(se({0.2, 0.4}, 3.0));
  EXPECT_NEAR(static_cast<double>(sd.density->pdf(0.0L)), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-16);
  EXPECT_DOUBLE_EQ(sd.g, 3.0);
  ASSERT_EQ(sd.d_diag.size(), 2u);
  EXPECT_DOUBLE_EQ(sd.d_diag[0], 5.0);
  EXPECT_DOUBLE_EQ(sd.d_diag[1], 2.5);
  const auto f = [&](ld w) { return sd.density->pdf(w); };
  EXPECT_NEAR(static_cast<double>(integrate_adaptive(f, -40.0L, 40.0L, 1e-15L).value), 1.0, 1e-13);
}

TEST(StandardizedDensity, FamilyRoundTrip) {
  EXPECT_EQ(kernel_family_from_string("se"), KernelFamily::SE);
  try {
    kernel_family_from_string("matern52");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedFamily);
  }
}

TEST(StandardizedDensity, BochnerConsistency) {
  const double theta = 0.05, nu = 1.0;
  const auto s = se({theta}, nu);
  const auto sd = standardized_density(s);
  for (double tau : {0.0, 0.1, 0.5, 0.013, 0.07}) {
    const double f = tau / theta;
    const auto integrand = [&](ld w) { return sd.density->pdf(w) * std::cos(w * f); };
    const double v = nu * 2.0 * static_cast<double>(integrate_adaptive(integrand, 0.0L, 40.0L, 1e-16L, {f}).value);
    const double t[] = {tau};
    EXPECT_NEAR(v, kernel_eval(s, t), 1e-12) << tau;
  }
}

TEST(TruncationTail, FrozenValueAndScaling) {
  EXPECT_NEAR(truncation_tail(se({0.1})), kTailD1, 1e-18);
  EXPECT_NEAR(truncation_tail(se({0.1, 0.2})), 4.0 * kTailD1, 1e-17);
  EXPECT_NEAR(truncation_tail(se({0.1}, 2.0)), 2.0 * kTailD1, 1e-18);
  EXPECT_LT(truncation_tail(se({0.1}, 1.0, 20.0)), 1e-300);
}

TEST(TruncationTail, StrictlyDecreasingInGamma) {
  double prev = INFINITY;
  for (double g : {0.5, 0.8, 1.0, 1.15, 1.5}) {
    const double t = truncation_tail(se({0.1}, 1.0, g));
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(Theorem3Bound, OrderM) {
  EXPECT_EQ(bound_order(se({0.05})), 23);
  EXPECT_EQ(bound_order(se({0.2})), 6);
  EXPECT_EQ(bound_order(se({0.2, 0.01})), 115);
  EXPECT_DOUBLE_EQ(bound_constant(se({0.1, 0.1, 0.1}, 2.0)), 2.0 * 3 * 4);
}

TEST(Theorem3Bound, FrozenValues) {
  // Log-space evaluation at 50 digits.
  EXPECT_NEAR(theorem3_bound(se({0.05}), 40), 0.00030287147141718549519, 1e-15);
  EXPECT_NEAR(theorem3_bound(se({0.2}), 10), 0.0044995032364213077081, 1e-14);
  EXPECT_NEAR(theorem3_bound(se({0.2}), 20), 0.00030287190052878999387, 1e-15);
}

TEST(Theorem3Bound, MonotoneBeyondM) {
  for (double theta : {0.2, 0.05, 0.01}) {
    const auto s = se({theta});
    const int M = bound_order(s);
    double prev = INFINITY;
    for (int L = M; L <= M + 150; ++L) {
      const double b = theorem3_bound(s, L);
      EXPECT_LE(b, prev) << "theta=" << theta << " L=" << L;
      prev = b;
    }
  }
}

TEST(Theorem3Bound, OverflowIsInfinity) {
  const double b = theorem3_bound(se({0.1, 0.1}, 1e308), 40);
  EXPECT_TRUE(std::isinf(b));
}

TEST(Theorem3Bound, DominatesEmpiricalErrorL40) {
  const auto s = se({0.05});
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 40);
  EXPECT_LE(ref::max_kernel_error(map), theorem3_bound(s, 40));
}

TEST(Theorem3Bound, DominatesEmpiricalErrorGrid) {
  for (int d : {1, 2}) {
    for (double theta : {0.5, 0.2}) {
      for (int L : {4, 8, 12}) {
        if (d == 2 && L > 8) continue;
        const auto s = se(std::vector<double>(d, theta));
        const auto map = build_feature_map(FeatureMethod::TQFF, s, L);
        EXPECT_LE(ref::max_kernel_error(map), theorem3_bound(s, L)) << d << " " << theta << " " << L;
      }
    }
  }
}

}  // namespace
