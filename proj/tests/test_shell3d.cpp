#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shellvi/errors.hpp"
#include "shellvi/shell3d.hpp"

namespace shellvi {
namespace {

using testing::builtin_bounds;
using testing::kPi;

Chart chart_named(const std::string& name) {
  return builtin_chart(name, builtin_bounds(name), EdgeSet{Edge::Bottom});
}

TEST(ShellFrame, PlateIsOrthonormal) {
  const SurfaceFrame f = eval_frame(chart_named("plate"), Vec2(0.2, 0.8));
  const ShellFrame s = eval_shell_frame(f, 0.3, 0.7);
  EXPECT_TRUE(s.metric.isApprox(Mat3::Identity()));
  EXPECT_DOUBLE_EQ(s.det_metric, 1.0);
  for (int p = 0; p < 3; ++p) EXPECT_EQ(s.christoffel[static_cast<std::size_t>(p)].norm(), 0.0);
}

TEST(ShellFrame, MidSurfaceCopiesSurfaceFrame) {
  const SurfaceFrame f = eval_frame(chart_named("hyperboloid"), Vec2(1.1, 0.4));
  const ShellFrame s = eval_shell_frame(f, 0.2, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.cov[i], f.cov[i]);
    EXPECT_EQ(s.con[i], f.con[i]);
  }
}

TEST(ShellFrame, CylinderTangentScaling) {
  const Chart c = chart_named("cylinder");
  const Vec2 y(kPi / 2, 0.0);
  const SurfaceFrame f = eval_frame(c, y);
  const testing::FiniteDifferenceFrame o = testing::finite_difference_frame(c, y);
  const double b11 = (o.metric.inverse() * o.curv)(0, 0);
  const ShellFrame s = eval_shell_frame(f, 0.1, 1.0);
  EXPECT_LT((s.cov[0] - f.cov[0] * (1.0 - 0.1 * b11)).norm(), 1e-7);
}

TEST(Elasticity, PlateValues) {
  const ShellFrame s = eval_shell_frame(eval_frame(chart_named("plate"), Vec2(0.5, 0.5)), 0.1, 0.3);
  EXPECT_DOUBLE_EQ(elasticity_tensor(s, Lame{2, 3})(2, 2, 2, 2), 8.0);
  const ElasticityTensor A = elasticity_tensor(s, Lame{0, 1});
  EXPECT_DOUBLE_EQ(A(0, 0, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(A(0, 1, 0, 1), 1.0);
}

TEST(Elasticity, ZeroBlocksAreExact) {
  std::mt19937_64 rng(3);
  for (const std::string& name : testing::builtin_names()) {
    const Chart c = chart_named(name);
    for (int k = 0; k < 10; ++k) {
      const ShellFrame s = eval_shell_frame(eval_frame(c, testing::random_point(c.domain(), rng)), 0.1, 0.5);
      const ElasticityTensor A = elasticity_tensor(s, Lame{1.3, 0.7});
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          for (int t = 0; t < 2; ++t) EXPECT_EQ(A(a, b, t, 2), 0.0) << name;
          EXPECT_EQ(A(a, 2, 2, 2), 0.0) << name;
        }
    }
  }
}

TEST(Elasticity, RejectsBadLame) {
  EXPECT_THROW(check_lame(Lame{-1, 1}), Error);
  EXPECT_THROW(check_lame(Lame{1, 0}), Error);
}

TEST(LimitTensor, IdentityMetricValues) {
  const SurfaceFrame f = eval_frame(chart_named("plate"), Vec2(0.5, 0.5));
  const ElasticityTensor A = limit_elasticity_tensor(f, Lame{2, 3});
  EXPECT_DOUBLE_EQ(A(0, 2, 0, 2), 3.0);
  EXPECT_DOUBLE_EQ(A(1, 2, 1, 2), 3.0);
  EXPECT_DOUBLE_EQ(A(0, 2, 1, 2), 0.0);
  const ElasticityTensor B = limit_elasticity_tensor(f, Lame{1, 1});
  EXPECT_DOUBLE_EQ(B(0, 0, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(B(1, 1, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(B(0, 1, 2, 2), 0.0);
}

TEST(LimitTensor, FirstOrderApproximation) {
  const Chart c = chart_named("sphere_cap");
  const SurfaceFrame f = eval_frame(c, Vec2(0.7, 0.9));
  const Lame l{1.0, 1.0};
  const ElasticityTensor A0 = limit_elasticity_tensor(f, l);
  std::vector<double> eps{1e-2, 1e-3, 1e-4}, res;
  for (double e : eps) res.push_back((elasticity_tensor(eval_shell_frame(f, e, 1.0), l).pairs - A0.pairs).cwiseAbs().maxCoeff());
  const double slope = fitted_slope(eps, res);
  EXPECT_NEAR(slope, 1.0, 0.05);
}

TEST(MembraneTensor, IdentityMetricValues) {
  const SurfaceFrame f = eval_frame(chart_named("plate"), Vec2(0.5, 0.5));
  EXPECT_DOUBLE_EQ(reduced_membrane_tensor(f, Lame{2, 3})(0, 0, 0, 0), 15.0);
  const MembraneTensor m = reduced_membrane_tensor(f, Lame{0, 1});
  EXPECT_DOUBLE_EQ(m(0, 0, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(m(0, 1, 0, 1), 2.0);
}

TEST(MembraneTensor, EqualsStaticCondensation) {
  std::mt19937_64 rng(11);
  for (const std::string& name : testing::builtin_names()) {
    const Chart c = chart_named(name);
    for (int k = 0; k < 10; ++k) {
      const SurfaceFrame f = eval_frame(c, testing::random_point(c.domain(), rng));
      const Lame l{0.5 + k * 0.3, 0.4 + k * 0.1};
      const Eigen::Matrix3d a = reduced_membrane_tensor(f, l).pairs;
      const Eigen::Matrix3d b = condensed_membrane_tensor(limit_elasticity_tensor(f, l)).pairs;
      EXPECT_LT((a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff(), 1e-12) << name;
    }
  }
}

TEST(ScaledStrains, PlateTransverseStretch) {
  const SurfaceFrame f = eval_frame(chart_named("plate"), Vec2(0.5, 0.5));
  for (double eps : {0.5, 0.1}) {
    const ShellFrame s = eval_shell_frame(f, eps, 0.4);
    Mat3 grad = Mat3::Zero();
    grad(2, 2) = 1.0;
    const Mat3 e = scaled_strains(s, Vec3(0, 0, 0.4), grad);
    EXPECT_DOUBLE_EQ(e(2, 2), 1.0 / eps);
    EXPECT_DOUBLE_EQ(e.cwiseAbs().sum(), 1.0 / eps);
  }
}

TEST(ScaledStrains, PlateTransverseShear) {
  const ShellFrame s = eval_shell_frame(eval_frame(chart_named("plate"), Vec2(0.5, 0.5)), 0.5, 0.2);
  Mat3 grad = Mat3::Zero();
  grad(0, 2) = 1.0;
  const Mat3 e = scaled_strains(s, Vec3(0.2, 0, 0), grad);
  EXPECT_DOUBLE_EQ(e(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(e(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(e.cwiseAbs().sum(), 2.0);
  EXPECT_EQ(scaled_strains(s, Vec3::Zero(), Mat3::Zero()).norm(), 0.0);
}

TEST(Expansions, PlateResidualsVanish) {
  for (const ExpansionResidual& r : expansion_residuals(chart_named("plate"), Lame{1, 1}, {1e-1, 1e-2, 1e-3}))
    for (double v : r.residual) EXPECT_EQ(v, 0.0) << r.quantity;
}

TEST(Expansions, CylinderSlopes) {
  for (const ExpansionResidual& r : expansion_residuals(chart_named("cylinder"), Lame{1, 1}, {1e-1, 1e-2, 1e-3})) {
    if (r.quantity == "A" || r.quantity == "g") EXPECT_NEAR(r.slope, 1.0, 0.1) << r.quantity;
    if (r.quantity == "christoffel_s_a3") EXPECT_NEAR(r.slope, 2.0, 0.2) << r.quantity;
  }
}

TEST(KLLift, ZeroFieldIsZero) {
  const SurfaceFrame f = eval_frame(chart_named("cylinder"), Vec2(1.0, 1.0));
  const KLLift k = kl_lift(f, {}, 0.1);
  EXPECT_EQ(k.deformed_normal, f.cov[2]);
  EXPECT_EQ(k.displacement(0.6).norm(), 0.0);
  EXPECT_EQ(k.covariant(-0.3).norm(), 0.0);
}

TEST(KLLift, PlateVerticalTranslation) {
  const SurfaceFrame f = eval_frame(chart_named("plate"), Vec2(0.3, 0.3));
  SurfaceDisplacementSample z;
  z.value = Vec3(0, 0, 0.7);
  const KLLift k = kl_lift(f, z, 0.2);
  for (double x3 : {-1.0, 0.0, 0.5}) {
    EXPECT_DOUBLE_EQ(k.covariant(x3)[2], 0.7);
    EXPECT_NEAR((k.displacement(x3) - Vec3(0, 0, 0.7)).norm(), 0.0, 1e-15);
  }
}

TEST(TransverseAverage, Polynomials) {
  EXPECT_NEAR(transverse_average([](double x) { return x; }), 0.0, 1e-16);
  EXPECT_NEAR(transverse_average([](double x) { return x * x; }), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(transverse_average([](double) { return 2.5; }), 2.5);
  const Vec3 v = transverse_average([](double x) { return Vec3(x, x * x, 1.0); });
  EXPECT_NEAR((v - Vec3(0, 1.0 / 3.0, 1.0)).norm(), 0.0, 1e-15);
}

TEST(TransverseAverage, LiftIdentities) {
  // mean(u_b) = u_b(0) - eps^2/3 b_bt (a_3(zeta) . a^t) and mean(u_3) = u_3(0).
  const Chart c = chart_named("cylinder");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int k = 0; k < 10; ++k) {
    const SurfaceFrame f = eval_frame(c, testing::random_point(c.domain(), rng));
    SurfaceDisplacementSample z;
    for (int i = 0; i < 3; ++i) {
      z.value[i] = u(rng);
      z.grad(i, 0) = u(rng);
      z.grad(i, 1) = u(rng);
    }
    const double eps = 0.15;
    const KLLift lift = kl_lift(f, z, eps);
    const auto comp = [&](double x3) {
      const ShellFrame s = eval_shell_frame(f, eps, x3);
      const Vec3 d = lift.displacement(x3);
      return Vec3(d.dot(s.cov[0]), d.dot(s.cov[1]), d.dot(s.cov[2]));
    };
    const Vec3 mean = transverse_average(comp);
    const Vec3 mid = comp(0.0);
    for (int b = 0; b < 2; ++b) {
      double corr = 0.0;
      for (int t = 0; t < 2; ++t) corr += f.curv(b, t) * lift.deformed_normal.dot(f.con[static_cast<std::size_t>(t)]);
      EXPECT_NEAR(mean[b], mid[b] - eps * eps * corr / 3.0, 1e-14);
    }
    EXPECT_NEAR(mean[2], mid[2], 1e-15);
    // The closed-form components agree with the projected displacement.
    for (double x3 : {-1.0, 0.3, 1.0}) EXPECT_LT((lift.covariant(x3) - comp(x3)).norm(), 1e-14);
  }
}

}  // namespace
}  // namespace shellvi
