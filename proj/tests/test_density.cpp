#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shellvi/density.hpp"
#include "shellvi/errors.hpp"
#include "shellvi/experiments.hpp"

namespace shellvi {
namespace {

const Rect kUnit{0, 1, 0, 1};

Chart lifted_plate(double height) {
  ChartOptions o;
  o.offset = Vec3(0, 0, height);
  return builtin_chart("plate", kUnit, EdgeSet{Edge::Bottom}, o);
}

DiscreteSurfaceField plate_field(const Mesh2D& mesh, const Vec3& interior) {
  std::vector<Vec3> v(static_cast<std::size_t>(mesh.num_nodes()), Vec3::Zero());
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (!mesh.clamped[static_cast<std::size_t>(n)]) v[static_cast<std::size_t>(n)] = interior;
  return make_field(mesh, lifted_plate(1.0), v);
}

TEST(Truncate, ScalesOnlyLargeVectors) {
  const Mesh2D mesh = build_mesh2d(kUnit, 2, 2, EdgeSet{Edge::Bottom});
  const DiscreteSurfaceField f = plate_field(mesh, Vec3(3, 4, 0));
  const int n = mesh.node(1, 1);
  EXPECT_EQ(truncate(f, 5.0).values[static_cast<std::size_t>(n)], Vec3(3, 4, 0));
  EXPECT_LT((truncate(f, 1.0).values[static_cast<std::size_t>(n)] - Vec3(0.6, 0.8, 0)).norm(), 1e-15);
}

TEST(Truncate, SupBoundOnCylinder) {
  const Chart c = builtin_chart("cylinder", testing::builtin_bounds("cylinder"), EdgeSet{Edge::Left});
  const Mesh2D mesh = build_mesh2d(c.domain(), 6, 6, EdgeSet{Edge::Left});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<Vec3> v(static_cast<std::size_t>(mesh.num_nodes()), Vec3::Zero());
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (!mesh.clamped[static_cast<std::size_t>(n)]) v[static_cast<std::size_t>(n)] = Vec3(u(rng), u(rng), u(rng));
  const DiscreteSurfaceField f = make_field(mesh, c, v);
  for (double k : {0.5, 2.0, 4.0}) {
    const DiscreteSurfaceField t = truncate(f, k);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      EXPECT_LE(t.displacement(n).norm(), k * (1 + 1e-12));
      if (f.displacement(n).norm() <= k) EXPECT_EQ(t.values[static_cast<std::size_t>(n)], f.values[static_cast<std::size_t>(n)]);
    }
  }
}

TEST(Cutoff, ProfileValues) {
  for (double k : {2.0, 8.0}) {
    EXPECT_EQ(cutoff_profile(0.5 / k, k), 0.0);
    EXPECT_EQ(cutoff_profile(1.0 / k, k), 0.0);
    EXPECT_NEAR(cutoff_profile(1.5 / k, k), 0.5, 1e-15);
    EXPECT_EQ(cutoff_profile(2.0 / k, k), 1.0);
    EXPECT_EQ(cutoff_profile(10.0, k), 1.0);
  }
}

TEST(Cutoff, ScalesField) {
  const Mesh2D mesh = build_mesh2d(kUnit, 8, 8, EdgeSet{Edge::Bottom});
  const DiscreteSurfaceField f = plate_field(mesh, Vec3(0, 0, 1));
  const DiscreteSurfaceField c = cutoff(f, 4.0);
  // Rows at y2 = 0.125, 0.375, 1: profile 0, 0.5, 1 times 3/4.
  EXPECT_EQ(c.values[static_cast<std::size_t>(mesh.node(3, 1))][2], 0.0);
  EXPECT_NEAR(c.values[static_cast<std::size_t>(mesh.node(3, 3))][2], 0.375, 1e-14);
  EXPECT_NEAR(c.values[static_cast<std::size_t>(mesh.node(3, 8))][2], 0.75, 1e-15);
  EXPECT_THROW(cutoff(f, 0.5), Error);
}

TEST(Mollify, ConstantAndZeroFields) {
  const Mesh2D mesh = build_mesh2d(kUnit, 16, 16, EdgeSet{Edge::Bottom});
  const HalfSpace up(Vec3(0, 0, 1));
  const DiscreteSurfaceField zero = plate_field(mesh, Vec3::Zero());
  const double k = 8.0;
  const Mollifier mo = make_mollifier(mesh, k);
  EXPECT_EQ(mo.rx, 2);
  double sum = 0.0;
  for (double w : mo.weights) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  const ReflectionExtension ez = reflect_extend(zero, up, mo.rx);
  for (const Vec3& v : mollify(zero, ez, k).values) EXPECT_EQ(v.norm(), 0.0);
  // Even reflection across free edges keeps a constant exactly away from the clamped edge.
  const DiscreteSurfaceField one = plate_field(mesh, Vec3(0.1, -0.2, 0.3));
  const DiscreteSurfaceField m = mollify(one, reflect_extend(one, up, mo.rx), k);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (mesh.node_j(n) > mo.ry)
      EXPECT_LT((m.values[static_cast<std::size_t>(n)] - Vec3(0.1, -0.2, 0.3)).norm(), 1e-14);
}

TEST(Mollify, RadiusBeyondStripThrows) {
  const Mesh2D mesh = build_mesh2d(kUnit, 8, 8, EdgeSet{Edge::Bottom});
  const DiscreteSurfaceField f = plate_field(mesh, Vec3::Zero());
  const HalfSpace up(Vec3(0, 0, 1));
  try {
    mollify(f, reflect_extend(f, up, 1), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ExtensionTooSmall);
  }
  EXPECT_THROW(reflect_extend(f, up, 9), Error);
}

TEST(Mollify, MarginBoundHolds) {
  const Chart chart = lifted_plate(0.2);
  const HalfSpace up(Vec3(0, 0, 1));
  for (int nx : {8, 16, 32}) {
    const Mesh2D mesh = build_mesh2d(kUnit, nx, nx, EdgeSet{Edge::Bottom});
    const DiscreteSurfaceField f = density_trial_field(mesh, chart, 0.1);
    for (double k : {8.0, 16.0, 32.0}) {
      const Mollifier mo = make_mollifier(mesh, k);
      const ReflectionExtension ext = reflect_extend(f, up, std::max(mo.rx, mo.ry));
      EXPECT_GE(mollify(f, ext, k).min_confinement(up), mollify_margin_bound(ext, k) - 1e-14) << nx << ' ' << k;
    }
  }
}

TEST(Pipeline, PlateRowsSatisfyBounds) {
  const Chart chart = lifted_plate(0.2);
  const HalfSpace up(Vec3(0, 0, 1));
  const Mesh2D mesh = build_mesh2d(kUnit, 32, 32, EdgeSet{Edge::Bottom});
  const DiscreteSurfaceField f = density_trial_field(mesh, chart, 0.1);
  const std::vector<DensityRow> rows = run_density_pipeline(f, up, {4, 8, 16}, 0.2);
  ASSERT_EQ(rows.size(), 3u);
  for (const DensityRow& r : rows) {
    EXPECT_TRUE(r.sup_bound_ok);
    EXPECT_GE(r.cutoff_margin, r.cutoff_required);
    EXPECT_GE(r.mollify_margin, r.mollify_bound - 1e-14);
    EXPECT_GT(r.min_margin, 0.0);
  }
}

TEST(Poincare, QuadraticProfile) {
  // xi = y2^2 on the unit plate clamped at the bottom (value and slope vanish
  // there): ratio k w / sqrt(w^2 + 20/3), w = 2/k.
  const Mesh2D mesh = build_mesh2d(kUnit, 16, 16, EdgeSet{Edge::Bottom});
  const int per = dofs_per_node(SpaceKind::Koiter2D);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(mesh.num_nodes() * per);
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.clamped[static_cast<std::size_t>(n)]) continue;
    const double y2 = mesh.y(n)[1];
    xi[n * per + 2] = y2 * y2;
    xi[n * per + 4] = 2 * y2;
  }
  for (double k : {4.0, 8.0}) {
    const double w = 2.0 / k;
    EXPECT_NEAR(strip_poincare_ratio(mesh, k, {xi}), k * w / std::sqrt(w * w + 20.0 / 3.0), 1e-12);
    EXPECT_LE(strip_poincare_ratio(mesh, k, {xi}), std::sqrt(2.0));
  }
  EXPECT_EQ(strip_poincare_ratio(mesh, 4.0, {Eigen::VectorXd::Zero(xi.size())}), 0.0);
}

TEST(Poincare, RandomFieldsStayBounded) {
  const Mesh2D mesh = build_mesh2d(kUnit, 32, 32, EdgeSet{Edge::Bottom});
  const std::vector<Eigen::VectorXd> trials = random_clamped_fields(mesh, 100, 7);
  for (double k : {4.0, 8.0, 16.0}) EXPECT_LE(strip_poincare_ratio(mesh, k, trials), std::sqrt(2.0) * 1.05) << k;
}

TEST(H1, NormOfLinearField) {
  const Mesh2D mesh = build_mesh2d(kUnit, 4, 4, EdgeSet{Edge::Bottom});
  std::vector<Vec3> v;
  for (int n = 0; n < mesh.num_nodes(); ++n) v.push_back(Vec3(0, 0, mesh.y(n)[1]));
  // int y^2 + int 1 = 4/3.
  EXPECT_NEAR(h1_norm(mesh, v), std::sqrt(4.0 / 3.0), 1e-12);
}

}  // namespace
}  // namespace shellvi
