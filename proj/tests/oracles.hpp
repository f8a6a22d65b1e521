#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "shellvi/geometry.hpp"
#include "shellvi/vi_solver.hpp"

namespace shellvi::testing {

inline constexpr double kPi = std::numbers::pi;

// Admissible rectangle of each builtin chart.
inline Rect builtin_bounds(const std::string& name) {
  if (name == "sphere_cap") return Rect{0.0, kPi, 0.1, 1.2};
  if (name == "cylinder") return Rect{0.1, kPi - 0.1, 0.0, 2.0};
  if (name == "hyperboloid") return Rect{0.1, kPi - 0.1, -2.0, 2.0};
  return Rect{0.0, 1.0, 0.0, 1.0};
}

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"plate", "sphere_cap", "cylinder", "hyperboloid"};
  return names;
}

// Surface frame from central differences of the chart position only.
struct FiniteDifferenceFrame {
  std::array<Vec3, 3> cov{};
  std::array<Vec3, 3> con{};
  Mat2 metric = Mat2::Zero();
  Mat2 curv = Mat2::Zero();
  std::array<Mat2, 2> christoffel{};
};

inline FiniteDifferenceFrame finite_difference_frame(const Chart& chart, const Vec2& y) {
  const double h1 = 1e-5, h2 = 1e-4;
  const auto x = [&](double d1, double d2) { return chart.position(Vec2(y[0] + d1, y[1] + d2)); };
  FiniteDifferenceFrame f;
  f.cov[0] = (x(h1, 0) - x(-h1, 0)) / (2 * h1);
  f.cov[1] = (x(0, h1) - x(0, -h1)) / (2 * h1);
  f.cov[2] = f.cov[0].cross(f.cov[1]).normalized();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) f.metric(a, b) = f.cov[a].dot(f.cov[b]);
  const Mat2 inv = f.metric.inverse();
  for (int a = 0; a < 2; ++a) f.con[a] = inv(a, 0) * f.cov[0] + inv(a, 1) * f.cov[1];
  f.con[2] = f.cov[2];
  std::array<std::array<Vec3, 2>, 2> d2;
  d2[0][0] = (x(h2, 0) - 2 * x(0, 0) + x(-h2, 0)) / (h2 * h2);
  d2[1][1] = (x(0, h2) - 2 * x(0, 0) + x(0, -h2)) / (h2 * h2);
  d2[0][1] = d2[1][0] = (x(h2, h2) - x(h2, -h2) - x(-h2, h2) + x(-h2, -h2)) / (4 * h2 * h2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      f.curv(a, b) = d2[a][b].dot(f.cov[2]);
      for (int s = 0; s < 2; ++s) f.christoffel[s](a, b) = d2[a][b].dot(f.con[s]);
    }
  return f;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); }

template <class A, class B>
double rel_err_m(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

// Worst relative discrepancy between the analytic frame and the oracle.
inline double frame_discrepancy(const Chart& chart, const Vec2& y) {
  const SurfaceFrame f = eval_frame(chart, y);
  const FiniteDifferenceFrame o = finite_difference_frame(chart, y);
  double e = 0.0;
  for (int i = 0; i < 3; ++i) {
    e = std::max(e, rel_err_m(f.cov[i], o.cov[i]));
    e = std::max(e, rel_err_m(f.con[i], o.con[i]));
  }
  e = std::max(e, rel_err_m(f.metric, o.metric));
  e = std::max(e, rel_err_m(f.curv, o.curv));
  for (int s = 0; s < 2; ++s) e = std::max(e, rel_err_m(f.christoffel[s], o.christoffel[s]));
  // Derivative of the mixed curvature against differences of the analytic frame.
  const double h = 1e-5;
  for (int a = 0; a < 2; ++a) {
    Vec2 d = Vec2::Zero();
    d[a] = h;
    const Mat2 fd = (eval_frame(chart, y + d).curv_mixed - eval_frame(chart, y - d).curv_mixed) / (2 * h);
    e = std::max(e, rel_err_m(f.curv_mixed_deriv[a], fd));
  }
  return e;
}

inline Vec2 random_point(const Rect& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Stay a hair inside so that centred differences remain in the chart.
  const double s = 1e-3 + (1 - 2e-3) * u(rng), t = 1e-3 + (1 - 2e-3) * u(rng);
  return Vec2(r.y1min + s * r.width(), r.y2min + t * r.height());
}

// Random strictly convex QP on n dofs with m node rows on disjoint dof triples.
inline QuadraticProgram random_qp(int n, int m, std::mt19937_64& rng, bool feasible_origin = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = u(rng);
  const Eigen::MatrixXd H = M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
  QuadraticProgram qp;
  qp.H = H.sparseView();
  qp.f = Eigen::VectorXd::NullaryExpr(n, [&]() { return 3.0 * u(rng); });
  for (int r = 0; r < m; ++r) {
    ConstraintRow row;
    row.node = r;
    row.dofs = {3 * r, 3 * r + 1, 3 * r + 2};
    row.coeff = Eigen::Vector3d(u(rng), u(rng), u(rng));
    if (row.coeff.norm() < 0.2) row.coeff[2] += 1.0;
    row.bound = feasible_origin ? -std::abs(u(rng)) : u(rng);
    qp.constraints.rows.push_back(row);
  }
  return qp;
}

// Uniform random point of the feasible set near the origin.
inline Eigen::VectorXd random_feasible(const QuadraticProgram& qp, std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = static_cast<int>(qp.f.size());
  for (;;) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&]() { return radius * u(rng); });
    if (qp.feasible(x, 0.0)) return x;
  }
}

}  // namespace shellvi::testing
