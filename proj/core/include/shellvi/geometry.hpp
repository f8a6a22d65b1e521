#pragma once

#include <array>
#include <functional>
#include <string>

#include <Eigen/Dense>

namespace shellvi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Value and partial derivatives (up to third order) of a chart at one point.
struct ChartJet {
  Vec3 x = Vec3::Zero();
  std::array<Vec3, 2> d1{};
  std::array<std::array<Vec3, 2>, 2> d2{};
  std::array<std::array<std::array<Vec3, 2>, 2>, 2> d3{};
};

struct Rect {
  double y1min = 0.0;
  double y1max = 1.0;
  double y2min = 0.0;
  double y2max = 1.0;

  double width() const { return y1max - y1min; }
  double height() const { return y2max - y2min; }
};

// Edges of the parameter rectangle. Bottom is y2 = y2min, Right is y1 = y1max,
// Top is y2 = y2max, Left is y1 = y1min.
enum class Edge : unsigned { Bottom = 1u, Right = 2u, Top = 4u, Left = 8u };

class EdgeSet {
 public:
  EdgeSet() = default;
  EdgeSet(std::initializer_list<Edge> edges);
  static EdgeSet parse(const std::string& text);

  bool contains(Edge e) const { return (bits_ & static_cast<unsigned>(e)) != 0u; }
  bool empty() const { return bits_ == 0u; }
  void insert(Edge e) { bits_ |= static_cast<unsigned>(e); }
  std::string to_string() const;

 private:
  unsigned bits_ = 0u;
};

class Chart {
 public:
  using JetFn = std::function<ChartJet(double, double)>;

  Chart(std::string name, Rect domain, EdgeSet clamped, JetFn jet);

  const std::string& name() const { return name_; }
  const Rect& domain() const { return domain_; }
  EdgeSet clamped_edges() const { return clamped_; }

  ChartJet jet(const Vec2& y) const { return jet_(y[0], y[1]); }
  Vec3 position(const Vec2& y) const { return jet_(y[0], y[1]).x; }

  // Distance in parameter space to the union of clamped edges (+inf if none).
  double distance_to_clamped(const Vec2& y) const;

 private:
  std::string name_;
  Rect domain_;
  EdgeSet clamped_;
  JetFn jet_;
};

struct ChartOptions {
  Vec3 offset = Vec3::Zero();
  // Exchange the two curvilinear coordinates. Flips the orientation of the
  // unit normal.
  bool swap = false;
};

// Builtin charts: "plate", "sphere_cap", "cylinder", "hyperboloid".
// Bounds and edges refer to the coordinates after the optional swap.
Chart builtin_chart(const std::string& name, const Rect& bounds, EdgeSet clamped,
                    const ChartOptions& options = {});

// Checks immersion and injectivity of the chart on an (n+1)x(n+1) grid.
void validate_chart(const Chart& chart, int n = 50);

struct SurfaceFrame {
  Vec2 y = Vec2::Zero();
  Vec3 position = Vec3::Zero();
  std::array<Vec3, 3> cov{};  // a_1, a_2, a_3
  std::array<Vec3, 3> con{};  // a^1, a^2, a^3
  Mat2 metric = Mat2::Zero();      // a_{ab}
  Mat2 metric_inv = Mat2::Zero();  // a^{ab}
  double det_metric = 0.0;
  double sqrt_det = 0.0;
  Mat2 curv = Mat2::Zero();        // b_{ab}
  Mat2 curv_mixed = Mat2::Zero();  // (s, a) -> b^s_a
  std::array<Mat2, 2> christoffel{};       // [s](a, b) -> Gamma^s_{ab}
  std::array<Mat2, 2> curv_mixed_deriv{};  // [a](t, b) -> d_a b^t_b
};

SurfaceFrame eval_frame(const Chart& chart, const Vec2& y);

// Covariant components of a surface displacement and their derivatives.
struct SurfaceDisplacementSample {
  Vec3 value = Vec3::Zero();                              // eta_i
  Eigen::Matrix<double, 3, 2> grad = Eigen::Matrix<double, 3, 2>::Zero();  // (i, b) -> d_b eta_i
  Mat2 hess3 = Mat2::Zero();                              // d_ab eta_3
};

// Linearised change of metric tensor.
Mat2 gamma(const SurfaceFrame& frame, const SurfaceDisplacementSample& s);
// Linearised change of curvature tensor.
Mat2 rho(const SurfaceFrame& frame, const SurfaceDisplacementSample& s);

// Half-space {x : x . q >= 0}, q a unit vector.
struct HalfSpace {
  explicit HalfSpace(const Vec3& q);
  Vec3 q;
};

// Minimum of theta(y) . q over an (n+1)x(n+1) grid.
double confinement_margin(const Chart& chart, const HalfSpace& hs, int n = 200);
// Minimum of a_3(y) . q over an (n+1)x(n+1) grid.
double normal_alignment(const Chart& chart, const HalfSpace& hs, int n = 200);

// Point of an (n1+1)x(n2+1) uniform grid over the chart domain.
Vec2 grid_point(const Rect& r, int n1, int n2, int i, int j);

}  // namespace shellvi
