#pragma once

#include <type_traits>

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shellvi/geometry.hpp"

namespace shellvi {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct Lame {
  double lambda = 1.0;
  double mu = 1.0;
};

// Throws InvalidLame unless lambda >= 0 and mu > 0.
void check_lame(const Lame& lame);

// Index of the symmetric pair (i, j) in the order (11, 22, 33, 23, 13, 12).
int pair3(int i, int j);
// Index of the symmetric pair (a, b) in the order (11, 22, 12).
int pair2(int a, int b);

// Multiplicity of each pair in a full double contraction.
const Vec6& pair3_weights();
const Eigen::Vector3d& pair2_weights();

// Geometry of the scaled shell at (y, x3) for thickness parameter eps.
struct ShellFrame {
  double eps = 0.0;
  double x3 = 0.0;
  std::array<Vec3, 3> cov{};  // g_i
  std::array<Vec3, 3> con{};  // g^i
  Mat3 metric = Mat3::Zero();
  Mat3 metric_inv = Mat3::Zero();
  double det_metric = 0.0;
  double sqrt_det = 0.0;
  std::array<Mat3, 3> christoffel{};  // [p](i, j) -> Gamma^p_{ij}(eps)
};

ShellFrame eval_shell_frame(const SurfaceFrame& frame, double eps, double x3);

// Isotropic elasticity tensor in pair storage. Entry (I, J) is A^{ijkl} for
// I = (ij), J = (kl), without multiplicity factors.
struct ElasticityTensor {
  Mat6 pairs = Mat6::Zero();
  double operator()(int i, int j, int k, int l) const { return pairs(pair3(i, j), pair3(k, l)); }
};

ElasticityTensor elasticity_tensor(const Mat3& metric_inv, const Lame& lame);
ElasticityTensor elasticity_tensor(const ShellFrame& sf, const Lame& lame);
// Tensor at eps = 0: g^{ab} = a^{ab}, g^{a3} = 0, g^{33} = 1.
ElasticityTensor limit_elasticity_tensor(const SurfaceFrame& frame, const Lame& lame);

// Two-dimensional membrane tensor in pair storage (11, 22, 12), factor free.
struct MembraneTensor {
  Eigen::Matrix3d pairs = Eigen::Matrix3d::Zero();
  double operator()(int a, int b, int s, int t) const { return pairs(pair2(a, b), pair2(s, t)); }
};

MembraneTensor reduced_membrane_tensor(const SurfaceFrame& frame, const Lame& lame);
// Twice the static condensation of the in-plane block of a limit tensor,
// A^{abst} - A^{ab33} A^{33st} / A^{3333}, integrated over x3 in (-1, 1).
MembraneTensor condensed_membrane_tensor(const ElasticityTensor& limit);

// Scaled linearised strains e_{ij}(eps; v). grad(i, j) is d_j v_i with j = 2
// the scaled transverse coordinate.
Mat3 scaled_strains(const ShellFrame& sf, const Vec3& v, const Mat3& grad);

struct ExpansionResidual {
  std::string quantity;
  std::vector<double> eps;
  std::vector<double> residual;
  double slope = 0.0;  // NaN when every residual is at round-off level
};

// Sup-norm residuals of the small-thickness expansions of the shell geometry
// sampled on an (n+1)x(n+1) grid and x3 in {-1, -1/2, 1/2, 1}.
std::vector<ExpansionResidual> expansion_residuals(const Chart& chart, const Lame& lame,
                                                   const std::vector<double>& eps_list,
                                                   int n = 8);

// Least-squares slope of log(residual) against log(eps).
double fitted_slope(const std::vector<double>& eps, const std::vector<double>& residual);

// Kirchhoff-Love lift of a surface displacement sample.
struct KLLift {
  SurfaceFrame frame;
  SurfaceDisplacementSample zeta;
  double eps = 0.0;
  Vec3 deformed_normal = Vec3::Zero();

  // Covariant components u_i(x3) from the explicit expansion formulas.
  Vec3 covariant(double x3) const;
  // Displacement vector u_i g^i = zeta_i a^i + eps x3 (a_3(zeta) - a_3).
  Vec3 displacement(double x3) const;
  Vec3 deformed_position(double x3) const;
};

KLLift kl_lift(const SurfaceFrame& frame, const SurfaceDisplacementSample& zeta, double eps);

// Derivative of the contravariant basis: [a][i] -> d_a a^i.
std::array<std::array<Vec3, 3>, 2> contravariant_basis_derivative(const SurfaceFrame& frame);

// Average (1/2) int_{-1}^{1} f(x3) dx3 by 3-point Gauss quadrature.
// The result is evaluated, never an expression over temporaries.
template <class F>
auto transverse_average(F&& f) {
  using R = std::decay_t<decltype(f(0.0))>;
  constexpr double node = 0.77459666924148337704;  // sqrt(3/5)
  const R lo = f(-node), mid = f(0.0), hi = f(node);
  R out = 0.5 * ((5.0 / 9.0) * lo + (8.0 / 9.0) * mid + (5.0 / 9.0) * hi);
  return out;
}

}  // namespace shellvi
