#pragma once

#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "shellvi/geometry.hpp"
#include "shellvi/mesh.hpp"
#include "shellvi/shell3d.hpp"
#include "shellvi/vi_solver.hpp"

namespace shellvi {

// Contravariant force field F^{ij}(y, x3); the returned matrix is symmetric.
struct ForceField {
  std::function<Mat3(const Vec2&, double)> F;

  static ForceField zero();
  static ForceField constant(const Mat3& value);
  Mat3 operator()(const Vec2& y, double x3) const { return F(y, x3); }
};

// phi^{ab}(y) = int_{-1}^{1} (F^{ab} - lambda/(lambda+2mu) a^{ab} F^{33}) dx3,
// 3-point Gauss in x3.
Mat2 phi_from_F(const ForceField& force, const SurfaceFrame& frame, const Lame& lame);

// Gauss points per direction used by each 2D space.
int default_quadrature(SpaceKind kind);

// Matrix D at a quadrature point such that the energy density is s^T D s for
// the pair vector s = (s11, s22, s12) of a strain measure.
using Pairing2D = std::function<Eigen::Matrix3d(const SurfaceFrame&)>;

enum class Strain2D { Membrane, Flexural };

// Shared kernel: int s(eta)^T D s(xi) dy over the mesh with the given rule.
SparseMatrix assemble_strain_form_2d(const Mesh2D& mesh, const Chart& chart, SpaceKind kind,
                                     Strain2D strain, const Pairing2D& pairing, int quad);

Pairing2D membrane_pairing(const Lame& lame);
Pairing2D identity_pairing();

// Full (unreduced) matrices.
SparseMatrix assemble_membrane_form(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                    SpaceKind kind = SpaceKind::Membrane2D);
SparseMatrix assemble_flexural_form(const Mesh2D& mesh, const Chart& chart, const Lame& lame);
Eigen::VectorXd assemble_membrane_load(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                       const ForceField& force,
                                       SpaceKind kind = SpaceKind::Membrane2D);
SparseMatrix seminorm_gram(const Mesh2D& mesh, const Chart& chart,
                           SpaceKind kind = SpaceKind::Membrane2D);

// Nodal half-space rows in full dof numbering.
ConstraintSet assemble_constraints_2d(const Mesh2D& mesh, const Chart& chart, const HalfSpace& hs,
                                      SpaceKind kind = SpaceKind::Membrane2D);
ConstraintSet assemble_constraints_3d(const Mesh3D& mesh, const Chart& chart, const HalfSpace& hs,
                                      double eps);

struct Options3D {
  // Transverse shear strains e_{a3} interpolated from cell-edge tying points.
  bool assumed_shear = true;
  // Membrane strains e_11, e_22 interpolated from the same tying points; removes
  // membrane locking of bending modes on curved charts.
  bool assumed_membrane = false;
  // Element-wise enhanced modes of e_33, condensed out of stiffness and load.
  // Only the energy and load use them; strain Gram matrices do not.
  bool enhanced_normal = true;
};

SparseMatrix assemble_3d_stiffness(const Mesh3D& mesh, const Chart& chart, const Lame& lame,
                                   double eps, const Options3D& opts = {});
Eigen::VectorXd assemble_3d_load(const Mesh3D& mesh, const Chart& chart, const Lame& lame, double eps,
                                 const ForceField& force, const Options3D& opts = {});
// int sum_ij e_ij(eps; v)^2 dx.
SparseMatrix assemble_strain_gram_3d(const Mesh3D& mesh, const Chart& chart, double eps,
                                     const Options3D& opts = {});
// int sum_i (v_i^2 + |grad v_i|^2) dx in scaled coordinates.
SparseMatrix assemble_h1_gram_3d(const Mesh3D& mesh);
// int sum_i (d_3 v_i)^2 dx.
SparseMatrix assemble_transverse_gram_3d(const Mesh3D& mesh);

enum class AveragingRule { Trapezoid, Simpson };

// Map from full volume3d dofs to full membrane2d dofs of the base mesh.
SparseMatrix averaging_matrix(const Mesh3D& mesh, AveragingRule rule = AveragingRule::Trapezoid);
SparseMatrix seminorm_gram_3d(const Mesh3D& mesh, const Chart& chart,
                              AveragingRule rule = AveragingRule::Trapezoid);

// Restriction of full matrices and constraint sets to free dofs.
SparseMatrix restrict_matrix(const SparseMatrix& full, const DofMap& rows, const DofMap& cols);
ConstraintSet restrict_constraints(const ConstraintSet& full, const DofMap& dofs);

struct AssembledSystem {
  DofMap dofs;
  QuadraticProgram qp;  // stiffness, load and constraints on free dofs
  SparseMatrix gram;    // |.|^M Gram matrix on free dofs

  const SparseMatrix& stiffness() const { return qp.H; }
  const Eigen::VectorXd& load() const { return qp.f; }
  const ConstraintSet& constraints() const { return qp.constraints; }
};

// Limit membrane problem: B_M, L_M and the 2D nodal constraints.
AssembledSystem assemble_membrane_system(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                         const ForceField& force, const HalfSpace& hs,
                                         SpaceKind kind = SpaceKind::Membrane2D);
// Koiter: eps * B_M + eps^3/3 * B_F, load eps * L_M, on the koiter2d space.
AssembledSystem assemble_koiter_system(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                       double eps, const ForceField& force, const HalfSpace& hs);
// Scaled three-dimensional problem; gram is seminorm_gram_3d.
AssembledSystem assemble_3d_system(const Mesh3D& mesh, const Chart& chart, const Lame& lame,
                                   double eps, const ForceField& force, const HalfSpace& hs,
                                   const Options3D& opts = {});

// Discrete |.|^M_w distance between two 2D fields, possibly from different
// spaces on the same mesh, with an n x n Gauss rule per cell.
double seminorm_difference(const Mesh2D& mesh, const Chart& chart, SpaceKind kind_a,
                           const Eigen::VectorXd& full_a, SpaceKind kind_b,
                           const Eigen::VectorXd& full_b, int quad = 4);

// Membrane2d nodal values of a koiter2d field.
Eigen::VectorXd koiter_nodal_values(const Mesh2D& mesh, const Eigen::VectorXd& koiter_full);

}  // namespace shellvi
