#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace shellvi {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

// One linear inequality c . x[dofs] >= bound acting on the three dofs of a node.
struct ConstraintRow {
  int node = 0;
  std::array<int, 3> dofs{};
  Eigen::Vector3d coeff = Eigen::Vector3d::Zero();
  double bound = 0.0;
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;

  // Throws InvalidArgument on out-of-range or shared dofs or repeated nodes.
  void validate(int n_dofs) const;
  double slack(std::size_t r, const VectorXd& x) const;
};

struct QuadraticProgram {
  SparseMatrix H;
  VectorXd f;
  ConstraintSet constraints;

  double energy(const VectorXd& x) const;
  bool feasible(const VectorXd& x, double tol) const;
};

struct SolverConfig {
  double tol = 1e-8;          // certified KKT residual
  double active_tol = 1e-9;   // active-row detection
  long max_sweeps = 100000;   // total projected Gauss-Seidel sweeps
  int warm_sweeps = 60;       // sweeps before each polish attempt
  int max_polish = 200;       // active-set iterations per polish attempt
  bool record_energy = false;
};

struct VISolution {
  VectorXd x;
  std::vector<int> active;          // row indices
  std::vector<double> multipliers;  // one per row, 0 when inactive
  double kkt_residual = 0.0;
  long iterations = 0;              // Gauss-Seidel sweeps
  int polish_iterations = 0;        // active-set linear solves
  double energy = 0.0;
  bool certified = false;
  std::vector<double> energy_history;  // per sweep, when recorded
};

VISolution solve_vi(const QuadraticProgram& qp, const SolverConfig& cfg = {});

// Sparse Cholesky solve; throws SingularMatrix when H is not positive definite
// or the relative residual exceeds 1e-10.
VectorXd solve_linear(const SparseMatrix& H, const VectorXd& f);

// Enumerates all active sets (at most 20 rows).
VectorXd brute_force_vi(const QuadraticProgram& qp);

struct KKTBreakdown {
  double primal = 0.0;           // max violation b - c.x
  double dual = 0.0;             // max negative multiplier magnitude
  double complementarity = 0.0;  // max |lambda (c.x - b)|
  double gradient = 0.0;         // projected gradient (inf-norm)
  double total() const;
};

KKTBreakdown kkt_breakdown(const QuadraticProgram& qp, const VectorXd& x);
double complementarity_residual(const QuadraticProgram& qp, const VectorXd& x);

// Multiplier of each row implied by x: c^ . (Hx - f)_row / |c|.
std::vector<double> implied_multipliers(const QuadraticProgram& qp, const VectorXd& x);

}  // namespace shellvi
