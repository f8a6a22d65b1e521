#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "shellvi/geometry.hpp"

namespace shellvi {

struct Mesh2D {
  Rect bounds;
  int nx = 0;
  int ny = 0;
  EdgeSet clamped_edges;
  std::vector<char> clamped;  // per node

  int num_nodes() const { return (nx + 1) * (ny + 1); }
  int num_cells() const { return nx * ny; }
  int node(int i, int j) const { return j * (nx + 1) + i; }
  int node_i(int n) const { return n % (nx + 1); }
  int node_j(int n) const { return n / (nx + 1); }
  double hx() const { return bounds.width() / nx; }
  double hy() const { return bounds.height() / ny; }
  Vec2 y(int n) const { return grid_point(bounds, nx, ny, node_i(n), node_j(n)); }
  // Nodes of cell (ci, cj) in the order (0,0), (1,0), (0,1), (1,1).
  std::array<int, 4> cell_nodes(int ci, int cj) const;
  int num_clamped() const;
};

Mesh2D build_mesh2d(const Rect& bounds, int nx, int ny, EdgeSet clamped_edges);

struct Mesh3D {
  Mesh2D base;
  int nz = 0;

  int num_nodes() const { return base.num_nodes() * (nz + 1); }
  int node(int n2, int k) const { return k * base.num_nodes() + n2; }
  int base_node(int n) const { return n % base.num_nodes(); }
  int layer(int n) const { return n / base.num_nodes(); }
  double x3(int k) const { return static_cast<double>(2 * k - nz) / nz; }
  double hz() const { return 2.0 / nz; }
  bool clamped(int n) const { return base.clamped[static_cast<std::size_t>(base_node(n))] != 0; }
  int num_clamped() const { return base.num_clamped() * (nz + 1); }
};

Mesh3D build_mesh3d(const Mesh2D& base, int nz);

enum class SpaceKind { Membrane2D, Koiter2D, Volume3D };

int dofs_per_node(SpaceKind kind);
const char* to_string(SpaceKind kind);

// Full dof numbering is node * dofs_per_node + local. Clamped nodes have all
// their dofs eliminated; the remaining ("free") dofs keep their order.
struct DofMap {
  SpaceKind kind = SpaceKind::Membrane2D;
  int num_nodes = 0;
  std::vector<int> full_to_free;  // -1 for eliminated dofs
  std::vector<int> free_to_full;

  int n_full() const { return static_cast<int>(full_to_free.size()); }
  int n_free() const { return static_cast<int>(free_to_full.size()); }
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
};

DofMap make_dof_map(const Mesh2D& mesh, SpaceKind kind);
DofMap make_dof_map(const Mesh3D& mesh);

// Gauss-Legendre rule with n in {1, 2, 3, 4} points on [0, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
GaussRule gauss01(int n);

// Contributions of the element basis functions of a 2D cell at local
// coordinates (s, t) in [0,1]^2. Entry d is the jet of the field obtained by
// setting full dof dofs[d] to one.
struct LocalBasis2D {
  std::vector<int> dofs;
  std::vector<SurfaceDisplacementSample> jets;
};

void eval_basis_2d(const Mesh2D& mesh, SpaceKind kind, int ci, int cj, double s, double t,
                   LocalBasis2D& out);

// Jet of a discrete 2D field (full dof vector) at parameter point y.
SurfaceDisplacementSample sample_field(const Mesh2D& mesh, SpaceKind kind,
                                       const Eigen::VectorXd& full, const Vec2& y);

// Trilinear hexahedral basis: value and gradient (d/dy1, d/dy2, d/dx3).
struct LocalBasis3D {
  std::array<int, 8> nodes{};
  std::array<double, 8> value{};
  std::array<Vec3, 8> grad{};
};

void eval_basis_3d(const Mesh3D& mesh, int ci, int cj, int ck, double s, double t, double r,
                   LocalBasis3D& out);

}  // namespace shellvi
