#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shellvi/geometry.hpp"
#include "shellvi/mesh.hpp"

namespace shellvi {

// Nodal data of the chart needed by the density operators.
struct NodalFrame {
  Vec3 position = Vec3::Zero();
  std::array<Vec3, 3> con{};  // a^1, a^2, a^3
};

// Nodal covariant components (eta_1, eta_2, eta_3) on a 2D mesh, with the
// chart frames at the nodes. Clamped nodes carry zero.
struct DiscreteSurfaceField {
  Mesh2D mesh;
  std::vector<Vec3> values;
  std::vector<NodalFrame> frames;
  std::vector<double> dist;  // parameter distance of each node to the clamped edges

  int num_nodes() const { return mesh.num_nodes(); }
  Vec3 displacement(int n) const;
  // Nodal values of (theta + eta_i a^i) . q.
  std::vector<double> confinement(const HalfSpace& hs) const;
  double min_confinement(const HalfSpace& hs) const;
};

// Throws InvalidArgument if a clamped node carries a nonzero value.
DiscreteSurfaceField make_field(const Mesh2D& mesh, const Chart& chart, std::vector<Vec3> values);
DiscreteSurfaceField field_from_membrane(const Mesh2D& mesh, const Chart& chart,
                                         const Eigen::VectorXd& membrane_full);
DiscreteSurfaceField with_values(const DiscreteSurfaceField& field, std::vector<Vec3> values);

// Nodes whose vector |eta_j a^j| exceeds k are scaled back onto the ball of radius k.
DiscreteSurfaceField truncate(const DiscreteSurfaceField& field, double k);

// Piecewise-linear cutoff in the distance to the clamped edges:
// 0 up to 1/k, k d - 1 up to 2/k, then 1; the output is (1 - 1/k) f eta.
double cutoff_profile(double dist, double k);
DiscreteSurfaceField cutoff(const DiscreteSurfaceField& field, double k);

// Extension of a field to the rectangle enlarged by `strip` cells on every
// side. Values are reflected evenly across free edges and set to zero across
// clamped edges; theta . q and a^i . q are reflected evenly across every edge.
struct ReflectionExtension {
  Mesh2D mesh;  // original mesh
  int strip = 0;
  std::vector<Vec3> values;
  std::vector<Vec3> con_q;     // a^i . q
  std::vector<double> pos_q;   // theta . q

  int width() const { return mesh.nx + 1 + 2 * strip; }
  // Index of extended node (i, j), with i in [-strip, nx + strip].
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>((j + strip) * width() + (i + strip));
  }
};

// Throws ExtensionTooSmall if the strip is wider than the mesh.
ReflectionExtension reflect_extend(const DiscreteSurfaceField& field, const HalfSpace& hs, int strip);

// Discrete mollifier: the radius 1/k snapped to a whole number of cells (at
// least one) in each direction, weights from the exponential bump renormalised
// to sum to one.
struct Mollifier {
  int rx = 1;
  int ry = 1;
  std::vector<double> weights;  // (2 ry + 1) x (2 rx + 1), row-major in j
  double weight(int a, int b) const {
    return weights[static_cast<std::size_t>((b + ry) * (2 * rx + 1) + (a + rx))];
  }
};

Mollifier make_mollifier(const Mesh2D& mesh, double k);

// Convolution over the extension; throws ExtensionTooSmall if the snapped
// radius exceeds the strip.
DiscreteSurfaceField mollify(const DiscreteSurfaceField& field, const ReflectionExtension& ext,
                             double k);

// Lower bound for the nodal confinement of mollify(field, ext, k):
// min extended margin - max |d(theta . q)| - sum_i max |eta_i| max |d(a^i . q)|,
// differences taken over pairs within the mollifier support.
double mollify_margin_bound(const ReflectionExtension& ext, double k);

// Discrete H1 norm of the bilinear interpolant of nodal vector values.
double h1_norm(const Mesh2D& mesh, const std::vector<Vec3>& values);
double h1_distance(const DiscreteSurfaceField& a, const DiscreteSurfaceField& b);

// Largest second difference over interior nodes, per unit squared spacing.
double max_second_difference(const DiscreteSurfaceField& field);

// k ||xi||_{L2(S)} / ||xi||_{H1(S)} maximised over trial fields, where S is
// the union of cells lying within distance 2/k of the clamped edges and each
// trial field is the transverse component of a koiter2d full vector. Zero
// fields are skipped.
double strip_poincare_ratio(const Mesh2D& mesh, double k, const std::vector<Eigen::VectorXd>& trials);

// Random koiter2d full vectors whose dofs vanish at clamped nodes.
std::vector<Eigen::VectorXd> random_clamped_fields(const Mesh2D& mesh, int count, std::uint64_t seed);

struct DensityRow {
  double k = 0.0;
  double h1_distance = 0.0;        // pipeline output vs input
  double min_margin = 0.0;         // minimum nodal confinement over all stages
  bool sup_bound_ok = false;       // |eta_j a^j| <= k after truncation
  double truncate_margin = 0.0;
  double cutoff_margin = 0.0;
  double cutoff_required = 0.0;    // d / k
  double mollify_margin = 0.0;
  double mollify_bound = 0.0;
  double truncate_h1 = 0.0;        // truncation output vs input
  double cutoff_h1 = 0.0;          // cutoff of truncation vs input
};

// truncate(k) -> cutoff(k) -> mollify(4k) for each k. `d` is the margin of
// the reference configuration used in the cutoff requirement d/k.
std::vector<DensityRow> run_density_pipeline(const DiscreteSurfaceField& field, const HalfSpace& hs,
                                             const std::vector<double>& ks, double d);

}  // namespace shellvi
