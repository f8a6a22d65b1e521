#include "shellvi/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "shellvi/errors.hpp"

namespace shellvi {

std::array<int, 4> Mesh2D::cell_nodes(int ci, int cj) const {
  return {node(ci, cj), node(ci + 1, cj), node(ci, cj + 1), node(ci + 1, cj + 1)};
}

int Mesh2D::num_clamped() const {
  return static_cast<int>(std::count(clamped.begin(), clamped.end(), 1));
}

Mesh2D build_mesh2d(const Rect& bounds, int nx, int ny, EdgeSet clamped_edges) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidMesh, "nx and ny must be at least 2");
  if (!(bounds.y1min < bounds.y1max) || !(bounds.y2min < bounds.y2max))
    throw Error(ErrorKind::InvalidBounds, "empty rectangle");
  if (clamped_edges.empty()) throw Error(ErrorKind::EmptyGamma0, "no clamped edge declared");
  Mesh2D m;
  m.bounds = bounds;
  m.nx = nx;
  m.ny = ny;
  m.clamped_edges = clamped_edges;
  m.clamped.assign(static_cast<std::size_t>(m.num_nodes()), 0);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const bool c = (clamped_edges.contains(Edge::Bottom) && j == 0) ||
                     (clamped_edges.contains(Edge::Top) && j == ny) ||
                     (clamped_edges.contains(Edge::Left) && i == 0) ||
                     (clamped_edges.contains(Edge::Right) && i == nx);
      m.clamped[static_cast<std::size_t>(m.node(i, j))] = c ? 1 : 0;
    }
  return m;
}

Mesh3D build_mesh3d(const Mesh2D& base, int nz) {
  if (nz < 2 || nz % 2 != 0) throw Error(ErrorKind::OddLayers, "nz must be even and at least 2");
  Mesh3D m;
  m.base = base;
  m.nz = nz;
  return m;
}

int dofs_per_node(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Membrane2D: return 3;
    case SpaceKind::Koiter2D: return 6;
    case SpaceKind::Volume3D: return 3;
  }
  return 0;
}

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Membrane2D: return "membrane2d";
    case SpaceKind::Koiter2D: return "koiter2d";
    case SpaceKind::Volume3D: return "volume3d";
  }
  return "?";
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_full());
  for (int k = 0; k < n_free(); ++k) full[free_to_full[static_cast<std::size_t>(k)]] = reduced[k];
  return full;
}

Eigen::VectorXd DofMap::restrict_to_free(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(n_free());
  for (int k = 0; k < n_free(); ++k) r[k] = full[free_to_full[static_cast<std::size_t>(k)]];
  return r;
}

namespace {

DofMap make_map(SpaceKind kind, int num_nodes, const std::function<bool(int)>& clamped) {
  DofMap d;
  d.kind = kind;
  d.num_nodes = num_nodes;
  const int per = dofs_per_node(kind);
  d.full_to_free.assign(static_cast<std::size_t>(num_nodes * per), -1);
  for (int n = 0; n < num_nodes; ++n) {
    if (clamped(n)) continue;
    for (int l = 0; l < per; ++l) {
      d.full_to_free[static_cast<std::size_t>(n * per + l)] = static_cast<int>(d.free_to_full.size());
      d.free_to_full.push_back(n * per + l);
    }
  }
  return d;
}

}  // namespace

DofMap make_dof_map(const Mesh2D& mesh, SpaceKind kind) {
  if (kind == SpaceKind::Volume3D)
    throw Error(ErrorKind::InvalidArgument, "volume3d space needs a 3D mesh");
  return make_map(kind, mesh.num_nodes(),
                  [&](int n) { return mesh.clamped[static_cast<std::size_t>(n)] != 0; });
}

DofMap make_dof_map(const Mesh3D& mesh) {
  return make_map(SpaceKind::Volume3D, mesh.num_nodes(), [&](int n) { return mesh.clamped(n); });
}

GaussRule gauss01(int n) {
  std::vector<double> x, w;
  switch (n) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: x = {-0.57735026918962576451, 0.57735026918962576451}; w = {1.0, 1.0}; break;
    case 3:
      x = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4:
      x = {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
           0.86113631159405257522};
      w = {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
           0.34785484513745385737};
      break;
    default: throw Error(ErrorKind::InvalidArgument, "gauss rule needs 1..4 points");
  }
  GaussRule g;
  for (std::size_t k = 0; k < x.size(); ++k) {
    g.x.push_back(0.5 * (x[k] + 1.0));
    g.w.push_back(0.5 * w[k]);
  }
  return g;
}

namespace {

// Linear Lagrange functions on [0,1] and their derivatives.
inline double lin(int a, double s) { return a == 0 ? 1.0 - s : s; }
inline double dlin(int a) { return a == 0 ? -1.0 : 1.0; }

// Cubic Hermite functions on [0,1] scaled to an interval of length h:
// kind 0 -> value at node a, kind 1 -> slope at node a. Returns f, f', f''
// with derivatives taken in the physical coordinate.
void hermite(int a, int kind, double s, double h, double& f, double& df, double& d2f) {
  if (kind == 0) {
    if (a == 0) {
      f = 1 - 3 * s * s + 2 * s * s * s;
      df = (-6 * s + 6 * s * s) / h;
      d2f = (-6 + 12 * s) / (h * h);
    } else {
      f = 3 * s * s - 2 * s * s * s;
      df = (6 * s - 6 * s * s) / h;
      d2f = (6 - 12 * s) / (h * h);
    }
  } else {
    if (a == 0) {
      f = h * (s - 2 * s * s + s * s * s);
      df = 1 - 4 * s + 3 * s * s;
      d2f = (-4 + 6 * s) / h;
    } else {
      f = h * (-s * s + s * s * s);
      df = -2 * s + 3 * s * s;
      d2f = (-2 + 6 * s) / h;
    }
  }
}

constexpr int kLocal[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};

}  // namespace

void eval_basis_2d(const Mesh2D& mesh, SpaceKind kind, int ci, int cj, double s, double t,
                   LocalBasis2D& out) {
  const double hx = mesh.hx(), hy = mesh.hy();
  const auto nodes = mesh.cell_nodes(ci, cj);
  const int per = dofs_per_node(kind);
  out.dofs.clear();
  out.jets.clear();
  for (int a = 0; a < 4; ++a) {
    const int ia = kLocal[a][0], ja = kLocal[a][1];
    const double N = lin(ia, s) * lin(ja, t);
    const double N1 = dlin(ia) / hx * lin(ja, t);
    const double N2 = lin(ia, s) * dlin(ja) / hy;
    const double N12 = dlin(ia) * dlin(ja) / (hx * hy);
    const int ncomp = kind == SpaceKind::Koiter2D ? 2 : 3;
    for (int i = 0; i < ncomp; ++i) {
      SurfaceDisplacementSample j;
      j.value[i] = N;
      j.grad(i, 0) = N1;
      j.grad(i, 1) = N2;
      if (i == 2) j.hess3 << 0.0, N12, N12, 0.0;
      out.dofs.push_back(nodes[static_cast<std::size_t>(a)] * per + i);
      out.jets.push_back(j);
    }
    if (kind != SpaceKind::Koiter2D) continue;
    for (int l = 0; l < 4; ++l) {
      const int kx = (l == 1 || l == 3) ? 1 : 0;
      const int ky = (l == 2 || l == 3) ? 1 : 0;
      double fx, dfx, d2fx, fy, dfy, d2fy;
      hermite(ia, kx, s, hx, fx, dfx, d2fx);
      hermite(ja, ky, t, hy, fy, dfy, d2fy);
      SurfaceDisplacementSample j;
      j.value[2] = fx * fy;
      j.grad(2, 0) = dfx * fy;
      j.grad(2, 1) = fx * dfy;
      j.hess3 << d2fx * fy, dfx * dfy, dfx * dfy, fx * d2fy;
      out.dofs.push_back(nodes[static_cast<std::size_t>(a)] * per + 2 + l);
      out.jets.push_back(j);
    }
  }
}

SurfaceDisplacementSample sample_field(const Mesh2D& mesh, SpaceKind kind,
                                       const Eigen::VectorXd& full, const Vec2& y) {
  const double u = (y[0] - mesh.bounds.y1min) / mesh.hx();
  const double v = (y[1] - mesh.bounds.y2min) / mesh.hy();
  const int ci = std::clamp(static_cast<int>(std::floor(u)), 0, mesh.nx - 1);
  const int cj = std::clamp(static_cast<int>(std::floor(v)), 0, mesh.ny - 1);
  LocalBasis2D b;
  eval_basis_2d(mesh, kind, ci, cj, u - ci, v - cj, b);
  SurfaceDisplacementSample out;
  for (std::size_t d = 0; d < b.dofs.size(); ++d) {
    const double c = full[b.dofs[d]];
    out.value += c * b.jets[d].value;
    out.grad += c * b.jets[d].grad;
    out.hess3 += c * b.jets[d].hess3;
  }
  return out;
}

void eval_basis_3d(const Mesh3D& mesh, int ci, int cj, int ck, double s, double t, double r,
                   LocalBasis3D& out) {
  const double hx = mesh.base.hx(), hy = mesh.base.hy(), hz = mesh.hz();
  const auto base = mesh.base.cell_nodes(ci, cj);
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 4; ++a) {
      const int idx = c * 4 + a;
      const int ia = kLocal[a][0], ja = kLocal[a][1];
      out.nodes[static_cast<std::size_t>(idx)] = mesh.node(base[static_cast<std::size_t>(a)], ck + c);
      out.value[static_cast<std::size_t>(idx)] = lin(ia, s) * lin(ja, t) * lin(c, r);
      out.grad[static_cast<std::size_t>(idx)] =
          Vec3(dlin(ia) / hx * lin(ja, t) * lin(c, r), lin(ia, s) * dlin(ja) / hy * lin(c, r),
               lin(ia, s) * lin(ja, t) * dlin(c) / hz);
    }
}

}  // namespace shellvi
