#include "shellvi/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "shellvi/errors.hpp"

namespace shellvi {

using Triplet = Eigen::Triplet<double>;

ForceField ForceField::zero() {
  return ForceField{[](const Vec2&, double) { return Mat3::Zero().eval(); }};
}

ForceField ForceField::constant(const Mat3& value) {
  if ((value - value.transpose()).norm() > 0.0)
    throw Error(ErrorKind::InvalidArgument, "force field must be symmetric");
  return ForceField{[value](const Vec2&, double) { return value; }};
}

Mat2 phi_from_F(const ForceField& force, const SurfaceFrame& frame, const Lame& lame) {
  check_lame(lame);
  const double c = lame.lambda / (lame.lambda + 2.0 * lame.mu);
  constexpr double node = 0.77459666924148337704;
  const double xs[3] = {-node, 0.0, node};
  const double ws[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  Mat2 phi = Mat2::Zero();
  for (int k = 0; k < 3; ++k) {
    const Mat3 F = force(frame.y, xs[k]);
    phi += ws[k] * (F.topLeftCorner<2, 2>() - c * frame.metric_inv * F(2, 2));
  }
  return phi;
}

int default_quadrature(SpaceKind kind) { return kind == SpaceKind::Koiter2D ? 4 : 2; }

Pairing2D membrane_pairing(const Lame& lame) {
  check_lame(lame);
  return [lame](const SurfaceFrame& f) {
    const Eigen::Matrix3d W = pair2_weights().asDiagonal();
    return Eigen::Matrix3d(W * reduced_membrane_tensor(f, lame).pairs * W * f.sqrt_det);
  };
}

Pairing2D identity_pairing() {
  return [](const SurfaceFrame&) { return Eigen::Matrix3d(pair2_weights().asDiagonal()); };
}

namespace {

inline Eigen::Vector3d pair_vector(const Mat2& m) {
  return Eigen::Vector3d(m(0, 0), m(1, 1), 0.5 * (m(0, 1) + m(1, 0)));
}

Vec2 cell_point(const Mesh2D& mesh, int ci, int cj, double s, double t) {
  return Vec2(mesh.bounds.y1min + (ci + s) * mesh.hx(), mesh.bounds.y2min + (cj + t) * mesh.hy());
}

// Visits every 2D quadrature point with the strain matrix of the cell basis.
template <class Visit>
void for_each_qp_2d(const Mesh2D& mesh, const Chart& chart, SpaceKind kind, Strain2D strain,
                    int quad, Visit&& visit) {
  const GaussRule g = gauss01(quad);
  const double area = mesh.hx() * mesh.hy();
  LocalBasis2D basis;
  Eigen::MatrixXd B;
  for (int cj = 0; cj < mesh.ny; ++cj)
    for (int ci = 0; ci < mesh.nx; ++ci)
      for (std::size_t qj = 0; qj < g.x.size(); ++qj)
        for (std::size_t qi = 0; qi < g.x.size(); ++qi) {
          const double s = g.x[qi], t = g.x[qj];
          const SurfaceFrame f = eval_frame(chart, cell_point(mesh, ci, cj, s, t));
          eval_basis_2d(mesh, kind, ci, cj, s, t, basis);
          const int nd = static_cast<int>(basis.dofs.size());
          B.resize(3, nd);
          for (int d = 0; d < nd; ++d) {
            const Mat2 m = strain == Strain2D::Membrane ? gamma(f, basis.jets[static_cast<std::size_t>(d)])
                                                        : rho(f, basis.jets[static_cast<std::size_t>(d)]);
            B.col(d) = pair_vector(m);
          }
          visit(basis, B, f, g.w[qi] * g.w[qj] * area);
        }
}

void scatter(const std::vector<int>& dofs, const Eigen::MatrixXd& K, std::vector<Triplet>& out) {
  for (std::size_t a = 0; a < dofs.size(); ++a)
    for (std::size_t b = 0; b < dofs.size(); ++b) {
      const double v = K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (v != 0.0) out.emplace_back(dofs[a], dofs[b], v);
    }
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMatrix assemble_strain_form_2d(const Mesh2D& mesh, const Chart& chart, SpaceKind kind,
                                     Strain2D strain, const Pairing2D& pairing, int quad) {
  const int n = mesh.num_nodes() * dofs_per_node(kind);
  std::vector<Triplet> trips;
  for_each_qp_2d(mesh, chart, kind, strain, quad,
                 [&](const LocalBasis2D& b, const Eigen::MatrixXd& B, const SurfaceFrame& f, double w) {
                   const Eigen::MatrixXd K = B.transpose() * pairing(f) * B * w;
                   scatter(b.dofs, K, trips);
                 });
  return from_triplets(n, n, trips);
}

SparseMatrix assemble_membrane_form(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                    SpaceKind kind) {
  return assemble_strain_form_2d(mesh, chart, kind, Strain2D::Membrane, membrane_pairing(lame),
                                 default_quadrature(kind));
}

SparseMatrix assemble_flexural_form(const Mesh2D& mesh, const Chart& chart, const Lame& lame) {
  return assemble_strain_form_2d(mesh, chart, SpaceKind::Koiter2D, Strain2D::Flexural,
                                 membrane_pairing(lame), 4);
}

SparseMatrix seminorm_gram(const Mesh2D& mesh, const Chart& chart, SpaceKind kind) {
  return assemble_strain_form_2d(mesh, chart, kind, Strain2D::Membrane, identity_pairing(),
                                 default_quadrature(kind));
}

Eigen::VectorXd assemble_membrane_load(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                       const ForceField& force, SpaceKind kind) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.num_nodes() * dofs_per_node(kind));
  const Eigen::Vector3d W = pair2_weights();
  for_each_qp_2d(mesh, chart, kind, Strain2D::Membrane, default_quadrature(kind),
                 [&](const LocalBasis2D& b, const Eigen::MatrixXd& B, const SurfaceFrame& fr, double w) {
                   const Eigen::Vector3d phi = pair_vector(phi_from_F(force, fr, lame));
                   const Eigen::VectorXd loc = B.transpose() * W.cwiseProduct(phi) * (fr.sqrt_det * w);
                   for (std::size_t d = 0; d < b.dofs.size(); ++d)
                     f[b.dofs[d]] += loc[static_cast<Eigen::Index>(d)];
                 });
  return f;
}

ConstraintSet assemble_constraints_2d(const Mesh2D& mesh, const Chart& chart, const HalfSpace& hs,
                                      SpaceKind kind) {
  if (kind == SpaceKind::Volume3D) throw Error(ErrorKind::InvalidArgument, "2D space expected");
  const int per = dofs_per_node(kind);
  ConstraintSet cs;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const SurfaceFrame f = eval_frame(chart, mesh.y(n));
    const double ref = f.position.dot(hs.q);
    if (ref < 0.0) throw Error(ErrorKind::InfeasibleReference, "theta . q < 0 at a node");
    if (mesh.clamped[static_cast<std::size_t>(n)]) continue;
    ConstraintRow r;
    r.node = n;
    r.dofs = {n * per, n * per + 1, n * per + 2};
    for (int i = 0; i < 3; ++i) r.coeff[i] = f.con[static_cast<std::size_t>(i)].dot(hs.q);
    r.bound = -ref;
    cs.rows.push_back(r);
  }
  return cs;
}

ConstraintSet assemble_constraints_3d(const Mesh3D& mesh, const Chart& chart, const HalfSpace& hs,
                                      double eps) {
  ConstraintSet cs;
  const int n2 = mesh.base.num_nodes();
  for (int b = 0; b < n2; ++b) {
    const SurfaceFrame f = eval_frame(chart, mesh.base.y(b));
    for (int k = 0; k <= mesh.nz; ++k) {
      const double x3 = mesh.x3(k);
      const ShellFrame s = eval_shell_frame(f, eps, x3);
      const double ref = (f.position + eps * x3 * f.cov[2]).dot(hs.q);
      if (ref < 0.0) throw Error(ErrorKind::InfeasibleReference, "reference point outside half-space");
      const int n = mesh.node(b, k);
      if (mesh.clamped(n)) continue;
      ConstraintRow r;
      r.node = n;
      r.dofs = {3 * n, 3 * n + 1, 3 * n + 2};
      for (int i = 0; i < 3; ++i) r.coeff[i] = s.con[static_cast<std::size_t>(i)].dot(hs.q);
      r.bound = -ref;
      cs.rows.push_back(r);
    }
  }
  std::sort(cs.rows.begin(), cs.rows.end(),
            [](const ConstraintRow& a, const ConstraintRow& b) { return a.node < b.node; });
  return cs;
}

namespace {

using Mat6x24 = Eigen::Matrix<double, 6, 24>;

void hex_strain_matrix(const ShellFrame& sf, const LocalBasis3D& b, Mat6x24& B) {
  for (int a = 0; a < 8; ++a)
    for (int i = 0; i < 3; ++i) {
      Vec3 v = Vec3::Zero();
      v[i] = b.value[static_cast<std::size_t>(a)];
      Mat3 grad = Mat3::Zero();
      grad.row(i) = b.grad[static_cast<std::size_t>(a)].transpose();
      const Mat3 e = scaled_strains(sf, v, grad);
      B.col(3 * a + i) << e(0, 0), e(1, 1), e(2, 2), e(1, 2), e(0, 2), e(0, 1);
    }
}

struct HexPoint {
  const LocalBasis3D* basis;
  const Mat6x24* B;
  const ShellFrame* sf;
  double weight;  // includes the cell volume, not sqrt(g)
  Vec2 y;
  double x3;
  double s, t, r;  // local coordinates in the hexahedron
};

// Visits the 2x2x3 quadrature points of every hexahedron.
template <class Visit>
void for_each_qp_3d(const Mesh3D& mesh, const Chart& chart, double eps, const Options3D& opts,
                    Visit&& visit) {
  const Mesh2D& m2 = mesh.base;
  const GaussRule g2 = gauss01(2);
  const GaussRule g3 = gauss01(3);
  const double vol = m2.hx() * m2.hy() * mesh.hz();
  // Tying points for e_11, e_13 (s = 1/2, t = 0, 1) and e_22, e_23 (s = 0, 1, t = 1/2).
  const double tie[4][2] = {{0.5, 0.0}, {0.5, 1.0}, {0.0, 0.5}, {1.0, 0.5}};
  LocalBasis3D basis, tb;
  Mat6x24 B, BT[4];
  std::vector<SurfaceFrame> qf(4), tf(4);
  for (int cj = 0; cj < m2.ny; ++cj)
    for (int ci = 0; ci < m2.nx; ++ci) {
      for (int q = 0; q < 4; ++q)
        qf[static_cast<std::size_t>(q)] = eval_frame(chart, cell_point(m2, ci, cj, g2.x[static_cast<std::size_t>(q % 2)], g2.x[static_cast<std::size_t>(q / 2)]));
      const bool tied = opts.assumed_shear || opts.assumed_membrane;
      if (tied)
        for (int q = 0; q < 4; ++q)
          tf[static_cast<std::size_t>(q)] = eval_frame(chart, cell_point(m2, ci, cj, tie[q][0], tie[q][1]));
      for (int ck = 0; ck < mesh.nz; ++ck)
        for (std::size_t qr = 0; qr < g3.x.size(); ++qr) {
          const double r = g3.x[qr];
          const double x3 = mesh.x3(ck) + r * mesh.hz();
          ShellFrame tsf[4];
          if (tied)
            for (int q = 0; q < 4; ++q) {
              tsf[q] = eval_shell_frame(tf[static_cast<std::size_t>(q)], eps, x3);
              eval_basis_3d(mesh, ci, cj, ck, tie[q][0], tie[q][1], r, tb);
              hex_strain_matrix(tsf[q], tb, BT[q]);
            }
          for (int q = 0; q < 4; ++q) {
            const double s = g2.x[static_cast<std::size_t>(q % 2)];
            const double t = g2.x[static_cast<std::size_t>(q / 2)];
            const SurfaceFrame& f = qf[static_cast<std::size_t>(q)];
            const ShellFrame sf = eval_shell_frame(f, eps, x3);
            eval_basis_3d(mesh, ci, cj, ck, s, t, r, basis);
            hex_strain_matrix(sf, basis, B);
            if (opts.assumed_shear) {
              B.row(4) = (1.0 - t) * BT[0].row(4) + t * BT[1].row(4);
              B.row(3) = (1.0 - s) * BT[2].row(3) + s * BT[3].row(3);
            }
            if (opts.assumed_membrane) {
              B.row(0) = (1.0 - t) * BT[0].row(0) + t * BT[1].row(0);
              B.row(1) = (1.0 - s) * BT[2].row(1) + s * BT[3].row(1);
            }
            const double w = g2.w[static_cast<std::size_t>(q % 2)] * g2.w[static_cast<std::size_t>(q / 2)] * g3.w[qr] * vol;
            visit(HexPoint{&basis, &B, &sf, w, f.y, x3, s, t, r});
          }
        }
    }
}

std::array<int, 24> hex_dofs(const LocalBasis3D& b) {
  std::array<int, 24> d{};
  for (int a = 0; a < 8; ++a)
    for (int i = 0; i < 3; ++i) d[static_cast<std::size_t>(3 * a + i)] = 3 * b.nodes[static_cast<std::size_t>(a)] + i;
  return d;
}

void scatter24(const std::array<int, 24>& dofs, const Eigen::Matrix<double, 24, 24>& K,
               std::vector<Triplet>& out) {
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b)
      if (K(a, b) != 0.0) out.emplace_back(dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)], K(a, b));
}

// Assembles int B^T D B over all hexes where D depends on the point.
template <class DFn>
SparseMatrix assemble_hex_form(const Mesh3D& mesh, const Chart& chart, double eps,
                               const Options3D& opts, DFn&& dfn) {
  const int n = 3 * mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.base.num_cells() * mesh.nz) * 576u);
  Eigen::Matrix<double, 24, 24> K = Eigen::Matrix<double, 24, 24>::Zero();
  int count = 0;
  std::array<int, 24> dofs{};
  for_each_qp_3d(mesh, chart, eps, opts, [&](const HexPoint& p) {
    const Mat6 D = dfn(*p.sf);
    K.noalias() += p.B->transpose() * D * (*p.B) * p.weight;
    dofs = hex_dofs(*p.basis);
    // Twelve consecutive points belong to one hexahedron.
    if (++count == 12) {
      scatter24(dofs, K, trips);
      K.setZero();
      count = 0;
    }
  });
  return from_triplets(n, n, trips);
}

}  // namespace

namespace {

constexpr int kEnhanced = 4;

// Zero-mean enhanced modes of e_33 on one hexahedron.
Eigen::Matrix<double, kEnhanced, 1> enhanced_modes(double s, double t, double r) {
  const double a = 2.0 * s - 1.0, b = 2.0 * t - 1.0, c = 2.0 * r - 1.0;
  Eigen::Matrix<double, kEnhanced, 1> m;
  m << a, b, a * b, c;
  return m;
}

// Stiffness and load of the scaled 3D problem. With the enhanced e_33 modes
// the element parameters are condensed before scattering.
void assemble_hex_system(const Mesh3D& mesh, const Chart& chart, const Lame& lame, double eps,
                         const ForceField* force, const Options3D& opts, SparseMatrix* K_out,
                         Eigen::VectorXd* f_out) {
  check_lame(lame);
  const int n = 3 * mesh.num_nodes();
  const Mat6 Wm = pair3_weights().asDiagonal();
  const Vec6 Wv = pair3_weights();
  std::vector<Triplet> trips;
  if (K_out) trips.reserve(static_cast<std::size_t>(mesh.base.num_cells() * mesh.nz) * 576u);
  if (f_out) *f_out = Eigen::VectorXd::Zero(n);
  using MatE = Eigen::Matrix<double, 24, kEnhanced>;
  using SqE = Eigen::Matrix<double, kEnhanced, kEnhanced>;
  using VecE = Eigen::Matrix<double, kEnhanced, 1>;
  Eigen::Matrix<double, 24, 24> Kuu = Eigen::Matrix<double, 24, 24>::Zero();
  MatE Kua = MatE::Zero();
  SqE Kaa = SqE::Zero();
  Eigen::Matrix<double, 24, 1> fu = Eigen::Matrix<double, 24, 1>::Zero();
  VecE fa = VecE::Zero();
  int count = 0;
  std::array<int, 24> dofs{};
  for_each_qp_3d(mesh, chart, eps, opts, [&](const HexPoint& p) {
    const Mat6 D = Wm * elasticity_tensor(*p.sf, lame).pairs * Wm * p.sf->sqrt_det;
    const Mat6x24& B = *p.B;
    Kuu.noalias() += B.transpose() * D * B * p.weight;
    Vec6 stress_load = Vec6::Zero();
    if (force) {
      const Mat3 F = (*force)(p.y, p.x3);
      Vec6 Fp;
      Fp << F(0, 0), F(1, 1), F(2, 2), F(1, 2), F(0, 2), F(0, 1);
      stress_load = Wv.cwiseProduct(Fp) * (p.sf->sqrt_det * p.weight);
      fu.noalias() += B.transpose() * stress_load;
    }
    if (opts.enhanced_normal) {
      const VecE m = enhanced_modes(p.s, p.t, p.r);
      Kua.noalias() += B.transpose() * D.col(2) * m.transpose() * p.weight;
      Kaa.noalias() += D(2, 2) * m * m.transpose() * p.weight;
      fa += stress_load[2] * m;
    }
    dofs = hex_dofs(*p.basis);
    // Twelve consecutive points belong to one hexahedron.
    if (++count == 12) {
      if (opts.enhanced_normal) {
        const Eigen::LLT<SqE> llt(Kaa);
        Kuu.noalias() -= Kua * llt.solve(Kua.transpose());
        fu.noalias() -= Kua * llt.solve(fa);
      }
      if (K_out) scatter24(dofs, Kuu, trips);
      if (f_out)
        for (int a = 0; a < 24; ++a) (*f_out)[dofs[static_cast<std::size_t>(a)]] += fu[a];
      Kuu.setZero();
      Kua.setZero();
      Kaa.setZero();
      fu.setZero();
      fa.setZero();
      count = 0;
    }
  });
  if (K_out) *K_out = from_triplets(n, n, trips);
}

}  // namespace

SparseMatrix assemble_3d_stiffness(const Mesh3D& mesh, const Chart& chart, const Lame& lame,
                                   double eps, const Options3D& opts) {
  SparseMatrix K;
  assemble_hex_system(mesh, chart, lame, eps, nullptr, opts, &K, nullptr);
  return K;
}

SparseMatrix assemble_strain_gram_3d(const Mesh3D& mesh, const Chart& chart, double eps,
                                     const Options3D& opts) {
  const Mat6 W = pair3_weights().asDiagonal();
  return assemble_hex_form(mesh, chart, eps, opts, [&](const ShellFrame&) { return W; });
}

Eigen::VectorXd assemble_3d_load(const Mesh3D& mesh, const Chart& chart, const Lame& lame, double eps,
                                 const ForceField& force, const Options3D& opts) {
  Eigen::VectorXd f;
  assemble_hex_system(mesh, chart, lame, eps, &force, opts, nullptr, &f);
  return f;
}

namespace {

template <class Kernel>
SparseMatrix assemble_scalar_hex(const Mesh3D& mesh, Kernel&& kernel) {
  const Mesh2D& m2 = mesh.base;
  const GaussRule g2 = gauss01(2), g3 = gauss01(3);
  const double vol = m2.hx() * m2.hy() * mesh.hz();
  std::vector<Triplet> trips;
  LocalBasis3D b;
  for (int ck = 0; ck < mesh.nz; ++ck)
    for (int cj = 0; cj < m2.ny; ++cj)
      for (int ci = 0; ci < m2.nx; ++ci) {
        Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
        for (std::size_t qr = 0; qr < 3; ++qr)
          for (std::size_t qj = 0; qj < 2; ++qj)
            for (std::size_t qi = 0; qi < 2; ++qi) {
              eval_basis_3d(mesh, ci, cj, ck, g2.x[qi], g2.x[qj], g3.x[qr], b);
              const double w = g2.w[qi] * g2.w[qj] * g3.w[qr] * vol;
              for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 8; ++c) K(a, c) += w * kernel(b, a, c);
            }
        for (int a = 0; a < 8; ++a)
          for (int c = 0; c < 8; ++c)
            for (int i = 0; i < 3; ++i)
              if (K(a, c) != 0.0)
                trips.emplace_back(3 * b.nodes[static_cast<std::size_t>(a)] + i, 3 * b.nodes[static_cast<std::size_t>(c)] + i, K(a, c));
      }
  const int n = 3 * mesh.num_nodes();
  return from_triplets(n, n, trips);
}

}  // namespace

SparseMatrix assemble_h1_gram_3d(const Mesh3D& mesh) {
  return assemble_scalar_hex(mesh, [](const LocalBasis3D& b, int a, int c) {
    const auto ua = static_cast<std::size_t>(a), uc = static_cast<std::size_t>(c);
    return b.value[ua] * b.value[uc] + b.grad[ua].dot(b.grad[uc]);
  });
}

SparseMatrix assemble_transverse_gram_3d(const Mesh3D& mesh) {
  return assemble_scalar_hex(mesh, [](const LocalBasis3D& b, int a, int c) {
    return b.grad[static_cast<std::size_t>(a)][2] * b.grad[static_cast<std::size_t>(c)][2];
  });
}

SparseMatrix averaging_matrix(const Mesh3D& mesh, AveragingRule rule) {
  const int nz = mesh.nz;
  std::vector<double> w(static_cast<std::size_t>(nz + 1));
  for (int k = 0; k <= nz; ++k) {
    double c;
    if (rule == AveragingRule::Trapezoid) {
      c = (k == 0 || k == nz) ? 1.0 : 2.0;
      c *= mesh.hz() / 2.0;
    } else {
      c = (k == 0 || k == nz) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      c *= mesh.hz() / 3.0;
    }
    w[static_cast<std::size_t>(k)] = 0.5 * c;
  }
  std::vector<Triplet> t;
  const int n2 = mesh.base.num_nodes();
  for (int b = 0; b < n2; ++b)
    for (int k = 0; k <= nz; ++k)
      for (int i = 0; i < 3; ++i) t.emplace_back(3 * b + i, 3 * mesh.node(b, k) + i, w[static_cast<std::size_t>(k)]);
  return from_triplets(3 * n2, 3 * mesh.num_nodes(), t);
}

SparseMatrix seminorm_gram_3d(const Mesh3D& mesh, const Chart& chart, AveragingRule rule) {
  const SparseMatrix P = averaging_matrix(mesh, rule);
  const SparseMatrix G2 = seminorm_gram(mesh.base, chart, SpaceKind::Membrane2D);
  SparseMatrix G = assemble_transverse_gram_3d(mesh);
  const SparseMatrix avg = SparseMatrix(P.transpose()) * G2 * P;
  G += avg;
  G.makeCompressed();
  return G;
}

SparseMatrix restrict_matrix(const SparseMatrix& full, const DofMap& rows, const DofMap& cols) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int k = 0; k < full.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
      const int r = rows.full_to_free[static_cast<std::size_t>(it.row())];
      const int c = cols.full_to_free[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  return from_triplets(rows.n_free(), cols.n_free(), t);
}

ConstraintSet restrict_constraints(const ConstraintSet& full, const DofMap& dofs) {
  ConstraintSet out;
  for (const ConstraintRow& r : full.rows) {
    ConstraintRow s = r;
    for (int i = 0; i < 3; ++i) {
      s.dofs[static_cast<std::size_t>(i)] = dofs.full_to_free[static_cast<std::size_t>(r.dofs[static_cast<std::size_t>(i)])];
      if (s.dofs[static_cast<std::size_t>(i)] < 0)
        throw Error(ErrorKind::InvalidArgument, "constraint row touches an eliminated dof");
    }
    out.rows.push_back(s);
  }
  return out;
}

AssembledSystem assemble_membrane_system(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                         const ForceField& force, const HalfSpace& hs,
                                         SpaceKind kind) {
  AssembledSystem sys;
  sys.dofs = make_dof_map(mesh, kind);
  sys.qp.H = restrict_matrix(assemble_membrane_form(mesh, chart, lame, kind), sys.dofs, sys.dofs);
  sys.qp.f = sys.dofs.restrict_to_free(assemble_membrane_load(mesh, chart, lame, force, kind));
  sys.qp.constraints = restrict_constraints(assemble_constraints_2d(mesh, chart, hs, kind), sys.dofs);
  sys.gram = restrict_matrix(seminorm_gram(mesh, chart, kind), sys.dofs, sys.dofs);
  return sys;
}

AssembledSystem assemble_koiter_system(const Mesh2D& mesh, const Chart& chart, const Lame& lame,
                                       double eps, const ForceField& force, const HalfSpace& hs) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  const SpaceKind kind = SpaceKind::Koiter2D;
  AssembledSystem sys;
  sys.dofs = make_dof_map(mesh, kind);
  const SparseMatrix M = assemble_membrane_form(mesh, chart, lame, kind);
  const SparseMatrix F = assemble_flexural_form(mesh, chart, lame);
  const SparseMatrix K = eps * M + (eps * eps * eps / 3.0) * F;
  sys.qp.H = restrict_matrix(K, sys.dofs, sys.dofs);
  sys.qp.f = eps * sys.dofs.restrict_to_free(assemble_membrane_load(mesh, chart, lame, force, kind));
  sys.qp.constraints = restrict_constraints(assemble_constraints_2d(mesh, chart, hs, kind), sys.dofs);
  sys.gram = restrict_matrix(seminorm_gram(mesh, chart, kind), sys.dofs, sys.dofs);
  return sys;
}

AssembledSystem assemble_3d_system(const Mesh3D& mesh, const Chart& chart, const Lame& lame,
                                   double eps, const ForceField& force, const HalfSpace& hs,
                                   const Options3D& opts) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  AssembledSystem sys;
  sys.dofs = make_dof_map(mesh);
  sys.qp.H = restrict_matrix(assemble_3d_stiffness(mesh, chart, lame, eps, opts), sys.dofs, sys.dofs);
  sys.qp.f = sys.dofs.restrict_to_free(assemble_3d_load(mesh, chart, lame, eps, force, opts));
  sys.qp.constraints = restrict_constraints(assemble_constraints_3d(mesh, chart, hs, eps), sys.dofs);
  sys.gram = restrict_matrix(seminorm_gram_3d(mesh, chart), sys.dofs, sys.dofs);
  return sys;
}

double seminorm_difference(const Mesh2D& mesh, const Chart& chart, SpaceKind kind_a,
                           const Eigen::VectorXd& full_a, SpaceKind kind_b,
                           const Eigen::VectorXd& full_b, int quad) {
  const GaussRule g = gauss01(quad);
  const double area = mesh.hx() * mesh.hy();
  double sum = 0.0;
  for (int cj = 0; cj < mesh.ny; ++cj)
    for (int ci = 0; ci < mesh.nx; ++ci)
      for (std::size_t qj = 0; qj < g.x.size(); ++qj)
        for (std::size_t qi = 0; qi < g.x.size(); ++qi) {
          const Vec2 y = cell_point(mesh, ci, cj, g.x[qi], g.x[qj]);
          const SurfaceFrame f = eval_frame(chart, y);
          // Evaluate inside the cell to avoid ambiguity on cell edges.
          auto sample = [&](SpaceKind k, const Eigen::VectorXd& v) {
            LocalBasis2D b;
            eval_basis_2d(mesh, k, ci, cj, g.x[qi], g.x[qj], b);
            SurfaceDisplacementSample s;
            for (std::size_t d = 0; d < b.dofs.size(); ++d) {
              s.value += v[b.dofs[d]] * b.jets[d].value;
              s.grad += v[b.dofs[d]] * b.jets[d].grad;
            }
            return s;
          };
          const Mat2 d = gamma(f, sample(kind_a, full_a)) - gamma(f, sample(kind_b, full_b));
          sum += g.w[qi] * g.w[qj] * area * d.squaredNorm();
        }
  return std::sqrt(sum);
}

Eigen::VectorXd koiter_nodal_values(const Mesh2D& mesh, const Eigen::VectorXd& k) {
  Eigen::VectorXd m(3 * mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n)
    for (int i = 0; i < 3; ++i) m[3 * n + i] = k[6 * n + i];
  return m;
}

}  // namespace shellvi
