#include "shellvi/shell3d.hpp"

#include <cmath>
#include <limits>

#include "shellvi/errors.hpp"

namespace shellvi {

void check_lame(const Lame& lame) {
  if (!(lame.lambda >= 0.0) || !(lame.mu > 0.0) || !std::isfinite(lame.lambda) ||
      !std::isfinite(lame.mu))
    throw Error(ErrorKind::InvalidLame, "need lambda >= 0 and mu > 0");
}

int pair3(int i, int j) {
  static constexpr int table[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};
  return table[i][j];
}

int pair2(int a, int b) {
  static constexpr int table[2][2] = {{0, 2}, {2, 1}};
  return table[a][b];
}

const Vec6& pair3_weights() {
  static const Vec6 w = (Vec6() << 1, 1, 1, 2, 2, 2).finished();
  return w;
}

const Eigen::Vector3d& pair2_weights() {
  static const Eigen::Vector3d w(1, 1, 2);
  return w;
}

namespace {
constexpr int kPairs3[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
constexpr int kPairs2[3][2] = {{0, 0}, {1, 1}, {0, 1}};
}  // namespace

ShellFrame eval_shell_frame(const SurfaceFrame& f, double eps, double x3) {
  ShellFrame s;
  s.eps = eps;
  s.x3 = x3;
  const double t = eps * x3;
  const Mat2& bm = f.curv_mixed;

  if (t == 0.0) {
    // Exact copy of the surface frame so that mid-surface quantities agree bitwise.
    s.cov = f.cov;
    s.con = f.con;
  } else {
    for (int a = 0; a < 2; ++a) s.cov[a] = f.cov[a] - t * (bm(0, a) * f.cov[0] + bm(1, a) * f.cov[1]);
    s.cov[2] = f.cov[2];
  }
  Mat2 g2;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g2(a, b) = t == 0.0 ? f.metric(a, b) : s.cov[a].dot(s.cov[b]);
  const Mat2 g2inv = t == 0.0 ? f.metric_inv : Mat2(g2.inverse());
  if (t != 0.0) {
    for (int a = 0; a < 2; ++a) s.con[a] = g2inv(a, 0) * s.cov[0] + g2inv(a, 1) * s.cov[1];
    s.con[2] = f.cov[2];
  }
  s.metric.setZero();
  s.metric.topLeftCorner<2, 2>() = g2;
  s.metric(2, 2) = 1.0;
  s.metric_inv.setZero();
  s.metric_inv.topLeftCorner<2, 2>() = g2inv;
  s.metric_inv(2, 2) = 1.0;
  s.det_metric = t == 0.0 ? f.det_metric : g2.determinant();
  if (!(s.det_metric > 0.0)) throw Error(ErrorKind::DegenerateFrame, "shell metric not positive");
  s.sqrt_det = std::sqrt(s.det_metric);

  for (auto& m : s.christoffel) m.setZero();
  if (t == 0.0) {
    for (int p = 0; p < 2; ++p) s.christoffel[p].topLeftCorner<2, 2>() = f.christoffel[p];
    s.christoffel[2].topLeftCorner<2, 2>() = f.curv;
  } else {
    // Gauss formula d_b a_k = Gamma^s_{bk} a_s + b_{bk} a_3, then
    // d_b g_a = d_b a_a - t d_b (b^k_a a_k).
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec3 dba[2];
        for (int k = 0; k < 2; ++k)
          dba[k] = f.christoffel[0](b, k) * f.cov[0] + f.christoffel[1](b, k) * f.cov[1] +
                   f.curv(b, k) * f.cov[2];
        Vec3 d = dba[a];
        for (int k = 0; k < 2; ++k)
          d -= t * (f.curv_mixed_deriv[b](k, a) * f.cov[k] + bm(k, a) * dba[k]);
        for (int p = 0; p < 3; ++p) s.christoffel[p](b, a) = d.dot(s.con[p]);
      }
  }
  // Gamma^p_{a3} = Gamma^p_{3a} = d_a a_3 . g^p with d_a a_3 = -b^t_a a_t.
  for (int a = 0; a < 2; ++a) {
    for (int p = 0; p < 2; ++p) {
      double v;
      if (t == 0.0) {
        v = -bm(p, a);
      } else {
        v = 0.0;
        for (int k = 0; k < 2; ++k) v -= bm(k, a) * f.cov[k].dot(s.con[p]);
      }
      s.christoffel[p](a, 2) = v;
      s.christoffel[p](2, a) = v;
    }
    s.christoffel[2](a, 2) = 0.0;
    s.christoffel[2](2, a) = 0.0;
  }
  return s;
}

ElasticityTensor elasticity_tensor(const Mat3& gi, const Lame& lame) {
  check_lame(lame);
  ElasticityTensor A;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J) {
      const int i = kPairs3[I][0], j = kPairs3[I][1], k = kPairs3[J][0], l = kPairs3[J][1];
      A.pairs(I, J) = lame.lambda * gi(i, j) * gi(k, l) +
                      lame.mu * (gi(i, k) * gi(j, l) + gi(i, l) * gi(j, k));
    }
  return A;
}

ElasticityTensor elasticity_tensor(const ShellFrame& sf, const Lame& lame) {
  return elasticity_tensor(sf.metric_inv, lame);
}

ElasticityTensor limit_elasticity_tensor(const SurfaceFrame& f, const Lame& lame) {
  Mat3 gi = Mat3::Zero();
  gi.topLeftCorner<2, 2>() = f.metric_inv;
  gi(2, 2) = 1.0;
  return elasticity_tensor(gi, lame);
}

MembraneTensor reduced_membrane_tensor(const SurfaceFrame& f, const Lame& lame) {
  check_lame(lame);
  const Mat2& ai = f.metric_inv;
  const double c = 4.0 * lame.lambda * lame.mu / (lame.lambda + 2.0 * lame.mu);
  MembraneTensor m;
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) {
      const int a = kPairs2[I][0], b = kPairs2[I][1], s = kPairs2[J][0], t = kPairs2[J][1];
      m.pairs(I, J) = c * ai(a, b) * ai(s, t) + 2.0 * lame.mu * (ai(a, s) * ai(b, t) + ai(a, t) * ai(b, s));
    }
  return m;
}

MembraneTensor condensed_membrane_tensor(const ElasticityTensor& A) {
  MembraneTensor m;
  const double a3333 = A(2, 2, 2, 2);
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) {
      const int a = kPairs2[I][0], b = kPairs2[I][1], s = kPairs2[J][0], t = kPairs2[J][1];
      m.pairs(I, J) = 2.0 * (A(a, b, s, t) - A(a, b, 2, 2) * A(2, 2, s, t) / a3333);
    }
  return m;
}

Mat3 scaled_strains(const ShellFrame& sf, const Vec3& v, const Mat3& grad) {
  const double inv = 1.0 / sf.eps;
  Mat3 e;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double x = 0.5 * (grad(a, b) + grad(b, a));
      for (int p = 0; p < 3; ++p) x -= sf.christoffel[p](a, b) * v[p];
      e(a, b) = x;
    }
  for (int a = 0; a < 2; ++a) {
    double x = 0.5 * (inv * grad(a, 2) + grad(2, a));
    for (int s = 0; s < 2; ++s) x -= sf.christoffel[s](a, 2) * v[s];
    e(a, 2) = e(2, a) = x;
  }
  e(2, 2) = inv * grad(2, 2);
  return e;
}

double fitted_slope(const std::vector<double>& eps, const std::vector<double>& res) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  double rmax = 0.0;
  for (double r : res) rmax = std::max(rmax, r);
  if (!(rmax > 1e-13)) return std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(res[i] > 0.0)) continue;
    const double x = std::log(eps[i]), y = std::log(res[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<ExpansionResidual> expansion_residuals(const Chart& chart, const Lame& lame,
                                                   const std::vector<double>& eps_list, int n) {
  std::vector<ExpansionResidual> out;
  for (const char* q : {"A", "g", "christoffel_s_a3", "christoffel_s_ab", "christoffel_3_ab",
                        "g_upper"}) {
    ExpansionResidual r;
    r.quantity = q;
    r.eps = eps_list;
    r.residual.assign(eps_list.size(), 0.0);
    out.push_back(r);
  }
  const double x3s[] = {-1.0, -0.5, 0.5, 1.0};
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const SurfaceFrame f = eval_frame(chart, grid_point(chart.domain(), n, n, i, j));
      const ElasticityTensor A0 = limit_elasticity_tensor(f, lame);
      const Mat2& bm = f.curv_mixed;
      for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        for (double x3 : x3s) {
          const double t = eps * x3;
          const ShellFrame s = eval_shell_frame(f, eps, x3);
          const ElasticityTensor A = elasticity_tensor(s, lame);
          double rA = (A.pairs - A0.pairs).cwiseAbs().maxCoeff();
          double rg = std::abs(s.det_metric - f.det_metric);
          double ra3 = 0.0, rab = 0.0, r3ab = 0.0, rup = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int sg = 0; sg < 2; ++sg) {
              double pred = -bm(sg, a);
              for (int k = 0; k < 2; ++k) pred -= t * bm(k, a) * bm(sg, k);
              ra3 = std::max(ra3, std::abs(s.christoffel[sg](a, 2) - pred));
            }
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              for (int sg = 0; sg < 2; ++sg) {
                double c = f.curv_mixed_deriv[a](sg, b);
                for (int k = 0; k < 2; ++k)
                  c += f.christoffel[sg](a, k) * bm(k, b) - f.christoffel[k](a, b) * bm(sg, k);
                const double pred = f.christoffel[sg](a, b) - t * c;
                rab = std::max(rab, std::abs(s.christoffel[sg](a, b) - pred));
              }
              double pred3 = f.curv(a, b);
              for (int k = 0; k < 2; ++k) pred3 -= t * bm(k, a) * f.curv(k, b);
              r3ab = std::max(r3ab, std::abs(s.christoffel[2](a, b) - pred3));
            }
          for (int a = 0; a < 2; ++a) {
            Vec3 pred = f.con[a];
            for (int k = 0; k < 2; ++k) pred += t * bm(a, k) * f.con[k];
            rup = std::max(rup, (s.con[a] - pred).cwiseAbs().maxCoeff());
          }
          const double vals[] = {rA, rg, ra3, rab, r3ab, rup};
          for (int q = 0; q < 6; ++q) out[q].residual[e] = std::max(out[q].residual[e], vals[q]);
        }
      }
    }
  for (auto& r : out) r.slope = fitted_slope(r.eps, r.residual);
  return out;
}

std::array<std::array<Vec3, 3>, 2> contravariant_basis_derivative(const SurfaceFrame& f) {
  std::array<std::array<Vec3, 3>, 2> d{};
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) {
      Vec3 v = f.curv_mixed(s, a) * f.cov[2];
      for (int b = 0; b < 2; ++b) v -= f.christoffel[s](a, b) * f.con[b];
      d[a][s] = v;
    }
    d[a][2] = -(f.curv(a, 0) * f.con[0] + f.curv(a, 1) * f.con[1]);
  }
  return d;
}

KLLift kl_lift(const SurfaceFrame& f, const SurfaceDisplacementSample& z, double eps) {
  const auto dcon = contravariant_basis_derivative(f);
  Vec3 tang[2];
  for (int a = 0; a < 2; ++a) {
    Vec3 t = f.cov[a];
    for (int i = 0; i < 3; ++i) t += z.grad(i, a) * f.con[i] + z.value[i] * dcon[a][i];
    tang[a] = t;
  }
  const Vec3 n = tang[0].cross(tang[1]);
  const double nn = n.norm();
  if (!(nn >= 1e-12))
    throw Error(ErrorKind::DegenerateDeformedFrame, "deformed tangents are parallel");
  KLLift k;
  k.frame = f;
  k.zeta = z;
  k.eps = eps;
  k.deformed_normal = n / nn;
  return k;
}

Vec3 KLLift::covariant(double x3) const {
  const SurfaceFrame& f = frame;
  const double t = eps * x3;
  const Vec3& zv = zeta.value;
  Vec3 u;
  for (int b = 0; b < 2; ++b) {
    double v = zv[b] + t * deformed_normal.dot(f.cov[b]);
    for (int s = 0; s < 2; ++s) v -= t * zv[s] * f.curv_mixed(s, b);
    for (int k = 0; k < 2; ++k) v -= t * t * f.curv(b, k) * deformed_normal.dot(f.con[k]);
    u[b] = v;
  }
  u[2] = zv[2] + t * deformed_normal.dot(f.cov[2]) - t;
  return u;
}

Vec3 KLLift::displacement(double x3) const {
  const SurfaceFrame& f = frame;
  Vec3 w = zeta.value[0] * f.con[0] + zeta.value[1] * f.con[1] + zeta.value[2] * f.con[2];
  return w + eps * x3 * (deformed_normal - f.cov[2]);
}

Vec3 KLLift::deformed_position(double x3) const {
  return frame.position + eps * x3 * frame.cov[2] + displacement(x3);
}

}  // namespace shellvi
