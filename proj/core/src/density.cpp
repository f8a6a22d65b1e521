#include "shellvi/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "shellvi/errors.hpp"

namespace shellvi {

Vec3 DiscreteSurfaceField::displacement(int n) const {
  const NodalFrame& f = frames[static_cast<std::size_t>(n)];
  const Vec3& v = values[static_cast<std::size_t>(n)];
  return v[0] * f.con[0] + v[1] * f.con[1] + v[2] * f.con[2];
}

std::vector<double> DiscreteSurfaceField::confinement(const HalfSpace& hs) const {
  std::vector<double> out(static_cast<std::size_t>(num_nodes()));
  for (int n = 0; n < num_nodes(); ++n)
    out[static_cast<std::size_t>(n)] = (frames[static_cast<std::size_t>(n)].position + displacement(n)).dot(hs.q);
  return out;
}

double DiscreteSurfaceField::min_confinement(const HalfSpace& hs) const {
  const std::vector<double> c = confinement(hs);
  return *std::min_element(c.begin(), c.end());
}

DiscreteSurfaceField make_field(const Mesh2D& mesh, const Chart& chart, std::vector<Vec3> values) {
  if (static_cast<int>(values.size()) != mesh.num_nodes())
    throw Error(ErrorKind::InvalidArgument, "field size does not match the mesh");
  DiscreteSurfaceField f;
  f.mesh = mesh;
  f.frames.resize(values.size());
  f.dist.resize(values.size());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const std::size_t s = static_cast<std::size_t>(n);
    if (!values[s].allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite field value");
    if (mesh.clamped[s] && values[s].norm() != 0.0)
      throw Error(ErrorKind::InvalidArgument, "clamped node carries a nonzero value");
    const SurfaceFrame fr = eval_frame(chart, mesh.y(n));
    f.frames[s].position = fr.position;
    f.frames[s].con = fr.con;
    f.dist[s] = chart.distance_to_clamped(mesh.y(n));
  }
  f.values = std::move(values);
  return f;
}

DiscreteSurfaceField field_from_membrane(const Mesh2D& mesh, const Chart& chart,
                                         const Eigen::VectorXd& membrane_full) {
  std::vector<Vec3> v(static_cast<std::size_t>(mesh.num_nodes()));
  for (int n = 0; n < mesh.num_nodes(); ++n) v[static_cast<std::size_t>(n)] = membrane_full.segment<3>(3 * n);
  return make_field(mesh, chart, std::move(v));
}

DiscreteSurfaceField with_values(const DiscreteSurfaceField& field, std::vector<Vec3> values) {
  DiscreteSurfaceField out = field;
  out.values = std::move(values);
  return out;
}

DiscreteSurfaceField truncate(const DiscreteSurfaceField& field, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "truncation level must be positive");
  std::vector<Vec3> v = field.values;
  for (int n = 0; n < field.num_nodes(); ++n) {
    const double u = field.displacement(n).norm();
    if (u > k) v[static_cast<std::size_t>(n)] *= k / u;
  }
  return with_values(field, std::move(v));
}

double cutoff_profile(double dist, double k) {
  if (dist <= 1.0 / k) return 0.0;
  if (dist < 2.0 / k) return k * dist - 1.0;
  return 1.0;
}

DiscreteSurfaceField cutoff(const DiscreteSurfaceField& field, double k) {
  if (!(k >= 1.0)) throw Error(ErrorKind::InvalidArgument, "cutoff level must be at least 1");
  std::vector<Vec3> v = field.values;
  for (std::size_t n = 0; n < v.size(); ++n) v[n] *= (1.0 - 1.0 / k) * cutoff_profile(field.dist[n], k);
  return with_values(field, std::move(v));
}

ReflectionExtension reflect_extend(const DiscreteSurfaceField& field, const HalfSpace& hs, int strip) {
  const Mesh2D& m = field.mesh;
  if (strip < 0 || strip > m.nx || strip > m.ny)
    throw Error(ErrorKind::ExtensionTooSmall, "reflection strip wider than the mesh");
  ReflectionExtension ext;
  ext.mesh = m;
  ext.strip = strip;
  const std::size_t total = static_cast<std::size_t>(ext.width() * (m.ny + 1 + 2 * strip));
  ext.values.assign(total, Vec3::Zero());
  ext.con_q.assign(total, Vec3::Zero());
  ext.pos_q.assign(total, 0.0);
  const EdgeSet edges = m.clamped_edges;
  for (int j = -strip; j <= m.ny + strip; ++j)
    for (int i = -strip; i <= m.nx + strip; ++i) {
      bool zero = false;
      int si = i, sj = j;
      if (i < 0) { si = -i; zero |= edges.contains(Edge::Left); }
      if (i > m.nx) { si = 2 * m.nx - i; zero |= edges.contains(Edge::Right); }
      if (j < 0) { sj = -j; zero |= edges.contains(Edge::Bottom); }
      if (j > m.ny) { sj = 2 * m.ny - j; zero |= edges.contains(Edge::Top); }
      const int src = m.node(si, sj);
      const NodalFrame& fr = field.frames[static_cast<std::size_t>(src)];
      const std::size_t e = ext.index(i, j);
      ext.values[e] = zero ? Vec3::Zero() : field.values[static_cast<std::size_t>(src)];
      ext.pos_q[e] = fr.position.dot(hs.q);
      for (int c = 0; c < 3; ++c) ext.con_q[e][c] = fr.con[static_cast<std::size_t>(c)].dot(hs.q);
    }
  return ext;
}

Mollifier make_mollifier(const Mesh2D& mesh, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidArgument, "mollifier level must be positive");
  Mollifier mo;
  const double r = 1.0 / k;
  mo.rx = std::max(1, static_cast<int>(std::lround(r / mesh.hx())));
  mo.ry = std::max(1, static_cast<int>(std::lround(r / mesh.hy())));
  mo.weights.assign(static_cast<std::size_t>((2 * mo.rx + 1) * (2 * mo.ry + 1)), 0.0);
  // Radii one cell beyond the snapped support so that the outer ring of
  // offsets still carries weight.
  const double Rx = mo.rx + 1.0, Ry = mo.ry + 1.0;
  double sum = 0.0;
  for (int b = -mo.ry; b <= mo.ry; ++b)
    for (int a = -mo.rx; a <= mo.rx; ++a) {
      const double s = (a / Rx) * (a / Rx) + (b / Ry) * (b / Ry);
      const double w = s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
      mo.weights[static_cast<std::size_t>((b + mo.ry) * (2 * mo.rx + 1) + (a + mo.rx))] = w;
      sum += w;
    }
  for (double& w : mo.weights) w /= sum;
  return mo;
}

DiscreteSurfaceField mollify(const DiscreteSurfaceField& field, const ReflectionExtension& ext,
                             double k) {
  const Mollifier mo = make_mollifier(field.mesh, k);
  if (mo.rx > ext.strip || mo.ry > ext.strip)
    throw Error(ErrorKind::ExtensionTooSmall, "mollifier radius exceeds the reflected strip");
  const Mesh2D& m = field.mesh;
  std::vector<Vec3> v(field.values.size(), Vec3::Zero());
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      const int n = m.node(i, j);
      if (m.clamped[static_cast<std::size_t>(n)]) continue;
      Vec3 acc = Vec3::Zero();
      for (int b = -mo.ry; b <= mo.ry; ++b)
        for (int a = -mo.rx; a <= mo.rx; ++a) {
          const double w = mo.weight(a, b);
          if (w != 0.0) acc += w * ext.values[ext.index(i + a, j + b)];
        }
      v[static_cast<std::size_t>(n)] = acc;
    }
  return with_values(field, std::move(v));
}

double mollify_margin_bound(const ReflectionExtension& ext, double k) {
  const Mesh2D& m = ext.mesh;
  const Mollifier mo = make_mollifier(m, k);
  if (mo.rx > ext.strip || mo.ry > ext.strip)
    throw Error(ErrorKind::ExtensionTooSmall, "mollifier radius exceeds the reflected strip");
  double min_ext = std::numeric_limits<double>::infinity();
  Vec3 max_eta = Vec3::Zero();
  for (int j = -mo.ry; j <= m.ny + mo.ry; ++j)
    for (int i = -mo.rx; i <= m.nx + mo.rx; ++i) {
      const std::size_t e = ext.index(i, j);
      min_ext = std::min(min_ext, ext.pos_q[e] + ext.values[e].dot(ext.con_q[e]));
      max_eta = max_eta.cwiseMax(ext.values[e].cwiseAbs());
    }
  double d_pos = 0.0;
  Vec3 d_con = Vec3::Zero();
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      if (m.clamped[static_cast<std::size_t>(m.node(i, j))]) continue;
      const std::size_t y = ext.index(i, j);
      for (int b = -mo.ry; b <= mo.ry; ++b)
        for (int a = -mo.rx; a <= mo.rx; ++a) {
          if (mo.weight(a, b) == 0.0) continue;
          const std::size_t z = ext.index(i + a, j + b);
          d_pos = std::max(d_pos, std::abs(ext.pos_q[y] - ext.pos_q[z]));
          d_con = d_con.cwiseMax((ext.con_q[y] - ext.con_q[z]).cwiseAbs());
        }
    }
  return min_ext - d_pos - max_eta.dot(d_con);
}

double h1_norm(const Mesh2D& mesh, const std::vector<Vec3>& values) {
  const GaussRule g = gauss01(2);
  const double hx = mesh.hx(), hy = mesh.hy();
  double sum = 0.0;
  for (int cj = 0; cj < mesh.ny; ++cj)
    for (int ci = 0; ci < mesh.nx; ++ci) {
      const auto nodes = mesh.cell_nodes(ci, cj);
      Vec3 v[4];
      for (int a = 0; a < 4; ++a) v[a] = values[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
      for (std::size_t p = 0; p < g.x.size(); ++p)
        for (std::size_t q = 0; q < g.x.size(); ++q) {
          const double s = g.x[p], t = g.x[q];
          const Vec3 val = (1 - s) * (1 - t) * v[0] + s * (1 - t) * v[1] + (1 - s) * t * v[2] + s * t * v[3];
          const Vec3 d1 = ((1 - t) * (v[1] - v[0]) + t * (v[3] - v[2])) / hx;
          const Vec3 d2 = ((1 - s) * (v[2] - v[0]) + s * (v[3] - v[1])) / hy;
          sum += g.w[p] * g.w[q] * hx * hy * (val.squaredNorm() + d1.squaredNorm() + d2.squaredNorm());
        }
    }
  return std::sqrt(sum);
}

double h1_distance(const DiscreteSurfaceField& a, const DiscreteSurfaceField& b) {
  std::vector<Vec3> d(a.values.size());
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = a.values[n] - b.values[n];
  return h1_norm(a.mesh, d);
}

double max_second_difference(const DiscreteSurfaceField& field) {
  const Mesh2D& m = field.mesh;
  const double hx2 = m.hx() * m.hx(), hy2 = m.hy() * m.hy();
  double out = 0.0;
  auto at = [&](int i, int j) -> const Vec3& { return field.values[static_cast<std::size_t>(m.node(i, j))]; };
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      if (i > 0 && i < m.nx)
        out = std::max(out, (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)).lpNorm<Eigen::Infinity>() / hx2);
      if (j > 0 && j < m.ny)
        out = std::max(out, (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)).lpNorm<Eigen::Infinity>() / hy2);
    }
  return out;
}

namespace {

bool cell_in_strip(const Mesh2D& m, int ci, int cj, double width) {
  const double tol = 1e-12 * std::max(m.bounds.width(), m.bounds.height());
  const EdgeSet e = m.clamped_edges;
  return (e.contains(Edge::Bottom) && (cj + 1) * m.hy() <= width + tol) ||
         (e.contains(Edge::Top) && (m.ny - cj) * m.hy() <= width + tol) ||
         (e.contains(Edge::Left) && (ci + 1) * m.hx() <= width + tol) ||
         (e.contains(Edge::Right) && (m.nx - ci) * m.hx() <= width + tol);
}

}  // namespace

double strip_poincare_ratio(const Mesh2D& mesh, double k, const std::vector<Eigen::VectorXd>& trials) {
  const GaussRule g = gauss01(4);
  const double width = 2.0 / k;
  double worst = 0.0;
  LocalBasis2D basis;
  for (const Eigen::VectorXd& xi : trials) {
    double l2 = 0.0, grad2 = 0.0;
    for (int cj = 0; cj < mesh.ny; ++cj)
      for (int ci = 0; ci < mesh.nx; ++ci) {
        if (!cell_in_strip(mesh, ci, cj, width)) continue;
        for (std::size_t p = 0; p < g.x.size(); ++p)
          for (std::size_t q = 0; q < g.x.size(); ++q) {
            eval_basis_2d(mesh, SpaceKind::Koiter2D, ci, cj, g.x[p], g.x[q], basis);
            double v = 0.0;
            Vec2 dv = Vec2::Zero();
            for (std::size_t d = 0; d < basis.dofs.size(); ++d) {
              const double c = xi[basis.dofs[d]];
              if (c == 0.0) continue;
              v += c * basis.jets[d].value[2];
              dv += c * basis.jets[d].grad.row(2).transpose();
            }
            const double w = g.w[p] * g.w[q] * mesh.hx() * mesh.hy();
            l2 += w * v * v;
            grad2 += w * dv.squaredNorm();
          }
      }
    if (l2 + grad2 <= 0.0) continue;
    worst = std::max(worst, k * std::sqrt(l2) / std::sqrt(l2 + grad2));
  }
  return worst;
}

std::vector<Eigen::VectorXd> random_clamped_fields(const Mesh2D& mesh, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int per = dofs_per_node(SpaceKind::Koiter2D);
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < count; ++t) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.num_nodes() * per);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      if (mesh.clamped[static_cast<std::size_t>(n)]) continue;
      for (int l = 2; l < per; ++l) v[n * per + l] = u(rng);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<DensityRow> run_density_pipeline(const DiscreteSurfaceField& field, const HalfSpace& hs,
                                             const std::vector<double>& ks, double d) {
  std::vector<DensityRow> rows;
  for (double k : ks) {
    DensityRow r;
    r.k = k;
    const DiscreteSurfaceField t = truncate(field, k);
    r.sup_bound_ok = true;
    for (int n = 0; n < t.num_nodes(); ++n)
      if (t.displacement(n).norm() > k * (1.0 + 1e-12)) r.sup_bound_ok = false;
    const DiscreteSurfaceField c = cutoff(t, k);
    const double km = 4.0 * k;
    const Mollifier mo = make_mollifier(field.mesh, km);
    const ReflectionExtension ext = reflect_extend(c, hs, std::max(mo.rx, mo.ry));
    const DiscreteSurfaceField m = mollify(c, ext, km);
    r.truncate_margin = t.min_confinement(hs);
    r.cutoff_margin = c.min_confinement(hs);
    r.cutoff_required = d / k;
    r.mollify_margin = m.min_confinement(hs);
    r.mollify_bound = mollify_margin_bound(ext, km);
    r.min_margin = std::min({r.truncate_margin, r.cutoff_margin, r.mollify_margin});
    r.truncate_h1 = h1_distance(t, field);
    r.cutoff_h1 = h1_distance(c, field);
    r.h1_distance = h1_distance(m, field);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace shellvi
