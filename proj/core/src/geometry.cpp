#include "shellvi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "shellvi/errors.hpp"

namespace shellvi {

EdgeSet::EdgeSet(std::initializer_list<Edge> edges) {
  for (Edge e : edges) insert(e);
}

EdgeSet EdgeSet::parse(const std::string& text) {
  EdgeSet out;
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    if (tok == "bottom") out.insert(Edge::Bottom);
    else if (tok == "right") out.insert(Edge::Right);
    else if (tok == "top") out.insert(Edge::Top);
    else if (tok == "left") out.insert(Edge::Left);
    else throw Error(ErrorKind::Config, "unknown edge '" + tok + "'");
  }
  return out;
}

std::string EdgeSet::to_string() const {
  std::string out;
  auto add = [&](Edge e, const char* n) {
    if (!contains(e)) return;
    if (!out.empty()) out += ",";
    out += n;
  };
  add(Edge::Bottom, "bottom");
  add(Edge::Right, "right");
  add(Edge::Top, "top");
  add(Edge::Left, "left");
  return out;
}

Chart::Chart(std::string name, Rect domain, EdgeSet clamped, JetFn jet)
    : name_(std::move(name)), domain_(domain), clamped_(clamped), jet_(std::move(jet)) {}

double Chart::distance_to_clamped(const Vec2& y) const {
  double d = std::numeric_limits<double>::infinity();
  if (clamped_.contains(Edge::Bottom)) d = std::min(d, y[1] - domain_.y2min);
  if (clamped_.contains(Edge::Top)) d = std::min(d, domain_.y2max - y[1]);
  if (clamped_.contains(Edge::Left)) d = std::min(d, y[0] - domain_.y1min);
  if (clamped_.contains(Edge::Right)) d = std::min(d, domain_.y1max - y[0]);
  return std::max(d, 0.0);
}

namespace {

// Fills d3 from its four distinct entries d111, d112, d122, d222.
void fill_third(ChartJet& j, const Vec3& d111, const Vec3& d112, const Vec3& d122,
                const Vec3& d222) {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        switch (a + b + c) {
          case 0: j.d3[a][b][c] = d111; break;
          case 1: j.d3[a][b][c] = d112; break;
          case 2: j.d3[a][b][c] = d122; break;
          default: j.d3[a][b][c] = d222; break;
        }
      }
}

ChartJet plate_jet(double y1, double y2) {
  ChartJet j;
  j.x = Vec3(y1, y2, 0.0);
  j.d1[0] = Vec3::UnitX();
  j.d1[1] = Vec3::UnitY();
  for (auto& r : j.d2) r.fill(Vec3::Zero());
  fill_third(j, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  return j;
}

ChartJet sphere_jet(double y1, double y2) {
  const double c1 = std::cos(y1), s1 = std::sin(y1), c2 = std::cos(y2), s2 = std::sin(y2);
  ChartJet j;
  j.x = Vec3(c1 * s2, s1 * s2, c2);
  j.d1[0] = Vec3(-s1 * s2, c1 * s2, 0.0);
  j.d1[1] = Vec3(c1 * c2, s1 * c2, -s2);
  j.d2[0][0] = Vec3(-c1 * s2, -s1 * s2, 0.0);
  j.d2[0][1] = j.d2[1][0] = Vec3(-s1 * c2, c1 * c2, 0.0);
  j.d2[1][1] = Vec3(-c1 * s2, -s1 * s2, -c2);
  fill_third(j, Vec3(s1 * s2, -c1 * s2, 0.0), Vec3(-c1 * c2, -s1 * c2, 0.0),
             Vec3(s1 * s2, -c1 * s2, 0.0), Vec3(-c1 * c2, -s1 * c2, s2));
  return j;
}

ChartJet cylinder_jet(double y1, double y2) {
  const double c1 = std::cos(y1), s1 = std::sin(y1);
  ChartJet j;
  j.x = Vec3(c1, y2, s1);
  j.d1[0] = Vec3(-s1, 0.0, c1);
  j.d1[1] = Vec3(0.0, 1.0, 0.0);
  j.d2[0][0] = Vec3(-c1, 0.0, -s1);
  j.d2[0][1] = j.d2[1][0] = Vec3::Zero();
  j.d2[1][1] = Vec3::Zero();
  fill_third(j, Vec3(s1, 0.0, -c1), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  return j;
}

ChartJet hyperboloid_jet(double y1, double y2) {
  const double c1 = std::cos(y1), s1 = std::sin(y1);
  const double r = std::sqrt(1.0 + y2 * y2);
  const double r1 = y2 / r;
  const double r2 = 1.0 / (r * r * r);
  const double r3 = -3.0 * y2 / (r * r * r * r * r);
  ChartJet j;
  j.x = Vec3(r * c1, r * s1, y2);
  j.d1[0] = Vec3(-r * s1, r * c1, 0.0);
  j.d1[1] = Vec3(r1 * c1, r1 * s1, 1.0);
  j.d2[0][0] = Vec3(-r * c1, -r * s1, 0.0);
  j.d2[0][1] = j.d2[1][0] = Vec3(-r1 * s1, r1 * c1, 0.0);
  j.d2[1][1] = Vec3(r2 * c1, r2 * s1, 0.0);
  fill_third(j, Vec3(r * s1, -r * c1, 0.0), Vec3(-r1 * c1, -r1 * s1, 0.0),
             Vec3(-r2 * s1, r2 * c1, 0.0), Vec3(r3 * c1, r3 * s1, 0.0));
  return j;
}

ChartJet swapped(const ChartJet& in) {
  ChartJet j;
  j.x = in.x;
  for (int a = 0; a < 2; ++a) {
    j.d1[a] = in.d1[1 - a];
    for (int b = 0; b < 2; ++b) {
      j.d2[a][b] = in.d2[1 - a][1 - b];
      for (int c = 0; c < 2; ++c) j.d3[a][b][c] = in.d3[1 - a][1 - b][1 - c];
    }
  }
  return j;
}

bool inside(double lo, double hi, double a, double b) {
  constexpr double tol = 1e-12;
  return a >= lo - tol && b <= hi + tol;
}

}  // namespace

Chart builtin_chart(const std::string& name, const Rect& bounds, EdgeSet clamped,
                    const ChartOptions& options) {
  if (!(bounds.y1min < bounds.y1max) || !(bounds.y2min < bounds.y2max) ||
      !std::isfinite(bounds.y1min) || !std::isfinite(bounds.y1max) ||
      !std::isfinite(bounds.y2min) || !std::isfinite(bounds.y2max))
    throw Error(ErrorKind::InvalidBounds, "empty or non-finite rectangle");

  // Admissible ranges are stated in the unswapped coordinates.
  Rect r = bounds;
  if (options.swap) r = Rect{bounds.y2min, bounds.y2max, bounds.y1min, bounds.y1max};

  constexpr double pi = std::numbers::pi;
  ChartJet (*fn)(double, double) = nullptr;
  if (name == "plate") {
    fn = &plate_jet;
  } else if (name == "sphere_cap") {
    if (!inside(0.0, pi, r.y1min, r.y1max) || !inside(0.1, pi / 2, r.y2min, r.y2max) ||
        r.y2max >= pi / 2)
      throw Error(ErrorKind::InvalidBounds, "sphere_cap needs [0,pi]x[0.1,c*pi/2], c<1");
    fn = &sphere_jet;
  } else if (name == "cylinder") {
    if (!inside(0.1, pi - 0.1, r.y1min, r.y1max) || !inside(0.0, 2.0, r.y2min, r.y2max))
      throw Error(ErrorKind::InvalidBounds, "cylinder needs [0.1,pi-0.1]x[0,2]");
    fn = &cylinder_jet;
  } else if (name == "hyperboloid") {
    if (!inside(0.1, pi - 0.1, r.y1min, r.y1max) || !inside(-2.0, 2.0, r.y2min, r.y2max))
      throw Error(ErrorKind::InvalidBounds, "hyperboloid needs [0.1,pi-0.1]x[-2,2]");
    fn = &hyperboloid_jet;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown chart '" + name + "'");
  }

  const Vec3 offset = options.offset;
  const bool swap = options.swap;
  Chart::JetFn jet = [fn, offset, swap](double y1, double y2) {
    ChartJet j = swap ? swapped(fn(y2, y1)) : fn(y1, y2);
    j.x += offset;
    return j;
  };
  Chart chart(name, bounds, clamped, std::move(jet));
  validate_chart(chart, 50);
  return chart;
}

Vec2 grid_point(const Rect& r, int n1, int n2, int i, int j) {
  return Vec2(r.y1min + i * (r.y1max - r.y1min) / n1, r.y2min + j * (r.y2max - r.y2min) / n2);
}

void validate_chart(const Chart& chart, int n) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const ChartJet jet = chart.jet(grid_point(chart.domain(), n, n, i, j));
      if (jet.d1[0].cross(jet.d1[1]).norm() < 1e-12)
        throw Error(ErrorKind::InvalidBounds, "chart is not an immersion on the rectangle");
      pts.push_back(jet.x);
    }
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      if ((pts[a] - pts[b]).squaredNorm() < 1e-20)
        throw Error(ErrorKind::InvalidBounds, "chart is not injective on the rectangle");
}

SurfaceFrame eval_frame(const Chart& chart, const Vec2& y) {
  const ChartJet j = chart.jet(y);
  SurfaceFrame f;
  f.y = y;
  f.position = j.x;
  const Vec3 n = j.d1[0].cross(j.d1[1]);
  const double nn = n.norm();
  if (!(nn >= 1e-12)) throw Error(ErrorKind::DegenerateFrame, "|a_1 x a_2| below 1e-12");
  f.cov[0] = j.d1[0];
  f.cov[1] = j.d1[1];
  f.cov[2] = n / nn;

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) f.metric(a, b) = f.cov[a].dot(f.cov[b]);
  f.det_metric = f.metric.determinant();
  f.sqrt_det = std::sqrt(f.det_metric);
  f.metric_inv = f.metric.inverse();
  for (int a = 0; a < 2; ++a)
    f.con[a] = f.metric_inv(a, 0) * f.cov[0] + f.metric_inv(a, 1) * f.cov[1];
  f.con[2] = f.cov[2];

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) f.curv(a, b) = j.d2[a][b].dot(f.cov[2]);
  f.curv_mixed = f.metric_inv * f.curv;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) f.christoffel[s](a, b) = j.d2[a][b].dot(f.con[s]);

  // d_a b^t_b = (d_a a^{ts}) b_{sb} + a^{ts} d_a b_{sb}, with the Weingarten
  // relation d_a a_3 = -b_{am} a^m.
  for (int a = 0; a < 2; ++a) {
    Mat2 dmetric;
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k)
        dmetric(m, k) = j.d2[a][m].dot(f.cov[k]) + f.cov[m].dot(j.d2[a][k]);
    const Mat2 dinv = -f.metric_inv * dmetric * f.metric_inv;
    const Vec3 da3 = -(f.curv(a, 0) * f.con[0] + f.curv(a, 1) * f.con[1]);
    Mat2 dcurv;
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < 2; ++b)
        dcurv(s, b) = j.d3[a][s][b].dot(f.cov[2]) + j.d2[s][b].dot(da3);
    f.curv_mixed_deriv[a] = dinv * f.curv + f.metric_inv * dcurv;
  }
  return f;
}

Mat2 gamma(const SurfaceFrame& f, const SurfaceDisplacementSample& s) {
  Mat2 g;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = 0.5 * (s.grad(a, b) + s.grad(b, a));
      for (int k = 0; k < 2; ++k) v -= f.christoffel[k](a, b) * s.value[k];
      v -= f.curv(a, b) * s.value[2];
      g(a, b) = v;
    }
  return g;
}

Mat2 rho(const SurfaceFrame& f, const SurfaceDisplacementSample& s) {
  const auto& G = f.christoffel;
  const Mat2& bm = f.curv_mixed;  // bm(s, a) = b^s_a
  const Vec3& e = s.value;
  Mat2 r;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = s.hess3(a, b);
      for (int k = 0; k < 2; ++k) {
        v -= G[k](a, b) * s.grad(2, k);
        v -= bm(k, a) * f.curv(k, b) * e[2];
      }
      for (int k = 0; k < 2; ++k) {
        double cb = s.grad(k, b);
        double ca = s.grad(k, a);
        for (int t = 0; t < 2; ++t) {
          cb -= G[t](b, k) * e[t];
          ca -= G[t](a, k) * e[t];
        }
        v += bm(k, a) * cb + bm(k, b) * ca;
      }
      for (int t = 0; t < 2; ++t) {
        double c = f.curv_mixed_deriv[a](t, b);
        for (int k = 0; k < 2; ++k) c += G[t](a, k) * bm(k, b) - G[k](a, b) * bm(t, k);
        v += c * e[t];
      }
      r(a, b) = v;
    }
  return r;
}

HalfSpace::HalfSpace(const Vec3& q_in) : q(q_in) {
  if (!(std::abs(q.norm() - 1.0) <= 1e-12))
    throw Error(ErrorKind::InvalidArgument, "half-space normal must be a unit vector");
}

double confinement_margin(const Chart& chart, const HalfSpace& hs, int n) {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m = std::min(m, chart.position(grid_point(chart.domain(), n, n, i, j)).dot(hs.q));
  return m;
}

double normal_alignment(const Chart& chart, const HalfSpace& hs, int n) {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const ChartJet jet = chart.jet(grid_point(chart.domain(), n, n, i, j));
      const Vec3 nrm = jet.d1[0].cross(jet.d1[1]);
      m = std::min(m, nrm.dot(hs.q) / nrm.norm());
    }
  return m;
}

}  // namespace shellvi
