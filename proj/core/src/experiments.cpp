#include "shellvi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "shellvi/errors.hpp"

namespace shellvi {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double clock_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

HypothesisReport check_geometry_hypotheses(const Chart& chart, const HalfSpace& hs) {
  HypothesisReport h;
  h.alignment = normal_alignment(chart, hs);
  if (!(h.alignment > 0.0))
    throw Error(ErrorKind::HypothesisFailed,
                "hypothesis (dpcmp) failed: min a_3 . q = " + num(h.alignment));
  h.margin = confinement_margin(chart, hs);
  if (!(h.margin > 0.0))
    throw Error(ErrorKind::HypothesisFailed,
                "hypothesis (margin) failed: min theta . q = " + num(h.margin));
  return h;
}

double smallest_generalized_eigenvalue(const SparseMatrix& A, const SparseMatrix& B, int* iterations,
                                       int block, int max_iterations) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty eigenvalue problem");
  const int p = std::min(block, n);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "factorization failed in inverse iteration");
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = u(rng);
  double prev = std::numeric_limits<double>::infinity();
  int stable = 0;
  double norm_a = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator e(A, k); e; ++e) col += std::abs(e.value());
    norm_a = std::max(norm_a, col);
  }
  // Residuals below this are roundoff in A x.
  const double floor_a = 100.0 * std::numeric_limits<double>::epsilon() * norm_a;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd BX = B * X;
    Eigen::MatrixXd Y(n, p);
    for (int j = 0; j < p; ++j) Y.col(j) = ldlt.solve(BX.col(j));
    // Orthonormalise the block to keep the projected problem well conditioned.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Y = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd Ar = Y.transpose() * (A * Y);
    const Eigen::MatrixXd Br = Y.transpose() * (B * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ar + Ar.transpose()),
                                                                 0.5 * (Br + Br.transpose()));
    if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenSolverStall, "projected eigenproblem failed");
    const double lam = es.eigenvalues()[0];
    X = Y * es.eigenvectors();
    // The eigenvalue error is quadratic in the Ritz residual.
    const Eigen::VectorXd Ax = A * X.col(0);
    const double res = (Ax - lam * (B * X.col(0))).norm();
    const double xn = X.col(0).norm();
    if (res <= std::max(1e-8 * Ax.norm(), floor_a * xn) || std::abs(lam - prev) <= 1e-11 * std::abs(lam)) {
      if (++stable >= 3) {
        if (iterations) *iterations = it;
        return lam;
      }
    } else {
      stable = 0;
    }
    prev = lam;
  }
  throw Error(ErrorKind::EigenSolverStall, "inverse iteration did not converge");
}

std::string SweepReport::csv() const {
  std::ostringstream os;
  os << "eps,gap,energy3d,active3d,iterations3d,kkt3d";
  if (koiter) os << ",koiter_gap,koiter_gap_mean,koiter_gap_space,active_koiter,iterations_koiter,kkt_koiter";
  os << ",certified\n";
  for (const SweepRow& r : rows) {
    os << num(r.eps) << ',' << num(r.gap) << ',' << num(r.energy3d) << ',' << r.active3d << ','
       << r.iterations3d << ',' << num(r.kkt3d);
    if (koiter)
      os << ',' << num(r.koiter_gap) << ',' << num(r.koiter_gap_mean) << ',' << num(r.koiter_gap_space)
         << ',' << r.active_koiter << ',' << r.iterations_koiter << ',' << num(r.kkt_koiter);
    os << ',' << (r.certified ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

void drop_constraints(AssembledSystem& s, bool obstacle) {
  if (!obstacle) s.qp.constraints.rows.clear();
}

int count_active(const VISolution& s) { return static_cast<int>(s.active.size()); }

}  // namespace

SweepReport run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
  const Chart chart = cfg.make_chart();
  const HalfSpace hs(cfg.q);
  SweepReport rep;
  rep.koiter = opts.koiter;
  rep.hypotheses = check_geometry_hypotheses(chart, hs);
  const Mesh2D mesh = build_mesh2d(cfg.bounds, cfg.nx, cfg.ny, cfg.clamped);
  rep.nodes2d = mesh.num_nodes() - mesh.num_clamped();
  const ForceField force = cfg.force();

  AssembledSystem lim = assemble_membrane_system(mesh, chart, cfg.lame, force, hs);
  drop_constraints(lim, cfg.obstacle);
  {
    SparseMatrix I(lim.gram.rows(), lim.gram.cols());
    I.setIdentity();
    double first = 0.0;
    try {
      first = smallest_generalized_eigenvalue(lim.gram, I);
    } catch (const Error&) {
      first = 0.0;
    }
    rep.hypotheses.first_kind = first;
    const double scale = lim.gram.diagonal().cwiseAbs().maxCoeff();
    if (!(first > 1e-12 * scale))
      throw Error(ErrorKind::HypothesisFailed,
                  "hypothesis (first kind) failed: smallest membrane Gram eigenvalue " + num(first));
  }
  const VISolution zeta = solve_vi(lim.qp, cfg.solver);
  rep.active_limit = count_active(zeta);
  rep.kkt_limit = zeta.kkt_residual;
  rep.certified = zeta.certified;
  const Eigen::VectorXd zeta_full = lim.dofs.expand(zeta.x);

  Eigen::VectorXd zeta_k_full;
  if (opts.koiter) {
    AssembledSystem limk = assemble_membrane_system(mesh, chart, cfg.lame, force, hs, SpaceKind::Koiter2D);
    drop_constraints(limk, cfg.obstacle);
    const VISolution zk = solve_vi(limk.qp, cfg.solver);
    rep.kkt_limit_koiter = zk.kkt_residual;
    rep.certified = rep.certified && zk.certified;
    zeta_k_full = limk.dofs.expand(zk.x);
  }

  const SpaceKind M = SpaceKind::Membrane2D, K = SpaceKind::Koiter2D;
  for (double eps : cfg.eps) {
    SweepRow row;
    row.eps = eps;
    const double t0 = clock_seconds();
    Eigen::VectorXd mean_full;
    if (opts.three_d) {
      const Mesh3D m3 = build_mesh3d(mesh, cfg.nz);
      AssembledSystem s3 = assemble_3d_system(m3, chart, cfg.lame, eps, force, hs, cfg.options3d);
      drop_constraints(s3, cfg.obstacle);
      const VISolution u = solve_vi(s3.qp, cfg.solver);
      mean_full = averaging_matrix(m3, cfg.averaging) * s3.dofs.expand(u.x);
      row.gap = seminorm_difference(mesh, chart, M, mean_full, M, zeta_full);
      row.energy3d = u.energy;
      row.active3d = count_active(u);
      row.iterations3d = u.iterations;
      row.kkt3d = u.kkt_residual;
      row.certified = row.certified && u.certified;
    }
    if (opts.koiter) {
      AssembledSystem sk = assemble_koiter_system(mesh, chart, cfg.lame, eps, force, hs);
      drop_constraints(sk, cfg.obstacle);
      const VISolution zk = solve_vi(sk.qp, cfg.solver);
      const Eigen::VectorXd zk_full = sk.dofs.expand(zk.x);
      row.koiter_gap_space = seminorm_difference(mesh, chart, K, zk_full, K, zeta_k_full);
      row.koiter_gap = seminorm_difference(mesh, chart, K, zk_full, M, zeta_full);
      if (opts.three_d) row.koiter_gap_mean = seminorm_difference(mesh, chart, K, zk_full, M, mean_full);
      row.active_koiter = count_active(zk);
      row.iterations_koiter = zk.iterations;
      row.kkt_koiter = zk.kkt_residual;
      row.certified = row.certified && zk.certified;
    }
    row.seconds = clock_seconds() - t0;
    rep.certified = rep.certified && row.certified;
    rep.rows.push_back(row);
  }
  return rep;
}

SweepReport run_koiter_compare(const ExperimentConfig& cfg) {
  return run_sweep(cfg, SweepOptions{true, true});
}

std::string KornReport::csv() const {
  std::ostringstream os;
  os << "chart,eps,eigenvalue,iterations,slope\n";
  for (const KornRow& r : rows)
    os << chart << ',' << num(r.eps) << ',' << num(r.eigenvalue) << ',' << r.iterations << ',' << num(slope) << '\n';
  return os.str();
}

KornReport run_korn_probe(const ExperimentConfig& cfg) {
  const Chart chart = cfg.make_chart();
  const Mesh2D base = build_mesh2d(cfg.bounds, cfg.korn_nx, cfg.korn_ny, cfg.clamped);
  const Mesh3D m3 = build_mesh3d(base, cfg.korn_nz);
  const DofMap dofs = make_dof_map(m3);
  const SparseMatrix B = restrict_matrix(assemble_h1_gram_3d(m3), dofs, dofs);
  KornReport rep;
  rep.chart = chart.name();
  Options3D opts = cfg.options3d;
  opts.assumed_membrane = cfg.korn_assumed_membrane;
  std::vector<double> eps, lam;
  for (double e : cfg.korn_eps) {
    const SparseMatrix A = restrict_matrix(assemble_strain_gram_3d(m3, chart, e, opts), dofs, dofs);
    KornRow r;
    r.eps = e;
    r.eigenvalue = smallest_generalized_eigenvalue(A, B, &r.iterations);
    if (!(r.eigenvalue > 0.0)) throw Error(ErrorKind::EigenSolverStall, "non-positive Korn eigenvalue");
    rep.rows.push_back(r);
    eps.push_back(e);
    lam.push_back(r.eigenvalue);
  }
  rep.slope = fitted_slope(eps, lam);
  return rep;
}

std::string SignoriniReport::json() const {
  std::ostringstream os;
  os << "{\n"
     << "  \"fields\": " << fields << ",\n"
     << "  \"points\": " << points << ",\n"
     << "  \"counterexamples\": " << counterexamples << ",\n"
     << "  \"infeasible_points\": " << infeasible_points << ",\n"
     << "  \"feasible_fields\": " << feasible_fields << ",\n"
     << "  \"average_violations\": " << average_violations << ",\n"
     << "  \"average_beta_error\": " << num(average_beta_error) << ",\n"
     << "  \"average_beta_error_printed_coefficient\": " << num(average_beta_error_printed) << ",\n"
     << "  \"average_3_error\": " << num(average_3_error) << ",\n"
     << "  \"ok\": " << (ok() ? "true" : "false") << "\n}\n";
  return os.str();
}

namespace {

// Random quadratic polynomial field in normalised coordinates.
struct PolyField {
  std::array<std::array<double, 6>, 3> c{};  // per component: 1, s, t, s^2, s t, t^2

  SurfaceDisplacementSample sample(const Rect& r, const Vec2& y) const {
    const double w = r.width(), h = r.height();
    const double s = (y[0] - r.y1min) / w, t = (y[1] - r.y2min) / h;
    SurfaceDisplacementSample out;
    for (int i = 0; i < 3; ++i) {
      const auto& k = c[static_cast<std::size_t>(i)];
      out.value[i] = k[0] + k[1] * s + k[2] * t + k[3] * s * s + k[4] * s * t + k[5] * t * t;
      out.grad(i, 0) = (k[1] + 2 * k[3] * s + k[4] * t) / w;
      out.grad(i, 1) = (k[2] + k[4] * s + 2 * k[5] * t) / h;
      if (i == 2) out.hess3 << 2 * k[3] / (w * w), k[4] / (w * h), k[4] / (w * h), 2 * k[5] / (h * h);
    }
    return out;
  }
};

}  // namespace

SignoriniReport run_signorini_check(const ExperimentConfig& cfg) {
  const Chart chart = cfg.make_chart();
  const HalfSpace hs(cfg.q);
  const Rect& r = chart.domain();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), u01(0.0, 1.0);
  constexpr int grid = 10, layers = 20;
  SignoriniReport rep;
  for (int f = 0; f < cfg.samples; ++f) {
    PolyField pf;
    const double amp = cfg.amplitude * u01(rng);
    for (auto& comp : pf.c)
      for (double& v : comp) v = amp * u(rng);
    const double eps = cfg.eps[static_cast<std::size_t>(f) % cfg.eps.size()];
    ++rep.fields;
    bool field_ok = true;
    std::vector<KLLift> lifts;
    for (int j = 0; j <= grid; ++j)
      for (int i = 0; i <= grid; ++i) {
        const Vec2 y = grid_point(r, grid, grid, i, j);
        const SurfaceFrame fr = eval_frame(chart, y);
        const KLLift lift = kl_lift(fr, pf.sample(r, y), eps);
        bool full = true;
        for (int k = 0; k <= layers; ++k) {
          const double x3 = -1.0 + 2.0 * k / layers;
          if (lift.deformed_position(x3).dot(hs.q) < -1e-12) full = false;
        }
        const bool faces = lift.deformed_position(-1.0).dot(hs.q) >= -1e-12 &&
                           lift.deformed_position(1.0).dot(hs.q) >= -1e-12;
        ++rep.points;
        if (full != faces) ++rep.counterexamples;
        if (!faces) {
          ++rep.infeasible_points;
          field_ok = false;
        }
        // Transverse averages of the covariant components u_i = u . g_i(eps).
        const auto comp = [&](double x3) {
          const ShellFrame sf = eval_shell_frame(fr, eps, x3);
          const Vec3 d = lift.displacement(x3);
          return Vec3(d.dot(sf.cov[0]), d.dot(sf.cov[1]), d.dot(sf.cov[2]));
        };
        const Vec3 mean = transverse_average(comp);
        const Vec3 mid = comp(0.0);
        for (int b = 0; b < 2; ++b) {
          double corr = 0.0;
          for (int t = 0; t < 2; ++t) corr += fr.curv(b, t) * lift.deformed_normal.dot(fr.con[static_cast<std::size_t>(t)]);
          const double scale = std::max(1.0, std::abs(mean[b]));
          rep.average_beta_error =
              std::max(rep.average_beta_error, std::abs(mean[b] - (mid[b] - eps * eps * corr / 3.0)) / scale);
          rep.average_beta_error_printed = std::max(
              rep.average_beta_error_printed, std::abs(mean[b] - (mid[b] - 2.0 * eps * eps * corr / 3.0)) / scale);
        }
        rep.average_3_error = std::max(rep.average_3_error, std::abs(mean[2] - mid[2]) / std::max(1.0, std::abs(mean[2])));
        lifts.push_back(lift);
      }
    if (!field_ok) continue;
    ++rep.feasible_fields;
    for (const KLLift& lift : lifts) {
      const ShellFrame s0 = eval_shell_frame(lift.frame, lift.eps, 0.0);
      const auto comp = [&](double x3) {
        const ShellFrame sf = eval_shell_frame(lift.frame, lift.eps, x3);
        const Vec3 d = lift.displacement(x3);
        return Vec3(d.dot(sf.cov[0]), d.dot(sf.cov[1]), d.dot(sf.cov[2]));
      };
      const Vec3 mean = transverse_average(comp);
      Vec3 pos = lift.frame.position;
      for (int i = 0; i < 3; ++i) pos += mean[i] * s0.con[static_cast<std::size_t>(i)];
      if (pos.dot(hs.q) < -1e-12) {
        ++rep.average_violations;
        break;
      }
    }
  }
  return rep;
}

DiscreteSurfaceField density_trial_field(const Mesh2D& mesh, const Chart& chart, double amplitude) {
  std::vector<Vec3> v(static_cast<std::size_t>(mesh.num_nodes()), Vec3::Zero());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.clamped[static_cast<std::size_t>(n)]) continue;
    const double s = static_cast<double>(mesh.node_i(n)) / mesh.nx;
    const double t = static_cast<double>(mesh.node_j(n)) / mesh.ny;
    v[static_cast<std::size_t>(n)][2] = -amplitude * std::sin(std::numbers::pi * s) * std::sin(std::numbers::pi * t);
  }
  return make_field(mesh, chart, std::move(v));
}

std::string DensityReport::csv() const {
  std::ostringstream os;
  os << "k,h1_distance,min_margin,sup_bound_check,cutoff_margin,cutoff_required,mollify_margin,"
        "mollify_bound,truncate_h1,cutoff_h1,poincare_ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DensityRow& r = rows[i];
    os << num(r.k) << ',' << num(r.h1_distance) << ',' << num(r.min_margin) << ',' << (r.sup_bound_ok ? 1 : 0)
       << ',' << num(r.cutoff_margin) << ',' << num(r.cutoff_required) << ',' << num(r.mollify_margin) << ','
       << num(r.mollify_bound) << ',' << num(r.truncate_h1) << ',' << num(r.cutoff_h1) << ','
       << num(i < poincare.size() ? poincare[i] : 0.0) << '\n';
  }
  return os.str();
}

DensityReport run_density(const ExperimentConfig& cfg, int poincare_trials) {
  const Chart chart = cfg.make_chart();
  const HalfSpace hs(cfg.q);
  check_geometry_hypotheses(chart, hs);
  const Mesh2D mesh = build_mesh2d(cfg.bounds, cfg.nx, cfg.ny, cfg.clamped);
  const DiscreteSurfaceField field = density_trial_field(mesh, chart, cfg.density_amplitude);
  if (field.min_confinement(hs) < 0.0)
    throw Error(ErrorKind::InvalidArgument, "density trial field violates the obstacle; lower density_amplitude");
  DensityReport rep;
  rep.margin = confinement_margin(chart, hs);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    rep.margin = std::min(rep.margin, field.frames[static_cast<std::size_t>(n)].position.dot(hs.q));
  rep.rows = run_density_pipeline(field, hs, cfg.density_k, rep.margin);
  const std::vector<Eigen::VectorXd> trials = random_clamped_fields(mesh, poincare_trials, cfg.seed);
  for (double k : cfg.density_k) rep.poincare.push_back(strip_poincare_ratio(mesh, k, trials));
  return rep;
}

std::string geometry_csv(const Chart& chart, const HalfSpace& hs, int n) {
  std::ostringstream os;
  os << "y1,y2,x,y,z,sqrt_a,a3_dot_q,theta_dot_q,b11,b12,b22\n";
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const SurfaceFrame f = eval_frame(chart, grid_point(chart.domain(), n, n, i, j));
      os << num(f.y[0]) << ',' << num(f.y[1]) << ',' << num(f.position[0]) << ',' << num(f.position[1]) << ','
         << num(f.position[2]) << ',' << num(f.sqrt_det) << ',' << num(f.cov[2].dot(hs.q)) << ','
         << num(f.position.dot(hs.q)) << ',' << num(f.curv(0, 0)) << ',' << num(f.curv(0, 1)) << ','
         << num(f.curv(1, 1)) << '\n';
    }
  return os.str();
}

std::string expansion_csv(const Chart& chart, const Lame& lame, const std::vector<double>& eps) {
  std::ostringstream os;
  os << "quantity,eps,residual,slope\n";
  for (const ExpansionResidual& r : expansion_residuals(chart, lame, eps))
    for (std::size_t i = 0; i < r.eps.size(); ++i)
      os << r.quantity << ',' << num(r.eps[i]) << ',' << num(r.residual[i]) << ',' << num(r.slope) << '\n';
  return os.str();
}

}  // namespace shellvi
