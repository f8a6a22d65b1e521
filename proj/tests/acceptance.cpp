// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: shellvi_acceptance [config_dir]

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "shellvi/experiments.hpp"
#include "shellvi/shell3d.hpp"

namespace {

using namespace shellvi;
namespace t = shellvi::testing;

std::string config_dir = SHELLVI_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig load(const std::string& name) {
  return experiment_config(Config::load(config_dir + "/" + name));
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4g", x);
  return s;
}

Outcome geometry_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (const std::string& name : t::builtin_names()) {
    const Chart c = builtin_chart(name, t::builtin_bounds(name), EdgeSet{Edge::Bottom});
    for (int k = 0; k < 100; ++k) worst = std::max(worst, t::frame_discrepancy(c, t::random_point(c.domain(), rng)));
  }
  const double s = seconds_since(t0);
  return {worst < 1e-6 && s < 5.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", s) + " s"};
}

Outcome expansions() {
  const std::vector<double> eps{1e-1, 1e-2, 1e-3};
  const Lame l{1, 1};
  const Chart cyl = builtin_chart("cylinder", t::builtin_bounds("cylinder"), EdgeSet{Edge::Bottom});
  double sA = 0, sg = 0, sG = 0;
  for (const ExpansionResidual& r : expansion_residuals(cyl, l, eps)) {
    if (r.quantity == "A") sA = r.slope;
    if (r.quantity == "g") sg = r.slope;
    if (r.quantity == "christoffel_s_a3") sG = r.slope;
  }
  double plate_max = 0.0;
  const Chart plate = builtin_chart("plate", t::builtin_bounds("plate"), EdgeSet{Edge::Bottom});
  for (const ExpansionResidual& r : expansion_residuals(plate, l, eps))
    for (double v : r.residual) plate_max = std::max(plate_max, std::abs(v));
  const bool ok = sA >= 0.9 && sA <= 1.1 && sg >= 0.9 && sg <= 1.1 && sG >= 1.8 && sG <= 2.2 && plate_max == 0.0;
  return {ok, "slopes A " + fmt("%.3f", sA) + ", g " + fmt("%.3f", sg) + ", christoffel " + fmt("%.3f", sG) +
                  "; plate max residual " + fmt("%.1e", plate_max)};
}

Outcome coercivity() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double min_eig = std::numeric_limits<double>::infinity();
  bool zero_blocks = true;
  const Lame l{1.0, 1.0};
  for (int k = 0; k < 500; ++k) {
    const std::string& name = t::builtin_names()[static_cast<std::size_t>(k % 4)];
    const Chart c = builtin_chart(name, t::builtin_bounds(name), EdgeSet{Edge::Bottom});
    const SurfaceFrame f = eval_frame(c, t::random_point(c.domain(), rng));
    const double eps = 1e-3 + (0.2 - 1e-3) * u(rng), x3 = 2.0 * u(rng) - 1.0;
    const ElasticityTensor A = elasticity_tensor(eval_shell_frame(f, eps, x3), l);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat6>(A.pairs).eigenvalues().minCoeff());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        for (int s = 0; s < 2; ++s) zero_blocks = zero_blocks && A(a, b, s, 2) == 0.0;
        zero_blocks = zero_blocks && A(a, 2, 2, 2) == 0.0;
      }
  }
  return {min_eig > 0.0 && zero_blocks,
          "min eigenvalue " + fmt("%.4g", min_eig) + ", zero blocks " + (zero_blocks ? "exact" : "nonzero")};
}

Outcome condensation() {
  // The reduced tensor carries the thickness integral of the condensed
  // elasticity tensor, so it equals twice the pointwise condensation.
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::string& name = t::builtin_names()[static_cast<std::size_t>(k % 4)];
    const Chart c = builtin_chart(name, t::builtin_bounds(name), EdgeSet{Edge::Bottom});
    const SurfaceFrame f = eval_frame(c, t::random_point(c.domain(), rng));
    const Lame l{0.2 + 0.05 * k, 0.3 + 0.02 * k};
    const ElasticityTensor A = limit_elasticity_tensor(f, l);
    const MembraneTensor m = reduced_membrane_tensor(f, l);
    const int idx[3][2] = {{0, 0}, {1, 1}, {0, 1}};
    double scale = 0.0, err = 0.0;
    for (auto& I : idx)
      for (auto& J : idx) {
        const double cond = A(I[0], I[1], J[0], J[1]) - A(I[0], I[1], 2, 2) * A(2, 2, J[0], J[1]) / A(2, 2, 2, 2);
        const double red = m(I[0], I[1], J[0], J[1]);
        scale = std::max(scale, std::abs(red));
        err = std::max(err, std::abs(red - 2.0 * cond));
      }
    worst = std::max(worst, err / scale);
  }
  return {worst <= 1e-12, "max rel err " + fmt("%.2e", worst) + " (reduced = 2 x condensation)"};
}

Outcome vi_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  double worst = 0.0, worst_kkt = 0.0, worst_lin = 0.0;
  bool certified = true;
  for (int k = 0; k < 50; ++k) {
    const QuadraticProgram qp = t::random_qp(36, 1 + k % 12, rng, k % 2 == 0);
    const VISolution s = solve_vi(qp);
    certified = certified && s.certified;
    worst_kkt = std::max(worst_kkt, s.kkt_residual);
    worst = std::max(worst, (s.x - brute_force_vi(qp)).cwiseAbs().maxCoeff());
  }
  for (int k = 0; k < 20; ++k) {
    QuadraticProgram qp = t::random_qp(12, 4, rng);
    const Eigen::VectorXd x = solve_linear(qp.H, qp.f);
    for (std::size_t r = 0; r < qp.constraints.rows.size(); ++r)
      qp.constraints.rows[r].bound += qp.constraints.slack(r, x) - 1.0;  // slack 1 at the free minimiser
    const VISolution s = solve_vi(qp);
    certified = certified && s.certified;
    worst_lin = std::max(worst_lin, (s.x - x).cwiseAbs().maxCoeff());
  }
  const double sec = seconds_since(t0);
  const bool ok = worst <= 1e-7 && worst_lin <= 1e-9 && worst_kkt <= 1e-8 && certified && sec < 10.0;
  return {ok, "enumeration err " + fmt("%.2e", worst) + ", linear err " + fmt("%.2e", worst_lin) + ", kkt " +
                  fmt("%.2e", worst_kkt) + ", " + fmt("%.2f", sec) + " s"};
}

Outcome korn() {
  const auto t0 = std::chrono::steady_clock::now();
  const KornReport p = run_korn_probe(load("korn_plate.cfg"));
  const KornReport c = run_korn_probe(load("korn_cylinder.cfg"));
  const double sec = seconds_since(t0);
  const auto positive = [](const KornReport& r) {
    for (const KornRow& row : r.rows)
      if (!(row.eigenvalue > 0.0)) return false;
    return true;
  };
  const bool ok = p.slope >= 1.8 && p.slope <= 2.2 && c.slope >= 1.8 && c.slope <= 2.2 && positive(p) &&
                  positive(c) && sec < 60.0;
  return {ok, "slopes plate " + fmt("%.3f", p.slope) + ", cylinder " + fmt("%.3f", c.slope) + ", " +
                  fmt("%.1f", sec) + " s"};
}

struct CylinderRun {
  SweepReport rep;
  double seconds = 0.0;
};

const CylinderRun& cylinder_run() {
  static const CylinderRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    CylinderRun r;
    r.rep = run_koiter_compare(load("cylinder.cfg"));
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome convergence3d() {
  const CylinderRun& r = cylinder_run();
  std::vector<double> gaps;
  bool certified = r.rep.certified;
  for (const SweepRow& row : r.rep.rows) {
    gaps.push_back(row.gap);
    certified = certified && row.certified;
  }
  const int active = r.rep.rows.empty() ? 0 : r.rep.rows.back().active3d;
  const double ratio = gaps.back() / gaps.front();
  const bool ok = gaps.size() == 4 && strictly_decreasing(gaps) && ratio < 0.5 && active > 0 && certified &&
                  r.seconds < 300.0;
  return {ok, "gaps " + join(gaps) + ", ratio " + fmt("%.3f", ratio) + ", active rows " + std::to_string(active) +
                  ", " + fmt("%.1f", r.seconds) + " s (shared with criterion 8)"};
}

Outcome koiter() {
  const CylinderRun& r = cylinder_run();
  std::vector<double> gk, gm;
  for (const SweepRow& row : r.rep.rows) {
    gk.push_back(row.koiter_gap);
    gm.push_back(row.koiter_gap_mean);
  }
  const double ratio = gk.back() / gk.front();
  const bool ok = gk.size() == 4 && strictly_decreasing(gk) && ratio < 0.5 && strictly_decreasing(gm) &&
                  r.rep.certified && r.seconds < 300.0;
  return {ok, "koiter gaps " + join(gk) + ", ratio " + fmt("%.3f", ratio) + "; vs mean " + join(gm)};
}

Outcome signorini() {
  ExperimentConfig cfg = load("cylinder.cfg");
  cfg.samples = 20;
  const SignoriniReport r = run_signorini_check(cfg);
  const bool ok = r.fields == 20 && r.counterexamples == 0 && r.average_violations == 0 &&
                  r.average_beta_error <= 1e-8 && r.average_3_error <= 1e-8;
  return {ok, std::to_string(r.points) + " points, " + std::to_string(r.counterexamples) +
                  " counterexamples, tangential identity err " + fmt("%.2e", r.average_beta_error) +
                  ", normal identity err " + fmt("%.2e", r.average_3_error) + " (printed 2/3 coefficient err " +
                  fmt("%.2e", r.average_beta_error_printed) + ")"};
}

Outcome density() {
  ExperimentConfig cfg = load("cylinder.cfg");
  cfg.density_k = {4, 8, 16, 32};
  const DensityReport r = run_density(cfg, 100);
  bool sup = true, cut = true, h1 = true, poin = true;
  std::vector<double> dist;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const DensityRow& row = r.rows[i];
    sup = sup && row.sup_bound_ok;
    cut = cut && row.cutoff_margin >= row.cutoff_required - 1e-10;
    if (i > 0) h1 = h1 && row.h1_distance <= 1.05 * r.rows[i - 1].h1_distance;
    dist.push_back(row.h1_distance);
  }
  double worst = 0.0;
  for (double p : r.poincare) worst = std::max(worst, p);
  poin = worst <= std::sqrt(2.0) * 1.05;
  const bool ok = r.rows.size() == 4 && sup && cut && h1 && poin;
  return {ok, std::string("sup bound ") + (sup ? "ok" : "broken") + ", cutoff margin " + (cut ? "ok" : "short") +
                  ", h1 distances " + join(dist) + ", max Poincare ratio " + fmt("%.3f", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) config_dir = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry frame vs finite differences", geometry_oracle},
      {"small-thickness expansion slopes", expansions},
      {"elasticity tensor coercivity and zero blocks", coercivity},
      {"membrane tensor static condensation", condensation},
      {"VI solver vs enumeration and linear solve", vi_oracle},
      {"Korn eigenvalue scaling", korn},
      {"3D to 2D convergence on the cylinder", convergence3d},
      {"Koiter convergence on the cylinder", koiter},
      {"confinement on faces vs full grid, average identities", signorini},
      {"density pipeline bounds", density},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
