#pragma once

#include <string>
#include <vector>

#include "shellvi/config.hpp"
#include "shellvi/density.hpp"
#include "shellvi/mesh.hpp"

namespace shellvi {

struct HypothesisReport {
  double margin = 0.0;      // min theta . q
  double alignment = 0.0;   // min a_3 . q
  double first_kind = 0.0;  // smallest eigenvalue of the membrane Gram on free dofs
};

// Throws HypothesisFailed when alignment or margin is not positive. The
// alignment is checked first.
HypothesisReport check_geometry_hypotheses(const Chart& chart, const HalfSpace& hs);

// Smallest eigenvalue of A x = lambda B x (A, B symmetric positive definite)
// by inverse subspace iteration. Throws EigenSolverStall without convergence.
double smallest_generalized_eigenvalue(const SparseMatrix& A, const SparseMatrix& B,
                                       int* iterations = nullptr, int block = 4,
                                       int max_iterations = 2000);

struct SweepRow {
  double eps = 0.0;
  double gap = 0.0;                // |mean(u_h) - zeta_h|
  double energy3d = 0.0;
  int active3d = 0;
  long iterations3d = 0;
  double kkt3d = 0.0;
  double koiter_gap_space = -1.0;  // |zeta_K - zeta_h| with zeta_h on the koiter2d space
  double koiter_gap_mean = -1.0;   // |zeta_K - mean(u_h)|
  double koiter_gap = -1.0;        // |zeta_K - zeta_h| with zeta_h on the membrane2d space
  int active_koiter = 0;
  long iterations_koiter = 0;
  double kkt_koiter = 0.0;
  bool certified = true;
  double seconds = 0.0;            // wall time, not written to reports
};

struct SweepReport {
  HypothesisReport hypotheses;
  int nodes2d = 0;
  int active_limit = 0;
  double kkt_limit = 0.0;
  double kkt_limit_koiter = 0.0;
  bool koiter = false;
  bool certified = true;
  std::vector<SweepRow> rows;

  std::string csv() const;
};

struct SweepOptions {
  bool three_d = true;
  bool koiter = false;
};

SweepReport run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});
SweepReport run_koiter_compare(const ExperimentConfig& cfg);

struct KornRow {
  double eps = 0.0;
  double eigenvalue = 0.0;
  int iterations = 0;
};

struct KornReport {
  std::string chart;
  std::vector<KornRow> rows;
  double slope = 0.0;

  std::string csv() const;
};

KornReport run_korn_probe(const ExperimentConfig& cfg);

struct SignoriniReport {
  int fields = 0;
  int points = 0;                     // (field, y) pairs examined
  int counterexamples = 0;            // full-grid and face feasibility disagree
  int infeasible_points = 0;
  int feasible_fields = 0;
  int average_violations = 0;         // feasible fields whose average breaks the 2D row
  double average_beta_error = 0.0;    // closed form with coefficient 1/3
  double average_beta_error_printed = 0.0;  // closed form with coefficient 2/3
  double average_3_error = 0.0;

  bool ok(double tol = 1e-8) const {
    return counterexamples == 0 && average_violations == 0 && average_beta_error <= tol &&
           average_3_error <= tol;
  }
  std::string json() const;
};

SignoriniReport run_signorini_check(const ExperimentConfig& cfg);

// Smooth field pushing the surface towards the obstacle, vanishing on the
// boundary: eta_3 = -amplitude sin(pi s) sin(pi t) in normalised coordinates.
DiscreteSurfaceField density_trial_field(const Mesh2D& mesh, const Chart& chart, double amplitude);

struct DensityReport {
  double margin = 0.0;
  std::vector<DensityRow> rows;
  std::vector<double> poincare;  // worst strip ratio per k
  std::string csv() const;
};

DensityReport run_density(const ExperimentConfig& cfg, int poincare_trials = 100);

// Sampled geometry of the chart and the expansion residual table.
std::string geometry_csv(const Chart& chart, const HalfSpace& hs, int n);
std::string expansion_csv(const Chart& chart, const Lame& lame, const std::vector<double>& eps);

// Command line entry point: exit 0 on success, 2 on a failed geometric
// hypothesis, 1 on solver, configuration or usage errors.
int cli_main(int argc, char** argv);

}  // namespace shellvi
