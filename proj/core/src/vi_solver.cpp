#include "shellvi/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/SparseCholesky>

#include "shellvi/errors.hpp"

namespace shellvi {

using Triplet = Eigen::Triplet<double>;

void ConstraintSet::validate(int n_dofs) const {
  std::vector<char> used(static_cast<std::size_t>(n_dofs), 0);
  std::set<int> nodes;
  for (const ConstraintRow& r : rows) {
    if (!nodes.insert(r.node).second)
      throw Error(ErrorKind::InvalidArgument, "two constraint rows on one node");
    for (int d : r.dofs) {
      if (d < 0 || d >= n_dofs) throw Error(ErrorKind::InvalidArgument, "constraint dof out of range");
      if (used[static_cast<std::size_t>(d)]) throw Error(ErrorKind::InvalidArgument, "constraint rows share a dof");
      used[static_cast<std::size_t>(d)] = 1;
    }
    if (!std::isfinite(r.bound) || !r.coeff.allFinite())
      throw Error(ErrorKind::InvalidArgument, "non-finite constraint data");
  }
}

double ConstraintSet::slack(std::size_t r, const VectorXd& x) const {
  const ConstraintRow& row = rows[r];
  double s = -row.bound;
  for (int i = 0; i < 3; ++i) s += row.coeff[i] * x[row.dofs[static_cast<std::size_t>(i)]];
  return s;
}

double QuadraticProgram::energy(const VectorXd& x) const {
  return 0.5 * x.dot(H * x) - f.dot(x);
}

bool QuadraticProgram::feasible(const VectorXd& x, double tol) const {
  for (std::size_t r = 0; r < constraints.rows.size(); ++r)
    if (constraints.slack(r, x) < -tol) return false;
  return true;
}

namespace {

double inf_norm(const SparseMatrix& H) {
  VectorXd rs = VectorXd::Zero(H.rows());
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) rs[it.row()] += std::abs(it.value());
  return H.rows() > 0 ? rs.maxCoeff() : 0.0;
}

}  // namespace

VectorXd solve_linear(const SparseMatrix& H, const VectorXd& f) {
  if (H.rows() != H.cols() || H.rows() != f.size())
    throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  if (H.rows() == 0) return VectorXd();
  Eigen::SimplicialLLT<SparseMatrix> llt(H);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "Cholesky factorization failed");
  VectorXd x = llt.solve(f);
  // One step of iterative refinement.
  x += llt.solve(f - H * x);
  const double scale = inf_norm(H) * x.lpNorm<Eigen::Infinity>() + f.lpNorm<Eigen::Infinity>();
  const double res = (H * x - f).lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || res > 1e-10 * std::max(scale, std::numeric_limits<double>::min()))
    throw Error(ErrorKind::SingularMatrix, "residual above 1e-10 relative");
  return x;
}

double KKTBreakdown::total() const {
  return std::max({primal, dual, complementarity}) + gradient;
}

std::vector<double> implied_multipliers(const QuadraticProgram& qp, const VectorXd& x) {
  const VectorXd r = qp.H * x - qp.f;
  std::vector<double> lam;
  for (const ConstraintRow& row : qp.constraints.rows) {
    const double cn = row.coeff.norm();
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += row.coeff[i] * r[row.dofs[static_cast<std::size_t>(i)]];
    lam.push_back(v / (cn * cn));
  }
  return lam;
}

KKTBreakdown kkt_breakdown(const QuadraticProgram& qp, const VectorXd& x) {
  constexpr double active_tol = 1e-9;
  KKTBreakdown k;
  VectorXd r = qp.H * x - qp.f;
  const auto& rows = qp.constraints.rows;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const ConstraintRow& row = rows[n];
    const double s = qp.constraints.slack(n, x);
    const double cn = row.coeff.norm();
    const Eigen::Vector3d ch = row.coeff / cn;
    Eigen::Vector3d rn;
    for (int i = 0; i < 3; ++i) rn[i] = r[row.dofs[static_cast<std::size_t>(i)]];
    k.primal = std::max(k.primal, -s);
    if (s <= active_tol) {
      const double lam = ch.dot(rn) / cn;
      k.dual = std::max(k.dual, -lam);
      k.complementarity = std::max(k.complementarity, std::abs(lam * s));
      k.gradient = std::max(k.gradient, (rn - ch * ch.dot(rn)).lpNorm<Eigen::Infinity>());
    } else {
      k.gradient = std::max(k.gradient, rn.lpNorm<Eigen::Infinity>());
    }
    for (int i = 0; i < 3; ++i) r[row.dofs[static_cast<std::size_t>(i)]] = 0.0;
  }
  if (r.size() > 0) k.gradient = std::max(k.gradient, r.lpNorm<Eigen::Infinity>());
  k.primal = std::max(k.primal, 0.0);
  return k;
}

double complementarity_residual(const QuadraticProgram& qp, const VectorXd& x) {
  return kkt_breakdown(qp, x).total();
}

namespace {

// Bound-constrained form of the problem in node-rotated coordinates x = R z.
struct Rotated {
  int n = 0;
  SparseMatrix R;
  SparseMatrix H;  // R^T H R
  VectorXd f;      // R^T f
  VectorXd diag;
  std::vector<int> bounded;      // coordinate carrying the bound, per row
  std::vector<double> lower;     // bound per row
  std::vector<int> row_of;       // per coordinate, row index or -1
  std::vector<Eigen::Matrix3d> block;  // diagonal 3x3 block of H per row
};

Eigen::Matrix3d row_basis(const Eigen::Vector3d& c) {
  const Eigen::Vector3d ch = c.normalized();
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(ch[i]) < std::abs(ch[k])) k = i;
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = 1.0;
  const Eigen::Vector3d t1 = (e - e.dot(ch) * ch).normalized();
  const Eigen::Vector3d t2 = ch.cross(t1);
  Eigen::Matrix3d Q;
  Q.col(0) = ch;
  Q.col(1) = t1;
  Q.col(2) = t2;
  return Q;
}

Rotated rotate(const QuadraticProgram& qp, const std::vector<int>& kept) {
  Rotated rp;
  rp.n = static_cast<int>(qp.H.rows());
  rp.row_of.assign(static_cast<std::size_t>(rp.n), -1);
  std::vector<Triplet> t;
  std::vector<char> in_row(static_cast<std::size_t>(rp.n), 0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const ConstraintRow& row = qp.constraints.rows[static_cast<std::size_t>(kept[k])];
    const Eigen::Matrix3d Q = row_basis(row.coeff);
    for (int i = 0; i < 3; ++i) {
      in_row[static_cast<std::size_t>(row.dofs[static_cast<std::size_t>(i)])] = 1;
      rp.row_of[static_cast<std::size_t>(row.dofs[static_cast<std::size_t>(i)])] = static_cast<int>(k);
      for (int j = 0; j < 3; ++j) t.emplace_back(row.dofs[static_cast<std::size_t>(i)], row.dofs[static_cast<std::size_t>(j)], Q(i, j));
    }
  }
  for (int d = 0; d < rp.n; ++d)
    if (!in_row[static_cast<std::size_t>(d)]) t.emplace_back(d, d, 1.0);
  rp.R.resize(rp.n, rp.n);
  rp.R.setFromTriplets(t.begin(), t.end());
  const SparseMatrix Rt = rp.R.transpose();
  rp.H = SparseMatrix(Rt * qp.H * rp.R);
  rp.H.makeCompressed();
  rp.f = Rt * qp.f;
  rp.diag = rp.H.diagonal();
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const ConstraintRow& row = qp.constraints.rows[static_cast<std::size_t>(kept[k])];
    rp.bounded.push_back(row.dofs[0]);
    rp.lower.push_back(row.bound / row.coeff.norm());
    Eigen::Matrix3d B;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = rp.H.coeff(row.dofs[static_cast<std::size_t>(i)], row.dofs[static_cast<std::size_t>(j)]);
    rp.block.push_back(B);
  }
  return rp;
}

void add_column(const SparseMatrix& H, int col, double delta, VectorXd& g) {
  for (SparseMatrix::InnerIterator it(H, col); it; ++it) g[it.row()] += it.value() * delta;
}

// One Gauss-Seidel sweep with exact nodal minimisation; g = Hz - f is kept current.
void sweep(const Rotated& rp, const QuadraticProgram& qp, const std::vector<int>& kept,
           VectorXd& z, VectorXd& g, std::vector<char>& at_bound) {
  for (int d = 0; d < rp.n; ++d) {
    const int r = rp.row_of[static_cast<std::size_t>(d)];
    if (r < 0) {
      if (rp.diag[d] <= 0.0) continue;
      const double delta = -g[d] / rp.diag[d];
      z[d] += delta;
      add_column(rp.H, d, delta, g);
      continue;
    }
    const ConstraintRow& row = qp.constraints.rows[static_cast<std::size_t>(kept[static_cast<std::size_t>(r)])];
    if (std::min({row.dofs[0], row.dofs[1], row.dofs[2]}) != d) continue;
    const Eigen::Matrix3d& B = rp.block[static_cast<std::size_t>(r)];
    Eigen::Vector3d gb, zb;
    for (int i = 0; i < 3; ++i) {
      gb[i] = g[row.dofs[static_cast<std::size_t>(i)]];
      zb[i] = z[row.dofs[static_cast<std::size_t>(i)]];
    }
    Eigen::Vector3d delta = -B.ldlt().solve(gb);
    const double lo = rp.lower[static_cast<std::size_t>(r)];
    bool clamp = zb[0] + delta[0] < lo;
    if (clamp) {
      delta[0] = lo - zb[0];
      const Eigen::Matrix2d Btt = B.bottomRightCorner<2, 2>();
      const Eigen::Vector2d rhs = -(gb.tail<2>() + B.block<2, 1>(1, 0) * delta[0]);
      delta.tail<2>() = Btt.ldlt().solve(rhs);
    }
    for (int i = 0; i < 3; ++i) {
      const int dof = row.dofs[static_cast<std::size_t>(i)];
      if (clamp && i == 0) z[dof] = lo;
      else z[dof] += delta[i];
      add_column(rp.H, dof, delta[i], g);
    }
    at_bound[static_cast<std::size_t>(r)] = clamp || z[row.dofs[0]] <= lo ? 1 : 0;
  }
}

SparseMatrix submatrix(const SparseMatrix& H, const std::vector<int>& map, int m) {
  std::vector<Triplet> t;
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) {
      const int r = map[static_cast<std::size_t>(it.row())], c = map[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  SparseMatrix S(m, m);
  S.setFromTriplets(t.begin(), t.end());
  S.makeCompressed();
  return S;
}

// Equality-constrained solve with the coordinates of rows in `active` fixed at
// their bounds. Returns false when the reduced matrix cannot be factorised.
bool solve_fixed(const Rotated& rp, const std::vector<char>& active, VectorXd& z) {
  std::vector<int> map(static_cast<std::size_t>(rp.n), -1);
  VectorXd zfix = VectorXd::Zero(rp.n);
  for (std::size_t r = 0; r < rp.bounded.size(); ++r)
    if (active[r]) zfix[rp.bounded[r]] = rp.lower[r];
  int m = 0;
  std::vector<int> free_list;
  for (int d = 0; d < rp.n; ++d) {
    const int r = rp.row_of[static_cast<std::size_t>(d)];
    const bool fixed = r >= 0 && active[static_cast<std::size_t>(r)] && rp.bounded[static_cast<std::size_t>(r)] == d;
    if (!fixed) {
      map[static_cast<std::size_t>(d)] = m++;
      free_list.push_back(d);
    }
  }
  const VectorXd rhs_full = rp.f - rp.H * zfix;
  VectorXd rhs(m);
  for (int k = 0; k < m; ++k) rhs[k] = rhs_full[free_list[static_cast<std::size_t>(k)]];
  z = zfix;
  if (m == 0) return true;
  const SparseMatrix S = submatrix(rp.H, map, m);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) return false;
  VectorXd y = ldlt.solve(rhs);
  y += ldlt.solve(rhs - S * y);
  if (!y.allFinite()) return false;
  for (int k = 0; k < m; ++k) z[free_list[static_cast<std::size_t>(k)]] = y[k];
  return true;
}

struct PolishResult {
  bool ok = false;
  int iterations = 0;
  VectorXd z;
};

// Primal-dual active-set iteration on the bounded coordinates; switches to
// single most-violated changes when an active set repeats.
PolishResult polish(const Rotated& rp, std::vector<char> active, const SolverConfig& cfg,
                    double scale) {
  PolishResult out;
  std::set<std::vector<char>> seen;
  bool single = false;
  const std::size_t m = rp.bounded.size();
  for (int it = 0; it < cfg.max_polish; ++it) {
    VectorXd z;
    ++out.iterations;
    if (!solve_fixed(rp, active, z)) return out;
    const VectorXd g = rp.H * z - rp.f;
    double worst = 0.0;
    std::size_t worst_r = m;
    bool worst_add = false;
    std::vector<char> next = active;
    const double ptol = cfg.active_tol * scale;
    const double dtol = cfg.tol * 1e-2 * scale;
    for (std::size_t r = 0; r < m; ++r) {
      const double lo = rp.lower[r];
      if (active[r]) {
        const double mu = g[rp.bounded[r]];
        if (mu < -dtol) {
          next[r] = 0;
          if (-mu > worst) { worst = -mu; worst_r = r; worst_add = false; }
        }
      } else {
        const double v = lo - z[rp.bounded[r]];
        if (v > ptol) {
          next[r] = 1;
          if (v > worst) { worst = v; worst_r = r; worst_add = true; }
        }
      }
    }
    if (worst_r == m) {
      out.ok = true;
      out.z = z;
      return out;
    }
    seen.insert(active);
    if (!single && seen.count(next)) single = true;
    if (single) {
      next = active;
      next[worst_r] = worst_add ? 1 : 0;
      if (seen.count(next)) return out;
    }
    active.swap(next);
  }
  return out;
}

}  // namespace

VISolution solve_vi(const QuadraticProgram& qp, const SolverConfig& cfg) {
  const int n = static_cast<int>(qp.H.rows());
  if (qp.H.cols() != n || qp.f.size() != n) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  qp.constraints.validate(n);

  // Rows with vanishing coefficients are either void or unsatisfiable.
  std::vector<int> kept;
  for (std::size_t r = 0; r < qp.constraints.rows.size(); ++r) {
    const ConstraintRow& row = qp.constraints.rows[r];
    if (row.coeff.norm() > 0.0) kept.push_back(static_cast<int>(r));
    else if (row.bound > 0.0) throw Error(ErrorKind::InfeasibleProblem, "row with zero coefficients and positive bound");
  }
  const Rotated rp = rotate(qp, kept);
  const std::size_t m = kept.size();

  VISolution sol;
  VectorXd z = VectorXd::Zero(n);
  for (std::size_t r = 0; r < m; ++r) z[rp.bounded[r]] = std::max(0.0, rp.lower[r]);
  VectorXd g = rp.H * z - rp.f;
  std::vector<char> at_bound(m, 0);
  for (std::size_t r = 0; r < m; ++r) at_bound[r] = z[rp.bounded[r]] <= rp.lower[r] ? 1 : 0;

  const double scale = std::max(1.0, qp.f.lpNorm<Eigen::Infinity>());
  double best_res = std::numeric_limits<double>::infinity();
  VectorXd best_x = rp.R * z;
  long warm = std::max(1, cfg.warm_sweeps);
  auto energy_of = [&](const VectorXd& zz, const VectorXd& gg) { return 0.5 * zz.dot(gg - rp.f); };

  while (true) {
    const long budget = std::min<long>(warm, cfg.max_sweeps - sol.iterations);
    std::vector<char> prev = at_bound;
    int stable = 0;
    for (long s = 0; s < budget; ++s) {
      sweep(rp, qp, kept, z, g, at_bound);
      ++sol.iterations;
      if (cfg.record_energy) sol.energy_history.push_back(energy_of(z, g));
      stable = at_bound == prev ? stable + 1 : 0;
      prev = at_bound;
      if (stable >= 8 && s >= 8) break;
    }
    // Rebuild the gradient to discard accumulated drift.
    g = rp.H * z - rp.f;

    std::vector<char> active(m, 0);
    for (std::size_t r = 0; r < m; ++r)
      active[r] = z[rp.bounded[r]] <= rp.lower[r] + cfg.active_tol * scale ? 1 : 0;
    const PolishResult pr = polish(rp, active, cfg, scale);
    sol.polish_iterations += pr.iterations;
    const VectorXd cand_pgs = rp.R * z;
    const double res_pgs = complementarity_residual(qp, cand_pgs);
    if (res_pgs < best_res) {
      best_res = res_pgs;
      best_x = cand_pgs;
    }
    if (pr.ok) {
      const VectorXd cand = rp.R * pr.z;
      const double res = complementarity_residual(qp, cand);
      if (res < best_res) {
        best_res = res;
        best_x = cand;
      }
    }
    if (best_res <= cfg.tol || sol.iterations >= cfg.max_sweeps) break;
    if (pr.ok) {
      // Continue the sweeps from the polished point.
      z = pr.z;
      g = rp.H * z - rp.f;
    }
    warm *= 2;
  }

  sol.x = best_x;
  sol.kkt_residual = best_res;
  sol.certified = best_res <= cfg.tol;
  sol.energy = qp.energy(sol.x);
  const std::vector<double> lam = implied_multipliers(qp, sol.x);
  sol.multipliers.assign(qp.constraints.rows.size(), 0.0);
  for (std::size_t r = 0; r < qp.constraints.rows.size(); ++r)
    if (std::abs(qp.constraints.slack(r, sol.x)) <= cfg.active_tol * scale) {
      sol.active.push_back(static_cast<int>(r));
      sol.multipliers[r] = lam[r];
    }
  return sol;
}

VectorXd brute_force_vi(const QuadraticProgram& qp) {
  const auto& rows = qp.constraints.rows;
  const int m = static_cast<int>(rows.size());
  if (m > 20) throw Error(ErrorKind::TooManyRows, "brute force limited to 20 rows");
  const int n = static_cast<int>(qp.H.rows());
  qp.constraints.validate(n);
  const Eigen::MatrixXd H = Eigen::MatrixXd(qp.H);
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "H not positive definite");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, n);
  VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < 3; ++i) C(r, rows[static_cast<std::size_t>(r)].dofs[static_cast<std::size_t>(i)]) = rows[static_cast<std::size_t>(r)].coeff[i];
    b[r] = rows[static_cast<std::size_t>(r)].bound;
  }
  const VectorXd x0 = llt.solve(qp.f);
  const Eigen::MatrixXd HiCt = llt.solve(C.transpose());
  const Eigen::MatrixXd S = C * HiCt;
  const double tol = 1e-9 * std::max(1.0, qp.f.lpNorm<Eigen::Infinity>());

  double best_e = std::numeric_limits<double>::infinity();
  VectorXd best;
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<int> act;
    for (int r = 0; r < m; ++r)
      if (mask & (1L << r)) act.push_back(r);
    VectorXd x = x0;
    VectorXd lam;
    if (!act.empty()) {
      const int k = static_cast<int>(act.size());
      Eigen::MatrixXd Sa(k, k);
      VectorXd rhs(k);
      for (int a = 0; a < k; ++a) {
        rhs[a] = b[act[static_cast<std::size_t>(a)]] - C.row(act[static_cast<std::size_t>(a)]).dot(x0);
        for (int c = 0; c < k; ++c) Sa(a, c) = S(act[static_cast<std::size_t>(a)], act[static_cast<std::size_t>(c)]);
      }
      lam = Sa.ldlt().solve(rhs);
      for (int a = 0; a < k; ++a) x += HiCt.col(act[static_cast<std::size_t>(a)]) * lam[a];
      if (lam.minCoeff() < -tol) continue;
    }
    bool ok = true;
    for (int r = 0; r < m && ok; ++r)
      if (C.row(r).dot(x) - b[r] < -tol) ok = false;
    if (!ok) continue;
    const double e = 0.5 * x.dot(H * x) - qp.f.dot(x);
    if (e < best_e) {
      best_e = e;
      best = x;
    }
  }
  if (best.size() == 0) throw Error(ErrorKind::InfeasibleProblem, "no feasible KKT point found");
  return best;
}

}  // namespace shellvi
