#include "confdr/cohomology.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace confdr {

namespace {

constexpr std::int64_t kPrime = (1ll << 31) - 1;

std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
  // extended Euclid
  std::int64_t t = 0, new_t = 1, r = p, new_r = a % p;
  if (new_r < 0) new_r += p;
  while (new_r != 0) {
    const std::int64_t q = r / new_r;
    std::swap(t -= q * new_t, new_t);
    std::swap(r -= q * new_r, new_r);
  }
  if (t < 0) t += p;
  return t;
}

}  // namespace

int sparse_rank_mod_p(const SparseInt& M) {
  const int rows = static_cast<int>(M.rows());
  const int cols = static_cast<int>(M.cols());
  if (rows == 0 || cols == 0) return 0;

  // row-major sparse rows with entries mod p
  std::vector<std::vector<std::pair<int, std::int64_t>>> row(rows);
  for (int c = 0; c < M.outerSize(); ++c)
    for (SparseInt::InnerIterator it(M, c); it; ++it) {
      std::int64_t v = it.value() % kPrime;
      if (v < 0) v += kPrime;
      if (v != 0) row[it.row()].emplace_back(c, v);
    }
  for (auto& r : row) std::sort(r.begin(), r.end());

  // bucket rows by leading column and eliminate left to right
  std::vector<std::vector<int>> bucket(cols);
  for (int r = 0; r < rows; ++r)
    if (!row[r].empty()) bucket[row[r].front().first].push_back(r);

  int rank = 0;
  for (int col = 0; col < cols; ++col) {
    auto& cand = bucket[col];
    if (cand.empty()) continue;
    // pick the sparsest candidate as pivot
    int pivot = cand[0];
    for (int r : cand)
      if (row[r].size() < row[pivot].size()) pivot = r;
    ++rank;
    const std::int64_t inv = mod_inverse(row[pivot].front().second, kPrime);

    for (int r : cand) {
      if (r == pivot) continue;
      const std::int64_t factor = (row[r].front().second * inv) % kPrime;
      // row_r -= factor * row_pivot
      std::vector<std::pair<int, std::int64_t>> merged;
      merged.reserve(row[r].size() + row[pivot].size());
      auto a = row[r].begin();
      auto b = row[pivot].begin();
      while (a != row[r].end() || b != row[pivot].end()) {
        if (b == row[pivot].end() || (a != row[r].end() && a->first < b->first)) {
          merged.push_back(*a++);
        } else if (a == row[r].end() || b->first < a->first) {
          std::int64_t v = (kPrime - (factor * b->second) % kPrime) % kPrime;
          if (v != 0) merged.emplace_back(b->first, v);
          ++b;
        } else {
          std::int64_t v = (a->second - (factor * b->second) % kPrime) % kPrime;
          if (v < 0) v += kPrime;
          if (v != 0) merged.emplace_back(a->first, v);
          ++a;
          ++b;
        }
      }
      row[r] = std::move(merged);
      if (!row[r].empty()) bucket[row[r].front().first].push_back(r);
    }
    row[pivot].clear();
    cand.clear();
  }
  return rank;
}

std::vector<std::int32_t> mode_simplices(const SimplicialComplex& complex, int k,
                                         CohomologyMode mode) {
  std::vector<std::int32_t> out;
  out.reserve(complex.count(k));
  for (std::size_t i = 0; i < complex.count(k); ++i)
    if (mode == CohomologyMode::Absolute || !complex.on_boundary(k, i))
      out.push_back(static_cast<std::int32_t>(i));
  return out;
}

namespace {

SparseInt restrict_matrix(const SparseInt& M, const std::vector<std::int32_t>& rows,
                          const std::vector<std::int32_t>& cols) {
  std::vector<std::int32_t> row_of(M.rows(), -1), col_of(M.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) col_of[cols[i]] = static_cast<std::int32_t>(i);
  std::vector<Eigen::Triplet<std::int32_t>> trips;
  for (int c = 0; c < M.outerSize(); ++c)
    for (SparseInt::InnerIterator it(M, c); it; ++it) {
      const std::int32_t r2 = row_of[it.row()];
      const std::int32_t c2 = col_of[it.col()];
      if (r2 >= 0 && c2 >= 0) trips.emplace_back(r2, c2, it.value());
    }
  SparseInt out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

CohomologyReport cohomology_ranks(const SimplicialComplex& complex, CohomologyMode mode) {
  const int n = complex.dimension();
  CohomologyReport report;
  report.mode = mode;
  report.dim_cochains.resize(n + 1);
  report.dim_cocycles.resize(n + 1);
  report.dim_coboundaries.resize(n + 1);
  report.betti.resize(n + 1);

  std::vector<std::vector<std::int32_t>> keep(n + 1);
  for (int k = 0; k <= n; ++k) keep[k] = mode_simplices(complex, k, mode);

  std::vector<int> rank_d(n + 1, 0);  // rank of delta_k : C^k -> C^{k+1}
  for (int k = 0; k < n; ++k) {
    // delta_k has the same rank as boundary(k+1); restrict in compact mode
    SparseInt B = mode == CohomologyMode::Absolute
                      ? complex.boundary(k + 1)
                      : restrict_matrix(complex.boundary(k + 1), keep[k], keep[k + 1]);
    rank_d[k] = sparse_rank_mod_p(B);
  }

  for (int k = 0; k <= n; ++k) {
    const long dim = static_cast<long>(keep[k].size());
    report.dim_cochains[k] = dim;
    const long rk = k < n ? rank_d[k] : 0;
    report.dim_cocycles[k] = dim - rk;
    report.dim_coboundaries[k] = k > 0 ? rank_d[k - 1] : 0;
    report.betti[k] = report.dim_cocycles[k] - report.dim_coboundaries[k];
  }
  return report;
}

namespace {

// Reduced coboundary acting on mode-supported cochains.
struct ReducedComplex {
  std::vector<std::int32_t> vars;  // (k-1)-simplices carrying theta
  std::vector<std::int32_t> rows;  // k-simplices carrying omega
  SparseReal D;                    // rows x vars
};

ReducedComplex reduced_coboundary(const SimplicialComplex& cx, int k, CohomologyMode mode) {
  ReducedComplex rc;
  rc.vars = mode_simplices(cx, k - 1, mode);
  rc.rows = mode_simplices(cx, k, mode);
  const SparseInt full = cx.boundary(k);  // (k-1) x k; coboundary is the transpose
  std::vector<std::int32_t> var_of(cx.count(k - 1), -1), row_of(cx.count(k), -1);
  for (std::size_t i = 0; i < rc.vars.size(); ++i) var_of[rc.vars[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < rc.rows.size(); ++i) row_of[rc.rows[i]] = static_cast<std::int32_t>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < full.outerSize(); ++c)
    for (SparseInt::InnerIterator it(full, c); it; ++it) {
      const std::int32_t row = row_of[it.col()];       // k-simplex
      const std::int32_t var = var_of[it.row()];       // (k-1)-simplex
      if (row >= 0 && var >= 0) trips.emplace_back(row, var, static_cast<double>(it.value()));
    }
  rc.D = SparseReal(static_cast<int>(rc.rows.size()), static_cast<int>(rc.vars.size()));
  rc.D.setFromTriplets(trips.begin(), trips.end());
  return rc;
}

// CG on the (singular, consistent) Gram operator D D^T.
Eigen::VectorXd cg_gram(const SparseReal& D, const Eigen::VectorXd& rhs, double tol, int maxit,
                        double* out_residual) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double rhs_norm = std::sqrt(rr);
  if (rhs_norm == 0) {
    if (out_residual) *out_residual = 0;
    return y;
  }
  for (int it = 0; it < maxit; ++it) {
    const Eigen::VectorXd Ap = D * (D.transpose() * p);
    const double pAp = p.dot(Ap);
    if (pAp <= 0) break;
    const double alpha = rr / pAp;
    y += alpha * p;
    r -= alpha * Ap;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol * rhs_norm) {
      rr = rr_new;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (out_residual) *out_residual = std::sqrt(rr) / rhs_norm;
  return y;
}

// Pre-assembled lift data for the IRLS loop: per (cell, node) the local
// Gram block V G V^T of the Whitney faces and the per-node signed value
// rows, so weight updates never touch the metric again.
struct LiftAssembly {
  const MetricField* mf;
  int fpc;
  std::vector<std::int32_t> vars;           // cell-major face -> var id (-1 outside support)
  std::vector<Eigen::MatrixXd> local_gram;  // per node, fpc x fpc (measure included)
  std::vector<Eigen::MatrixXd> signed_values;  // per node, fpc x rank
  std::vector<Eigen::MatrixXd> gram;           // per node, rank x rank

  LiftAssembly(const WhitneyCellTable& table, const MetricField& metric, int degree,
               const std::vector<std::int32_t>& var_of) {
    mf = &metric;
    fpc = table.faces_per_cell;
    const std::size_t nq = metric.nodes_per_cell();
    const std::size_t nnodes = metric.node_count();
    vars.resize(metric.cell_count() * fpc);
    local_gram.resize(nnodes);
    signed_values.resize(nnodes);
    gram.resize(nnodes);
    for (std::size_t c = 0; c < metric.cell_count(); ++c) {
      for (int f = 0; f < fpc; ++f) vars[c * fpc + f] = var_of[table.face_index[c * fpc + f]];
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = metric.node_id(c, q);
        gram[node] = metric.gram_on_forms(node, degree);
        Eigen::MatrixXd V(fpc, table.values.cols());
        for (int f = 0; f < fpc; ++f)
          V.row(f) = table.face_sign[c * fpc + f] *
                     table.values.row(static_cast<long>((c * fpc + f) * nq + q));
        signed_values[node] = V;
        local_gram[node] = metric.node_measure(node) * (V * gram[node] * V.transpose());
      }
    }
  }

  SparseReal weighted_mass(const std::vector<double>& rho, long nvars) const {
    const std::size_t nq = mf->nodes_per_cell();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mf->cell_count() * fpc * fpc);
    Eigen::MatrixXd local(fpc, fpc);
    for (std::size_t c = 0; c < mf->cell_count(); ++c) {
      local.setZero();
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(c, q);
        local += rho[node] * local_gram[node];
      }
      for (int i = 0; i < fpc; ++i) {
        const std::int32_t vi = vars[c * fpc + i];
        if (vi < 0) continue;
        for (int j = 0; j < fpc; ++j) {
          const std::int32_t vj = vars[c * fpc + j];
          if (vj >= 0) trips.emplace_back(vi, vj, local(i, j));
        }
      }
    }
    SparseReal A(nvars, nvars);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
  }

  // per-node |L theta|^2_G
  void norms_squared(const Eigen::VectorXd& theta, std::vector<double>& out) const {
    const std::size_t nq = mf->nodes_per_cell();
    out.assign(mf->node_count(), 0.0);
    Eigen::VectorXd local(fpc);
    for (std::size_t c = 0; c < mf->cell_count(); ++c) {
      for (int f = 0; f < fpc; ++f) {
        const std::int32_t v = vars[c * fpc + f];
        local[f] = v >= 0 ? theta[v] : 0.0;
      }
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(c, q);
        const Eigen::VectorXd comps = signed_values[node].transpose() * local;
        out[node] = comps.dot(gram[node] * comps);
      }
    }
  }

  // coefficients of |L(theta + t dir)|^2 = a + 2 b t + c t^2 per node
  void segment_coefficients(const Eigen::VectorXd& theta, const Eigen::VectorXd& dir,
                            std::vector<double>& a, std::vector<double>& b,
                            std::vector<double>& c) const {
    const std::size_t nq = mf->nodes_per_cell();
    a.assign(mf->node_count(), 0.0);
    b.assign(mf->node_count(), 0.0);
    c.assign(mf->node_count(), 0.0);
    Eigen::VectorXd lt(fpc), ld(fpc);
    for (std::size_t cell = 0; cell < mf->cell_count(); ++cell) {
      for (int f = 0; f < fpc; ++f) {
        const std::int32_t v = vars[cell * fpc + f];
        lt[f] = v >= 0 ? theta[v] : 0.0;
        ld[f] = v >= 0 ? dir[v] : 0.0;
      }
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(cell, q);
        const Eigen::VectorXd ct = signed_values[node].transpose() * lt;
        const Eigen::VectorXd cd = signed_values[node].transpose() * ld;
        const Eigen::VectorXd gt = gram[node] * ct;
        a[node] = ct.dot(gt);
        b[node] = cd.dot(gt);
        c[node] = cd.dot(gram[node] * cd);
      }
    }
  }
};

double smoothed_objective(const MetricField& mf, const std::vector<double>& norms_sq, double p,
                          double delta) {
  double acc = 0;
  for (std::size_t node = 0; node < mf.node_count(); ++node)
    acc += mf.node_measure(node) * std::pow(norms_sq[node] + delta, p / 2.0);
  return acc;
}

}  // namespace

PrimitiveResult minimal_primitive(const Cochain& omega, double p,
                                  const SimplicialComplex& complex, const MetricField& metric,
                                  CohomologyMode mode, const PrimitiveOptions& options) {
  const int n = complex.dimension();
  const int k = omega.degree;
  if (k < 1 || k > n) throw std::invalid_argument("minimal_primitive: bad degree");
  const int d = k - 1;
  const bool sup_mode = !(p > 0) || std::isinf(p);
  const double p_eff = sup_mode ? static_cast<double>(options.sup_norm_p) : p;
  if (p_eff < 1) throw std::invalid_argument("minimal_primitive: p must be >= 1");

  ReducedComplex rc = reduced_coboundary(complex, k, mode);
  const long nvars = static_cast<long>(rc.vars.size());

  Eigen::VectorXd omega_red(rc.rows.size());
  for (std::size_t i = 0; i < rc.rows.size(); ++i) omega_red[i] = omega.values[rc.rows[i]];
  if (mode == CohomologyMode::CompactSupport) {
    double outside = 0;
    for (std::size_t i = 0; i < complex.count(k); ++i)
      if (complex.on_boundary(k, static_cast<int>(i))) outside += std::abs(omega.values[i]);
    if (outside > options.exactness_tol * (1.0 + omega_red.cwiseAbs().sum()))
      throw std::domain_error("minimal_primitive: omega not supported on the interior subcomplex");
  }

  // particular solution / exactness test on the incidence Gram
  double residual = 0;
  const Eigen::VectorXd y0 =
      cg_gram(rc.D, omega_red, 1e-13, 4 * static_cast<int>(rc.rows.size() + 100), &residual);
  if (residual > options.exactness_tol)
    throw std::domain_error("minimal_primitive: omega is not exact (rank test failed)");
  Eigen::VectorXd theta = rc.D.transpose() * y0;

  std::vector<std::int32_t> var_of(complex.count(d), -1);
  for (std::size_t i = 0; i < rc.vars.size(); ++i) var_of[rc.vars[i]] = static_cast<std::int32_t>(i);
  const WhitneyCellTable table = whitney_cell_table(d, complex, metric);
  const LiftAssembly assembly(table, metric, d, var_of);

  auto project_feasible = [&](Eigen::VectorXd& t) {
    const Eigen::VectorXd defect = rc.D * t - omega_red;
    if (defect.cwiseAbs().maxCoeff() <= options.constraint_tol) return;
    const Eigen::VectorXd y = cg_gram(rc.D, defect, 1e-13, 2000, nullptr);
    t -= rc.D.transpose() * y;
  };

  std::vector<double> norms_sq;
  assembly.norms_squared(theta, norms_sq);
  double scale = 0;
  for (std::size_t node = 0; node < metric.node_count(); ++node)
    scale = std::max(scale, norms_sq[node]);
  if (scale == 0) scale = 1;
  double delta = 0.1 * scale;
  const double delta_floor = options.delta_floor * scale;

  // potential reduction: theta = theta + P u, minimizing over u
  const bool use_potential = options.reduction == PrimitiveReduction::Potential && d >= 1;
  SparseReal P;
  if (use_potential) {
    ReducedComplex lower = reduced_coboundary(complex, d, mode);
    P = lower.D;
  }

  PrimitiveResult result;
  Eigen::SimplicialLDLT<SparseReal> chol;
  bool analyzed = false;
  double objective = smoothed_objective(metric, norms_sq, p_eff, delta);
  bool converged = false;

  std::vector<double> rho(metric.node_count());
  std::vector<double> seg_a, seg_b, seg_c;
  for (int it = 0; it < options.max_irls; ++it) {
    // IRLS weights at the current smoothing level
    for (std::size_t node = 0; node < metric.node_count(); ++node)
      rho[node] = std::pow(norms_sq[node] + delta, p_eff / 2.0 - 1.0);
    SparseReal A = assembly.weighted_mass(rho, nvars);

    Eigen::VectorXd theta_hat;
    if (use_potential) {
      // unconstrained weighted LS over the potential: (P^T A P) u = -P^T A theta
      SparseReal N = P.transpose() * (A * P).eval();
      double diag_mean = 0;
      for (long i = 0; i < N.rows(); ++i) diag_mean += N.coeff(i, i);
      diag_mean /= std::max<long>(1, N.rows());
      for (long i = 0; i < N.rows(); ++i) N.coeffRef(i, i) += 1e-12 * diag_mean;  // gauge fix
      if (!analyzed) {
        chol.analyzePattern(N);
        analyzed = true;
      }
      chol.factorize(N);
      if (chol.info() != Eigen::Success) break;
      const Eigen::VectorXd u = chol.solve(-(P.transpose() * (A * theta)));
      theta_hat = theta + P * u;
    } else {
      if (!analyzed) {
        chol.analyzePattern(A);
        analyzed = true;
      }
      chol.factorize(A);
      if (chol.info() != Eigen::Success) break;

      // equality-constrained weighted LS via the Schur complement:
      // theta_hat = A^{-1} D^T y,  (D A^{-1} D^T) y = omega
      Eigen::VectorXd y = Eigen::VectorXd::Zero(omega_red.size());
      {
        Eigen::VectorXd r = omega_red;
        Eigen::VectorXd pv = r;
        double rr = r.squaredNorm();
        const double rhs_norm = std::sqrt(rr);
        const int maxcg = 200 + 2 * static_cast<int>(rc.rows.size());
        for (int cg = 0; cg < maxcg && rhs_norm > 0; ++cg) {
          const Eigen::VectorXd Ap = rc.D * chol.solve(rc.D.transpose() * pv);
          const double pAp = pv.dot(Ap);
          if (pAp <= 0) break;
          const double alpha = rr / pAp;
          y += alpha * pv;
          r -= alpha * Ap;
          const double rr_new = r.squaredNorm();
          if (std::sqrt(rr_new) <= 1e-11 * rhs_norm) break;
          pv = r + (rr_new / rr) * pv;
          rr = rr_new;
        }
      }
      theta_hat = chol.solve(rc.D.transpose() * y);
      project_feasible(theta_hat);
    }

    // damped step along the feasible segment; the per-node norm is a
    // quadratic in t, so each trial is a single pass over the nodes
    const Eigen::VectorXd dir = theta_hat - theta;
    assembly.segment_coefficients(theta, dir, seg_a, seg_b, seg_c);
    double t_ls = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      double cand_obj = 0;
      for (std::size_t node = 0; node < metric.node_count(); ++node) {
        const double sq =
            std::max(0.0, seg_a[node] + 2 * t_ls * seg_b[node] + t_ls * t_ls * seg_c[node]);
        cand_obj += metric.node_measure(node) * std::pow(sq + delta, p_eff / 2.0);
      }
      if (cand_obj <= objective * (1 + 1e-14)) {
        theta += t_ls * dir;
        assembly.norms_squared(theta, norms_sq);
        accepted = true;
        const double rel_change = std::abs(objective - cand_obj) / std::max(cand_obj, 1e-300);
        objective = cand_obj;
        if (delta <= delta_floor * 1.01 && rel_change < options.objective_tol) converged = true;
        break;
      }
      t_ls *= 0.5;
    }
    ++result.iterations;
    if (converged) break;
    if (!accepted && delta <= delta_floor * 1.01) break;
    delta = std::max(delta * 0.1, delta_floor);
    objective = smoothed_objective(metric, norms_sq, p_eff, delta);
  }
  project_feasible(theta);

  result.converged = converged;
  result.theta = Cochain::zero(d, complex);
  for (std::size_t i = 0; i < rc.vars.size(); ++i) result.theta.values[rc.vars[i]] = theta[i];
  result.constraint_residual = (rc.D * theta - omega_red).cwiseAbs().maxCoeff();

  const SampledForm lift_theta = whitney_lift(result.theta, complex, metric);
  if (sup_mode) {
    double sup = result.theta.values.size() ? result.theta.values.cwiseAbs().maxCoeff() : 0;
    result.achieved_norm = sup;
  } else {
    result.achieved_norm = lp_form_norm(lift_theta, p_eff, metric);
  }
  const SampledForm lift_omega = whitney_lift(omega, complex, metric);
  result.omega_norm = lp_form_norm(lift_omega, static_cast<double>(n) / k, metric);
  result.norm_ratio =
      result.omega_norm > 0 ? result.achieved_norm / result.omega_norm : result.achieved_norm;
  return result;
}

SobolevConstantSeries sobolev_constant(const std::vector<SobolevStage>& stages, int degree,
                                       int random_probes, std::uint64_t seed, CohomologyMode mode,
                                       const ProbeGenerator& extra_probes,
                                       const PrimitiveOptions& options) {
  if (stages.size() < 3)
    throw std::invalid_argument("sobolev_constant: need at least 3 stages");
  SobolevConstantSeries series;
  series.degree = degree;
  series.seed = seed;

  for (std::size_t si = 0; si < stages.size(); ++si) {
    const auto& stage = stages[si];
    const int n = stage.complex.dimension();
    const int d = degree - 1;
    const double p = d == 0 ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(n) / d;
    std::vector<SobolevProbeResult> probes;

    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (si + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto vars = mode_simplices(stage.complex, d, mode);

    auto run_probe = [&](const std::string& id, const Cochain& omega_raw) {
      SampledForm lift = whitney_lift(omega_raw, stage.complex, stage.metric);
      const double norm = lp_form_norm(lift, static_cast<double>(n) / degree, stage.metric);
      if (norm < 1e-12) return;
      Cochain omega = omega_raw;
      omega.values /= norm;
      SobolevProbeResult pr;
      pr.probe_id = id;
      pr.omega_norm = 1.0;
      try {
        PrimitiveResult res =
            minimal_primitive(omega, p, stage.complex, stage.metric, mode, options);
        pr.primitive_norm = res.achieved_norm;
        pr.ratio = res.norm_ratio;
        pr.converged = res.converged;
      } catch (const std::domain_error&) {
        return;  // non-exact probe, skip
      }
      probes.push_back(std::move(pr));
    };

    for (int r = 0; r < random_probes; ++r) {
      Cochain theta0 = Cochain::zero(d, stage.complex);
      for (auto v : vars) theta0.values[v] = gauss(rng);
      run_probe("random_" + std::to_string(r), coboundary(theta0, stage.complex));
    }
    if (extra_probes)
      for (auto& [id, omega] : extra_probes(stage.complex, stage.metric)) run_probe(id, omega);

    double cmax = 0;
    for (const auto& pr : probes) cmax = std::max(cmax, pr.ratio);
    series.stage_parameter.push_back(stage.parameter);
    series.constant.push_back(cmax);
    series.probes.push_back(std::move(probes));
  }
  return series;
}

TorsionProbeResult torsion_probe_degree1(const std::vector<double>& eps,
                                         const std::function<ModelSpace(double)>& make_stage,
                                         double r0) {
  if (r0 >= 1.0 / std::numbers::e)
    throw std::invalid_argument("torsion_probe_degree1: need r0 < 1/e");
  TorsionProbeResult out;
  for (double e : eps) {
    const ModelSpace space = make_stage(e);
    const int n = space.complex.dimension();
    const double cap = std::log(std::log(1.0 / e));
    Cochain u = Cochain::zero(0, space.complex);
    for (std::size_t v = 0; v < space.complex.vertex_count(); ++v) {
      const double r = std::max(space.complex.vertex(v).norm(), e);
      u.values[v] = std::min(std::log(std::log(1.0 / r)), cap);
    }
    const double osc = u.values.maxCoeff() - u.values.minCoeff();
    if (osc < 1e-12)
      throw std::invalid_argument("torsion_probe_degree1: constant probe rejected");
    const double energy = p_dirichlet_energy(u, n, space.complex, space.metric);
    const double grad_norm = std::pow(energy, 1.0 / n);
    out.eps.push_back(e);
    out.oscillation.push_back(osc);
    out.grad_norm.push_back(grad_norm);
    out.ratio.push_back(osc / grad_norm);
  }
  return out;
}

double integrate_top(const Cochain& omega, const SimplicialComplex& complex) {
  if (omega.degree != complex.dimension())
    throw std::invalid_argument("integrate_top: top-degree cochain expected");
  return omega.values.sum();
}

namespace {

// Unit-integral top bump supported on the cells whose centroid lies within
// `radius` of `center`.
Cochain top_bump(const SimplicialComplex& cx, const MetricField& mf, const Eigen::VectorXd& center,
                 double radius) {
  const int n = cx.dimension();
  Cochain bump = Cochain::zero(n, cx);
  double mass = 0;
  for (std::size_t c = 0; c < cx.count(n); ++c) {
    auto t = cx.simplices(n)[c];
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(cx.ambient_dimension());
    for (int i = 0; i <= n; ++i) centroid += Eigen::VectorXd(cx.vertex(t[i]));
    centroid /= (n + 1);
    if ((centroid - center).norm() > radius) continue;
    double vol = 0;
    for (std::size_t q = 0; q < mf.nodes_per_cell(); ++q) vol += mf.node_measure(mf.node_id(c, q));
    bump.values[c] = vol;
    mass += vol;
  }
  if (mass <= 0) throw std::invalid_argument("top_bump: no cell under the bump");
  bump.values /= mass;
  return bump;
}

}  // namespace

KnrProbeReport knr_probe(ConformalType type, const std::vector<double>& sizes,
                         const std::function<ModelSpace(double)>& make_stage,
                         const PrimitiveOptions& options) {
  KnrProbeReport report;
  for (double size : sizes) {
    const ModelSpace space = make_stage(size);
    const SimplicialComplex& cx = space.complex;
    const MetricField& mf = space.metric;
    const int n = cx.dimension();
    if (n != 2) throw std::invalid_argument("knr_probe: planar catalog only");
    report.sizes.push_back(size);

    if (type == ConformalType::Parabolic) {
      Eigen::VectorXd c0 = Eigen::VectorXd::Zero(2);
      const Cochain unit = top_bump(cx, mf, c0, 0.5);
      Eigen::VectorXd c1(2), c2(2);
      c1 << -0.75, 0.0;
      c2 << 0.75, 0.0;
      Cochain pair = top_bump(cx, mf, c1, 0.4);
      pair.values -= top_bump(cx, mf, c2, 0.4).values;

      PrimitiveResult main =
          minimal_primitive(unit, static_cast<double>(n) / (n - 1), cx, mf,
                            CohomologyMode::Absolute, options);
      PrimitiveResult companion =
          minimal_primitive(pair, static_cast<double>(n) / (n - 1), cx, mf,
                            CohomologyMode::Absolute, options);
      report.primitive_norms.push_back(main.achieved_norm);
      report.companion_norms.push_back(companion.achieved_norm);
      report.integrals.push_back(integrate_top(unit, cx));
      report.converged.push_back(main.converged && companion.converged);
    } else {
      // fixed radial theta = eta(r)/(2 pi) dphi with a 0->1 ramp on [0.1, 0.5]
      AmbientForm theta;
      theta.ambient_dimension = 2;
      theta.degree = 1;
      auto ramp = [](double r) {
        if (r <= 0.1) return 0.0;
        if (r >= 0.5) return 1.0;
        return (r - 0.1) / 0.4;
      };
      auto dramp = [](double r) { return (r > 0.1 && r < 0.5) ? 1.0 / 0.4 : 0.0; };
      theta.value = [ramp](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const double r2 = std::max(x.squaredNorm(), 1e-30);
        Eigen::VectorXd out(2);
        const double f = ramp(std::sqrt(r2)) / (2 * std::numbers::pi * r2);
        out << -f * x[1], f * x[0];
        return out;
      };
      theta.dvalue = [dramp](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const double r = std::max(x.norm(), 1e-15);
        Eigen::VectorXd out(1);
        out << dramp(r) / (2 * std::numbers::pi * r);
        return out;
      };
      const SampledForm sampled = sample_form(theta, cx, mf);
      const Cochain theta_c = de_rham_project(sampled, cx, mf);
      const Cochain dtheta = coboundary(theta_c, cx);
      const SampledForm lift = whitney_lift(theta_c, cx, mf);
      report.primitive_norms.push_back(
          lp_form_norm(lift, static_cast<double>(n) / (n - 1), mf));
      report.companion_norms.push_back(report.primitive_norms.back());
      report.integrals.push_back(integrate_top(dtheta, cx));
      report.converged.push_back(true);
    }
  }
  return report;
}

}  // namespace confdr
