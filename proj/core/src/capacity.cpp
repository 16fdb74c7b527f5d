#include "confdr/capacity.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confdr {

namespace {

// Pre-assembled per-node energy data: measure, Lambda^1 Gram (chart
// coordinates), and the cell's vertex slots.
struct EnergyAssembly {
  const SimplicialComplex* cx;
  const MetricField* mf;
  int n;
  Eigen::MatrixXd D;                       // (n+1) x n barycentric differentials
  std::vector<std::int32_t> cells;         // cells carrying energy
  std::vector<double> measure;             // per node
  std::vector<Eigen::MatrixXd> gram;       // per node, n x n

  EnergyAssembly(const SimplicialComplex& complex, const MetricField& metric,
                 const std::optional<std::vector<std::int32_t>>& domain) {
    cx = &complex;
    mf = &metric;
    n = complex.dimension();
    D.resize(n + 1, n);
    D.row(0) = Eigen::RowVectorXd::Constant(n, -1.0);
    D.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
    if (domain)
      cells = *domain;
    else {
      cells.resize(complex.count(n));
      for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = static_cast<std::int32_t>(c);
    }
    const std::size_t nq = metric.nodes_per_cell();
    measure.resize(complex.count(n) * nq, 0.0);
    gram.resize(complex.count(n) * nq);
    for (auto c : cells)
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = metric.node_id(c, q);
        measure[node] = metric.node_measure(node);
        gram[node] = metric.gram_on_forms(node, 1);
      }
  }

  // Constant chart gradient of u on a cell.
  Eigen::VectorXd cell_gradient(const Eigen::VectorXd& u, std::int32_t c) const {
    auto t = cx->simplices(n)[c];
    Eigen::VectorXd local(n + 1);
    for (int i = 0; i <= n; ++i) local[i] = u[t[i]];
    return D.transpose() * local;
  }

  double energy(const Eigen::VectorXd& u, double eps, double power) const {
    double acc = 0;
    const std::size_t nq = mf->nodes_per_cell();
    for (auto c : cells) {
      const Eigen::VectorXd du = cell_gradient(u, c);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(c, q);
        const double s = du.dot(gram[node] * du);
        acc += measure[node] * std::pow(s + eps, power / 2.0);
      }
    }
    return acc;
  }

  void gradient(const Eigen::VectorXd& u, double eps, double power, Eigen::VectorXd& g) const {
    g.setZero(u.size());
    const std::size_t nq = mf->nodes_per_cell();
    for (auto c : cells) {
      auto t = cx->simplices(n)[c];
      const Eigen::VectorXd du = cell_gradient(u, c);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(c, q);
        const Eigen::VectorXd Adu = gram[node] * du;
        const double s = du.dot(Adu);
        acc += measure[node] * power * std::pow(s + eps, power / 2.0 - 1.0) * Adu;
      }
      const Eigen::VectorXd local = D * acc;
      for (int i = 0; i <= n; ++i) g[t[i]] += local[i];
    }
  }

  void hessian_triplets(const Eigen::VectorXd& u, double eps, double power,
                        std::vector<Eigen::Triplet<double>>& trips) const {
    trips.clear();
    const std::size_t nq = mf->nodes_per_cell();
    for (auto c : cells) {
      auto t = cx->simplices(n)[c];
      const Eigen::VectorXd du = cell_gradient(u, c);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t node = mf->node_id(c, q);
        const Eigen::VectorXd Adu = gram[node] * du;
        const double s = du.dot(Adu);
        const double f1 = std::pow(s + eps, power / 2.0 - 1.0);
        H += measure[node] * power * f1 * gram[node];
        if (power != 2.0) {
          const double f2 = std::pow(s + eps, power / 2.0 - 2.0);
          H += measure[node] * power * (power - 2.0) * f2 * (Adu * Adu.transpose());
        }
      }
      const Eigen::MatrixXd Hl = D * H * D.transpose();
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) trips.emplace_back(t[i], t[j], Hl(i, j));
    }
  }
};

}  // namespace

double p_dirichlet_energy(const Cochain& u, double p, const SimplicialComplex& complex,
                          const MetricField& metric) {
  if (p < 1.0) throw std::invalid_argument("p_dirichlet_energy: p must be >= 1");
  if (u.degree != 0) throw std::invalid_argument("p_dirichlet_energy: degree-0 cochain expected");
  EnergyAssembly assembly(complex, metric, std::nullopt);
  return assembly.energy(u.values, 0.0, p);
}

CapacityResult solve_condenser(const Condenser& condenser, const SolveOptions& options) {
  const SimplicialComplex& cx = *condenser.complex;
  const MetricField& mf = *condenser.metric;
  const int n = cx.dimension();
  const std::size_t nv = cx.vertex_count();

  CapacityResult result;
  result.minimizer = Cochain{0, Eigen::VectorXd::Zero(static_cast<long>(nv))};

  if (condenser.plate.empty()) {
    // u = 0 is admissible, the infimum is 0
    result.converged = true;
    result.energy_history = {0.0};
    result.epsilon_final = 0.0;
    return result;
  }

  std::vector<std::int32_t> pinned_one =
      condenser.mode == PlateMode::Star
          ? cx.closed_star_vertices({condenser.plate.data(), condenser.plate.size()})
          : condenser.plate;

  std::vector<std::int8_t> state(nv, 0);  // 0 free, 1 plate, 2 ground
  for (auto v : pinned_one) state[v] = 1;
  for (auto v : condenser.ground) {
    if (state[v] == 1)
      throw std::invalid_argument("solve_condenser: plate and ground share a vertex");
    state[v] = 2;
  }

  EnergyAssembly assembly(cx, mf, condenser.domain_cells);

  // Vertices outside the energy-carrying cells stay at 0.
  std::vector<std::int8_t> active(nv, 0);
  for (auto c : assembly.cells) {
    auto t = cx.simplices(n)[c];
    for (int i = 0; i <= n; ++i) active[t[i]] = 1;
  }

  std::vector<std::int32_t> free_of_vertex(nv, -1);
  std::vector<std::int32_t> free_vertices;
  for (std::size_t v = 0; v < nv; ++v)
    if (state[v] == 0 && active[v]) {
      free_of_vertex[v] = static_cast<std::int32_t>(free_vertices.size());
      free_vertices.push_back(static_cast<std::int32_t>(v));
    }
  const long nfree = static_cast<long>(free_vertices.size());

  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<long>(nv));
  for (std::size_t v = 0; v < nv; ++v) u[v] = (state[v] == 1) ? 1.0 : 0.0;

  const double power = static_cast<double>(n);
  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SimplicialLDLT<SparseReal> solver;
  bool analyzed = false;
  bool all_converged = true;

  for (double eps = options.eps_start; eps >= options.eps_end * (1 - 1e-12);
       eps *= options.eps_factor) {
    result.epsilon_final = eps;
    double energy = assembly.energy(u, eps, power);
    result.energy_history.push_back(energy);
    bool stage_converged = false;
    int stagnant = 0;

    for (int it = 0; it < options.max_newton_per_stage; ++it) {
      assembly.gradient(u, eps, power, grad);
      Eigen::VectorXd gf(nfree);
      for (long i = 0; i < nfree; ++i) gf[i] = grad[free_vertices[i]];
      const double gnorm = nfree ? gf.cwiseAbs().maxCoeff() : 0.0;
      const double scale = std::max(1.0, energy);
      if (gnorm <= options.grad_tol * scale) {
        stage_converged = true;
        break;
      }

      assembly.hessian_triplets(u, eps, power, trips);
      std::vector<Eigen::Triplet<double>> free_trips;
      free_trips.reserve(trips.size());
      for (const auto& t : trips) {
        const std::int32_t r = free_of_vertex[t.row()];
        const std::int32_t c = free_of_vertex[t.col()];
        if (r >= 0 && c >= 0) free_trips.emplace_back(r, c, t.value());
      }
      SparseReal H(nfree, nfree);
      H.setFromTriplets(free_trips.begin(), free_trips.end());
      if (!analyzed) {
        solver.analyzePattern(H);
        analyzed = true;
      }
      solver.factorize(H);
      Eigen::VectorXd step;
      if (solver.info() == Eigen::Success) {
        step = solver.solve(-gf);
      } else {
        // Gram-preconditioned descent fallback
        step = -gf;
      }
      if (step.dot(gf) >= 0) step = -gf;  // enforce a descent direction

      double t_ls = 1.0;
      bool accepted = false;
      const double slope = step.dot(gf);
      double decrement = 0;
      for (int ls = 0; ls < 40; ++ls) {
        Eigen::VectorXd cand = u;
        for (long i = 0; i < nfree; ++i) cand[free_vertices[i]] += t_ls * step[i];
        const double cand_energy = assembly.energy(cand, eps, power);
        if (cand_energy <= energy + options.armijo * t_ls * slope) {
          decrement = energy - cand_energy;
          u = std::move(cand);
          energy = cand_energy;
          accepted = true;
          break;
        }
        t_ls *= 0.5;
      }
      ++result.iterations;
      if (!accepted) break;  // line search stalled, keep best iterate
      result.energy_history.push_back(energy);
      // stationary at floating-point resolution counts as converged
      stagnant = decrement <= 1e-14 * std::max(1.0, energy) ? stagnant + 1 : 0;
      if (stagnant >= 2) {
        stage_converged = true;
        break;
      }
    }
    if (!stage_converged) all_converged = false;

    // truncation: clamp to [0,1] when it does not increase the energy
    Eigen::VectorXd clamped = u.cwiseMax(0.0).cwiseMin(1.0);
    if (assembly.energy(clamped, eps, power) <= energy * (1 + 1e-14)) u = clamped;
  }

  result.minimizer.values = u;
  result.value = assembly.energy(u, 0.0, power);
  result.converged = all_converged;
  return result;
}

CapacitySeries capacity_series(const std::vector<double>& parameters,
                               const std::function<CondenserScene(double)>& make_stage,
                               const SolveOptions& options) {
  CapacitySeries series;
  for (double p : parameters) {
    CondenserScene scene = make_stage(p);
    Condenser condenser;
    condenser.complex = &scene.complex;
    condenser.metric = &scene.metric;
    condenser.plate = scene.plate;
    condenser.ground = scene.ground;
    condenser.mode = scene.mode;
    CapacityResult r = solve_condenser(condenser, options);
    series.parameter.push_back(p);
    series.value.push_back(r.value);
    series.iterations.push_back(r.iterations);
    series.epsilon_final.push_back(r.epsilon_final);
  }
  return series;
}

ClassifyResult classify_type(const ExhaustionSpec& spec, double threshold,
                             const SolveOptions& options, double slope_cut, int dimension) {
  if (spec.sizes.size() < 3)
    throw std::invalid_argument("classify_type: need at least 3 exhaustion stages");
  for (std::size_t i = 0; i + 1 < spec.sizes.size(); ++i)
    if (spec.sizes[i + 1] <= spec.sizes[i])
      throw std::invalid_argument("classify_type: sizes must be strictly increasing");

  ClassifyResult out;
  out.series = capacity_series(spec.sizes, spec.make_stage, options);
  const auto& caps = out.series.value;

  // the exhaustion series should be non-increasing up to solver tolerance
  for (std::size_t i = 0; i + 1 < caps.size(); ++i)
    if (caps[i + 1] > caps[i] * 1.05 + 1e-12) out.reliable = false;

  const std::size_t m = caps.size();
  Eigen::VectorXd x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (spec.sizes[i] <= 1.0)
      throw std::invalid_argument("classify_type: sizes must exceed 1 (log log fit)");
    x[i] = std::log(std::log(spec.sizes[i]));
    y[i] = std::log(std::max(caps[i], 1e-300));
  }
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  out.fitted_slope = sxx > 0 ? ((x.array() - xm) * (y.array() - ym)).sum() / sxx : 0.0;

  if (out.fitted_slope <= slope_cut) {
    out.type = ConformalType::Parabolic;
  } else if (caps.back() >= threshold) {
    out.type = ConformalType::Hyperbolic;
  } else {
    // fixed-slope parabolic model vs constant model, by residual
    const double s_par = 1.0 - dimension;
    double a_par = 0, rss_par = 0, rss_const = 0;
    for (std::size_t i = 0; i < m; ++i) a_par += (y[i] - s_par * x[i]);
    a_par /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      rss_par += std::pow(y[i] - (a_par + s_par * x[i]), 2);
      rss_const += std::pow(y[i] - ym, 2);
    }
    out.type = rss_par < rss_const ? ConformalType::Parabolic : ConformalType::Hyperbolic;
  }
  return out;
}

CapacitySeries polar_probe(const std::vector<double>& epsilons,
                           const std::function<CondenserScene(double)>& make_stage,
                           const SolveOptions& options) {
  if (epsilons.empty()) throw std::invalid_argument("polar_probe: empty stage list");
  return capacity_series(epsilons, make_stage, options);
}

}  // namespace confdr
