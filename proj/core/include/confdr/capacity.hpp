#pragma once

#include "confdr/forms.hpp"
#include "confdr/metric.hpp"
#include "confdr/simplicial_complex.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace confdr {

/// How the admissible-class condition "u >= 1 on a neighbourhood of F" is
/// realized. `Star` pins the closed star of F (the smallest discrete
/// neighbourhood); `Exact` pins F itself, the h->0 limit of the star
/// realization. Exact is the default: on affordable 3-D resolutions the
/// star variant inflates the plate by a full mesh ring, which biases the
/// shell capacities by more than the acceptance tolerances.
enum class PlateMode { Exact, Star };

/// Condenser (F, U): plate vertices forced to 1, ground vertices forced
/// to 0, optional cell mask restricting the energy to a sub-complex.
struct Condenser {
  const SimplicialComplex* complex = nullptr;
  const MetricField* metric = nullptr;
  std::vector<std::int32_t> plate;
  std::vector<std::int32_t> ground;
  std::optional<std::vector<std::int32_t>> domain_cells;
  PlateMode mode = PlateMode::Exact;
};

struct SolveOptions {
  double eps_start = 1e-2;
  double eps_end = 1e-8;
  double eps_factor = 0.1;        // geometric continuation
  int max_newton_per_stage = 60;
  double grad_tol = 1e-11;        // relative to the current energy scale
  double armijo = 1e-4;
};

struct CapacityResult {
  double value = 0;          // integral |du|^n at the final iterate (no regularizer)
  Cochain minimizer;
  int iterations = 0;
  std::vector<double> energy_history;  // accepted iterates, per continuation stage
  double epsilon_final = 0;
  bool converged = false;
};

/// sum_nodes weight * vol_density * |grad u|_g^p for a 0-cochain.
double p_dirichlet_energy(const Cochain& u, double p, const SimplicialComplex& complex,
                          const MetricField& metric);

/// Minimizes the regularized energy sum w (|du|^2 + eps)^{n/2} under the
/// plate/ground constraints with geometric continuation eps -> 0 (damped
/// Newton, Armijo line search). The iterate is clamped to [0,1] after each
/// stage whenever clamping does not increase the energy. Empty plate
/// returns value 0 with u = 0; a plate meeting the ground throws.
CapacityResult solve_condenser(const Condenser& condenser, const SolveOptions& options = {});

/// A condenser instance owning its geometry (exhaustion / probe stages).
struct CondenserScene {
  SimplicialComplex complex;
  MetricField metric;
  std::vector<std::int32_t> plate;
  std::vector<std::int32_t> ground;
  PlateMode mode = PlateMode::Exact;
};

struct CapacitySeries {
  std::vector<double> parameter;
  std::vector<double> value;
  std::vector<int> iterations;
  std::vector<double> epsilon_final;
};

/// Solves one condenser per parameter value.
CapacitySeries capacity_series(const std::vector<double>& parameters,
                               const std::function<CondenserScene(double)>& make_stage,
                               const SolveOptions& options = {});

/// Exhaustion family U_{R_j} with a fixed core plate; sizes strictly
/// increasing and > 1 (the decay fit runs in log log R).
struct ExhaustionSpec {
  std::vector<double> sizes;
  std::function<CondenserScene(double)> make_stage;
};

enum class ConformalType { Parabolic, Hyperbolic };

struct ClassifyResult {
  ConformalType type = ConformalType::Hyperbolic;
  double fitted_slope = 0;   // least-squares slope of log cap vs log log R
  CapacitySeries series;
  bool reliable = true;      // false when the series increases beyond tolerance
};

/// Decay-fit classification. Parabolic decays like (log R)^{1-n}; the test
/// fits log cap against log log R and declares Parabolic when the fitted
/// slope falls at or below `slope_cut`; otherwise Hyperbolic when the last
/// capacity stays at or above `threshold`; otherwise the fixed-slope
/// parabolic model and the constant model compete by residual.
ClassifyResult classify_type(const ExhaustionSpec& spec, double threshold,
                             const SolveOptions& options = {}, double slope_cut = -0.5,
                             int dimension = 2);

/// Capacity series of a shrinking set family (point or segment probes).
CapacitySeries polar_probe(const std::vector<double>& epsilons,
                           const std::function<CondenserScene(double)>& make_stage,
                           const SolveOptions& options = {});

}  // namespace confdr
