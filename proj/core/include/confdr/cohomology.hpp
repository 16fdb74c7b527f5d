#pragma once

#include "confdr/capacity.hpp"
#include "confdr/forms.hpp"
#include "confdr/metric.hpp"
#include "confdr/model_space.hpp"
#include "confdr/simplicial_complex.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace confdr {

/// Absolute: all simplices. CompactSupport: cochains supported on interior
/// simplices (the coboundary maps the interior subcomplex to itself, so
/// this is a genuine subcomplex; it realizes the interior complex).
enum class CohomologyMode { Absolute, CompactSupport };

/// Exact rank of a signed incidence matrix over GF(p), p = 2^31 - 1.
/// For the torsion-free catalog complexes this equals the rational rank.
int sparse_rank_mod_p(const SparseInt& M);

struct CohomologyReport {
  CohomologyMode mode = CohomologyMode::Absolute;
  std::vector<long> dim_cochains;   // per degree
  std::vector<long> dim_cocycles;   // Z^k
  std::vector<long> dim_coboundaries;  // B^k
  std::vector<long> betti;
};

CohomologyReport cohomology_ranks(const SimplicialComplex& complex,
                                  CohomologyMode mode = CohomologyMode::Absolute);

/// Interior k-simplices (ascending indices); all simplices in Absolute mode.
std::vector<std::int32_t> mode_simplices(const SimplicialComplex& complex, int k,
                                         CohomologyMode mode);

/// How the coboundary constraint is handled inside the IRLS loop.
/// SchurCG works on any complex. Potential rewrites theta = theta_0 + d(u)
/// and minimizes over the potential u unconstrained; it is exact precisely
/// when every closed (k-1)-cochain of the mode is itself exact (vanishing
/// betti in degree k-1), which holds on the contractible(-relative)
/// catalog stages and is much faster under strong metric anisotropy.
enum class PrimitiveReduction { SchurCG, Potential };

struct PrimitiveOptions {
  double exactness_tol = 1e-8;   // relative residual above which omega is not exact
  double constraint_tol = 1e-11; // feasibility enforced after every iterate
  int max_irls = 40;
  double objective_tol = 1e-10;  // relative objective decrease stopping rule
  double delta_floor = 1e-12;    // smoothing continuation floor (relative)
  int sup_norm_p = 24;           // proxy exponent for the degree-0 sup-norm objective
  PrimitiveReduction reduction = PrimitiveReduction::SchurCG;
};

struct PrimitiveResult {
  Cochain theta;              // full-length cochain (zeros outside the mode support)
  double achieved_norm = 0;   // lifted L^p norm of theta (sup proxy for degree 0)
  double omega_norm = 0;      // lifted L^{n/k} norm of omega
  double norm_ratio = 0;      // achieved_norm / omega_norm
  int iterations = 0;
  bool converged = false;
  double constraint_residual = 0;
};

/// theta minimizing the lifted L^p norm subject to coboundary(theta) =
/// omega, by iteratively reweighted least squares with smoothing
/// continuation; every iterate is projected back onto the affine
/// constraint set. p defaults to n/(k-1); the degree-0 sup-norm objective
/// is approached through a large-p proxy. Throws std::domain_error when
/// omega is not exact (least-squares rank/residual test).
PrimitiveResult minimal_primitive(const Cochain& omega, double p,
                                  const SimplicialComplex& complex, const MetricField& metric,
                                  CohomologyMode mode = CohomologyMode::Absolute,
                                  const PrimitiveOptions& options = {});

struct SobolevStage {
  SimplicialComplex complex;
  MetricField metric;
  double parameter = 0;
  std::string label;
};

struct SobolevProbeResult {
  std::string probe_id;
  double omega_norm = 0;
  double primitive_norm = 0;
  double ratio = 0;
  bool converged = true;
};

struct SobolevConstantSeries {
  int degree = 0;
  std::uint64_t seed = 0;
  std::vector<double> stage_parameter;
  std::vector<double> constant;  // max ratio per stage, reported raw
  std::vector<std::vector<SobolevProbeResult>> probes;
};

/// Deterministic extra probes for a stage: (id, exact k-cochain) pairs.
using ProbeGenerator = std::function<std::vector<std::pair<std::string, Cochain>>(
    const SimplicialComplex&, const MetricField&)>;

/// Sobolev-constant series: per stage the max over probes of
/// (minimal primitive norm)/(omega norm), probes being seeded random exact
/// cochains plus the deterministic generator's. Bounded series are
/// evidence for vanishing H^k (zero torsion), growth for non-vanishing;
/// reported as evidence, never as a boolean.
SobolevConstantSeries sobolev_constant(const std::vector<SobolevStage>& stages, int degree,
                                       int random_probes, std::uint64_t seed,
                                       CohomologyMode mode = CohomologyMode::CompactSupport,
                                       const ProbeGenerator& extra_probes = nullptr,
                                       const PrimitiveOptions& options = {});

struct TorsionProbeResult {
  std::vector<double> eps;
  std::vector<double> oscillation;
  std::vector<double> grad_norm;  // lifted L^n norm of du
  std::vector<double> ratio;      // oscillation / grad_norm
};

/// Degree-1 torsion witness: u_eps = min(log|log|x||, log|log eps|)
/// sampled as a 0-cochain on annulus stages (inner radius eps, outer
/// radius r0 < 1/e); the ratio series osc/||du||_n diverges like
/// log|log eps|. Rejects stages on which u is constant.
TorsionProbeResult torsion_probe_degree1(const std::vector<double>& eps,
                                         const std::function<ModelSpace(double)>& make_stage,
                                         double r0);

/// Signed sum of top-cochain values (cells are positively oriented).
/// Vanishes exactly on coboundaries of interior-supported (n-1)-cochains.
double integrate_top(const Cochain& omega, const SimplicialComplex& complex);

struct KnrProbeReport {
  std::vector<double> sizes;
  std::vector<double> primitive_norms;  // main series per the case contract
  std::vector<double> companion_norms;  // parabolic: mean-zero-pair primitives
  std::vector<double> integrals;        // integral of the probe per stage
  std::vector<bool> converged;
};

/// Integration-operator probes. Parabolic stages (growing flat discs):
/// a unit-integral top bump has primitive norms growing without bound
/// while a mean-zero bump pair stays bounded. Hyperbolic stages
/// (Poincare discs): a fixed radial (n-1)-form theta keeps a bounded
/// L^{n/(n-1)} norm while integral(d theta) stays away from 0; the report
/// carries ||theta|| in primitive_norms.
KnrProbeReport knr_probe(ConformalType type, const std::vector<double>& sizes,
                         const std::function<ModelSpace(double)>& make_stage,
                         const PrimitiveOptions& options = {});

}  // namespace confdr
