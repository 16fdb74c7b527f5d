#pragma once

#include "confdr/forms.hpp"
#include "confdr/metric.hpp"
#include "confdr/simplicial_complex.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace confdr {

/// A map between open sets of R^n given by formulas (value and ambient
/// differential).
struct AnalyticMap {
  int dimension = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> differential;
};

AnalyticMap identity_map(int n);
AnalyticMap affine_map(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);
/// f(x) = |x|^{a-1} x; degenerate at the origin for a > 1, keep meshes away.
AnalyticMap radial_stretch(int n, double a);
/// Disc automorphism z -> (z - w)/(1 - conj(w) z), n = 2.
AnalyticMap mobius_disc(double wx, double wy);
/// g after f.
AnalyticMap compose(const AnalyticMap& g, const AnalyticMap& f);

/// Map sampled at the source quadrature nodes: image point, ambient
/// differential, Jacobian determinant. Target data is optional; it is
/// needed for change-of-variables checks and metric-aware distortion.
struct SampledMap {
  const SimplicialComplex* source_complex = nullptr;
  const MetricField* source_metric = nullptr;
  const SimplicialComplex* target_complex = nullptr;
  const MetricField* target_metric = nullptr;
  std::vector<Eigen::VectorXd> image;
  std::vector<Eigen::MatrixXd> differential;
  std::vector<double> jacobian;
  std::optional<AnalyticMap> model;
};

SampledMap sample_map(const AnalyticMap& map, const SimplicialComplex& source_complex,
                      const MetricField& source_metric,
                      const SimplicialComplex* target_complex = nullptr,
                      const MetricField* target_metric = nullptr);

/// Distortion data: K = ess-sup |df|^n / |J_f| with the operator norm of
/// the differential taken between the metrics (conformal factors included),
/// H = max singular value ratio. Throws on a degenerate differential.
struct DistortionReport {
  double K_estimate = 1;
  double H_estimate = 1;
  std::vector<double> node_distortion;  // per-node |df|^n/|J|
  std::vector<int> histogram;           // 16 bins over [1, K_estimate]
};

DistortionReport distortion_coefficient(const SampledMap& map);

/// Pullback of an analytic target form onto the source quadrature:
/// (f*beta)_x = beta_{f(x)} composed with the k-th exterior power of df_x.
/// Derivative samples are f*(d beta) (the chain rule d f* = f* d holds for
/// W^{1,n} maps). The result carries an evaluator when the map is analytic.
SampledForm pullback_form(const SampledMap& map, const AmbientForm& beta);

/// L^{n/(k+1)} norm of d(f*beta) - f*(d beta), with d(f*beta) computed by
/// projecting the pullback to a cochain and applying the coboundary.
/// `beta` must provide its analytic derivative.
double chain_rule_residual(const SampledMap& map, const AmbientForm& beta,
                           int projection_order = 9);

/// (integral over the source of (v o f)|J_f| dvol_g, integral over the
/// target of v dvol_h). Requires target complex/metric.
std::pair<double, double> change_of_variables_check(const SampledMap& map,
                                                    const std::function<double(const Eigen::VectorXd&)>& v);

/// Same combinatorics with mapped vertex positions (cells re-oriented
/// positively). Plate/ground vertex sets transfer by index.
SimplicialComplex push_forward_mesh(const SimplicialComplex& complex, const AnalyticMap& map);

}  // namespace confdr
