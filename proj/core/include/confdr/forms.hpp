#pragma once

#include "confdr/metric.hpp"
#include "confdr/simplicial_complex.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>

namespace confdr {

/// Degree-k real values on the k-simplices: the discrete differential form.
struct Cochain {
  int degree = 0;
  Eigen::VectorXd values;

  static Cochain zero(int degree, const SimplicialComplex& complex) {
    return {degree, Eigen::VectorXd::Zero(static_cast<long>(complex.count(degree)))};
  }
};

/// d on cochains, realized through the signed incidence transpose.
/// Degree-n input is a degree overflow (there is nothing above the top).
Cochain coboundary(const Cochain& c, const SimplicialComplex& complex);

/// Plain-text save/load, values keyed by simplex index.
void save_cochain(std::ostream& out, const Cochain& c);
Cochain load_cochain(std::istream& in);

/// Antisymmetric k-tensor values at the shared quadrature nodes, expressed
/// in each cell's chart basis on strictly increasing multi-indices (so
/// antisymmetry is structural). Optional derivative samples hold the exact
/// d of the underlying piecewise representative. The evaluator, when
/// present, extends the samples to arbitrary barycentric points of a cell;
/// integration over lower-dimensional simplices requires it.
struct SampledForm {
  int dimension = 0;  // n of the carrying complex
  int degree = 0;
  Eigen::MatrixXd coeffs;                  // node_count x C(n, degree)
  std::optional<Eigen::MatrixXd> dcoeffs;  // node_count x C(n, degree+1)
  std::function<Eigen::VectorXd(std::size_t cell, const Eigen::VectorXd& bary)> evaluator;

  std::size_t node_count() const { return static_cast<std::size_t>(coeffs.rows()); }
};

/// Samples the Whitney form of a cochain at the quadrature nodes. The
/// derivative samples are the analytic d of the piecewise-linear
/// representative (a constant per cell in top degree minus one), and agree
/// with whitney_lift(coboundary(c)) node by node.
SampledForm whitney_lift(const Cochain& c, const SimplicialComplex& complex,
                         const MetricField& metric);

/// Integrates a sampled form over every k-simplex (quadrature of the given
/// order on each face, evaluated through the form's evaluator; top degree
/// integrates the native samples). Left-inverse of whitney_lift up to
/// quadrature exactness.
Cochain de_rham_project(const SampledForm& s, const SimplicialComplex& complex,
                        const MetricField& metric, int order = 9);

/// ( sum_nodes weight * vol_density * |s|_g^p )^(1/p); requires p >= 1.
double lp_form_norm(const SampledForm& s, double p, const MetricField& metric);

/// The graph norm report: ||omega||_{L^{n/k}} + ||d omega||_{L^{n/(k+1)}}.
struct ConfNormReport {
  double lp_part = 0;
  double dlp_part = 0;
  double total = 0;
};

/// Conformal norm of a cochain. Degree 0 uses the Royden norm
/// ||u||_inf + ||du||_n with the sup taken over quadrature nodes and
/// vertices; top degree has dlp_part = 0 by convention.
ConfNormReport conformal_norm(const Cochain& c, const SimplicialComplex& complex,
                              const MetricField& metric);

/// Conformal norm of a sampled form carrying derivative samples.
ConfNormReport conformal_norm(const SampledForm& s, const SimplicialComplex& complex,
                              const MetricField& metric);

/// Node-wise exterior product. Both operands must carry derivative
/// samples; the result's derivative samples follow the Leibniz rule
/// d(a^b) = da^b + (-1)^k a^db exactly. Degrees must satisfy k+l <= n.
SampledForm wedge(const SampledForm& a, const SampledForm& b);

/// A differential form given analytically in ambient coordinates:
/// components on increasing multi-indices of the ambient basis. `dvalue`
/// may be empty when the derivative is not needed.
struct AmbientForm {
  int ambient_dimension = 0;
  int degree = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> dvalue;
};

/// Samples an ambient form on the complex quadrature (pulling components
/// back through each cell's chart). Derivative samples are filled when the
/// form provides them.
SampledForm sample_form(const AmbientForm& form, const SimplicialComplex& complex,
                        const MetricField& metric);

/// Constant-coefficient ambient form (closed by construction).
AmbientForm constant_form(int ambient_dimension, int degree, const Eigen::VectorXd& comps);

/// Per-cell Whitney data of one degree, for assembling operators that act
/// on lifted cochains: the k-faces of each cell (global index and
/// orientation sign relative to the stored ascending tuple) and the basis
/// values at every quadrature node, laid out ((cell*faces_per_cell + f)*nq + q).
struct WhitneyCellTable {
  int degree = 0;
  int faces_per_cell = 0;
  std::vector<std::int64_t> face_index;  // cell_count * faces_per_cell
  std::vector<double> face_sign;
  Eigen::MatrixXd values;                // rows as above, cols = C(n, degree)
};

WhitneyCellTable whitney_cell_table(int degree, const SimplicialComplex& complex,
                                    const MetricField& metric);

// -- low-level helpers shared with the pullback module --------------------

/// Component vector of the wedge of two component vectors (increasing
/// multi-index bases), degrees ka + kb.
Eigen::VectorXd wedge_components(int n, int ka, const Eigen::VectorXd& a, int kb,
                                 const Eigen::VectorXd& b);

/// Pullback of k-form components through a linear map: if y = M x, maps
/// components in the y-basis to components in the x-basis
/// (comps_I = sum_J b_J det M[J, I]). M is rows_y x cols_x.
Eigen::VectorXd pullback_components(const Eigen::MatrixXd& M, int k, const Eigen::VectorXd& b);

}  // namespace confdr
