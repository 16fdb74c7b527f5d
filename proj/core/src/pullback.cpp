#include "confdr/pullback.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace confdr {

AnalyticMap identity_map(int n) {
  AnalyticMap f;
  f.dimension = n;
  f.value = [](const Eigen::VectorXd& x) { return x; };
  f.differential = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(n, n); };
  return f;
}

AnalyticMap affine_map(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("affine_map: shape mismatch");
  AnalyticMap f;
  f.dimension = static_cast<int>(A.rows());
  f.value = [A, b](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x + b; };
  f.differential = [A](const Eigen::VectorXd&) { return A; };
  return f;
}

AnalyticMap radial_stretch(int n, double a) {
  if (a < 1.0) throw std::invalid_argument("radial_stretch: a must be >= 1");
  AnalyticMap f;
  f.dimension = n;
  f.value = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double r = x.norm();
    if (r == 0) return x;
    return std::pow(r, a - 1.0) * x;
  };
  f.differential = [a, n](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const double r = x.norm();
    if (r == 0) throw std::invalid_argument("radial_stretch: differential at the origin");
    const Eigen::VectorXd u = x / r;
    return std::pow(r, a - 1.0) *
           (Eigen::MatrixXd::Identity(n, n) + (a - 1.0) * (u * u.transpose()));
  };
  return f;
}

AnalyticMap mobius_disc(double wx, double wy) {
  AnalyticMap f;
  f.dimension = 2;
  const std::complex<double> w(wx, wy);
  if (std::abs(w) >= 1.0) throw std::invalid_argument("mobius_disc: |w| must be < 1");
  f.value = [w](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const std::complex<double> z(x[0], x[1]);
    const std::complex<double> y = (z - w) / (1.0 - std::conj(w) * z);
    Eigen::VectorXd out(2);
    out << y.real(), y.imag();
    return out;
  };
  f.differential = [w](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const std::complex<double> z(x[0], x[1]);
    const std::complex<double> den = 1.0 - std::conj(w) * z;
    const std::complex<double> d = (1.0 - std::norm(w)) / (den * den);
    Eigen::MatrixXd J(2, 2);
    J << d.real(), -d.imag(), d.imag(), d.real();
    return J;
  };
  return f;
}

AnalyticMap compose(const AnalyticMap& g, const AnalyticMap& f) {
  if (g.dimension != f.dimension) throw std::invalid_argument("compose: dimension mismatch");
  AnalyticMap h;
  h.dimension = f.dimension;
  auto fv = f.value, gv = g.value;
  auto fd = f.differential, gd = g.differential;
  h.value = [fv, gv](const Eigen::VectorXd& x) { return gv(fv(x)); };
  h.differential = [fv, fd, gd](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return gd(fv(x)) * fd(x);
  };
  return h;
}

SampledMap sample_map(const AnalyticMap& map, const SimplicialComplex& source_complex,
                      const MetricField& source_metric,
                      const SimplicialComplex* target_complex,
                      const MetricField* target_metric) {
  if (map.dimension != source_complex.ambient_dimension())
    throw std::invalid_argument("sample_map: map dimension must match the source ambient space");
  SampledMap s;
  s.source_complex = &source_complex;
  s.source_metric = &source_metric;
  s.target_complex = target_complex;
  s.target_metric = target_metric;
  s.model = map;
  const std::size_t nn = source_metric.node_count();
  s.image.reserve(nn);
  s.differential.reserve(nn);
  s.jacobian.reserve(nn);
  for (std::size_t node = 0; node < nn; ++node) {
    const Eigen::VectorXd x = source_metric.node_position(node);
    s.image.push_back(map.value(x));
    s.differential.push_back(map.differential(x));
    s.jacobian.push_back(s.differential.back().determinant());
  }
  return s;
}

namespace {

Eigen::MatrixXd ambient_metric_sqrt(const MetricField* metric, const Eigen::VectorXd& x, int n,
                                    bool inverse) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  double lam = 1.0;
  if (metric && metric->model()) {
    const MetricModel* model = metric->model();
    if (model->metric) g = model->metric(x);
    if (model->lambda) lam = model->lambda(x);
  }
  g *= lam * lam;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("distortion: ambient metric not SPD");
  if (inverse) return es.operatorInverseSqrt();
  return es.operatorSqrt();
}

}  // namespace

DistortionReport distortion_coefficient(const SampledMap& map) {
  const int n = map.source_complex->ambient_dimension();
  DistortionReport report;
  report.node_distortion.reserve(map.image.size());
  double Kmax = 1.0, Hmax = 1.0;
  for (std::size_t node = 0; node < map.image.size(); ++node) {
    const Eigen::VectorXd x = map.source_metric->node_position(node);
    const Eigen::MatrixXd Gs = ambient_metric_sqrt(map.source_metric, x, n, true);
    const Eigen::MatrixXd Ht = ambient_metric_sqrt(map.target_metric, map.image[node], n, false);
    const Eigen::MatrixXd M = Ht * map.differential[node] * Gs;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sing = svd.singularValues();
    const double smax = sing[0];
    const double smin = sing[sing.size() - 1];
    const double det = std::abs(M.determinant());
    if (det <= 1e-14 * std::pow(smax, n))
      throw std::invalid_argument("distortion_coefficient: degenerate differential at a node");
    const double K = std::pow(smax, n) / det;
    report.node_distortion.push_back(K);
    Kmax = std::max(Kmax, K);
    Hmax = std::max(Hmax, smax / smin);
  }
  report.K_estimate = Kmax;
  report.H_estimate = Hmax;
  report.histogram.assign(16, 0);
  const double span = std::max(Kmax - 1.0, 1e-15);
  for (double k : report.node_distortion) {
    int bin = static_cast<int>(std::floor((k - 1.0) / span * 16));
    report.histogram[std::clamp(bin, 0, 15)] += 1;
  }
  return report;
}

SampledForm pullback_form(const SampledMap& map, const AmbientForm& beta) {
  const SimplicialComplex& cx = *map.source_complex;
  const MetricField& mf = *map.source_metric;
  const int n = cx.dimension();
  const int k = beta.degree;
  if (k > n) throw std::invalid_argument("pullback_form: degree exceeds source dimension");

  SampledForm out;
  out.dimension = n;
  out.degree = k;
  out.coeffs = Eigen::MatrixXd::Zero(static_cast<long>(mf.node_count()), form_rank(n, k));
  const bool has_d = static_cast<bool>(beta.dvalue);
  if (has_d && k < n)
    out.dcoeffs = Eigen::MatrixXd::Zero(static_cast<long>(mf.node_count()), form_rank(n, k + 1));
  else if (k == n)
    out.dcoeffs = Eigen::MatrixXd::Zero(static_cast<long>(mf.node_count()), 1);

  for (std::size_t cell = 0; cell < mf.cell_count(); ++cell) {
    const Eigen::MatrixXd E = mf.chart(cell);
    for (std::size_t q = 0; q < mf.nodes_per_cell(); ++q) {
      const std::size_t node = mf.node_id(cell, q);
      const Eigen::MatrixXd M = map.differential[node] * E;  // target ambient <- chart
      out.coeffs.row(node) = pullback_components(M, k, beta.value(map.image[node])).transpose();
      if (has_d && k < n)
        out.dcoeffs->row(node) =
            pullback_components(M, k + 1, beta.dvalue(map.image[node])).transpose();
    }
  }

  if (map.model) {
    const AnalyticMap model = *map.model;
    const SimplicialComplex* cxp = &cx;
    auto value = beta.value;
    out.evaluator = [cxp, model, value, k, n](std::size_t cell, const Eigen::VectorXd& bary) {
      auto t = cxp->simplices(n)[cell];
      const int amb = cxp->ambient_dimension();
      Eigen::VectorXd x = Eigen::VectorXd::Zero(amb);
      for (int i = 0; i <= n; ++i) x += bary[i] * Eigen::VectorXd(cxp->vertex(t[i]));
      Eigen::MatrixXd E(amb, n);
      const Eigen::VectorXd v0 = cxp->vertex(t[0]);
      for (int j = 0; j < n; ++j) E.col(j) = Eigen::VectorXd(cxp->vertex(t[j + 1])) - v0;
      const Eigen::MatrixXd M = model.differential(x) * E;
      return pullback_components(M, k, value(model.value(x)));
    };
  }
  return out;
}

double chain_rule_residual(const SampledMap& map, const AmbientForm& beta, int projection_order) {
  if (!beta.dvalue)
    throw std::invalid_argument("chain_rule_residual: beta must provide its derivative");
  const SimplicialComplex& cx = *map.source_complex;
  const MetricField& mf = *map.source_metric;
  const int n = cx.dimension();
  const int k = beta.degree;
  if (k + 1 > n) throw std::invalid_argument("chain_rule_residual: degree overflow");

  SampledForm fb = pullback_form(map, beta);
  const Cochain projected = de_rham_project(fb, cx, mf, projection_order);
  const Cochain d_projected = coboundary(projected, cx);
  SampledForm lifted = whitney_lift(d_projected, cx, mf);

  SampledForm residual;
  residual.dimension = n;
  residual.degree = k + 1;
  residual.coeffs = lifted.coeffs - *fb.dcoeffs;
  return lp_form_norm(residual, static_cast<double>(n) / (k + 1), mf);
}

std::pair<double, double> change_of_variables_check(
    const SampledMap& map, const std::function<double(const Eigen::VectorXd&)>& v) {
  if (!map.target_complex || !map.target_metric)
    throw std::invalid_argument("change_of_variables_check: target mesh required");
  const MetricField& src = *map.source_metric;
  const MetricField& dst = *map.target_metric;
  const int n = map.source_complex->ambient_dimension();

  double left = 0;
  for (std::size_t node = 0; node < src.node_count(); ++node) {
    const Eigen::VectorXd x = src.node_position(node);
    // metric Jacobian: |det df| times the ratio of ambient volume densities
    const Eigen::MatrixXd Gs = ambient_metric_sqrt(&src, x, n, false);
    const Eigen::MatrixXd Ht = ambient_metric_sqrt(&dst, map.image[node], n, false);
    const double jac = std::abs((Ht * map.differential[node]).determinant()) / Gs.determinant();
    left += src.node_measure(node) * v(map.image[node]) * jac;
  }
  double right = 0;
  for (std::size_t node = 0; node < dst.node_count(); ++node)
    right += dst.node_measure(node) * v(dst.node_position(node));
  return {left, right};
}

SimplicialComplex push_forward_mesh(const SimplicialComplex& complex, const AnalyticMap& map) {
  const int amb = complex.ambient_dimension();
  const int n = complex.dimension();
  if (map.dimension != amb)
    throw std::invalid_argument("push_forward_mesh: dimension mismatch");
  std::vector<double> coords(complex.vertex_count() * amb);
  for (std::size_t v = 0; v < complex.vertex_count(); ++v) {
    const Eigen::VectorXd y = map.value(complex.vertex(v));
    for (int d = 0; d < amb; ++d) coords[v * amb + d] = y[d];
  }
  std::vector<std::int32_t> cells(complex.simplices(n).verts);
  if (amb == n) {
    // re-orient defensively (orientation-preserving maps keep signs)
    for (std::size_t c = 0; c < complex.count(n); ++c) {
      Eigen::MatrixXd E(n, n);
      for (int j = 1; j <= n; ++j)
        for (int d = 0; d < n; ++d)
          E(d, j - 1) = coords[cells[c * (n + 1) + j] * amb + d] - coords[cells[c * (n + 1)] * amb + d];
      if (E.determinant() < 0)
        std::swap(cells[c * (n + 1) + n - 1], cells[c * (n + 1) + n]);
    }
  }
  return SimplicialComplex::from_cells(n, amb, std::move(coords), std::move(cells));
}

}  // namespace confdr
