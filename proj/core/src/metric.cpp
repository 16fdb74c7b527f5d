#include "confdr/metric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace confdr {

namespace {

std::vector<std::vector<std::array<int, 3>>> build_basis_tables(int n) {
  std::vector<std::vector<std::array<int, 3>>> tables(n + 1);
  tables[0] = {{{-1, -1, -1}}};  // single empty multi-index
  for (int k = 1; k <= n; ++k) {
    std::array<int, 3> idx{};
    // iterate strictly increasing k-tuples in lexicographic order
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    while (true) {
      idx = {-1, -1, -1};
      for (int i = 0; i < k; ++i) idx[i] = c[i];
      tables[k].push_back(idx);
      int i = k - 1;
      while (i >= 0 && c[i] == n - k + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
  }
  return tables;
}

}  // namespace

const std::vector<std::array<int, 3>>& form_basis(int n, int k) {
  static const auto t1 = build_basis_tables(1);
  static const auto t2 = build_basis_tables(2);
  static const auto t3 = build_basis_tables(3);
  if (k < 0 || k > n) throw std::invalid_argument("form_basis: degree out of range");
  switch (n) {
    case 1: return t1[k];
    case 2: return t2[k];
    case 3: return t3[k];
    default: throw std::invalid_argument("form_basis: dimension must be 1..3");
  }
}

int form_rank(int n, int k) { return static_cast<int>(form_basis(n, k).size()); }

MetricField MetricField::build(const SimplicialComplex& complex, int quad_order,
                               const MetricModel* model) {
  const int n = complex.dimension();
  const int amb = complex.ambient_dimension();

  MetricField mf;
  mf.n_ = n;
  mf.ambient_ = amb;
  mf.cell_count_ = complex.count(n);
  mf.quad_ = simplex_quadrature(n, quad_order);
  if (model) mf.model_ = *model;

  const std::size_t nq = mf.quad_.node_count();
  const std::size_t nnodes = mf.cell_count_ * nq;
  mf.chart_.resize(mf.cell_count_ * amb * n);
  mf.pos_.resize(nnodes * amb);
  mf.g_.resize(nnodes * n * n);
  mf.inv_g_.resize(nnodes * n * n);
  mf.lambda_.resize(nnodes);
  mf.vol_density_.resize(nnodes);

  const auto& cells = complex.simplices(n);
  for (std::size_t c = 0; c < mf.cell_count_; ++c) {
    auto t = cells[c];
    Eigen::MatrixXd E(amb, n);
    const Eigen::VectorXd v0 = complex.vertex(t[0]);
    for (int j = 0; j < n; ++j) E.col(j) = complex.vertex(t[j + 1]) - v0;
    Eigen::Map<Eigen::MatrixXd>(mf.chart_.data() + c * amb * n, amb, n) = E;

    for (std::size_t q = 0; q < nq; ++q) {
      const double* bary = mf.quad_.node(q);
      Eigen::VectorXd x = bary[0] * v0;
      for (int j = 0; j < n; ++j) x += bary[j + 1] * Eigen::VectorXd(complex.vertex(t[j + 1]));
      const std::size_t node = c * nq + q;
      Eigen::Map<Eigen::VectorXd>(mf.pos_.data() + node * amb, amb) = x;

      Eigen::MatrixXd g_amb = Eigen::MatrixXd::Identity(amb, amb);
      double lam = 1.0;
      if (model) {
        if (model->metric) g_amb = model->metric(x);
        if (model->lambda) lam = model->lambda(x);
      }
      if (lam <= 0.0) throw std::invalid_argument("MetricField: conformal factor must be positive");

      const Eigen::MatrixXd g = E.transpose() * g_amb * E;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("MetricField: metric not SPD at a quadrature node");

      Eigen::Map<Eigen::MatrixXd>(mf.g_.data() + node * n * n, n, n) = g;
      Eigen::Map<Eigen::MatrixXd>(mf.inv_g_.data() + node * n * n, n, n) = g.inverse();
      mf.lambda_[node] = lam;
      mf.vol_density_[node] = std::pow(lam, n) * std::sqrt(g.determinant());
    }
  }
  return mf;
}

MetricField MetricField::from_node_data(const SimplicialComplex& complex, int quad_order,
                                        const std::vector<double>& g_flat,
                                        const std::vector<double>& lambda) {
  MetricField mf = build(complex, quad_order, nullptr);
  const int n = mf.n_;
  if (g_flat.size() != mf.node_count() * n * n || lambda.size() != mf.node_count())
    throw std::invalid_argument("from_node_data: node data length mismatch");
  for (std::size_t node = 0; node < mf.node_count(); ++node) {
    Eigen::Map<const Eigen::MatrixXd> g(g_flat.data() + node * n * n, n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("from_node_data: metric not SPD at a node");
    if (lambda[node] <= 0.0)
      throw std::invalid_argument("from_node_data: conformal factor must be positive");
    Eigen::Map<Eigen::MatrixXd>(mf.g_.data() + node * n * n, n, n) = g;
    Eigen::Map<Eigen::MatrixXd>(mf.inv_g_.data() + node * n * n, n, n) = g.inverse();
    mf.lambda_[node] = lambda[node];
    mf.vol_density_[node] = std::pow(lambda[node], n) * std::sqrt(g.determinant());
  }
  mf.model_.reset();
  return mf;
}

double MetricField::total_volume() const {
  double vol = 0.0;
  for (std::size_t node = 0; node < node_count(); ++node) vol += node_measure(node);
  return vol;
}

Eigen::MatrixXd MetricField::gram_on_forms(std::size_t node, int k) const {
  if (k < 0 || k > n_) throw std::invalid_argument("gram_on_forms: degree out of range");
  const auto& basis = form_basis(n_, k);
  const int r = static_cast<int>(basis.size());
  Eigen::MatrixXd G(r, r);
  if (k == 0) {
    G(0, 0) = 1.0;
    return G;
  }
  const auto ginv = g_inverse(node);
  const double scale = std::pow(lambda_[node], -2.0 * k);
  Eigen::MatrixXd minor(k, k);
  for (int a = 0; a < r; ++a) {
    for (int b = a; b < r; ++b) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = ginv(basis[a][i], basis[b][j]);
      const double val = scale * minor.determinant();
      G(a, b) = val;
      G(b, a) = val;
    }
  }
  return G;
}

double MetricField::form_norm(std::size_t node, int k, const Eigen::VectorXd& comps) const {
  const Eigen::MatrixXd G = gram_on_forms(node, k);
  const double sq = comps.dot(G * comps);
  return sq > 0 ? std::sqrt(sq) : 0.0;
}

MetricField MetricField::conformally_rescaled(double factor) const {
  if (factor <= 0) throw std::invalid_argument("conformal factor must be positive");
  MetricField out = *this;
  for (std::size_t node = 0; node < node_count(); ++node) {
    out.lambda_[node] *= factor;
    out.vol_density_[node] *= std::pow(factor, n_);
  }
  out.model_.reset();  // analytic model no longer matches the data
  return out;
}

MetricField MetricField::conformally_rescaled(const std::vector<double>& factor) const {
  if (factor.size() != node_count())
    throw std::invalid_argument("conformal factor field has wrong length");
  MetricField out = *this;
  for (std::size_t node = 0; node < node_count(); ++node) {
    if (factor[node] <= 0) throw std::invalid_argument("conformal factor must be positive");
    out.lambda_[node] *= factor[node];
    out.vol_density_[node] *= std::pow(factor[node], n_);
  }
  out.model_.reset();
  return out;
}

}  // namespace confdr
