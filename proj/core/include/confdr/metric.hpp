#pragma once

#include "confdr/quadrature.hpp"
#include "confdr/simplicial_complex.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace confdr {

/// Analytic metric data: ambient metric tensor and conformal factor as
/// functions of the ambient position. Used to (re-)sample a MetricField
/// on catalog geometries.
struct MetricModel {
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric;  // may be empty => flat
  std::function<double(const Eigen::VectorXd&)> lambda;           // may be empty => 1
};

/// Multi-index tables for Lambda^k over an n-dimensional cotangent space:
/// strictly increasing index tuples in lexicographic order.
const std::vector<std::array<int, 3>>& form_basis(int n, int k);
int form_rank(int n, int k);  // binomial(n, k)

/// Per-quadrature-node metric data over a simplicial complex.
///
/// Each cell carries its own affine chart: reference coordinates xi with
/// x = v0 + E xi, E the (ambient x n) edge matrix. All tensors (metric,
/// forms) are expressed in the chart basis, so a node never has to be
/// compared across cells. Quadrature weights are reference weights (they
/// sum to 1/n! on every cell); the measure of a node is
/// weight * vol_density, with vol_density = lambda^n sqrt(det g).
class MetricField {
 public:
  /// Samples metric and conformal factor at every quadrature node.
  /// Throws if the chart metric fails to be SPD at any node.
  static MetricField build(const SimplicialComplex& complex, int quad_order = 2,
                           const MetricModel* model = nullptr);

  /// Rebuilds a field from explicit per-node chart tensors and conformal
  /// factors (mesh import path). `g_flat` holds node_count * n * n entries.
  static MetricField from_node_data(const SimplicialComplex& complex, int quad_order,
                                    const std::vector<double>& g_flat,
                                    const std::vector<double>& lambda);

  int dimension() const { return n_; }
  int quadrature_order() const { return quad_.order; }
  const SimplexQuadrature& quadrature() const { return quad_; }
  std::size_t cell_count() const { return cell_count_; }
  std::size_t nodes_per_cell() const { return quad_.node_count(); }
  std::size_t node_count() const { return cell_count_ * quad_.node_count(); }

  std::size_t node_id(std::size_t cell, std::size_t q) const {
    return cell * quad_.node_count() + q;
  }

  double weight(std::size_t node) const { return quad_.weights[node % quad_.node_count()]; }
  double lambda(std::size_t node) const { return lambda_[node]; }
  double vol_density(std::size_t node) const { return vol_density_[node]; }
  /// Measure carried by a node: weight * vol_density.
  double node_measure(std::size_t node) const {
    return weight(node) * vol_density_[node];
  }
  double total_volume() const;

  Eigen::Map<const Eigen::MatrixXd> g(std::size_t node) const {
    return {g_.data() + node * n_ * n_, n_, n_};
  }
  Eigen::Map<const Eigen::MatrixXd> g_inverse(std::size_t node) const {
    return {inv_g_.data() + node * n_ * n_, n_, n_};
  }
  Eigen::Map<const Eigen::VectorXd> node_position(std::size_t node) const {
    return {pos_.data() + node * ambient_, ambient_};
  }
  /// Chart edge matrix E (ambient x n) of a cell.
  Eigen::Map<const Eigen::MatrixXd> chart(std::size_t cell) const {
    return {chart_.data() + cell * ambient_ * n_, ambient_, n_};
  }

  const MetricModel* model() const { return model_ ? &*model_ : nullptr; }

  /// Gram matrix of the induced scalar product on Lambda^k at a node,
  /// <theta^1 ^ ... ^ theta^k, phi^1 ^ ... ^ phi^k> = det(g^-1(theta^i, phi^j)),
  /// including the conformal factor (covector Gram scales by lambda^-2k).
  Eigen::MatrixXd gram_on_forms(std::size_t node, int k) const;

  /// Pointwise norm |s|_g of a k-form given by chart components.
  double form_norm(std::size_t node, int k, const Eigen::VectorXd& comps) const;

  /// Same field with lambda multiplied by a constant factor.
  MetricField conformally_rescaled(double factor) const;
  /// Same field with a per-node positive factor.
  MetricField conformally_rescaled(const std::vector<double>& factor) const;

 private:
  int n_ = 0;
  int ambient_ = 0;
  std::size_t cell_count_ = 0;
  SimplexQuadrature quad_;
  std::vector<double> chart_;     // cell_count * ambient * n
  std::vector<double> pos_;       // node_count * ambient
  std::vector<double> g_;         // node_count * n * n (chart coordinates)
  std::vector<double> inv_g_;
  std::vector<double> lambda_;
  std::vector<double> vol_density_;
  std::optional<MetricModel> model_;
};

/// Free-function form of the Gram computation (see MetricField::gram_on_forms).
inline Eigen::MatrixXd gram_on_forms(const MetricField& metric, std::size_t node, int k) {
  return metric.gram_on_forms(node, k);
}

}  // namespace confdr
