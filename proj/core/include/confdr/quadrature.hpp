#pragma once

#include <vector>

namespace confdr {

/// Quadrature rule on the reference d-simplex, stored in barycentric
/// coordinates. Weights integrate against the reference Lebesgue measure,
/// so they sum to the reference volume 1/d!.
struct SimplexQuadrature {
  int dim = 0;
  int order = 0;                    // highest polynomial degree integrated exactly
  std::vector<double> barycentric;  // node_count * (dim+1)
  std::vector<double> weights;      // node_count

  std::size_t node_count() const { return weights.size(); }
  const double* node(std::size_t q) const { return barycentric.data() + q * (dim + 1); }
};

/// Symmetric rule of at least the requested order (d = 0..3).
SimplexQuadrature simplex_quadrature(int dim, int order);

}  // namespace confdr
