#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace confdr {

using SparseInt = Eigen::SparseMatrix<std::int32_t>;
using SparseReal = Eigen::SparseMatrix<double>;

/// List of k-simplices, each a (k+1)-tuple of vertex ids. Simplices of
/// degree k < n are stored with ascending vertex order (the canonical
/// orientation); top cells keep their construction order, which must be
/// positively oriented.
struct SimplexSet {
  int degree = 0;
  std::vector<std::int32_t> verts;  // size() * (degree+1)

  std::size_t size() const {
    return degree >= 0 ? verts.size() / (degree + 1) : 0;
  }
  std::span<const std::int32_t> operator[](std::size_t i) const {
    return {verts.data() + i * (degree + 1), static_cast<std::size_t>(degree + 1)};
  }
};

/// Oriented simplicial complex of dimension n embedded in R^m (m >= n).
/// Owns the full face lattice, the signed boundary operators, and the
/// boundary markers. Immutable after construction.
class SimplicialComplex {
 public:
  /// Builds the complex from its top cells. `cells` holds cell_count*(n+1)
  /// vertex ids; every cell tuple must be positively oriented (consistent
  /// across the complex). All lower-degree faces are enumerated here.
  /// Throws if a (n-1)-face has more than two cofaces or if two cofaces
  /// induce the same orientation on a shared face.
  static SimplicialComplex from_cells(int dimension, int ambient_dimension,
                                      std::vector<double> vertex_coords,
                                      std::vector<std::int32_t> cells);

  int dimension() const { return dim_; }
  int ambient_dimension() const { return ambient_dim_; }
  std::size_t vertex_count() const { return coords_.size() / ambient_dim_; }
  std::size_t count(int k) const { return simplices_[k].size(); }
  const SimplexSet& simplices(int k) const { return simplices_[k]; }

  Eigen::Map<const Eigen::VectorXd> vertex(std::size_t v) const {
    return {coords_.data() + v * ambient_dim_, ambient_dim_};
  }
  const std::vector<double>& vertex_coords() const { return coords_; }

  /// Boundary operator C_k -> C_{k-1} with exact +-1 entries, 1 <= k <= n.
  const SparseInt& boundary(int k) const { return boundary_[k]; }
  /// Coboundary on cochains C^k -> C^{k+1} (transpose of boundary(k+1)).
  SparseReal coboundary_matrix(int k) const;

  /// Index of the sorted vertex tuple among the k-simplices; -1 if absent.
  std::int64_t simplex_index(int k, std::span<const std::int32_t> sorted_verts) const;

  bool on_boundary(int k, std::size_t i) const { return boundary_flag_[k][i] != 0; }
  /// Vertices lying on the topological boundary, ascending.
  std::vector<std::int32_t> boundary_vertices() const;
  bool closed() const;  // no boundary (n-1)-simplices

  /// One cell containing the i-th k-simplex, plus the positions of the
  /// simplex's vertices inside that cell's tuple.
  struct HostCell {
    std::int32_t cell = -1;
    std::array<std::int8_t, 4> local{};  // first degree+1 entries valid
  };
  const HostCell& host_cell(int k, std::size_t i) const { return host_[k][i]; }

  /// Cells incident to each vertex (for stars and plate growth).
  const std::vector<std::vector<std::int32_t>>& vertex_cells() const { return vertex_cells_; }

  /// F together with every vertex sharing a cell with F (the closed-star
  /// vertex set), ascending.
  std::vector<std::int32_t> closed_star_vertices(std::span<const std::int32_t> seed) const;

  long euler_characteristic() const;

  /// Optional constraint applied to newly created vertices on refinement
  /// (e.g. projection back onto a sphere).
  std::function<void(Eigen::VectorXd&)> vertex_constraint;

  /// Uniform subdivision: each triangle into 4, each tet into 8 (corner
  /// cut plus a fixed lexicographic diagonal for the interior octahedron).
  /// Returns the refined complex and the edge-midpoint vertex map
  /// (new vertex id of edge e = vertex_count() + e).
  SimplicialComplex refined() const;

 private:
  int dim_ = 0;
  int ambient_dim_ = 0;
  std::vector<double> coords_;
  std::vector<SimplexSet> simplices_;              // degree 0..n
  std::vector<SparseInt> boundary_;                // index k valid for 1..n
  std::vector<std::vector<std::uint8_t>> boundary_flag_;
  std::vector<std::vector<HostCell>> host_;
  std::vector<std::vector<std::int32_t>> vertex_cells_;
};

}  // namespace confdr
