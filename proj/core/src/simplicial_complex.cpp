#include "confdr/simplicial_complex.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <set>
#include <stdexcept>

namespace confdr {

namespace {

// Sign of the permutation sorting a short tuple (0 if repeated entries).
int sort_sign(std::array<std::int32_t, 4>& t, int len) {
  int sign = 1;
  for (int i = 0; i < len; ++i)
    for (int j = i + 1; j < len; ++j) {
      if (t[i] == t[j]) return 0;
      if (t[i] > t[j]) {
        std::swap(t[i], t[j]);
        sign = -sign;
      }
    }
  return sign;
}

bool tuple_less(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

SimplicialComplex SimplicialComplex::from_cells(int dimension, int ambient_dimension,
                                                std::vector<double> vertex_coords,
                                                std::vector<std::int32_t> cells) {
  if (dimension < 1 || dimension > 3)
    throw std::invalid_argument("SimplicialComplex: dimension must be 1..3");
  if (ambient_dimension < dimension)
    throw std::invalid_argument("SimplicialComplex: ambient dimension too small");
  const int n = dimension;
  const std::size_t cell_count = cells.size() / (n + 1);
  if (cells.size() != cell_count * (n + 1) || cell_count == 0)
    throw std::invalid_argument("SimplicialComplex: malformed cell list");

  SimplicialComplex cx;
  cx.dim_ = n;
  cx.ambient_dim_ = ambient_dimension;
  cx.coords_ = std::move(vertex_coords);
  const std::size_t nvert = cx.coords_.size() / ambient_dimension;

  cx.simplices_.resize(n + 1);
  for (int k = 0; k <= n; ++k) cx.simplices_[k].degree = k;

  // Degree-n cells keep construction order and orientation.
  cx.simplices_[n].verts = std::move(cells);
  for (std::size_t c = 0; c < cell_count; ++c) {
    auto t = cx.simplices_[n][c];
    std::array<std::int32_t, 4> probe{};
    std::copy(t.begin(), t.end(), probe.begin());
    if (sort_sign(probe, n + 1) == 0)
      throw std::invalid_argument("SimplicialComplex: degenerate cell");
    for (auto v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= nvert)
        throw std::invalid_argument("SimplicialComplex: vertex id out of range");
  }

  // Enumerate all proper faces (sorted tuples, deduplicated, lexicographic).
  for (int k = 0; k < n; ++k) {
    std::set<std::array<std::int32_t, 4>> faces;
    for (std::size_t c = 0; c < cell_count; ++c) {
      auto t = cx.simplices_[n][c];
      for (unsigned mask = 1; mask < (1u << (n + 1)); ++mask) {
        if (std::popcount(mask) != k + 1) continue;
        std::array<std::int32_t, 4> f{INT32_MAX, INT32_MAX, INT32_MAX, INT32_MAX};
        int m = 0;
        for (int i = 0; i <= n; ++i)
          if (mask & (1u << i)) f[m++] = t[i];
        std::sort(f.begin(), f.begin() + (k + 1));
        faces.insert(f);
      }
    }
    auto& list = cx.simplices_[k].verts;
    list.reserve(faces.size() * (k + 1));
    for (const auto& f : faces)
      for (int i = 0; i <= k; ++i) list.push_back(f[i]);
  }

  auto find_face = [&cx](int k, std::span<const std::int32_t> sorted) -> std::int64_t {
    const auto& set = cx.simplices_[k];
    std::size_t lo = 0, hi = set.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (tuple_less(set[mid], sorted))
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo < set.size()) {
      auto t = set[lo];
      if (std::equal(t.begin(), t.end(), sorted.begin())) return static_cast<std::int64_t>(lo);
    }
    return -1;
  };

  // Boundary operators.
  cx.boundary_.resize(n + 1);
  for (int k = 1; k <= n; ++k) {
    std::vector<Eigen::Triplet<std::int32_t>> trips;
    const auto& set = cx.simplices_[k];
    trips.reserve(set.size() * (k + 1));
    for (std::size_t s = 0; s < set.size(); ++s) {
      auto t = set[s];
      for (int drop = 0; drop <= k; ++drop) {
        std::array<std::int32_t, 4> f{};
        int m = 0;
        for (int i = 0; i <= k; ++i)
          if (i != drop) f[m++] = t[i];
        int sign = sort_sign(f, k);
        if (sign == 0) throw std::logic_error("degenerate face");
        if (drop % 2 == 1) sign = -sign;
        const std::int64_t row = find_face(k - 1, {f.data(), static_cast<std::size_t>(k)});
        if (row < 0) throw std::logic_error("missing face");
        trips.emplace_back(static_cast<int>(row), static_cast<int>(s), sign);
      }
    }
    SparseInt B(static_cast<int>(cx.count(k - 1)), static_cast<int>(cx.count(k)));
    B.setFromTriplets(trips.begin(), trips.end());
    cx.boundary_[k] = std::move(B);
  }

  // Coface count and orientation consistency on (n-1)-faces.
  const auto& Bn = cx.boundary_[n];
  std::vector<int> coface_count(cx.count(n - 1), 0);
  std::vector<int> coface_sum(cx.count(n - 1), 0);
  for (int col = 0; col < Bn.outerSize(); ++col)
    for (SparseInt::InnerIterator it(Bn, col); it; ++it) {
      coface_count[it.row()] += 1;
      coface_sum[it.row()] += it.value();
    }
  for (std::size_t f = 0; f < cx.count(n - 1); ++f) {
    if (coface_count[f] > 2)
      throw std::invalid_argument("SimplicialComplex: non-manifold face (three cofaces)");
    if (coface_count[f] == 2 && coface_sum[f] != 0)
      throw std::invalid_argument("SimplicialComplex: inconsistent cell orientations");
  }

  // Boundary flags: an (n-1)-simplex is boundary iff it has one coface;
  // lower simplices are boundary iff contained in a boundary (n-1)-face.
  cx.boundary_flag_.resize(n + 1);
  for (int k = 0; k <= n; ++k) cx.boundary_flag_[k].assign(cx.count(k), 0);
  for (std::size_t f = 0; f < cx.count(n - 1); ++f) {
    if (coface_count[f] != 1) continue;
    cx.boundary_flag_[n - 1][f] = 1;
    auto t = cx.simplices_[n - 1][f];
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      const int sz = std::popcount(mask);
      std::array<std::int32_t, 4> sub{};
      int m = 0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) sub[m++] = t[i];
      const std::int64_t idx = find_face(sz - 1, {sub.data(), static_cast<std::size_t>(sz)});
      if (idx >= 0) cx.boundary_flag_[sz - 1][idx] = 1;
    }
  }

  // Host cells and vertex->cell incidence.
  cx.host_.resize(n + 1);
  for (int k = 0; k <= n; ++k) cx.host_[k].assign(cx.count(k), HostCell{});
  cx.vertex_cells_.assign(nvert, {});
  for (std::size_t c = 0; c < cell_count; ++c) {
    auto t = cx.simplices_[n][c];
    for (int i = 0; i <= n; ++i) cx.vertex_cells_[t[i]].push_back(static_cast<std::int32_t>(c));
    cx.host_[n][c] = HostCell{static_cast<std::int32_t>(c), {0, 1, 2, 3}};
    for (unsigned mask = 1; mask + 1 < (1u << (n + 1)); ++mask) {
      const int sz = std::popcount(mask);
      std::array<std::pair<std::int32_t, std::int8_t>, 4> sub{};
      int m = 0;
      for (int i = 0; i <= n; ++i)
        if (mask & (1u << i)) sub[m++] = {t[i], static_cast<std::int8_t>(i)};
      std::sort(sub.begin(), sub.begin() + sz);
      std::array<std::int32_t, 4> key{};
      for (int i = 0; i < sz; ++i) key[i] = sub[i].first;
      const std::int64_t idx = find_face(sz - 1, {key.data(), static_cast<std::size_t>(sz)});
      if (idx >= 0 && cx.host_[sz - 1][idx].cell < 0) {
        HostCell h;
        h.cell = static_cast<std::int32_t>(c);
        for (int i = 0; i < sz; ++i) h.local[i] = sub[i].second;
        cx.host_[sz - 1][idx] = h;
      }
    }
  }

  return cx;
}

SparseReal SimplicialComplex::coboundary_matrix(int k) const {
  if (k < 0 || k >= dim_)
    throw std::invalid_argument("coboundary_matrix: degree out of range");
  return boundary_[k + 1].transpose().cast<double>();
}

std::int64_t SimplicialComplex::simplex_index(int k,
                                              std::span<const std::int32_t> sorted_verts) const {
  const auto& set = simplices_[k];
  std::size_t lo = 0, hi = set.size();
  if (k == dim_) {
    // cells are not lexicographically ordered; linear scan on sorted copies
    for (std::size_t c = 0; c < set.size(); ++c) {
      std::array<std::int32_t, 4> t{};
      auto s = set[c];
      std::copy(s.begin(), s.end(), t.begin());
      sort_sign(t, k + 1);
      if (std::equal(sorted_verts.begin(), sorted_verts.end(), t.begin()))
        return static_cast<std::int64_t>(c);
    }
    return -1;
  }
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (tuple_less(set[mid], sorted_verts))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < set.size()) {
    auto t = set[lo];
    if (std::equal(t.begin(), t.end(), sorted_verts.begin())) return static_cast<std::int64_t>(lo);
  }
  return -1;
}

std::vector<std::int32_t> SimplicialComplex::boundary_vertices() const {
  std::vector<std::int32_t> out;
  for (std::size_t v = 0; v < count(0); ++v)
    if (boundary_flag_[0][v]) out.push_back(simplices_[0][v][0]);
  return out;
}

bool SimplicialComplex::closed() const {
  for (auto f : boundary_flag_[dim_ - 1])
    if (f) return false;
  return true;
}

std::vector<std::int32_t> SimplicialComplex::closed_star_vertices(
    std::span<const std::int32_t> seed) const {
  std::vector<std::uint8_t> mark(vertex_count(), 0);
  for (auto v : seed) mark[v] = 1;
  const auto& cells = simplices_[dim_];
  for (auto v : seed)
    for (auto c : vertex_cells_[v])
      for (auto w : cells[c]) mark[w] = 1;
  std::vector<std::int32_t> out;
  for (std::size_t v = 0; v < mark.size(); ++v)
    if (mark[v]) out.push_back(static_cast<std::int32_t>(v));
  return out;
}

long SimplicialComplex::euler_characteristic() const {
  long chi = 0;
  for (int k = 0; k <= dim_; ++k) chi += (k % 2 == 0 ? 1 : -1) * static_cast<long>(count(k));
  return chi;
}

namespace {

// Orientation sign of a child simplex whose vertices are given in parent
// barycentric coordinates (rows of `bary`, n+1 entries each).
int child_orientation(const std::vector<std::array<double, 4>>& bary, int n) {
  Eigen::MatrixXd M(n, n);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i) M(i - 1, j - 1) = bary[j][i] - bary[0][i];
  const double det = M.determinant();
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

}  // namespace

SimplicialComplex SimplicialComplex::refined() const {
  const int n = dim_;
  const auto& edges = simplices_[1];
  const std::size_t nv = vertex_count();
  const std::size_t ne = edges.size();

  std::vector<double> coords(coords_);
  coords.resize((nv + ne) * ambient_dim_);
  for (std::size_t e = 0; e < ne; ++e) {
    auto t = edges[e];
    Eigen::VectorXd mid = 0.5 * (vertex(t[0]) + vertex(t[1]));
    if (vertex_constraint) vertex_constraint(mid);
    for (int d = 0; d < ambient_dim_; ++d) coords[(nv + e) * ambient_dim_ + d] = mid[d];
  }

  auto midpoint_id = [&](std::int32_t a, std::int32_t b) -> std::int32_t {
    std::array<std::int32_t, 2> key{std::min(a, b), std::max(a, b)};
    const std::int64_t e = simplex_index(1, {key.data(), 2});
    return static_cast<std::int32_t>(nv + e);
  };

  const auto& cells = simplices_[n];
  std::vector<std::int32_t> new_cells;
  const int children = n == 1 ? 2 : (n == 2 ? 4 : 8);
  new_cells.reserve(cells.size() * children * (n + 1));

  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto t = cells[c];
    if (n == 1) {
      const std::int32_t m = midpoint_id(t[0], t[1]);
      new_cells.insert(new_cells.end(), {t[0], m, m, t[1]});
      continue;
    }
    if (n == 2) {
      const std::int32_t m01 = midpoint_id(t[0], t[1]);
      const std::int32_t m02 = midpoint_id(t[0], t[2]);
      const std::int32_t m12 = midpoint_id(t[1], t[2]);
      new_cells.insert(new_cells.end(), {t[0], m01, m02});
      new_cells.insert(new_cells.end(), {m01, t[1], m12});
      new_cells.insert(new_cells.end(), {m02, m12, t[2]});
      new_cells.insert(new_cells.end(), {m01, m12, m02});
      continue;
    }
    // n == 3: Bey-style red refinement, interior octahedron split along
    // the fixed diagonal m02-m13.
    const std::int32_t m01 = midpoint_id(t[0], t[1]);
    const std::int32_t m02 = midpoint_id(t[0], t[2]);
    const std::int32_t m03 = midpoint_id(t[0], t[3]);
    const std::int32_t m12 = midpoint_id(t[1], t[2]);
    const std::int32_t m13 = midpoint_id(t[1], t[3]);
    const std::int32_t m23 = midpoint_id(t[2], t[3]);

    // child vertex -> parent barycentric coordinates
    auto bc = [&](std::int32_t v) -> std::array<double, 4> {
      std::array<double, 4> b{0, 0, 0, 0};
      for (int i = 0; i < 4; ++i)
        if (v == t[i]) {
          b[i] = 1;
          return b;
        }
      const std::int32_t mids[6] = {m01, m02, m03, m12, m13, m23};
      const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
      for (int i = 0; i < 6; ++i)
        if (v == mids[i]) {
          b[pairs[i][0]] = 0.5;
          b[pairs[i][1]] = 0.5;
          return b;
        }
      throw std::logic_error("refine: unknown child vertex");
    };

    const std::array<std::array<std::int32_t, 4>, 8> raw = {{
        {t[0], m01, m02, m03},
        {m01, t[1], m12, m13},
        {m02, m12, t[2], m23},
        {m03, m13, m23, t[3]},
        {m01, m02, m03, m13},
        {m01, m02, m12, m13},
        {m02, m03, m13, m23},
        {m02, m12, m13, m23},
    }};
    for (auto child : raw) {
      std::vector<std::array<double, 4>> bary;
      bary.reserve(4);
      for (auto v : child) bary.push_back(bc(v));
      if (child_orientation(bary, 3) < 0) std::swap(child[2], child[3]);
      new_cells.insert(new_cells.end(), child.begin(), child.end());
    }
  }

  auto out = from_cells(n, ambient_dim_, std::move(coords), std::move(new_cells));
  out.vertex_constraint = vertex_constraint;
  return out;
}

}  // namespace confdr
