#include "confdr/forms.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace confdr {

namespace {

// Barycentric differentials in chart coordinates: dlam_0 = (-1,...,-1),
// dlam_i = e_i. Identical on every cell by construction of the charts.
Eigen::MatrixXd barycentric_differentials(int n) {
  Eigen::MatrixXd D(n + 1, n);
  D.row(0) = Eigen::RowVectorXd::Constant(n, -1.0);
  D.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  return D;
}

int basis_position(int n, int k, const std::array<int, 3>& idx) {
  const auto& basis = form_basis(n, k);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i] == idx) return static_cast<int>(i);
  return -1;
}

int sort_sign_small(std::array<std::int32_t, 4>& t, int len) {
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

// Per-cell table of the k-faces: global index, orientation sign of the cell
// order relative to the stored (ascending) tuple, local vertex slots.
struct CellFace {
  std::int64_t index;
  int sign;
  std::array<int, 4> local;
};

std::vector<std::vector<CellFace>> cell_face_table(const SimplicialComplex& cx, int k) {
  const int n = cx.dimension();
  const auto& cells = cx.simplices(n);
  std::vector<std::vector<CellFace>> table(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (k == n) {
      // top-degree cochains are indexed by the stored (positively
      // oriented) cell tuple itself, no reordering sign
      CellFace f{};
      f.index = static_cast<std::int64_t>(c);
      f.sign = 1;
      for (int i = 0; i <= n; ++i) f.local[i] = i;
      table[c].push_back(f);
      continue;
    }
    auto t = cells[c];
    for (unsigned mask = 1; mask < (1u << (n + 1)); ++mask) {
      if (std::popcount(mask) != k + 1) continue;
      CellFace f{};
      std::array<std::int32_t, 4> ids{};
      int m = 0;
      for (int i = 0; i <= n; ++i)
        if (mask & (1u << i)) {
          f.local[m] = i;
          ids[m] = t[i];
          ++m;
        }
      auto sorted = ids;
      f.sign = sort_sign_small(sorted, k + 1);
      f.index = cx.simplex_index(k, {sorted.data(), static_cast<std::size_t>(k + 1)});
      if (f.index < 0) throw std::logic_error("cell face missing from complex");
      table[c].push_back(f);
    }
  }
  return table;
}

// Whitney form of the local face (in cell slot order) evaluated at a
// barycentric point; returns chart components.
Eigen::VectorXd whitney_value(int n, int k, const Eigen::MatrixXd& D,
                              const std::array<int, 4>& local, const double* bary) {
  double factorial = 1;
  for (int i = 2; i <= k; ++i) factorial *= i;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(form_rank(n, k));
  if (k == 0) {
    out[0] = bary[local[0]];
    return out;
  }
  for (int j = 0; j <= k; ++j) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
    int deg = 0;
    for (int m = 0; m <= k; ++m) {
      if (m == j) continue;
      w = wedge_components(n, deg, w, 1, D.row(local[m]).transpose());
      ++deg;
    }
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    out += factorial * sgn * bary[local[j]] * w;
  }
  return out;
}

// d of the Whitney form of a local face: (k+1)! dl_{i0} ^ ... ^ dl_{ik}.
Eigen::VectorXd whitney_differential(int n, int k, const Eigen::MatrixXd& D,
                                     const std::array<int, 4>& local) {
  double factorial = 1;
  for (int i = 2; i <= k + 1; ++i) factorial *= i;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  int deg = 0;
  for (int m = 0; m <= k; ++m) {
    w = wedge_components(n, deg, w, 1, D.row(local[m]).transpose());
    ++deg;
  }
  return factorial * w;
}

}  // namespace

Eigen::VectorXd wedge_components(int n, int ka, const Eigen::VectorXd& a, int kb,
                                 const Eigen::VectorXd& b) {
  if (ka + kb > n) throw std::invalid_argument("wedge: degree overflow");
  const auto& basis_a = form_basis(n, ka);
  const auto& basis_b = form_basis(n, kb);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(form_rank(n, ka + kb));
  for (std::size_t ia = 0; ia < basis_a.size(); ++ia) {
    if (a[ia] == 0.0) continue;
    for (std::size_t ib = 0; ib < basis_b.size(); ++ib) {
      if (b[ib] == 0.0) continue;
      // merge the two increasing tuples, tracking the permutation sign
      std::array<int, 3> merged{-1, -1, -1};
      int len = 0;
      bool dup = false;
      for (int i = 0; i < ka; ++i) merged[len++] = basis_a[ia][i];
      for (int j = 0; j < kb; ++j) {
        const int v = basis_b[ib][j];
        for (int i = 0; i < len; ++i)
          if (merged[i] == v) dup = true;
        if (dup) break;
        merged[len++] = v;
      }
      if (dup) continue;
      // inversion count sorts the concatenation
      int sign = 1;
      std::array<int, 3> sorted = merged;
      for (int i = 0; i < len; ++i)
        for (int j = i + 1; j < len; ++j)
          if (sorted[i] > sorted[j]) {
            std::swap(sorted[i], sorted[j]);
            sign = -sign;
          }
      std::array<int, 3> key{-1, -1, -1};
      for (int i = 0; i < len; ++i) key[i] = sorted[i];
      const int pos = basis_position(n, ka + kb, key);
      out[pos] += sign * a[ia] * b[ib];
    }
  }
  return out;
}

Eigen::VectorXd pullback_components(const Eigen::MatrixXd& M, int k, const Eigen::VectorXd& b) {
  const int rows = static_cast<int>(M.rows());
  const int cols = static_cast<int>(M.cols());
  const auto& basis_y = form_basis(rows, k);
  const auto& basis_x = form_basis(cols, k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<long>(basis_x.size()));
  if (k == 0) {
    out[0] = b[0];
    return out;
  }
  Eigen::MatrixXd minor(k, k);
  for (std::size_t ix = 0; ix < basis_x.size(); ++ix) {
    double acc = 0;
    for (std::size_t iy = 0; iy < basis_y.size(); ++iy) {
      if (b[iy] == 0.0) continue;
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) minor(r, c) = M(basis_y[iy][r], basis_x[ix][c]);
      acc += b[iy] * minor.determinant();
    }
    out[ix] = acc;
  }
  return out;
}

WhitneyCellTable whitney_cell_table(int degree, const SimplicialComplex& complex,
                                    const MetricField& metric) {
  const int n = complex.dimension();
  const Eigen::MatrixXd D = barycentric_differentials(n);
  const auto faces = cell_face_table(complex, degree);
  const auto& quad = metric.quadrature();
  const std::size_t nq = quad.node_count();
  const std::size_t fpc = faces.empty() ? 0 : faces.front().size();

  WhitneyCellTable table;
  table.degree = degree;
  table.faces_per_cell = static_cast<int>(fpc);
  table.face_index.resize(faces.size() * fpc);
  table.face_sign.resize(faces.size() * fpc);
  table.values.resize(static_cast<long>(faces.size() * fpc * nq), form_rank(n, degree));
  for (std::size_t c = 0; c < faces.size(); ++c)
    for (std::size_t f = 0; f < fpc; ++f) {
      const auto& cf = faces[c][f];
      table.face_index[c * fpc + f] = cf.index;
      table.face_sign[c * fpc + f] = cf.sign;
      std::array<int, 4> local{};
      for (int i = 0; i <= degree; ++i) local[i] = cf.local[i];
      for (std::size_t q = 0; q < nq; ++q)
        table.values.row(static_cast<long>((c * fpc + f) * nq + q)) =
            whitney_value(n, degree, D, local, quad.node(q)).transpose();
    }
  return table;
}

Cochain coboundary(const Cochain& c, const SimplicialComplex& complex) {
  if (c.degree >= complex.dimension())
    throw std::invalid_argument("coboundary: degree overflow (top-degree input)");
  if (c.values.size() != static_cast<long>(complex.count(c.degree)))
    throw std::invalid_argument("coboundary: cochain length mismatch");
  Cochain out;
  out.degree = c.degree + 1;
  out.values = complex.coboundary_matrix(c.degree) * c.values;
  return out;
}

SampledForm whitney_lift(const Cochain& c, const SimplicialComplex& complex,
                         const MetricField& metric) {
  const int n = complex.dimension();
  const int k = c.degree;
  if (c.values.size() != static_cast<long>(complex.count(k)))
    throw std::invalid_argument("whitney_lift: cochain length mismatch");
  const Eigen::MatrixXd D = barycentric_differentials(n);
  const auto faces = cell_face_table(complex, k);
  const auto& quad = metric.quadrature();
  const std::size_t nq = quad.node_count();

  SampledForm s;
  s.dimension = n;
  s.degree = k;
  s.coeffs = Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), form_rank(n, k));
  if (k < n)
    s.dcoeffs =
        Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), form_rank(n, k + 1));
  else
    s.dcoeffs = Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), 1);

  for (std::size_t cell = 0; cell < metric.cell_count(); ++cell) {
    for (const auto& f : faces[cell]) {
      const double weight = f.sign * c.values[f.index];
      if (weight == 0.0) continue;
      std::array<int, 4> local{};
      for (int i = 0; i <= k; ++i) local[i] = f.local[i];
      for (std::size_t q = 0; q < nq; ++q) {
        s.coeffs.row(metric.node_id(cell, q)) +=
            weight * whitney_value(n, k, D, local, quad.node(q)).transpose();
      }
      if (k < n) {
        const Eigen::VectorXd dw = whitney_differential(n, k, D, local);
        for (std::size_t q = 0; q < nq; ++q)
          s.dcoeffs->row(metric.node_id(cell, q)) += weight * dw.transpose();
      }
    }
  }

  // closure for evaluation at arbitrary barycentric points
  auto values = std::make_shared<Eigen::VectorXd>(c.values);
  auto face_table = std::make_shared<std::vector<std::vector<CellFace>>>(faces);
  s.evaluator = [n, k, D, values, face_table](std::size_t cell,
                                              const Eigen::VectorXd& bary) -> Eigen::VectorXd {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(form_rank(n, k));
    for (const auto& f : (*face_table)[cell]) {
      const double weight = f.sign * (*values)[f.index];
      if (weight == 0.0) continue;
      std::array<int, 4> local{};
      for (int i = 0; i <= k; ++i) local[i] = f.local[i];
      out += weight * whitney_value(n, k, D, local, bary.data());
    }
    return out;
  };
  return s;
}

Cochain de_rham_project(const SampledForm& s, const SimplicialComplex& complex,
                        const MetricField& metric, int order) {
  const int n = complex.dimension();
  const int k = s.degree;
  Cochain out = Cochain::zero(k, complex);

  if (k == n) {
    // integrate the native samples cell by cell
    const auto& quad = metric.quadrature();
    for (std::size_t cell = 0; cell < metric.cell_count(); ++cell) {
      double acc = 0;
      for (std::size_t q = 0; q < quad.node_count(); ++q)
        acc += quad.weights[q] * s.coeffs(metric.node_id(cell, q), 0);
      out.values[cell] = acc;
    }
    return out;
  }

  if (!s.evaluator)
    throw std::invalid_argument(
        "de_rham_project: form has no evaluator (cannot integrate over faces)");

  const SimplexQuadrature rule = simplex_quadrature(k, order);
  const auto& set = complex.simplices(k);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& host = complex.host_cell(k, i);
    if (k == 0) {
      Eigen::VectorXd bary = Eigen::VectorXd::Zero(n + 1);
      bary[host.local[0]] = 1.0;
      out.values[i] = s.evaluator(host.cell, bary)[0];
      continue;
    }
    // tangent k-vector of the face in chart coordinates
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, k);
    auto ref_coord = [n](int slot) {
      Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
      if (slot > 0) xi[slot - 1] = 1.0;
      return xi;
    };
    for (int m = 1; m <= k; ++m)
      T.col(m - 1) = ref_coord(host.local[m]) - ref_coord(host.local[0]);

    const auto& basis = form_basis(n, k);
    Eigen::VectorXd tangent = Eigen::VectorXd::Zero(static_cast<long>(basis.size()));
    Eigen::MatrixXd minor(k, k);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      for (int r = 0; r < k; ++r)
        for (int cc = 0; cc < k; ++cc) minor(r, cc) = T(basis[a][r], cc);
      tangent[a] = minor.determinant();
    }

    double acc = 0;
    for (std::size_t q = 0; q < rule.node_count(); ++q) {
      const double* mu = rule.node(q);
      Eigen::VectorXd bary = Eigen::VectorXd::Zero(n + 1);
      for (int m = 0; m <= k; ++m) bary[host.local[m]] = mu[m];
      acc += rule.weights[q] * s.evaluator(host.cell, bary).dot(tangent);
    }
    // face quadrature weights sum to 1/k!, the parametrization covers the
    // simplex once with unit Jacobian in these coordinates
    out.values[i] = acc * 1.0;
  }
  return out;
}

double lp_form_norm(const SampledForm& s, double p, const MetricField& metric) {
  if (p < 1.0) throw std::invalid_argument("lp_form_norm: p must be >= 1");
  if (s.node_count() != metric.node_count())
    throw std::invalid_argument("lp_form_norm: node count mismatch");
  double acc = 0;
  for (std::size_t node = 0; node < metric.node_count(); ++node) {
    const double norm = metric.form_norm(node, s.degree, s.coeffs.row(node).transpose());
    if (norm > 0) acc += metric.node_measure(node) * std::pow(norm, p);
  }
  return std::pow(acc, 1.0 / p);
}

namespace {

double sup_norm_with_vertices(const SampledForm& s, const SimplicialComplex& complex,
                              const MetricField& metric) {
  double sup = 0;
  for (std::size_t node = 0; node < metric.node_count(); ++node)
    sup = std::max(sup, std::abs(s.coeffs(node, 0)));
  if (s.evaluator) {
    const int n = complex.dimension();
    const auto& cells = complex.simplices(n);
    std::vector<std::uint8_t> seen(complex.vertex_count(), 0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto t = cells[c];
      for (int i = 0; i <= n; ++i) {
        if (seen[t[i]]) continue;
        seen[t[i]] = 1;
        Eigen::VectorXd bary = Eigen::VectorXd::Zero(n + 1);
        bary[i] = 1.0;
        sup = std::max(sup, std::abs(s.evaluator(c, bary)[0]));
      }
    }
  }
  return sup;
}

ConfNormReport graph_norm(const SampledForm& s, const SimplicialComplex& complex,
                          const MetricField& metric) {
  const int n = complex.dimension();
  const int k = s.degree;
  ConfNormReport report;
  if (k == 0)
    report.lp_part = sup_norm_with_vertices(s, complex, metric);
  else
    report.lp_part = lp_form_norm(s, static_cast<double>(n) / k, metric);

  if (k < n) {
    if (!s.dcoeffs) throw std::invalid_argument("conformal_norm: missing derivative samples");
    SampledForm ds;
    ds.dimension = n;
    ds.degree = k + 1;
    ds.coeffs = *s.dcoeffs;
    report.dlp_part = lp_form_norm(ds, static_cast<double>(n) / (k + 1), metric);
  } else {
    report.dlp_part = 0.0;  // top degree: Omega^n_conf is just L^1
  }
  report.total = report.lp_part + report.dlp_part;
  return report;
}

}  // namespace

ConfNormReport conformal_norm(const Cochain& c, const SimplicialComplex& complex,
                              const MetricField& metric) {
  SampledForm lift = whitney_lift(c, complex, metric);
  if (c.degree == 0) {
    // piecewise-linear functions attain extrema at vertices; include the
    // quadrature nodes per the shared-node convention
    ConfNormReport report;
    double sup = c.values.size() ? c.values.cwiseAbs().maxCoeff() : 0.0;
    for (std::size_t node = 0; node < metric.node_count(); ++node)
      sup = std::max(sup, std::abs(lift.coeffs(node, 0)));
    report.lp_part = sup;
    SampledForm ds;
    ds.dimension = lift.dimension;
    ds.degree = 1;
    ds.coeffs = *lift.dcoeffs;
    report.dlp_part = lp_form_norm(ds, static_cast<double>(complex.dimension()), metric);
    report.total = report.lp_part + report.dlp_part;
    return report;
  }
  return graph_norm(lift, complex, metric);
}

ConfNormReport conformal_norm(const SampledForm& s, const SimplicialComplex& complex,
                              const MetricField& metric) {
  return graph_norm(s, complex, metric);
}

SampledForm wedge(const SampledForm& a, const SampledForm& b) {
  if (a.dimension != b.dimension) throw std::invalid_argument("wedge: dimension mismatch");
  const int n = a.dimension;
  const int k = a.degree, l = b.degree;
  if (k + l > n) throw std::invalid_argument("wedge: degree overflow");
  if (a.node_count() != b.node_count()) throw std::invalid_argument("wedge: node count mismatch");
  if (!a.dcoeffs || !b.dcoeffs)
    throw std::invalid_argument("wedge: operands must carry derivative samples");

  SampledForm out;
  out.dimension = n;
  out.degree = k + l;
  const long nodes = a.coeffs.rows();
  out.coeffs = Eigen::MatrixXd::Zero(nodes, form_rank(n, k + l));
  out.dcoeffs = Eigen::MatrixXd::Zero(nodes, k + l < n ? form_rank(n, k + l + 1) : 1);

  const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
  for (long node = 0; node < nodes; ++node) {
    const Eigen::VectorXd av = a.coeffs.row(node).transpose();
    const Eigen::VectorXd bv = b.coeffs.row(node).transpose();
    out.coeffs.row(node) = wedge_components(n, k, av, l, bv).transpose();
    if (k + l < n) {
      const Eigen::VectorXd dav = a.dcoeffs->row(node).transpose();
      const Eigen::VectorXd dbv = b.dcoeffs->row(node).transpose();
      Eigen::VectorXd d = wedge_components(n, k + 1, dav, l, bv);
      if (l + 1 <= n - k) d += sgn * wedge_components(n, k, av, l + 1, dbv);
      out.dcoeffs->row(node) = d.transpose();
    }
  }

  if (a.evaluator && b.evaluator) {
    auto ea = a.evaluator;
    auto eb = b.evaluator;
    out.evaluator = [n, k, l, ea, eb](std::size_t cell, const Eigen::VectorXd& bary) {
      return wedge_components(n, k, ea(cell, bary), l, eb(cell, bary));
    };
  }
  return out;
}

SampledForm sample_form(const AmbientForm& form, const SimplicialComplex& complex,
                        const MetricField& metric) {
  const int n = complex.dimension();
  const int amb = complex.ambient_dimension();
  if (form.ambient_dimension != amb)
    throw std::invalid_argument("sample_form: ambient dimension mismatch");
  const int k = form.degree;

  SampledForm s;
  s.dimension = n;
  s.degree = k;
  s.coeffs = Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), form_rank(n, k));
  const bool has_d = static_cast<bool>(form.dvalue) && k < n;
  if (has_d)
    s.dcoeffs =
        Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), form_rank(n, k + 1));
  else if (k == n)
    s.dcoeffs = Eigen::MatrixXd::Zero(static_cast<long>(metric.node_count()), 1);

  for (std::size_t cell = 0; cell < metric.cell_count(); ++cell) {
    const Eigen::MatrixXd E = metric.chart(cell);
    for (std::size_t q = 0; q < metric.nodes_per_cell(); ++q) {
      const std::size_t node = metric.node_id(cell, q);
      const Eigen::VectorXd x = metric.node_position(node);
      s.coeffs.row(node) = pullback_components(E, k, form.value(x)).transpose();
      if (has_d) s.dcoeffs->row(node) = pullback_components(E, k + 1, form.dvalue(x)).transpose();
    }
  }

  const SimplicialComplex* cx = &complex;
  auto value = form.value;
  s.evaluator = [cx, value, k, n](std::size_t cell, const Eigen::VectorXd& bary) {
    auto t = cx->simplices(n)[cell];
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cx->ambient_dimension());
    for (int i = 0; i <= n; ++i) x += bary[i] * Eigen::VectorXd(cx->vertex(t[i]));
    Eigen::MatrixXd E(cx->ambient_dimension(), n);
    const Eigen::VectorXd v0 = cx->vertex(t[0]);
    for (int j = 0; j < n; ++j) E.col(j) = Eigen::VectorXd(cx->vertex(t[j + 1])) - v0;
    return pullback_components(E, k, value(x));
  };
  return s;
}

AmbientForm constant_form(int ambient_dimension, int degree, const Eigen::VectorXd& comps) {
  if (comps.size() != form_rank(ambient_dimension, degree))
    throw std::invalid_argument("constant_form: component count mismatch");
  AmbientForm f;
  f.ambient_dimension = ambient_dimension;
  f.degree = degree;
  f.value = [comps](const Eigen::VectorXd&) { return comps; };
  if (degree < ambient_dimension) {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(form_rank(ambient_dimension, degree + 1));
    f.dvalue = [zero](const Eigen::VectorXd&) { return zero; };
  }
  return f;
}

void save_cochain(std::ostream& out, const Cochain& c) {
  out << "cochain " << c.degree << ' ' << c.values.size() << '\n';
  out.precision(17);
  for (long i = 0; i < c.values.size(); ++i) out << c.values[i] << '\n';
}

Cochain load_cochain(std::istream& in) {
  std::string tag;
  long count = 0;
  Cochain c;
  if (!(in >> tag >> c.degree >> count) || tag != "cochain")
    throw std::invalid_argument("load_cochain: malformed header");
  c.values.resize(count);
  for (long i = 0; i < count; ++i)
    if (!(in >> c.values[i])) throw std::invalid_argument("load_cochain: truncated values");
  return c;
}

}  // namespace confdr
