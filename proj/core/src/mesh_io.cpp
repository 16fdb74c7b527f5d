#include "confdr/mesh_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace confdr {

void save_mesh(std::ostream& out, const SimplicialComplex& complex, const MetricField& metric) {
  const int n = complex.dimension();
  const int amb = complex.ambient_dimension();
  out << "confdr-mesh 1\n";
  out << "dimension " << n << " ambient " << amb << '\n';
  out << "counts";
  for (int k = 0; k <= n; ++k) out << ' ' << complex.count(k);
  out << '\n';
  out << "quad_order " << metric.quadrature_order() << '\n';

  out.precision(17);
  out << "vertices " << complex.vertex_count() << '\n';
  for (std::size_t v = 0; v < complex.vertex_count(); ++v) {
    auto x = complex.vertex(v);
    for (int d = 0; d < amb; ++d) out << (d ? " " : "") << x[d];
    out << '\n';
  }
  out << "cells " << complex.count(n) << '\n';
  const auto& cells = complex.simplices(n);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto t = cells[c];
    for (int i = 0; i <= n; ++i) out << (i ? " " : "") << t[i];
    out << '\n';
  }
  out << "metric_nodes " << metric.node_count() << '\n';
  for (std::size_t node = 0; node < metric.node_count(); ++node) {
    auto g = metric.g(node);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << g(i, j) << ' ';
    out << metric.lambda(node) << '\n';
  }
}

std::pair<SimplicialComplex, MetricField> load_mesh(std::istream& in) {
  auto fail = [](const std::string& what) -> void {
    throw std::invalid_argument("load_mesh: " + what);
  };
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "confdr-mesh" || version != 1) fail("bad header");

  int n = 0, amb = 0;
  std::string key;
  if (!(in >> key >> n) || key != "dimension") fail("missing dimension");
  if (!(in >> key >> amb) || key != "ambient") fail("missing ambient dimension");
  if (!(in >> key) || key != "counts") fail("missing counts");
  std::vector<std::size_t> counts(n + 1);
  for (int k = 0; k <= n; ++k)
    if (!(in >> counts[k])) fail("truncated counts");
  int quad_order = 0;
  if (!(in >> key >> quad_order) || key != "quad_order") fail("missing quad_order");

  std::size_t nvert = 0;
  if (!(in >> key >> nvert) || key != "vertices") fail("missing vertices");
  std::vector<double> coords(nvert * amb);
  for (auto& c : coords)
    if (!(in >> c)) fail("truncated vertex coordinates");

  std::size_t ncells = 0;
  if (!(in >> key >> ncells) || key != "cells") fail("missing cells");
  std::vector<std::int32_t> cells(ncells * (n + 1));
  for (auto& c : cells)
    if (!(in >> c)) fail("truncated cell list");

  SimplicialComplex cx = SimplicialComplex::from_cells(n, amb, std::move(coords), std::move(cells));
  for (int k = 0; k <= n; ++k)
    if (cx.count(k) != counts[k]) fail("face counts disagree with header");

  std::size_t nnodes = 0;
  if (!(in >> key >> nnodes) || key != "metric_nodes") fail("missing metric nodes");
  std::vector<double> g(nnodes * n * n);
  std::vector<double> lambda(nnodes);
  for (std::size_t node = 0; node < nnodes; ++node) {
    for (int i = 0; i < n * n; ++i)
      if (!(in >> g[node * n * n + i])) fail("truncated metric data");
    if (!(in >> lambda[node])) fail("truncated conformal factors");
  }
  MetricField mf = MetricField::from_node_data(cx, quad_order, g, lambda);
  return {std::move(cx), std::move(mf)};
}

}  // namespace confdr
