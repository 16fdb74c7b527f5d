#pragma once

#include "confdr/metric.hpp"
#include "confdr/simplicial_complex.hpp"

#include <iosfwd>
#include <utility>

namespace confdr {

/// Plain-text mesh format:
///
///   confdr-mesh 1
///   dimension <n> ambient <m>
///   counts <c_0> <c_1> ... <c_n>
///   quad_order <q>
///   vertices <V>
///   <m floats per line>
///   cells <C>
///   <n+1 vertex ids per line, positively oriented>
///   metric_nodes <N>
///   <n*n chart metric entries, then lambda, per line>
///
/// The face lattice is rebuilt on import and checked against the header
/// counts. Analytic metric models do not survive a round trip; the
/// sampled node data does, exactly up to decimal formatting.
void save_mesh(std::ostream& out, const SimplicialComplex& complex, const MetricField& metric);

std::pair<SimplicialComplex, MetricField> load_mesh(std::istream& in);

}  // namespace confdr
