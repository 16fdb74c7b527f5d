#include "confdr/model_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace confdr {

namespace {

constexpr double kPi = std::numbers::pi;

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Orient a flat n-cell positively in place (swap two vertices if needed).
void orient_cell(std::vector<std::int32_t>& cell, const std::vector<double>& coords, int n) {
  Eigen::MatrixXd E(n, n);
  for (int j = 1; j <= n; ++j)
    for (int d = 0; d < n; ++d)
      E(d, j - 1) = coords[cell[j] * n + d] - coords[cell[0] * n + d];
  if (E.determinant() < 0) std::swap(cell[cell.size() - 2], cell[cell.size() - 1]);
}

SimplicialComplex box_complex(int n, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                              int res) {
  check(res >= 1, "box: resolution must be >= 1");
  std::vector<double> coords;
  std::vector<std::int32_t> cells;
  if (n == 1) {
    for (int i = 0; i <= res; ++i) coords.push_back(lo[0] + (hi[0] - lo[0]) * i / res);
    for (int i = 0; i < res; ++i) {
      cells.push_back(i);
      cells.push_back(i + 1);
    }
    return SimplicialComplex::from_cells(1, 1, std::move(coords), std::move(cells));
  }
  if (n == 2) {
    const int m = res + 1;
    auto id = [m](int i, int j) { return j * m + i; };
    for (int j = 0; j <= res; ++j)
      for (int i = 0; i <= res; ++i) {
        coords.push_back(lo[0] + (hi[0] - lo[0]) * i / res);
        coords.push_back(lo[1] + (hi[1] - lo[1]) * j / res);
      }
    // split every quad along the diagonal at its smallest vertex id
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
        cells.insert(cells.end(), {a, b, c});
        cells.insert(cells.end(), {a, c, d});
      }
    return SimplicialComplex::from_cells(2, 2, std::move(coords), std::move(cells));
  }
  // n == 3: Kuhn split, 6 tets per cube, compatible across cubes
  const int m = res + 1;
  auto id = [m](int i, int j, int k) { return (k * m + j) * m + i; };
  for (int k = 0; k <= res; ++k)
    for (int j = 0; j <= res; ++j)
      for (int i = 0; i <= res; ++i) {
        coords.push_back(lo[0] + (hi[0] - lo[0]) * i / res);
        coords.push_back(lo[1] + (hi[1] - lo[1]) * j / res);
        coords.push_back(lo[2] + (hi[2] - lo[2]) * k / res);
      }
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < res; ++k)
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        for (const auto& p : perms) {
          int step[3] = {0, 0, 0};
          std::vector<std::int32_t> tet;
          tet.push_back(id(i, j, k));
          for (int s = 0; s < 3; ++s) {
            step[p[s]] = 1;
            tet.push_back(id(i + step[0], j + step[1], k + step[2]));
          }
          orient_cell(tet, coords, 3);
          cells.insert(cells.end(), tet.begin(), tet.end());
        }
      }
  return SimplicialComplex::from_cells(3, 3, std::move(coords), std::move(cells));
}

// Octahedron-based triangulated sphere; `level` 1 is the octahedron itself.
// Faces are oriented outward.
SimplicialComplex sphere_complex(double radius, int level) {
  check(radius > 0, "sphere: radius must be positive");
  check(level >= 1, "sphere: resolution must be >= 1");
  std::vector<double> coords = {1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1};
  for (auto& c : coords) c *= radius;
  std::vector<std::int32_t> cells = {
      0, 2, 4, 2, 1, 4, 1, 3, 4, 3, 0, 4,
      2, 0, 5, 1, 2, 5, 3, 1, 5, 0, 3, 5,
  };
  auto cx = SimplicialComplex::from_cells(2, 3, std::move(coords), std::move(cells));
  cx.vertex_constraint = [radius](Eigen::VectorXd& x) { x *= radius / x.norm(); };
  for (int l = 1; l < level; ++l) cx = cx.refined();
  return cx;
}

// Radii for layered discs/annuli. Discs use uniform spacing from 0, annuli
// geometric spacing (adapted to the logarithmic radial profiles showing up
// in the capacity experiments).
std::vector<double> radial_layers(double r_in, double r_out, int layers, bool geometric) {
  if (layers <= 0) return {r_out};
  std::vector<double> r(layers + 1);
  for (int i = 0; i <= layers; ++i) {
    const double s = static_cast<double>(i) / layers;
    r[i] = geometric ? r_in * std::pow(r_out / r_in, s) : r_in + (r_out - r_in) * s;
  }
  return r;
}

SimplicialComplex polar_complex(double r_in, double r_out, int layers, int angular,
                                bool with_center) {
  check(r_out > 0 && layers >= 1, "polar mesh: bad parameters");
  check(!with_center || r_in == 0.0, "polar mesh: center requires r_in = 0");
  check(with_center || r_in > 0.0, "annulus: inner radius must be positive");
  if (angular <= 0) angular = std::max(8, 6 * layers);

  std::vector<double> coords;
  std::vector<std::int32_t> cells;
  const int first_layer = with_center ? 1 : 0;
  const double r0 = with_center ? r_out / layers : r_in;
  std::vector<double> radii = radial_layers(r0, r_out, layers - first_layer, !with_center);

  int center = -1;
  if (with_center) {
    coords.push_back(0);
    coords.push_back(0);
    center = 0;
  }
  const int base = with_center ? 1 : 0;
  auto id = [&](int ring, int a) { return base + ring * angular + (a % angular); };
  for (std::size_t ring = 0; ring < radii.size(); ++ring)
    for (int a = 0; a < angular; ++a) {
      const double th = 2 * kPi * a / angular;
      coords.push_back(radii[ring] * std::cos(th));
      coords.push_back(radii[ring] * std::sin(th));
    }

  auto emit = [&](std::int32_t a, std::int32_t b, std::int32_t c) {
    std::vector<std::int32_t> tri = {a, b, c};
    orient_cell(tri, coords, 2);
    cells.insert(cells.end(), tri.begin(), tri.end());
  };

  if (with_center)
    for (int a = 0; a < angular; ++a)
      emit(static_cast<std::int32_t>(center), static_cast<std::int32_t>(id(0, a)),
           static_cast<std::int32_t>(id(0, a + 1)));

  for (std::size_t ring = 0; ring + 1 < radii.size(); ++ring)
    for (int a = 0; a < angular; ++a) {
      const int p = id(ring, a), q = id(ring, a + 1);
      const int pp = id(ring + 1, a), qq = id(ring + 1, a + 1);
      // diagonal through the smallest id of the quad
      if (std::min(p, qq) < std::min(q, pp)) {
        emit(p, q, qq);
        emit(p, qq, pp);
      } else {
        emit(p, q, pp);
        emit(q, qq, pp);
      }
    }
  return SimplicialComplex::from_cells(2, 2, std::move(coords), std::move(cells));
}

// Indexed prism split (diagonals keyed on global vertex ids, so shared quad
// faces always agree between neighbouring prisms).
void emit_prism(std::vector<std::int32_t>& cells, const std::vector<double>& coords,
                std::array<std::int32_t, 6> p) {
  int rot = 0;
  for (int i = 1; i < 3; ++i)
    if (p[i] < p[rot]) rot = i;
  const std::array<std::int32_t, 6> q = {p[rot],           p[(rot + 1) % 3],
                                         p[(rot + 2) % 3], p[rot + 3],
                                         p[(rot + 1) % 3 + 3], p[(rot + 2) % 3 + 3]};
  std::vector<std::array<std::int32_t, 4>> tets;
  if (std::min(q[1], q[5]) < std::min(q[2], q[4])) {
    tets = {{q[0], q[1], q[2], q[5]}, {q[0], q[1], q[5], q[4]}, {q[0], q[4], q[5], q[3]}};
  } else {
    tets = {{q[0], q[1], q[2], q[4]}, {q[0], q[4], q[2], q[5]}, {q[0], q[4], q[5], q[3]}};
  }
  for (auto& t : tets) {
    std::vector<std::int32_t> tet(t.begin(), t.end());
    orient_cell(tet, coords, 3);
    cells.insert(cells.end(), tet.begin(), tet.end());
  }
}

SimplicialComplex ball3_complex(double r_in, double r_out, int layers, int sphere_level,
                                bool with_center) {
  check(r_out > 0 && layers >= 1, "3d ball: bad parameters");
  if (sphere_level <= 0) sphere_level = 2;
  const SimplicialComplex sphere = sphere_complex(1.0, sphere_level);
  const std::size_t sv = sphere.vertex_count();
  const auto& faces = sphere.simplices(2);

  const int first_layer = with_center ? 1 : 0;
  const double r0 = with_center ? r_out / layers : r_in;
  std::vector<double> radii = radial_layers(r0, r_out, layers - first_layer, !with_center);

  std::vector<double> coords;
  int center = -1;
  if (with_center) {
    coords.insert(coords.end(), {0, 0, 0});
    center = 0;
  }
  const int base = with_center ? 1 : 0;
  auto id = [&](std::size_t layer, std::size_t v) {
    return static_cast<std::int32_t>(base + layer * sv + v);
  };
  for (double r : radii)
    for (std::size_t v = 0; v < sv; ++v) {
      auto x = sphere.vertex(v);
      coords.insert(coords.end(), {r * x[0], r * x[1], r * x[2]});
    }

  std::vector<std::int32_t> cells;
  if (with_center)
    for (std::size_t f = 0; f < faces.size(); ++f) {
      auto t = faces[f];
      std::vector<std::int32_t> tet = {static_cast<std::int32_t>(center), id(0, t[0]),
                                       id(0, t[1]), id(0, t[2])};
      orient_cell(tet, coords, 3);
      cells.insert(cells.end(), tet.begin(), tet.end());
    }
  for (std::size_t layer = 0; layer + 1 < radii.size(); ++layer)
    for (std::size_t f = 0; f < faces.size(); ++f) {
      auto t = faces[f];
      emit_prism(cells, coords,
                 {id(layer, t[0]), id(layer, t[1]), id(layer, t[2]), id(layer + 1, t[0]),
                  id(layer + 1, t[1]), id(layer + 1, t[2])});
    }
  return SimplicialComplex::from_cells(3, 3, std::move(coords), std::move(cells));
}

// Flat torus as the isometric R^4 embedding of the unit square with
// opposite sides glued; the quotient combinatorics need res >= 3 to stay
// simplicial.
SimplicialComplex torus_complex(int res) {
  check(res >= 3, "flat_torus: resolution must be >= 3");
  const double s = 1.0 / (2 * kPi);
  std::vector<double> coords;
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      const double u = 2 * kPi * i / res, v = 2 * kPi * j / res;
      coords.insert(coords.end(), {s * std::cos(u), s * std::sin(u), s * std::cos(v), s * std::sin(v)});
    }
  auto id = [res](int i, int j) { return ((j % res) * res + (i % res)); };
  std::vector<std::int32_t> cells;
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      cells.insert(cells.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.insert(cells.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return SimplicialComplex::from_cells(2, 4, std::move(coords), std::move(cells));
}

MetricModel poincare_model() {
  MetricModel model;
  model.lambda = [](const Eigen::VectorXd& x) {
    const double r2 = x.squaredNorm();
    if (r2 >= 1.0) throw std::invalid_argument("poincare_ball: point outside the unit ball");
    return 2.0 / (1.0 - r2);
  };
  return model;
}

MetricModel sol_model() {
  MetricModel model;
  model.metric = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
    g(0, 0) = std::exp(-2.0 * x[2]);
    g(1, 1) = std::exp(2.0 * x[2]);
    g(2, 2) = 1.0;
    return g;
  };
  return model;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::EuclideanBox: return "euclidean_box";
    case ModelKind::EuclideanBall: return "euclidean_ball";
    case ModelKind::RoundSphere: return "round_sphere";
    case ModelKind::PoincareBall: return "poincare_ball";
    case ModelKind::SolBox: return "sol_box";
    case ModelKind::Annulus: return "annulus";
    case ModelKind::FlatTorus: return "flat_torus";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::EuclideanBox, ModelKind::EuclideanBall, ModelKind::RoundSphere,
                      ModelKind::PoincareBall, ModelKind::SolBox, ModelKind::Annulus,
                      ModelKind::FlatTorus})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown model space kind: " + name);
}

ModelSpace build_model_space(const ModelSpaceSpec& spec) {
  check(spec.resolution >= 1, "model space: resolution must be >= 1");
  check(spec.quad_order >= 1, "model space: quadrature order must be >= 1");
  const int n = spec.dimension;

  SimplicialComplex cx = [&]() {
    switch (spec.kind) {
      case ModelKind::EuclideanBox: {
        check(spec.extent > 0, "euclidean_box: extent must be positive");
        check(n >= 1 && n <= 3, "euclidean_box: dimension must be 1..3");
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, spec.extent);
        return box_complex(n, lo, hi, spec.resolution);
      }
      case ModelKind::EuclideanBall:
      case ModelKind::PoincareBall: {
        check(spec.radius > 0, "ball: radius must be positive");
        if (spec.kind == ModelKind::PoincareBall)
          check(spec.radius < 1, "poincare_ball: mesh radius must be < 1");
        check(n == 2 || n == 3, "ball: dimension must be 2 or 3");
        if (n == 2)
          return polar_complex(0.0, spec.radius, spec.resolution, spec.angular_resolution, true);
        return ball3_complex(0.0, spec.radius, spec.resolution, spec.sphere_level, true);
      }
      case ModelKind::Annulus: {
        check(spec.inner_radius > 0 && spec.radius > spec.inner_radius, "annulus: need 0 < r < R");
        check(n == 2 || n == 3, "annulus: dimension must be 2 or 3");
        if (n == 2)
          return polar_complex(spec.inner_radius, spec.radius, spec.resolution,
                               spec.angular_resolution, false);
        return ball3_complex(spec.inner_radius, spec.radius, spec.resolution, spec.sphere_level,
                             false);
      }
      case ModelKind::RoundSphere:
        check(n == 2, "round_sphere: dimension must be 2");
        return sphere_complex(spec.radius, spec.resolution);
      case ModelKind::SolBox:
        check(n == 3, "sol_box: dimension must be 3");
        check(spec.half_width > 0, "sol_box: half_width must be positive");
        return box_complex(3, Eigen::VectorXd::Constant(3, -spec.half_width),
                           Eigen::VectorXd::Constant(3, spec.half_width), spec.resolution);
      case ModelKind::FlatTorus:
        check(n == 2, "flat_torus: dimension must be 2");
        return torus_complex(spec.resolution);
    }
    throw std::invalid_argument("unknown model kind");
  }();

  MetricModel model;
  const MetricModel* model_ptr = nullptr;
  if (spec.kind == ModelKind::PoincareBall) {
    model = poincare_model();
    model_ptr = &model;
  } else if (spec.kind == ModelKind::SolBox) {
    model = sol_model();
    model_ptr = &model;
  }

  MetricField metric = MetricField::build(cx, spec.quad_order, model_ptr);
  return ModelSpace{std::move(cx), std::move(metric), spec};
}

std::pair<SimplicialComplex, MetricField> refine(const SimplicialComplex& complex,
                                                 const MetricField& metric) {
  SimplicialComplex fine = complex.refined();
  MetricField fine_metric = MetricField::build(fine, metric.quadrature_order(), metric.model());
  return {std::move(fine), std::move(fine_metric)};
}

ModelSpace refine(const ModelSpace& space) {
  auto [cx, metric] = refine(space.complex, space.metric);
  return ModelSpace{std::move(cx), std::move(metric), space.spec};
}

}  // namespace confdr
