#pragma once

#include "confdr/metric.hpp"
#include "confdr/simplicial_complex.hpp"

#include <string>

namespace confdr {

enum class ModelKind {
  EuclideanBox,
  EuclideanBall,
  RoundSphere,
  PoincareBall,
  SolBox,
  Annulus,
  FlatTorus,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Parameters for a catalog space. Interpretation per kind:
///  - euclidean_box:  box [0,extent]^n, `resolution` cells per axis
///  - euclidean_ball: ball of `radius`, `resolution` radial layers
///  - annulus:        shell inner_radius..radius, geometric radial layers
///  - round_sphere:   sphere of `radius` in R^3; resolution 1 = octahedron,
///                    each additional level subdivides once
///  - poincare_ball:  euclidean_ball mesh (radius < 1) carrying
///                    lambda(x) = 2/(1-|x|^2) over the flat metric
///  - sol_box:        box [-half_width, half_width]^3 with metric
///                    diag(e^{-2z}, e^{2z}, 1); requires n = 3
///  - flat_torus:     n = 2 periodic grid, resolution >= 3 cells per axis
/// `angular_resolution` (2-D balls/annuli) and `sphere_level` (3-D
/// balls/shells) default to values derived from `resolution` when 0.
struct ModelSpaceSpec {
  ModelKind kind = ModelKind::EuclideanBox;
  int dimension = 2;
  int resolution = 1;
  double radius = 1.0;
  double inner_radius = 0.5;
  double extent = 1.0;
  double half_width = 1.0;
  int angular_resolution = 0;
  int sphere_level = 0;
  int quad_order = 2;
};

struct ModelSpace {
  SimplicialComplex complex;
  MetricField metric;
  ModelSpaceSpec spec;
};

/// Builds a metrized catalog space. Throws std::invalid_argument on
/// malformed parameters (non-positive sizes, sol_box with n != 3,
/// poincare_ball with radius >= 1, ...).
ModelSpace build_model_space(const ModelSpaceSpec& spec);

/// Uniform subdivision of a metrized pair. The metric (and conformal
/// factor) is re-sampled at the new quadrature nodes through the field's
/// analytic model when present; flat fields stay flat.
std::pair<SimplicialComplex, MetricField> refine(const SimplicialComplex& complex,
                                                 const MetricField& metric);

ModelSpace refine(const ModelSpace& space);

}  // namespace confdr
