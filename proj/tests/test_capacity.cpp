#include <doctest.h>

#include "confdr/capacity.hpp"
#include "confdr/model_space.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace confdr;
using confdr::testing::radial_capacity_oracle;

namespace {

constexpr double kE = std::numbers::e;

ModelSpace annulus2d(double r, double R, int layers, int angular, int quad_order = 2) {
  ModelSpaceSpec spec;
  spec.kind = ModelKind::Annulus;
  spec.dimension = 2;
  spec.inner_radius = r;
  spec.radius = R;
  spec.resolution = layers;
  spec.angular_resolution = angular;
  spec.quad_order = quad_order;
  return build_model_space(spec);
}

std::vector<std::int32_t> vertices_at_radius(const SimplicialComplex& cx, double radius,
                                             double tol = 1e-9) {
  std::vector<std::int32_t> out;
  for (std::size_t v = 0; v < cx.vertex_count(); ++v)
    if (std::abs(cx.vertex(v).norm() - radius) < tol) out.push_back(static_cast<std::int32_t>(v));
  return out;
}

CondenserScene annulus_scene(double r, double R, int layers, int angular) {
  ModelSpace space = annulus2d(r, R, layers, angular);
  CondenserScene scene{std::move(space.complex), std::move(space.metric), {}, {}};
  scene.plate = vertices_at_radius(scene.complex, r);
  scene.ground = vertices_at_radius(scene.complex, R);
  return scene;
}

}  // namespace

TEST_CASE("radial oracle agrees with the closed form") {
  // closed form: sphere_area(n) * log(R/r)^{1-n}
  CHECK(radial_capacity_oracle(2, 1.0, kE) ==
        doctest::Approx(2 * std::numbers::pi).epsilon(1e-8));
  CHECK(radial_capacity_oracle(3, 1.0, kE) ==
        doctest::Approx(4 * std::numbers::pi).epsilon(1e-8));
  CHECK(radial_capacity_oracle(2, 1.0, kE * kE) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("p_dirichlet_energy basics and route agreement") {
  auto square = [&] {
    ModelSpaceSpec spec;
    spec.kind = ModelKind::EuclideanBox;
    spec.dimension = 2;
    spec.resolution = 4;
    return build_model_space(spec);
  }();

  Cochain constant = Cochain::zero(0, square.complex);
  constant.values.setConstant(0.7);
  CHECK(p_dirichlet_energy(constant, 2.0, square.complex, square.metric) < 1e-26);

  Cochain ux = Cochain::zero(0, square.complex);
  for (std::size_t v = 0; v < square.complex.vertex_count(); ++v)
    ux.values[v] = square.complex.vertex(v)[0];
  CHECK(p_dirichlet_energy(ux, 2.0, square.complex, square.metric) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // conformal invariance at p = n
  MetricField scaled = square.metric.conformally_rescaled(3.7);
  CHECK(p_dirichlet_energy(ux, 2.0, square.complex, scaled) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // agreement with the lifted-norm route
  std::mt19937_64 rng(41);
  Cochain u = confdr::testing::random_cochain(0, square.complex, rng);
  const double direct = p_dirichlet_energy(u, 2.0, square.complex, square.metric);
  SampledForm du = whitney_lift(coboundary(u, square.complex), square.complex, square.metric);
  const double lifted = std::pow(lp_form_norm(du, 2.0, square.metric), 2.0);
  CHECK(direct == doctest::Approx(lifted).epsilon(1e-12));

  CHECK_THROWS_AS(p_dirichlet_energy(u, 0.3, square.complex, square.metric),
                  std::invalid_argument);
}

TEST_CASE("planar annulus capacity hits the 2*pi oracle within 5%") {
  CondenserScene scene = annulus_scene(1.0, kE, 64, 96);
  Condenser condenser{&scene.complex, &scene.metric, scene.plate, scene.ground};
  CapacityResult result = solve_condenser(condenser);
  CHECK(result.converged);
  const double oracle = radial_capacity_oracle(2, 1.0, kE);
  CHECK(std::abs(result.value - oracle) / oracle < 0.05);
  // plate/ground values pinned
  for (auto v : scene.plate) CHECK(result.minimizer.values[v] == doctest::Approx(1.0));
  for (auto v : scene.ground) CHECK(result.minimizer.values[v] == doctest::Approx(0.0));
  // energy history non-increasing
  for (std::size_t i = 0; i + 1 < result.energy_history.size(); ++i)
    CHECK(result.energy_history[i + 1] <= result.energy_history[i] * (1 + 1e-12));
}

TEST_CASE("empty plate and invalid condensers") {
  CondenserScene scene = annulus_scene(1.0, 2.0, 8, 24);
  Condenser empty{&scene.complex, &scene.metric, {}, scene.ground};
  CapacityResult r = solve_condenser(empty);
  CHECK(r.value == 0.0);
  CHECK(r.minimizer.values.cwiseAbs().maxCoeff() == 0.0);

  Condenser bad{&scene.complex, &scene.metric, scene.plate, scene.plate};
  CHECK_THROWS_AS(solve_condenser(bad), std::invalid_argument);
}

TEST_CASE("condenser value is conformally invariant") {
  CondenserScene scene = annulus_scene(1.0, 2.0, 16, 48);
  Condenser condenser{&scene.complex, &scene.metric, scene.plate, scene.ground};
  CapacityResult base = solve_condenser(condenser);

  std::mt19937_64 rng(43);
  auto field = confdr::testing::random_conformal_field(scene.metric, rng);
  MetricField rescaled = scene.metric.conformally_rescaled(field);
  Condenser conf{&scene.complex, &rescaled, scene.plate, scene.ground};
  CapacityResult other = solve_condenser(conf);
  CHECK(std::abs(other.value - base.value) / base.value < 1e-10);

  MetricField half = scene.metric.conformally_rescaled(0.5);
  Condenser conf2{&scene.complex, &half, scene.plate, scene.ground};
  CHECK(std::abs(solve_condenser(conf2).value - base.value) / base.value < 1e-10);
}

TEST_CASE("capacity monotonicity in plate and domain") {
  // F subset F' => cap(F) <= cap(F'); U subset U' => cap(F,U) >= cap(F,U')
  CondenserScene small_plate = annulus_scene(1.0, kE, 24, 48);
  Condenser c1{&small_plate.complex, &small_plate.metric, small_plate.plate, small_plate.ground};
  const double cap_inner = solve_condenser(c1).value;

  // enlarge the plate by one mesh ring (star mode does exactly that)
  Condenser c2 = c1;
  c2.mode = PlateMode::Star;
  const double cap_star = solve_condenser(c2).value;
  CHECK(cap_inner <= cap_star + 1e-9);

  // shrink the domain: annulus 1..2 inside annulus 1..e
  CondenserScene big = annulus_scene(1.0, kE, 24, 48);
  CondenserScene small_domain = annulus_scene(1.0, 2.0, 24, 48);
  Condenser cb{&big.complex, &big.metric, big.plate, big.ground};
  Condenser cs{&small_domain.complex, &small_domain.metric, small_domain.plate,
               small_domain.ground};
  CHECK(solve_condenser(cs).value >= solve_condenser(cb).value - 1e-9);
}

TEST_CASE("truncation to [0,1] never increases the energy on box meshes") {
  ModelSpaceSpec spec;
  spec.kind = ModelKind::EuclideanBox;
  spec.dimension = 2;
  spec.resolution = 6;
  auto space = build_model_space(spec);
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int trial = 0; trial < 32; ++trial) {
    Cochain w = Cochain::zero(0, space.complex);
    for (long i = 0; i < w.values.size(); ++i) w.values[i] = u(rng);
    Cochain clamped = w;
    clamped.values = clamped.values.cwiseMax(0.0).cwiseMin(1.0);
    CHECK(p_dirichlet_energy(clamped, 2.0, space.complex, space.metric) <=
          p_dirichlet_energy(w, 2.0, space.complex, space.metric) * (1 + 1e-12));
  }
}

TEST_CASE("spherical shell capacity hits the 4*pi oracle within 8%") {
  ModelSpaceSpec spec;
  spec.kind = ModelKind::Annulus;
  spec.dimension = 3;
  spec.inner_radius = 1.0;
  spec.radius = kE;
  spec.resolution = 16;
  spec.sphere_level = 3;
  auto space = build_model_space(spec);
  CondenserScene scene{std::move(space.complex), std::move(space.metric), {}, {}};
  scene.plate = vertices_at_radius(scene.complex, 1.0, 1e-6);
  scene.ground = vertices_at_radius(scene.complex, kE, 1e-6);
  REQUIRE(!scene.plate.empty());
  REQUIRE(!scene.ground.empty());

  Condenser condenser{&scene.complex, &scene.metric, scene.plate, scene.ground};
  CapacityResult result = solve_condenser(condenser);
  const double oracle = radial_capacity_oracle(3, 1.0, kE);
  CHECK(result.converged);
  CHECK(std::abs(result.value - oracle) / oracle < 0.08);
}

TEST_CASE("classification: plane parabolic, poincare disc hyperbolic") {
  ExhaustionSpec plane;
  plane.sizes = {kE, kE * kE, std::pow(kE, 3), std::pow(kE, 4)};
  plane.make_stage = [](double R) {
    const int layers = std::max(12, static_cast<int>(16 * std::log(R)));
    return annulus_scene(1.0, R, layers, 48);
  };
  ClassifyResult plane_result = classify_type(plane, 0.5);
  CHECK(plane_result.type == ConformalType::Parabolic);
  CHECK(plane_result.reliable);
  CHECK(std::abs(plane_result.fitted_slope - (-1.0)) < 0.25);
  // series tracks the radial oracle
  for (std::size_t j = 0; j < plane.sizes.size(); ++j) {
    const double oracle = radial_capacity_oracle(2, 1.0, plane.sizes[j]);
    CHECK(std::abs(plane_result.series.value[j] - oracle) / oracle < 0.08);
  }

  // Poincare disc: exhaust by hyperbolic radius; the euclidean radii
  // tanh(R/2) approach 1 and the capacities stabilize
  ExhaustionSpec disc;
  disc.sizes = {2.0, 3.0, 4.0, 5.0};
  disc.make_stage = [](double Rhyp) {
    const double rho = std::tanh(Rhyp / 2.0);
    ModelSpace space = annulus2d(0.2, rho, 24, 48);
    MetricModel poincare;
    poincare.lambda = [](const Eigen::VectorXd& x) { return 2.0 / (1.0 - x.squaredNorm()); };
    MetricField metric = MetricField::build(space.complex, 2, &poincare);
    CondenserScene scene{std::move(space.complex), std::move(metric), {}, {}};
    scene.plate = vertices_at_radius(scene.complex, 0.2);
    scene.ground = vertices_at_radius(scene.complex, rho);
    return scene;
  };
  ClassifyResult disc_result = classify_type(disc, 0.5);
  CHECK(disc_result.type == ConformalType::Hyperbolic);
  // limit is the euclidean condenser (0.2-disc, unit disc)
  const double limit = radial_capacity_oracle(2, 0.2, 1.0);
  CHECK(std::abs(disc_result.series.value.back() - limit) / limit < 0.10);
}

TEST_CASE("polar probes: shrinking disc trends to zero like the oracle") {
  std::vector<double> eps = {1e-1, 1e-2, 1e-3};
  CapacitySeries series = polar_probe(eps, [](double e) {
    const int layers = std::max(16, static_cast<int>(10 * std::log(1.0 / e)));
    return annulus_scene(e, 1.0, layers, 48);
  });
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const double oracle = radial_capacity_oracle(2, eps[j], 1.0);
    CHECK(std::abs(series.value[j] - oracle) / oracle < 0.25);
  }
  CHECK(series.value[2] < series.value[1]);
  CHECK(series.value[1] < series.value[0]);
}
