#include <doctest.h>

#include "confdr/forms.hpp"
#include "confdr/mesh_io.hpp"
#include "confdr/model_space.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace confdr;
using confdr::testing::random_cochain;

namespace {

ModelSpace unit_square(int res, int order = 2) {
  ModelSpaceSpec spec;
  spec.kind = ModelKind::EuclideanBox;
  spec.dimension = 2;
  spec.resolution = res;
  spec.quad_order = order;
  return build_model_space(spec);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("coboundary: signed differences on a path, d o d = 0") {
  ModelSpaceSpec spec;
  spec.kind = ModelKind::EuclideanBox;
  spec.dimension = 1;
  spec.resolution = 2;
  auto path = build_model_space(spec);
  Cochain u = Cochain::zero(0, path.complex);
  u.values << 0, 1, 3;
  Cochain du = coboundary(u, path.complex);
  CHECK(du.values[0] == doctest::Approx(1.0));
  CHECK(du.values[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(coboundary(du, path.complex), std::invalid_argument);

  std::mt19937_64 rng(7);
  for (auto& space : confdr::testing::small_catalog()) {
    for (int k = 0; k + 2 <= space.complex.dimension(); ++k) {
      Cochain c = random_cochain(k, space.complex, rng);
      Cochain ddc = coboundary(coboundary(c, space.complex), space.complex);
      const double scale = std::max(1.0, c.values.cwiseAbs().maxCoeff());
      CHECK(ddc.values.cwiseAbs().maxCoeff() / scale < 1e-12);
    }
  }
}

TEST_CASE("constant 0-cochain lifts to 1 with zero derivative") {
  auto space = unit_square(2);
  Cochain one = Cochain::zero(0, space.complex);
  one.values.setOnes();
  SampledForm lift = whitney_lift(one, space.complex, space.metric);
  for (std::size_t node = 0; node < space.metric.node_count(); ++node) {
    CHECK(lift.coeffs(node, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(max_abs(lift.dcoeffs->row(node)) < 1e-14);
  }
}

TEST_CASE("vertex indicator lifts to its barycentric coordinate") {
  auto space = unit_square(2);
  Cochain c = Cochain::zero(0, space.complex);
  c.values[0] = 1.0;
  SampledForm lift = whitney_lift(c, space.complex, space.metric);
  for (std::size_t node = 0; node < space.metric.node_count(); ++node) {
    CHECK(lift.coeffs(node, 0) >= -1e-15);
    CHECK(lift.coeffs(node, 0) <= 1.0 + 1e-15);
  }
}

TEST_CASE("Whitney edge form on the reference triangle at the centroid") {
  // single standard triangle, quadrature at the centroid
  std::vector<double> coords = {0, 0, 1, 0, 0, 1};
  std::vector<std::int32_t> cells = {0, 1, 2};
  auto cx = SimplicialComplex::from_cells(2, 2, std::move(coords), std::move(cells));
  auto mf = MetricField::build(cx, 1);
  REQUIRE(mf.nodes_per_cell() == 1);

  std::array<std::int32_t, 2> e01{0, 1};
  const auto idx = cx.simplex_index(1, {e01.data(), 2});
  REQUIRE(idx >= 0);
  Cochain c = Cochain::zero(1, cx);
  c.values[idx] = 1.0;
  SampledForm lift = whitney_lift(c, cx, mf);
  // lambda_0 dlambda_1 - lambda_1 dlambda_0 at the barycenter:
  // (1/3)(dlambda_1 - dlambda_0) = (1/3)(dx - (-dx - dy)) = (2/3, 1/3)
  CHECK(lift.coeffs(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(lift.coeffs(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("derivative samples match the lift of the coboundary exactly") {
  std::mt19937_64 rng(11);
  for (auto& space : confdr::testing::small_catalog()) {
    const int n = space.complex.dimension();
    for (int k = 0; k < n; ++k) {
      Cochain c = random_cochain(k, space.complex, rng);
      SampledForm lift = whitney_lift(c, space.complex, space.metric);
      SampledForm dlift = whitney_lift(coboundary(c, space.complex), space.complex, space.metric);
      const double scale = std::max(1.0, max_abs(dlift.coeffs));
      CHECK(max_abs(*lift.dcoeffs - dlift.coeffs) / scale < 1e-12);
    }
  }
}

TEST_CASE("de_rham_project inverts whitney_lift") {
  std::mt19937_64 rng(13);
  for (auto& space : confdr::testing::small_catalog()) {
    const int n = space.complex.dimension();
    for (int k = 0; k <= n; ++k) {
      Cochain c = random_cochain(k, space.complex, rng);
      SampledForm lift = whitney_lift(c, space.complex, space.metric);
      Cochain back = de_rham_project(lift, space.complex, space.metric);
      const double scale = std::max(1.0, c.values.cwiseAbs().maxCoeff());
      CHECK((back.values - c.values).cwiseAbs().maxCoeff() / scale < 1e-10);
    }
  }
}

TEST_CASE("constant dx projects to signed edge x-displacements") {
  auto space = unit_square(3);
  Eigen::VectorXd comps(2);
  comps << 1, 0;
  AmbientForm dx = constant_form(2, 1, comps);
  SampledForm s = sample_form(dx, space.complex, space.metric);
  Cochain c = de_rham_project(s, space.complex, space.metric);
  const auto& edges = space.complex.simplices(1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto t = edges[e];
    const double expected = space.complex.vertex(t[1])[0] - space.complex.vertex(t[0])[0];
    CHECK(c.values[e] == doctest::Approx(expected).epsilon(1e-12));
  }
  // zero form projects to the zero cochain
  SampledForm zero =
      sample_form(constant_form(2, 1, Eigen::VectorXd::Zero(2)), space.complex, space.metric);
  Cochain zc = de_rham_project(zero, space.complex, space.metric);
  CHECK(zc.values.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lp_form_norm: volume, |dx| = 1, conformal invariance at p = n/k") {
  auto space = unit_square(2);
  // constant area form of density 1: L^1 norm is the area
  Eigen::VectorXd one(1);
  one << 1;
  SampledForm area = sample_form(constant_form(2, 2, one), space.complex, space.metric);
  CHECK(lp_form_norm(area, 1.0, space.metric) == doctest::Approx(1.0).epsilon(1e-13));

  Eigen::VectorXd ex(2);
  ex << 1, 0;
  SampledForm dx = sample_form(constant_form(2, 1, ex), space.complex, space.metric);
  CHECK(lp_form_norm(dx, 2.0, space.metric) == doctest::Approx(1.0).epsilon(1e-13));

  MetricField scaled = space.metric.conformally_rescaled(3.0);
  CHECK(lp_form_norm(dx, 2.0, scaled) ==
        doctest::Approx(lp_form_norm(dx, 2.0, space.metric)).epsilon(1e-12));

  CHECK_THROWS_AS(lp_form_norm(dx, 0.5, space.metric), std::invalid_argument);
}

TEST_CASE("conformal_norm: unit of the algebra, exact forms, rescale invariance") {
  auto space = unit_square(2);
  Cochain one = Cochain::zero(0, space.complex);
  one.values.setOnes();
  auto report = conformal_norm(one, space.complex, space.metric);
  CHECK(report.lp_part == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(report.dlp_part < 1e-13);
  CHECK(report.total == doctest::Approx(1.0).epsilon(1e-13));

  // path example: du of u = (0,1,3) has zero second differential part
  std::mt19937_64 rng(3);
  Cochain u = random_cochain(0, space.complex, rng);
  Cochain du = coboundary(u, space.complex);
  auto du_report = conformal_norm(du, space.complex, space.metric);
  CHECK(du_report.dlp_part < 1e-12);

  // conformal rescale leaves every k >= 1 report unchanged
  std::vector<double> field = confdr::testing::random_conformal_field(space.metric, rng);
  MetricField rescaled = space.metric.conformally_rescaled(field);
  for (int k = 1; k <= 2; ++k) {
    Cochain c = random_cochain(k, space.complex, rng);
    auto a = conformal_norm(c, space.complex, space.metric);
    auto b = conformal_norm(c, space.complex, rescaled);
    CHECK(b.lp_part == doctest::Approx(a.lp_part).epsilon(1e-12));
    CHECK(b.dlp_part == doctest::Approx(a.dlp_part).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(a.total).epsilon(1e-12));
  }
}

TEST_CASE("wedge: unital, alternating, graded commutative, Leibniz") {
  auto space = unit_square(2);
  std::mt19937_64 rng(17);

  Cochain ones = Cochain::zero(0, space.complex);
  ones.values.setOnes();
  SampledForm unit = whitney_lift(ones, space.complex, space.metric);

  Cochain c1 = random_cochain(1, space.complex, rng);
  SampledForm a = whitney_lift(c1, space.complex, space.metric);

  SampledForm ua = wedge(unit, a);
  CHECK(max_abs(ua.coeffs - a.coeffs) < 1e-14);
  CHECK(max_abs(*ua.dcoeffs - *a.dcoeffs) < 1e-13);

  Eigen::VectorXd ex(2);
  ex << 1, 0;
  SampledForm dx = sample_form(constant_form(2, 1, ex), space.complex, space.metric);
  SampledForm dxdx = wedge(dx, dx);
  CHECK(max_abs(dxdx.coeffs) < 1e-15);

  Eigen::VectorXd ey(2);
  ey << 0, 1;
  SampledForm dy = sample_form(constant_form(2, 1, ey), space.complex, space.metric);
  SampledForm dxdy = wedge(dx, dy);
  CHECK(lp_form_norm(dxdy, 1.0, space.metric) == doctest::Approx(1.0).epsilon(1e-13));

  // Banach inequality on the catalog example
  auto na = conformal_norm(dx, space.complex, space.metric);
  auto nb = conformal_norm(dy, space.complex, space.metric);
  auto nab = conformal_norm(dxdy, space.complex, space.metric);
  CHECK(nab.total <= na.total * nb.total * (1 + 1e-12));

  // graded commutativity and the Leibniz rule, node-wise, random forms
  for (auto& sp : confdr::testing::small_catalog()) {
    const int n = sp.complex.dimension();
    for (int k = 0; k <= n - 1; ++k)
      for (int l = 0; k + l <= n; ++l) {
        if (l > n - 1 && l != n) continue;
        Cochain ck = random_cochain(k, sp.complex, rng);
        Cochain cl = random_cochain(std::min(l, n), sp.complex, rng);
        SampledForm fa = whitney_lift(ck, sp.complex, sp.metric);
        SampledForm fb = whitney_lift(cl, sp.complex, sp.metric);
        if (fa.degree + fb.degree > n) continue;
        SampledForm ab = wedge(fa, fb);
        SampledForm ba = wedge(fb, fa);
        const double sign = (fa.degree * fb.degree) % 2 == 0 ? 1.0 : -1.0;
        CHECK(max_abs(ab.coeffs - sign * ba.coeffs) < 1e-13 * std::max(1.0, max_abs(ab.coeffs)));

        if (fa.degree + fb.degree < n) {
          // independent Leibniz assembly
          SampledForm da;
          da.dimension = n;
          da.degree = fa.degree + 1;
          da.coeffs = *fa.dcoeffs;
          da.dcoeffs = Eigen::MatrixXd::Zero(da.coeffs.rows(),
                                             da.degree < n ? form_rank(n, da.degree + 1) : 1);
          SampledForm db;
          db.dimension = n;
          db.degree = fb.degree + 1;
          db.coeffs = *fb.dcoeffs;
          db.dcoeffs = Eigen::MatrixXd::Zero(db.coeffs.rows(),
                                             db.degree < n ? form_rank(n, db.degree + 1) : 1);
          Eigen::MatrixXd leibniz = wedge(da, fb).coeffs;
          const double s = fa.degree % 2 == 0 ? 1.0 : -1.0;
          leibniz += s * wedge(fa, db).coeffs;
          CHECK(max_abs(*ab.dcoeffs - leibniz) < 1e-13 * std::max(1.0, max_abs(leibniz)));
        }
      }
  }

  CHECK_THROWS_AS(wedge(dxdy, dx), std::invalid_argument);
}

TEST_CASE("discrete Hoelder inequality for lifted forms") {
  std::mt19937_64 rng(23);
  for (auto& sp : confdr::testing::small_catalog()) {
    const int n = sp.complex.dimension();
    for (int k = 1; k < n; ++k)
      for (int l = 1; k + l <= n; ++l) {
        Cochain ck = random_cochain(k, sp.complex, rng);
        Cochain cl = random_cochain(l, sp.complex, rng);
        SampledForm fa = whitney_lift(ck, sp.complex, sp.metric);
        SampledForm fb = whitney_lift(cl, sp.complex, sp.metric);
        const double lhs = lp_form_norm(wedge(fa, fb), double(n) / (k + l), sp.metric);
        const double rhs = lp_form_norm(fa, double(n) / k, sp.metric) *
                           lp_form_norm(fb, double(n) / l, sp.metric);
        CHECK(lhs <= rhs * (1 + 1e-12));
      }
  }
}

TEST_CASE("mesh and cochain round trips") {
  auto space = unit_square(2);
  std::stringstream buf;
  save_mesh(buf, space.complex, space.metric);
  auto [cx, mf] = load_mesh(buf);
  CHECK(cx.count(0) == space.complex.count(0));
  CHECK(cx.count(1) == space.complex.count(1));
  CHECK(cx.count(2) == space.complex.count(2));
  CHECK(mf.total_volume() == doctest::Approx(space.metric.total_volume()).epsilon(1e-14));

  std::mt19937_64 rng(29);
  Cochain c = random_cochain(1, space.complex, rng);
  std::stringstream cbuf;
  save_cochain(cbuf, c);
  Cochain back = load_cochain(cbuf);
  CHECK(back.degree == 1);
  CHECK((back.values - c.values).cwiseAbs().maxCoeff() < 1e-15);
}
