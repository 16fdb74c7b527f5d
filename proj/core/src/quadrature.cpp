#include "confdr/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace confdr {

namespace {

SimplexQuadrature make(int dim, int order, std::vector<double> bary, std::vector<double> w) {
  SimplexQuadrature rule;
  rule.dim = dim;
  rule.order = order;
  rule.barycentric = std::move(bary);
  rule.weights = std::move(w);
  return rule;
}

// Gauss-Legendre on [0,1], weights sum to 1.
SimplexQuadrature gauss_segment(int order) {
  if (order <= 1) return make(1, 1, {0.5, 0.5}, {1.0});
  if (order <= 3) {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    return make(1, 3, {a, 1 - a, 1 - a, a}, {0.5, 0.5});
  }
  if (order <= 5) {
    const double a = 0.5 - 0.5 * std::sqrt(3.0 / 5.0);
    return make(1, 5, {a, 1 - a, 0.5, 0.5, 1 - a, a}, {5.0 / 18, 8.0 / 18, 5.0 / 18});
  }
  // 5-point rule, degree 9
  const double x1 = 0.5 * (1 - 0.9061798459386640);
  const double x2 = 0.5 * (1 - 0.5384693101056831);
  const double w1 = 0.5 * 0.2369268850561891;
  const double w2 = 0.5 * 0.4786286704993665;
  const double w0 = 0.5 * 0.5688888888888889;
  return make(1, 9,
              {x1, 1 - x1, x2, 1 - x2, 0.5, 0.5, 1 - x2, x2, 1 - x1, x1},
              {w1, w2, w0, w2, w1});
}

SimplexQuadrature triangle_rule(int order) {
  const double third = 1.0 / 3.0;
  if (order <= 1) return make(2, 1, {third, third, third}, {0.5});
  if (order <= 2) {
    // 3-point midpoint-of-edges style rule (degree 2)
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    return make(2, 2,
                {a, b, b, b, a, b, b, b, a},
                {1.0 / 6, 1.0 / 6, 1.0 / 6});
  }
  if (order <= 3) {
    // 4-point rule with negative centroid weight (degree 3)
    const double a = 0.6, b = 0.2;
    return make(2, 3,
                {third, third, third, a, b, b, b, a, b, b, b, a},
                {-27.0 / 96, 25.0 / 96, 25.0 / 96, 25.0 / 96});
  }
  if (order <= 4) {
    // Dunavant degree 4, 6 points
    const double a1 = 0.108103018168070, b1 = 0.445948490915965;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771;
    const double w1 = 0.5 * 0.223381589678011, w2 = 0.5 * 0.109951743655322;
    return make(2, 4,
                {a1, b1, b1, b1, a1, b1, b1, b1, a1,
                 a2, b2, b2, b2, a2, b2, b2, b2, a2},
                {w1, w1, w1, w2, w2, w2});
  }
  // Dunavant degree 7, 13 points
  const double w0 = 0.5 * -0.149570044467670;
  const double a1 = 0.479308067841923, b1 = 0.260345966079038, w1 = 0.5 * 0.175615257433204;
  const double a2 = 0.869739794195568, b2 = 0.065130102902216, w2 = 0.5 * 0.053347235608839;
  const double a3 = 0.638444188569809, b3 = 0.312865496004875, c3 = 0.048690315425316,
               w3 = 0.5 * 0.077113760890257;
  std::vector<double> bary = {third, third, third,
                              a1, b1, b1, b1, a1, b1, b1, b1, a1,
                              a2, b2, b2, b2, a2, b2, b2, b2, a2,
                              a3, b3, c3, b3, c3, a3, c3, a3, b3,
                              a3, c3, b3, b3, a3, c3, c3, b3, a3};
  std::vector<double> w = {w0, w1, w1, w1, w2, w2, w2, w3, w3, w3, w3, w3, w3};
  return make(2, 7, std::move(bary), std::move(w));
}

SimplexQuadrature tet_rule(int order) {
  const double q = 0.25;
  const double vref = 1.0 / 6.0;
  if (order <= 1) return make(3, 1, {q, q, q, q}, {vref});
  if (order <= 2) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    std::vector<double> bary;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) bary.push_back(i == j ? a : b);
    return make(3, 2, std::move(bary), std::vector<double>(4, vref / 4));
  }
  if (order <= 3) {
    // Keast degree 3, 5 points (negative centroid weight)
    std::vector<double> bary = {q, q, q, q};
    const double a = 0.5, b = 1.0 / 6.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) bary.push_back(i == j ? a : b);
    std::vector<double> w = {-4.0 / 5 * vref, 9.0 / 20 * vref, 9.0 / 20 * vref,
                             9.0 / 20 * vref, 9.0 / 20 * vref};
    return make(3, 3, std::move(bary), std::move(w));
  }
  // Keast degree 5, 15 points
  std::vector<double> bary = {q, q, q, q};
  std::vector<double> w = {vref * 0.118518518518519};
  const double a1 = 0.0, b1 = 1.0 / 3.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) bary.push_back(i == j ? a1 : b1);
    w.push_back(vref * 0.071937083779019);
  }
  const double a2 = 8.0 / 11.0, b2 = 1.0 / 11.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) bary.push_back(i == j ? a2 : b2);
    w.push_back(vref * 0.069068207226272);
  }
  const double c = 0.4334498464263357, d = 0.0665501535736643;
  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (auto& pr : pairs) {
    std::array<double, 4> node{d, d, d, d};
    node[pr[0]] = c;
    node[pr[1]] = c;
    for (double v : node) bary.push_back(v);
    w.push_back(vref * 0.052910052910053);
  }
  return make(3, 5, std::move(bary), std::move(w));
}

}  // namespace

SimplexQuadrature simplex_quadrature(int dim, int order) {
  switch (dim) {
    case 0:
      return make(0, 100, {1.0}, {1.0});
    case 1:
      return gauss_segment(order);
    case 2:
      return triangle_rule(order);
    case 3:
      return tet_rule(order);
    default:
      throw std::invalid_argument("simplex_quadrature: dimension must be 0..3");
  }
}

}  // namespace confdr
