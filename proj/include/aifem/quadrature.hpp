#pragma once

// Quadrature rules on the reference triangle {x,y>=0, x+y<=1}, the unit
// square, and the unit interval.

#include <vector>

#include "aifem/geometry.hpp"

namespace aifem {

struct QuadRule {
  std::vector<Point2> points;
  std::vector<double> weights;
};

// degree-2 three-point rule, exact total weight 1/2
inline const QuadRule& tri_rule_deg2() {
  static const QuadRule r{
      {{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}},
      {1.0 / 6, 1.0 / 6, 1.0 / 6}};
  return r;
}

// degree-5 seven-point rule (centroid plus two orbits)
inline const QuadRule& tri_rule_deg5() {
  static const QuadRule r = [] {
    QuadRule q;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 + s15) / 21.0, w1 = (155.0 + s15) / 2400.0;
    const double a2 = (6.0 - s15) / 21.0, w2 = (155.0 - s15) / 2400.0;
    q.points.push_back({1.0 / 3, 1.0 / 3});
    q.weights.push_back(9.0 / 80.0);
    for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
      q.points.push_back({a, a});
      q.points.push_back({1 - 2 * a, a});
      q.points.push_back({a, 1 - 2 * a});
      q.weights.insert(q.weights.end(), 3, w);
    }
    return q;
  }();
  return r;
}

struct Rule1D {
  std::vector<double> points;  // on [0,1]
  std::vector<double> weights;
};

inline const Rule1D& gauss1d(int n) {
  static const Rule1D g2{{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)},
                         {0.5, 0.5}};
  static const Rule1D g3{{0.5 - 0.5 * std::sqrt(0.6), 0.5,
                          0.5 + 0.5 * std::sqrt(0.6)},
                         {5.0 / 18, 8.0 / 18, 5.0 / 18}};
  if (n == 2) return g2;
  if (n == 3) return g3;
  throw Error("gauss1d: only 2- and 3-point rules provided");
}

// tensor rule on the unit square, total weight 1
inline QuadRule square_gauss(int n) {
  const Rule1D& g = gauss1d(n);
  QuadRule q;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      q.points.push_back({g.points[i], g.points[j]});
      q.weights.push_back(g.weights[i] * g.weights[j]);
    }
  return q;
}

inline const QuadRule& square_rule_2x2() {
  static const QuadRule r = square_gauss(2);
  return r;
}

inline const QuadRule& square_rule_3x3() {
  static const QuadRule r = square_gauss(3);
  return r;
}

}  // namespace aifem
