#pragma once

// Error norms against a piecewise-smooth exact solution: L2 and broken H1
// over the two subdomains, their beta-weighted variants, and EOC rates.
// The exact branch at a quadrature point follows the sign of the true level
// set; u_h follows its element's region tag, so the sliver between the
// interface and its polyline contributes the geometric consistency error.

#include "aifem/fem.hpp"
#include "aifem/problems.hpp"

namespace aifem {

struct ErrorReport {
  double l2 = 0.0;
  double h1 = 0.0;
  double wl2 = 0.0;  // beta-weighted
  double wh1 = 0.0;
};

inline ErrorReport compute_errors(const DiscreteField& uh,
                                  const ExactSolution& ex,
                                  const LevelSet& ls) {
  const FittedMesh& m = *uh.mesh;
  const QuadRule& tri = tri_rule_deg5();
  const QuadRule& quad = square_rule_3x3();
  double l2 = 0, h1 = 0, wl2 = 0, wh1 = 0;
  for (size_t e = 0; e < m.elements.size(); ++e) {
    const Element& el = m.elements[e];
    const QuadRule& rule = el.kind == ElementKind::Tri3 ? tri : quad;
    const double beta =
        el.region == RegionId::Region1 ? ex.beta1 : ex.beta2;
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const FieldSample s = sample_field(uh, int(e), rule.points[k]);
      const RegionId side =
          ls(s.x) >= 0.0 ? RegionId::Region1 : RegionId::Region2;
      const double du = ex.value(side, s.x.x, s.x.y) - s.value;
      const Point2 dg = ex.gradient(side, s.x.x, s.x.y) - s.grad;
      const double w = rule.weights[k] * s.jacobian;
      l2 += w * du * du;
      h1 += w * dot(dg, dg);
      wl2 += w * beta * du * du;
      wh1 += w * beta * dot(dg, dg);
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(wl2), std::sqrt(wh1)};
}

// nodal interpolant of the exact solution (two-valued at interface nodes
// when the jump is nonzero)
inline DiscreteField interpolate_exact(const FittedMesh& m,
                                       const ExactSolution& ex,
                                       const LevelSet& ls) {
  DiscreteField f = make_field(m);
  f.gamma_offset.assign(m.vertices.size(), 0.0);
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    const Point2 p = m.vertices[v];
    if (m.on_gamma.size() > v && m.on_gamma[v]) {
      f.values[v] = ex.u1(p.x, p.y);
      f.gamma_offset[v] = ex.u2(p.x, p.y) - ex.u1(p.x, p.y);
    } else {
      f.values[v] = ls(p) >= 0.0 ? ex.u1(p.x, p.y) : ex.u2(p.x, p.y);
    }
  }
  return f;
}

// empirical order of convergence under mesh halving
inline double eoc(double err_coarse, double err_fine) {
  return std::log2(err_coarse / err_fine);
}

}  // namespace aifem
