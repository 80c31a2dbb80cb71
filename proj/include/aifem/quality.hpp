#pragma once

// Mesh-quality predicates behind the interpolation theory: maximum/minimum
// angle conditions and the regular decomposition property of quadrilaterals.

#include <array>
#include <ostream>
#include <string>

#include "aifem/mesh.hpp"

namespace aifem {

// Interior angles, computed from squared edge lengths via the law of
// cosines with a clamped acos; stable for the near-degenerate slivers the
// fitted meshes intentionally contain.
inline std::array<double, 3> triangle_angles(Point2 a, Point2 b, Point2 c) {
  const double sa = dot(c - b, c - b);  // opposite a
  const double sb = dot(a - c, a - c);  // opposite b
  const double sc = dot(b - a, b - a);  // opposite c
  if (sa == 0.0 || sb == 0.0 || sc == 0.0 ||
      std::abs(cross(b - a, c - a)) == 0.0)
    throw Error("triangle_angles: degenerate triangle");
  auto ang = [](double opp2, double u2, double v2) {
    const double cosv =
        std::clamp((u2 + v2 - opp2) / (2.0 * std::sqrt(u2 * v2)), -1.0, 1.0);
    return std::acos(cosv);
  };
  return {ang(sa, sb, sc), ang(sb, sc, sa), ang(sc, sa, sb)};
}

struct RdpResult {
  double N = 0.0;    // |d2|/|d1| for the chosen cutting diagonal d1
  double psi = 0.0;  // max angle over the two sub-triangles
  int diagonal = 0;  // 0: cut along p0-p2, 1: cut along p1-p3
};

inline bool quad_strictly_convex(const std::array<Point2, 4>& p) {
  for (int k = 0; k < 4; ++k) {
    const Point2 e0 = p[(k + 1) % 4] - p[k];
    const Point2 e1 = p[(k + 2) % 4] - p[(k + 1) % 4];
    if (cross(e0, e1) <= 0.0) return false;
  }
  return true;
}

// Try both diagonals and report the decomposition with the smaller maximum
// angle (ties resolved toward the smaller diagonal ratio).
inline RdpResult check_rdp(const std::array<Point2, 4>& p) {
  if (!quad_strictly_convex(p)) throw NonConvexQuad("check_rdp: quad");
  const double l02 = dist(p[0], p[2]), l13 = dist(p[1], p[3]);
  auto max_angle = [](Point2 a, Point2 b, Point2 c) {
    const auto ang = triangle_angles(a, b, c);
    return std::max({ang[0], ang[1], ang[2]});
  };
  RdpResult r0{l13 / l02,
               std::max(max_angle(p[0], p[1], p[2]),
                        max_angle(p[0], p[2], p[3])),
               0};
  RdpResult r1{l02 / l13,
               std::max(max_angle(p[1], p[2], p[3]),
                        max_angle(p[1], p[3], p[0])),
               1};
  if (r1.psi < r0.psi) return r1;
  if (r0.psi < r1.psi) return r0;
  return r1.N < r0.N ? r1 : r0;
}

struct QualityViolation {
  int element = -1;
  std::string what;
};

struct QualityReport {
  double min_angle = 0.0;      // over all element corner angles
  double max_angle = 0.0;
  double worst_rdp_N = 1.0;
  double worst_rdp_psi = 0.0;
  std::vector<QualityViolation> violations;
  bool clean() const { return violations.empty(); }
};

namespace detail {

inline std::array<Point2, 4> quad_points(const FittedMesh& m,
                                         const Element& el) {
  return {m.vertices[el.nodes[0]], m.vertices[el.nodes[1]],
          m.vertices[el.nodes[2]], m.vertices[el.nodes[3]]};
}

inline double quad_corner_angle(const std::array<Point2, 4>& p, int k) {
  const Point2 u = p[(k + 3) % 4] - p[k];
  const Point2 v = p[(k + 1) % 4] - p[k];
  const double cosv =
      std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0);
  return std::acos(cosv);
}

}  // namespace detail

// Check every triangle against Maxac(pi - alpha) and every quadrilateral
// against RDP(N, pi - alpha), for a fitted mesh generated from an unfitted
// grid satisfying Minac(alpha).  Violations are data, not exceptions.
inline QualityReport audit_fitted_mesh(const FittedMesh& m, double alpha) {
  QualityReport rep;
  rep.min_angle = M_PI;
  const double psi_bound = M_PI - alpha;
  for (size_t e = 0; e < m.elements.size(); ++e) {
    const Element& el = m.elements[e];
    if (el.kind == ElementKind::Tri3) {
      const auto ang =
          triangle_angles(m.vertices[el.nodes[0]], m.vertices[el.nodes[1]],
                          m.vertices[el.nodes[2]]);
      for (double a : ang) {
        rep.min_angle = std::min(rep.min_angle, a);
        rep.max_angle = std::max(rep.max_angle, a);
      }
      const double worst = std::max({ang[0], ang[1], ang[2]});
      if (worst > psi_bound)
        rep.violations.push_back(
            {int(e), "triangle max angle " + std::to_string(worst) +
                         " exceeds " + std::to_string(psi_bound)});
    } else {
      const auto p = detail::quad_points(m, el);
      for (int k = 0; k < 4; ++k) {
        const double a = detail::quad_corner_angle(p, k);
        rep.min_angle = std::min(rep.min_angle, a);
        rep.max_angle = std::max(rep.max_angle, a);
      }
      if (!quad_strictly_convex(p)) {
        rep.violations.push_back({int(e), "non-convex quadrilateral"});
        continue;
      }
      const RdpResult r = check_rdp(p);
      rep.worst_rdp_N = std::max(rep.worst_rdp_N, r.N);
      rep.worst_rdp_psi = std::max(rep.worst_rdp_psi, r.psi);
      if (r.psi > psi_bound)
        rep.violations.push_back(
            {int(e), "quad RDP angle " + std::to_string(r.psi) +
                         " exceeds " + std::to_string(psi_bound)});
    }
  }
  if (m.elements.empty()) rep.min_angle = 0.0;
  return rep;
}

// Per-element quality table (id, kind, min/max angle, N, psi).
inline void write_quality_csv(std::ostream& os, const FittedMesh& m) {
  os << "element,kind,min_angle,max_angle,rdp_N,rdp_psi\n";
  char buf[160];
  for (size_t e = 0; e < m.elements.size(); ++e) {
    const Element& el = m.elements[e];
    if (el.kind == ElementKind::Tri3) {
      const auto ang =
          triangle_angles(m.vertices[el.nodes[0]], m.vertices[el.nodes[1]],
                          m.vertices[el.nodes[2]]);
      const double lo = std::min({ang[0], ang[1], ang[2]});
      const double hi = std::max({ang[0], ang[1], ang[2]});
      std::snprintf(buf, sizeof buf, "%zu,tri,%.6f,%.6f,,\n", e, lo, hi);
    } else {
      const auto p = detail::quad_points(m, el);
      double lo = M_PI, hi = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double a = detail::quad_corner_angle(p, k);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      const RdpResult r = check_rdp(p);
      std::snprintf(buf, sizeof buf, "%zu,quad,%.6f,%.6f,%.6f,%.6f\n", e, lo,
                    hi, r.N, r.psi);
    }
    os << buf;
  }
}

}  // namespace aifem
