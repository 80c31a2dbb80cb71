#pragma once

// Mesh containers: the unfitted (possibly locally refined) triangulation and
// the interface-fitted mixed triangle/quad mesh.
//
// Structured vertices carry exact integer lattice coordinates
// x = -1 + 2*ix/den so that vertex identity across refinement levels is
// exact; interface cut points are identified by their bit pattern (they are
// computed once per unique edge, deterministically).

#include <array>
#include <climits>
#include <cstdint>
#include <cstring>
#include <unordered_map>
#include <vector>

#include "aifem/geometry.hpp"

namespace aifem {

constexpr long long kNoLattice = LLONG_MIN;

inline uint64_t lattice_key(long long ix, long long iy) {
  return (uint64_t(uint32_t(ix)) << 32) | uint64_t(uint32_t(iy));
}

struct UnfittedMesh {
  int n = 0;               // cells per side of the base uniform grid
  long long lattice_den = 0;
  double h = 0.0;          // base mesh size 2/n
  std::vector<Point2> vertices;
  std::vector<std::array<long long, 2>> lattice;
  std::vector<char> on_boundary;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<char> is_green;                 // closure bisection elements
  std::unordered_map<uint64_t, int> vertex_at;

  Point2 lattice_point(long long ix, long long iy) const {
    return {-1.0 + 2.0 * double(ix) / double(lattice_den),
            -1.0 + 2.0 * double(iy) / double(lattice_den)};
  }

  int find_vertex(long long ix, long long iy) const {
    auto it = vertex_at.find(lattice_key(ix, iy));
    return it == vertex_at.end() ? -1 : it->second;
  }

  int find_or_add_vertex(long long ix, long long iy) {
    const uint64_t key = lattice_key(ix, iy);
    auto it = vertex_at.find(key);
    if (it != vertex_at.end()) return it->second;
    const int id = int(vertices.size());
    vertices.push_back(lattice_point(ix, iy));
    lattice.push_back({ix, iy});
    on_boundary.push_back(ix == 0 || ix == lattice_den || iy == 0 ||
                          iy == lattice_den);
    vertex_at.emplace(key, id);
    return id;
  }

  double tri_area(int t) const {
    const auto& tr = triangles[t];
    return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]],
                       vertices[tr[2]] - vertices[tr[0]]);
  }

  Point2 tri_centroid(int t) const {
    const auto& tr = triangles[t];
    return (1.0 / 3.0) *
           (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]);
  }
};

enum class ElementKind : int { Tri3 = 3, Quad4 = 4 };

struct Element {
  ElementKind kind = ElementKind::Tri3;
  std::array<int, 4> nodes = {-1, -1, -1, -1};  // counterclockwise
  RegionId region = RegionId::Region1;
  int parent = -1;  // originating unfitted triangle
  int size() const { return int(kind); }
};

struct FittedMesh {
  int n = 0;
  long long lattice_den = 0;
  double h = 0.0;
  std::vector<Point2> vertices;
  std::vector<std::array<long long, 2>> lattice;  // kNoLattice for cut points
  std::vector<char> on_boundary;
  std::vector<char> on_gamma;  // vertex lies on the discrete interface
  std::vector<Element> elements;
  std::vector<int> interface_nodes;           // {O_i} in polyline order
  std::vector<std::array<int, 2>> gamma_h;    // segments of the polyline

  double element_area(int e) const {
    const Element& el = elements[e];
    double a = 0.0;
    for (int k = 0; k < el.size(); ++k) {
      const Point2 p = vertices[el.nodes[k]];
      const Point2 q = vertices[el.nodes[(k + 1) % el.size()]];
      a += cross(p, q);
    }
    return 0.5 * a;
  }

  Point2 element_centroid(int e) const {
    const Element& el = elements[e];
    Point2 c{0, 0};
    for (int k = 0; k < el.size(); ++k) c = c + vertices[el.nodes[k]];
    return (1.0 / el.size()) * c;
  }
};

// Exact vertex identity across meshes: lattice vertices by integer coords,
// cut points by their double bit pattern.
struct VertexKey {
  uint64_t a = 0, b = 0;
  bool operator==(const VertexKey& o) const { return a == o.a && b == o.b; }
};

struct VertexKeyHash {
  size_t operator()(const VertexKey& k) const {
    uint64_t h = k.a * 0x9e3779b97f4a7c15ull ^ k.b;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 32;
    return size_t(h);
  }
};

inline VertexKey vertex_key(const std::array<long long, 2>& lat, Point2 p) {
  if (lat[0] != kNoLattice)
    return {0x4000000000000000ull + uint64_t(lat[0]), uint64_t(lat[1])};
  uint64_t bx, by;
  static_assert(sizeof(double) == 8);
  std::memcpy(&bx, &p.x, 8);
  std::memcpy(&by, &p.y, 8);
  return {bx, by ^ 0x8000000000000001ull};
}

inline std::pair<double, double> region_areas(const FittedMesh& m) {
  double a1 = 0.0, a2 = 0.0;
  for (size_t e = 0; e < m.elements.size(); ++e) {
    const double a = m.element_area(int(e));
    (m.elements[e].region == RegionId::Region1 ? a1 : a2) += a;
  }
  return {a1, a2};
}

namespace detail {

inline bool point_in_closed_triangle(Point2 p, Point2 a, Point2 b, Point2 c,
                                     double tol) {
  const double s1 = cross(b - a, p - a);
  const double s2 = cross(c - b, p - b);
  const double s3 = cross(a - c, p - c);
  return s1 >= -tol && s2 >= -tol && s3 >= -tol;
}

}  // namespace detail

}  // namespace aifem
