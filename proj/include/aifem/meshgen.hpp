#pragma once

// Mesh generation: uniform unfitted grids, interface detection, local
// regular refinement with red/green closure, interface fitting, and the
// nested interface-adaptive hierarchy.

#include <algorithm>
#include <unordered_set>

#include "aifem/mesh.hpp"

namespace aifem {

// Structured n x n grid of squares on [-1,1]^2, each split along the
// (i+1,j)-(i,j+1) diagonal into two right triangles.
inline UnfittedMesh make_uniform_mesh(int n, long long lattice_den = 0) {
  if (n < 2) throw Error("make_uniform_mesh: n must be >= 2");
  if (lattice_den == 0) lattice_den = n;
  if (lattice_den % n != 0)
    throw Error("make_uniform_mesh: lattice_den must be a multiple of n");
  UnfittedMesh m;
  m.n = n;
  m.lattice_den = lattice_den;
  m.h = 2.0 / n;
  const long long s = lattice_den / n;
  m.vertices.reserve(size_t(n + 1) * (n + 1));
  for (long long j = 0; j <= n; ++j)
    for (long long i = 0; i <= n; ++i) m.find_or_add_vertex(i * s, j * s);
  m.triangles.reserve(size_t(2) * n * n);
  auto vid = [&](long long i, long long j) { return int(j * (n + 1) + i); };
  for (long long j = 0; j < n; ++j)
    for (long long i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j);
      const int c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.triangles.push_back({a, b, d});
      m.triangles.push_back({b, c, d});
    }
  m.is_green.assign(m.triangles.size(), 0);
  return m;
}

namespace detail {

inline uint64_t edge_key(int v0, int v1) {
  if (v0 > v1) std::swap(v0, v1);
  return (uint64_t(uint32_t(v0)) << 32) | uint64_t(uint32_t(v1));
}

}  // namespace detail

// Shared interface scan: per-vertex on-interface flags (snapped), per-edge
// interior intersection points, per-triangle interface classification.
struct InterfaceScan {
  std::vector<double> phi;             // per vertex
  std::vector<char> vertex_on_gamma;   // |phi| <= snap, or an edge root
                                       // snapped onto the vertex
  std::unordered_map<uint64_t, std::vector<EdgeCut>> edge_cuts;  // interior
  std::vector<char> is_interface;      // per triangle
  bool crossing_unresolved = false;    // some edge is crossed >= 2 times
};

inline InterfaceScan scan_interface(const UnfittedMesh& m, const LevelSet& ls,
                                    bool strict, double vertex_snap = 1e-12,
                                    int nscan = 8) {
  InterfaceScan out;
  const int nv = int(m.vertices.size());
  out.phi.resize(nv);
  out.vertex_on_gamma.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    out.phi[v] = ls(m.vertices[v]);
    if (std::abs(out.phi[v]) <= vertex_snap) out.vertex_on_gamma[v] = 1;
  }
  out.is_interface.assign(m.triangles.size(), 0);
  std::unordered_set<uint64_t> multi_cut_edges;

  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tr[e], b = tr[(e + 1) % 3];
      const uint64_t key = detail::edge_key(a, b);
      if (out.edge_cuts.count(key) || multi_cut_edges.count(key)) continue;
      // canonical orientation by coordinates, so shared edges produce
      // bitwise-identical cut points across meshes of one hierarchy
      int va = a, vb = b;
      Point2 pa = m.vertices[a], pb = m.vertices[b];
      if (pb.x < pa.x || (pb.x == pa.x && pb.y < pa.y)) {
        std::swap(va, vb);
        std::swap(pa, pb);
      }
      std::vector<EdgeCut> cuts;
      bool unresolved = false;
      try {
        cuts = edge_intersections(ls, pa, pb, 1e-12, nscan);
      } catch (const MeshTooCoarse&) {
        if (strict) throw;
        unresolved = true;
      }
      std::vector<EdgeCut> interior;
      for (auto& c : cuts) {
        if (c.t == 0.0) {
          out.vertex_on_gamma[va] = 1;
        } else if (c.t == 1.0) {
          out.vertex_on_gamma[vb] = 1;
        } else {
          interior.push_back(c);
        }
      }
      if (interior.size() >= 2) {
        if (strict)
          throw MeshTooCoarse("mesh edge crossed twice by the interface");
        unresolved = true;
      }
      if (unresolved) {
        multi_cut_edges.insert(key);
        out.crossing_unresolved = true;
      } else {
        std::sort(interior.begin(), interior.end(),
                  [](const EdgeCut& x, const EdgeCut& y) { return x.t < y.t; });
        out.edge_cuts.emplace(key, std::move(interior));
      }
    }
  }

  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    int nzero = 0, ncut = 0;
    bool multi = false;
    for (int k = 0; k < 3; ++k) {
      if (out.vertex_on_gamma[tr[k]]) ++nzero;
      const uint64_t key = detail::edge_key(tr[k], tr[(k + 1) % 3]);
      auto it = out.edge_cuts.find(key);
      if (it != out.edge_cuts.end())
        ncut += int(it->second.size());
      else if (multi_cut_edges.count(key))
        multi = true;
    }
    out.is_interface[t] = (ncut >= 1 || nzero >= 2 || multi) ? 1 : 0;
  }
  return out;
}

// Triangles whose closure meets the interface with positive length
// (strict mode: unresolved double crossings raise MeshTooCoarse).
inline std::vector<int> detect_interface_elements(const UnfittedMesh& m,
                                                  const LevelSet& ls,
                                                  double vertex_snap = 1e-12,
                                                  int nscan = 8) {
  auto scan = scan_interface(m, ls, /*strict=*/true, vertex_snap, nscan);
  std::vector<int> out;
  for (size_t t = 0; t < m.triangles.size(); ++t)
    if (scan.is_interface[t]) out.push_back(int(t));
  return out;
}

// Interface elements plus every vertex-adjacent neighbour (the refinement
// zone of Algorithm 1 / the region U_{l,Gamma}).  Lenient about double
// crossings: a coarse level may legitimately under-resolve the interface.
inline std::vector<char> mark_interface_zone(const UnfittedMesh& m,
                                             const LevelSet& ls,
                                             double vertex_snap = 1e-12,
                                             int nscan = 8) {
  auto scan = scan_interface(m, ls, /*strict=*/false, vertex_snap, nscan);
  std::vector<char> zone(m.triangles.size(), 0);
  std::vector<char> vtouch(m.vertices.size(), 0);
  for (size_t t = 0; t < m.triangles.size(); ++t)
    if (scan.is_interface[t])
      for (int k = 0; k < 3; ++k) vtouch[m.triangles[t][k]] = 1;
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    if (scan.is_interface[t] || vtouch[tr[0]] || vtouch[tr[1]] ||
        vtouch[tr[2]])
      zone[t] = 1;
  }
  return zone;
}

// Regular (1:4) subdivision of the marked triangles.  Unmarked neighbours
// left with two or more hanging midpoints are promoted to regular
// subdivision as well; a single hanging midpoint is closed by a green
// bisection toward it.
inline UnfittedMesh refine_marked(const UnfittedMesh& m,
                                  std::vector<char> marked) {
  if (marked.size() != m.triangles.size())
    throw Error("refine_marked: mark array size mismatch");

  auto midpoint_lattice = [&](int a, int b) -> std::array<long long, 2> {
    const auto &la = m.lattice[a], &lb = m.lattice[b];
    if (((la[0] + lb[0]) | (la[1] + lb[1])) & 1)
      throw Error("refine_marked: lattice exhausted (too many rounds)");
    return {(la[0] + lb[0]) / 2, (la[1] + lb[1]) / 2};
  };

  // red/green closure
  std::unordered_set<uint64_t> split_midpoints;
  auto add_midpoints = [&](size_t t) {
    const auto& tr = m.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const auto mp = midpoint_lattice(tr[e], tr[(e + 1) % 3]);
      split_midpoints.insert(lattice_key(mp[0], mp[1]));
    }
  };
  for (size_t t = 0; t < m.triangles.size(); ++t)
    if (marked[t]) {
      if (m.is_green[t]) throw Error("refine_marked: green element marked");
      add_midpoints(t);
    }
  for (bool grew = true; grew;) {
    grew = false;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
      if (marked[t]) continue;
      const auto& tr = m.triangles[t];
      int hanging = 0;
      for (int e = 0; e < 3; ++e) {
        const auto mp = midpoint_lattice(tr[e], tr[(e + 1) % 3]);
        if (split_midpoints.count(lattice_key(mp[0], mp[1]))) ++hanging;
      }
      if (hanging >= 2) {
        if (m.is_green[t])
          throw Error("refine_marked: closure reached a green element");
        marked[t] = 1;
        add_midpoints(t);
        grew = true;
      }
    }
  }

  UnfittedMesh out;
  out.n = m.n;
  out.lattice_den = m.lattice_den;
  out.h = m.h;
  out.vertices = m.vertices;
  out.lattice = m.lattice;
  out.on_boundary = m.on_boundary;
  out.vertex_at = m.vertex_at;

  auto mid_vertex = [&](int a, int b) {
    const auto mp = midpoint_lattice(a, b);
    return out.find_or_add_vertex(mp[0], mp[1]);
  };

  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    const int a = tr[0], b = tr[1], c = tr[2];
    if (marked[t]) {
      const int mab = mid_vertex(a, b), mbc = mid_vertex(b, c),
                mca = mid_vertex(c, a);
      out.triangles.push_back({a, mab, mca});
      out.triangles.push_back({mab, b, mbc});
      out.triangles.push_back({mca, mbc, c});
      out.triangles.push_back({mab, mbc, mca});
      out.is_green.insert(out.is_green.end(), 4, 0);
      continue;
    }
    int hang_edge = -1;
    for (int e = 0; e < 3; ++e) {
      const auto mp = midpoint_lattice(tr[e], tr[(e + 1) % 3]);
      if (split_midpoints.count(lattice_key(mp[0], mp[1]))) hang_edge = e;
    }
    if (hang_edge < 0) {
      out.triangles.push_back(tr);
      out.is_green.push_back(m.is_green[t]);
    } else {
      if (m.is_green[t])
        throw Error("refine_marked: hanging midpoint on a green element");
      const int p = tr[hang_edge], q = tr[(hang_edge + 1) % 3],
                r = tr[(hang_edge + 2) % 3];
      const int mid = mid_vertex(p, q);
      out.triangles.push_back({p, mid, r});
      out.triangles.push_back({mid, q, r});
      out.is_green.insert(out.is_green.end(), 2, 1);
    }
  }
  return out;
}

namespace detail {

inline RegionId region_of_sign(double v) {
  return v > 0 ? RegionId::Region1 : RegionId::Region2;
}

inline RegionId opposite(RegionId r) {
  return r == RegionId::Region1 ? RegionId::Region2 : RegionId::Region1;
}

}  // namespace detail

// Split every interface triangle along its chord; non-interface triangles
// are copied through.  Requires every interface triangle to be cut in
// exactly one chord (two intersection points, counting on-interface
// vertices).
inline FittedMesh fit_mesh(const UnfittedMesh& um, const LevelSet& ls,
                           double vertex_snap = 1e-12, int nscan = 8) {
  InterfaceScan scan = scan_interface(um, ls, /*strict=*/true, vertex_snap,
                                      nscan);
  FittedMesh fm;
  fm.n = um.n;
  fm.lattice_den = um.lattice_den;
  fm.h = um.h;
  fm.vertices = um.vertices;
  fm.lattice = um.lattice;
  fm.on_boundary = um.on_boundary;

  auto near_domain_boundary = [](Point2 p) {
    return std::abs(std::abs(p.x) - 1.0) < 1e-13 ||
           std::abs(std::abs(p.y) - 1.0) < 1e-13;
  };

  // materialise cut vertices, one per cut edge, in deterministic mesh order
  std::unordered_map<uint64_t, int> cut_vertex;
  for (const auto& tr : um.triangles)
    for (int e = 0; e < 3; ++e) {
      const uint64_t key = detail::edge_key(tr[e], tr[(e + 1) % 3]);
      if (cut_vertex.count(key)) continue;
      auto it = scan.edge_cuts.find(key);
      if (it == scan.edge_cuts.end() || it->second.empty()) continue;
      const int id = int(fm.vertices.size());
      fm.vertices.push_back(it->second[0].p);
      fm.lattice.push_back({kNoLattice, kNoLattice});
      fm.on_boundary.push_back(near_domain_boundary(it->second[0].p) ? 1 : 0);
      cut_vertex.emplace(key, id);
    }

  auto cut_on_edge = [&](int a, int b) -> int {
    auto it = cut_vertex.find(detail::edge_key(a, b));
    return it == cut_vertex.end() ? -1 : it->second;
  };
  // a cut element lies on one side of the polyline; the side is decided by
  // the parent's vertex signs (consistent along cut edges by construction,
  // and correct even when a sliver's centroid falls across the true curve)
  auto side_of_vertices = [&](const std::array<int, 3>& tr) {
    double best = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int v = tr[k];
      if (scan.vertex_on_gamma[v]) continue;
      if (std::abs(scan.phi[v]) > std::abs(best)) best = scan.phi[v];
    }
    return detail::region_of_sign(best);
  };

  for (size_t t = 0; t < um.triangles.size(); ++t) {
    const auto& tr = um.triangles[t];
    int cuts[3];
    int ncut = 0;
    for (int e = 0; e < 3; ++e) {
      cuts[e] = cut_on_edge(tr[e], tr[(e + 1) % 3]);
      if (cuts[e] >= 0) ++ncut;
    }
    int nzero = 0;
    for (int k = 0; k < 3; ++k)
      if (scan.vertex_on_gamma[tr[k]]) ++nzero;

    if (ncut == 0) {
      if (nzero == 3)
        throw MeshTooCoarse("triangle degenerates onto the interface");
      Element el;
      el.kind = ElementKind::Tri3;
      el.nodes = {tr[0], tr[1], tr[2], -1};
      el.parent = int(t);
      el.region = side_of_vertices(tr);
      fm.elements.push_back(el);
      continue;
    }

    if (ncut == 2) {
      // shared vertex of the two cut edges
      int s;
      if (cuts[0] >= 0 && cuts[1] >= 0)
        s = 1;
      else if (cuts[1] >= 0 && cuts[2] >= 0)
        s = 2;
      else
        s = 0;
      // an on-interface vertex is tolerable as a touch point on the far
      // corners, but not at the chord's own corner
      if (scan.vertex_on_gamma[tr[s]])
        throw MeshTooCoarse("chord corner lies on the interface");
      const int w = tr[s], u = tr[(s + 1) % 3], v = tr[(s + 2) % 3];
      const int X = cut_on_edge(w, u), Y = cut_on_edge(v, w);
      Element sub;
      sub.kind = ElementKind::Tri3;
      sub.nodes = {w, X, Y, -1};
      sub.parent = int(t);
      sub.region = detail::region_of_sign(scan.phi[w]);
      fm.elements.push_back(sub);
      Element quad;
      quad.kind = ElementKind::Quad4;
      quad.nodes = {X, u, v, Y};
      quad.parent = int(t);
      quad.region = detail::opposite(sub.region);
      fm.elements.push_back(quad);
      continue;
    }

    if (ncut == 1) {
      int e = cuts[0] >= 0 ? 0 : (cuts[1] >= 0 ? 1 : 2);
      const int a = tr[e], b = tr[(e + 1) % 3], o = tr[(e + 2) % 3];
      const int X = cuts[e];
      if (nzero != 1) throw MeshTooCoarse("half crossing without a vertex");
      if (scan.vertex_on_gamma[o]) {
        // chord from the opposite vertex to the cut: two genuine halves
        Element t1;
        t1.kind = ElementKind::Tri3;
        t1.nodes = {o, a, X, -1};
        t1.parent = int(t);
        t1.region = detail::region_of_sign(scan.phi[a]);
        fm.elements.push_back(t1);
        Element t2;
        t2.kind = ElementKind::Tri3;
        t2.nodes = {o, X, b, -1};
        t2.parent = int(t);
        t2.region = detail::region_of_sign(scan.phi[b]);
        fm.elements.push_back(t2);
      } else {
        // the interface grazes along the cut edge between one of its
        // endpoints and X; split there so the neighbour's chord conforms,
        // both halves stay on this side of the polyline
        Element t1;
        t1.kind = ElementKind::Tri3;
        t1.nodes = {o, a, X, -1};
        t1.parent = int(t);
        t1.region = scan.vertex_on_gamma[a]
                        ? detail::region_of_sign(scan.phi[o])
                        : detail::region_of_sign(scan.phi[a]);
        fm.elements.push_back(t1);
        Element t2;
        t2.kind = ElementKind::Tri3;
        t2.nodes = {o, X, b, -1};
        t2.parent = int(t);
        t2.region = scan.vertex_on_gamma[b]
                        ? detail::region_of_sign(scan.phi[o])
                        : detail::region_of_sign(scan.phi[b]);
        fm.elements.push_back(t2);
      }
      continue;
    }

    throw MeshTooCoarse("triangle cut by more than one chord");
  }

  // the discrete interface: interior edges separating the two regions
  struct EdgeUse {
    int count = 0;
    RegionId regions[2] = {RegionId::Region1, RegionId::Region1};
  };
  std::unordered_map<uint64_t, EdgeUse> edge_use;
  for (const Element& el : fm.elements)
    for (int k = 0; k < el.size(); ++k) {
      const uint64_t key =
          detail::edge_key(el.nodes[k], el.nodes[(k + 1) % el.size()]);
      EdgeUse& eu = edge_use[key];
      if (eu.count < 2) eu.regions[eu.count] = el.region;
      ++eu.count;
    }
  fm.on_gamma.assign(fm.vertices.size(), 0);
  for (auto& [key, eu] : edge_use) {
    if (eu.count != 2 || eu.regions[0] == eu.regions[1]) continue;
    const int v0 = int(key >> 32), v1 = int(key & 0xffffffffu);
    fm.gamma_h.push_back({v0, v1});
    fm.on_gamma[v0] = fm.on_gamma[v1] = 1;
  }
  std::sort(fm.gamma_h.begin(), fm.gamma_h.end());

  // chain segments into polylines to order the interface nodes
  std::unordered_map<int, std::vector<int>> adj;  // node -> segment ids
  for (size_t s = 0; s < fm.gamma_h.size(); ++s) {
    adj[fm.gamma_h[s][0]].push_back(int(s));
    adj[fm.gamma_h[s][1]].push_back(int(s));
  }
  std::vector<char> used(fm.gamma_h.size(), 0);
  std::vector<char> listed(fm.vertices.size(), 0);
  auto walk = [&](int start_seg, int start_node) {
    std::vector<int> chain;
    int node = start_node;
    chain.push_back(node);
    int seg = start_seg;
    for (;;) {
      used[seg] = 1;
      node = fm.gamma_h[seg][0] == node ? fm.gamma_h[seg][1]
                                        : fm.gamma_h[seg][0];
      chain.push_back(node);
      int next = -1;
      for (int s2 : adj[node])
        if (!used[s2]) {
          next = s2;
          break;
        }
      if (next < 0) break;
      seg = next;
    }
    return chain;
  };
  auto take_chain = [&](int seg, int start) {
    for (int node : walk(seg, start))
      if (!listed[node]) {
        listed[node] = 1;
        fm.interface_nodes.push_back(node);
      }
  };
  // boundary-terminated polylines first, walked from their dead end
  for (size_t s = 0; s < fm.gamma_h.size(); ++s) {
    if (used[s]) continue;
    if (adj[fm.gamma_h[s][0]].size() == 1)
      take_chain(int(s), fm.gamma_h[s][0]);
    else if (adj[fm.gamma_h[s][1]].size() == 1)
      take_chain(int(s), fm.gamma_h[s][1]);
  }
  for (size_t s = 0; s < fm.gamma_h.size(); ++s)
    if (!used[s]) take_chain(int(s), fm.gamma_h[s][0]);
  return fm;
}

// Nested interface-adaptive meshes: level l starts from the uniform grid of
// resolution n0*2^l and regularly refines the interface zone L-l times, so
// every level carries the same fine layer along the interface.
struct MeshHierarchy {
  int n0 = 0;
  int L = 0;
  long long lattice_den = 0;
  std::vector<FittedMesh> levels;              // F_0 .. F_L
  std::vector<std::vector<char>> zone_masks;   // per level: uniform U_l zone
  int level_n(int l) const { return n0 << l; }
};

inline MeshHierarchy build_hierarchy(const LevelSet& ls, int n0, int L,
                                     double vertex_snap = 1e-12,
                                     int nscan = 8) {
  if (L < 0) throw Error("build_hierarchy: L must be >= 0");
  MeshHierarchy out;
  out.n0 = n0;
  out.L = L;
  out.lattice_den = (long long)(n0) << L;
  for (int l = 0; l <= L; ++l) {
    UnfittedMesh u = make_uniform_mesh(n0 << l, out.lattice_den);
    out.zone_masks.push_back(mark_interface_zone(u, ls, vertex_snap, nscan));
    for (int round = 0; round < L - l; ++round) {
      std::vector<char> zone = (round == 0)
                                   ? out.zone_masks.back()
                                   : mark_interface_zone(u, ls, vertex_snap,
                                                         nscan);
      u = refine_marked(u, zone);
    }
    out.levels.push_back(fit_mesh(u, ls, vertex_snap, nscan));
  }
  return out;
}

// Is p inside the closed refinement zone recorded for level l?
inline bool point_in_zone(const MeshHierarchy& hier, int l, Point2 p) {
  const int n = hier.level_n(l);
  const std::vector<char>& mask = hier.zone_masks[l];
  const double h = 2.0 / n;
  const double gx = (p.x + 1.0) / h, gy = (p.y + 1.0) / h;
  const double tol = 1e-12;
  for (int j = int(std::floor(gy)) - 1; j <= int(std::floor(gy)) + 1; ++j) {
    if (j < 0 || j >= n) continue;
    for (int i = int(std::floor(gx)) - 1; i <= int(std::floor(gx)) + 1; ++i) {
      if (i < 0 || i >= n) continue;
      const Point2 a{-1.0 + i * h, -1.0 + j * h};
      const Point2 b{a.x + h, a.y}, c{a.x + h, a.y + h}, d{a.x, a.y + h};
      if (mask[size_t(2) * (size_t(j) * n + i)] &&
          detail::point_in_closed_triangle(p, a, b, d, tol * h))
        return true;
      if (mask[size_t(2) * (size_t(j) * n + i) + 1] &&
          detail::point_in_closed_triangle(p, b, c, d, tol * h))
        return true;
    }
  }
  return false;
}

}  // namespace aifem
