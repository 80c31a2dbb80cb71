#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "aifem/meshgen.hpp"

using namespace aifem;

namespace {

// single-triangle mesh helper for the hand-constructed splitting cases
UnfittedMesh one_triangle(Point2 a, Point2 b, Point2 c) {
  UnfittedMesh m;
  m.n = 2;
  m.lattice_den = 2;
  m.h = 1.0;
  m.vertices = {a, b, c};
  m.lattice = {{kNoLattice, kNoLattice},
               {kNoLattice, kNoLattice},
               {kNoLattice, kNoLattice}};
  m.on_boundary = {0, 0, 0};
  m.triangles = {{0, 1, 2}};
  m.is_green = {0};
  return m;
}

bool has_element(const FittedMesh& m, ElementKind kind,
                 std::vector<Point2> pts) {
  for (const Element& el : m.elements) {
    if (el.kind != kind) continue;
    const int n = el.size();
    for (int rot = 0; rot < n; ++rot) {
      bool ok = true;
      for (int k = 0; k < n && ok; ++k)
        ok = dist(m.vertices[el.nodes[(rot + k) % n]], pts[k]) < 1e-9;
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("uniform mesh counts and area") {
  auto m2 = make_uniform_mesh(2);
  CHECK(m2.vertices.size() == 9);
  CHECK(m2.triangles.size() == 8);
  CHECK(m2.h == 1.0);
  auto m4 = make_uniform_mesh(4);
  CHECK(m4.vertices.size() == 25);
  CHECK(m4.triangles.size() == 32);
  for (int n : {2, 4, 8, 12}) {
    auto m = make_uniform_mesh(n);
    double area = 0.0;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
      CHECK(m.tri_area(int(t)) > 0.0);
      area += m.tri_area(int(t));
    }
    CHECK(area == Catch::Approx(4.0).epsilon(1e-13));
  }
}

TEST_CASE("detect_interface_elements on the circle, n=8") {
  auto m = make_uniform_mesh(8);
  auto ls = make_circle(0.5);
  auto ids = detect_interface_elements(m, ls);
  REQUIRE(!ids.empty());

  // the triangle (0.25,0.25),(0.5,0.25),(0.25,0.5) must be flagged
  bool found = false;
  for (int t : ids) {
    const auto& tr = m.triangles[t];
    if (dist(m.vertices[tr[0]], {0.25, 0.25}) < 1e-12 &&
        dist(m.vertices[tr[1]], {0.5, 0.25}) < 1e-12 &&
        dist(m.vertices[tr[2]], {0.25, 0.5}) < 1e-12)
      found = true;
  }
  CHECK(found);

  // all-positive far-away triangles are never flagged
  std::set<int> idset(ids.begin(), ids.end());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    bool far = true;
    for (int k = 0; k < 3; ++k)
      if (ls(m.vertices[tr[k]]) <= 0.1) far = false;
    if (far) CHECK(idset.count(int(t)) == 0);
  }
}

TEST_CASE("no interface elements when the zero set misses the domain") {
  auto m = make_uniform_mesh(4);
  LevelSet far{"far", {}, [](double x, double y) {
                 return (x - 5) * (x - 5) + y * y - 0.25;
               }};
  CHECK(detect_interface_elements(m, far).empty());
}

TEST_CASE("fit splits a triangle cut on two edges into tri + quad") {
  auto m = one_triangle({0, 0}, {1, 0}, {0, 1});
  LevelSet line{"line", {}, [](double x, double) { return x - 0.5; }};
  auto fm = fit_mesh(m, line);
  REQUIRE(fm.elements.size() == 2);
  CHECK(has_element(fm, ElementKind::Quad4,
                    {{0, 0}, {0.5, 0}, {0.5, 0.5}, {0, 1}}));
  CHECK(has_element(fm, ElementKind::Tri3, {{0.5, 0}, {1, 0}, {0.5, 0.5}}));
  // x < 0.5 is the phi < 0 side
  for (const Element& el : fm.elements)
    CHECK(el.region == (el.kind == ElementKind::Quad4 ? RegionId::Region2
                                                      : RegionId::Region1));
  REQUIRE(fm.gamma_h.size() == 1);
  CHECK(fm.interface_nodes.size() == 2);
}

TEST_CASE("fit splits a vertex-to-edge chord into two triangles") {
  auto m = one_triangle({0, 0}, {1, 0}, {0, 1});
  LevelSet diag{"diag", {}, [](double x, double y) { return y - x; }};
  auto fm = fit_mesh(m, diag);
  REQUIRE(fm.elements.size() == 2);
  CHECK(has_element(fm, ElementKind::Tri3, {{0, 0}, {1, 0}, {0.5, 0.5}}));
  CHECK(has_element(fm, ElementKind::Tri3, {{0, 0}, {0.5, 0.5}, {0, 1}}));
}

TEST_CASE("fit with no interface copies the mesh") {
  auto m = make_uniform_mesh(4);
  LevelSet pos{"pos", {}, [](double, double) { return 1.0; }};
  auto fm = fit_mesh(m, pos);
  CHECK(fm.elements.size() == m.triangles.size());
  for (const Element& el : fm.elements) {
    CHECK(el.kind == ElementKind::Tri3);
    CHECK(el.region == RegionId::Region1);
  }
  CHECK(fm.gamma_h.empty());
  auto [a1, a2] = region_areas(fm);
  CHECK(a1 == Catch::Approx(4.0));
  CHECK(a2 == 0.0);
}

TEST_CASE("grid-aligned interface x=0 is resolved by edges") {
  auto m = make_uniform_mesh(8);
  LevelSet plane{"plane", {}, [](double x, double) { return x; }};
  auto fm = fit_mesh(m, plane);
  CHECK(fm.elements.size() == m.triangles.size());  // nothing is split
  auto [a1, a2] = region_areas(fm);
  CHECK(a1 == Catch::Approx(2.0).epsilon(1e-13));
  CHECK(a2 == Catch::Approx(2.0).epsilon(1e-13));
  CHECK(fm.gamma_h.size() == 8);  // the x=0 gridline
  for (auto seg : fm.gamma_h) {
    CHECK(std::abs(fm.vertices[seg[0]].x) < 1e-14);
    CHECK(std::abs(fm.vertices[seg[1]].x) < 1e-14);
  }
}

TEST_CASE("fitted circle mesh: conformity and interface invariants") {
  auto ls = make_circle(0.5);
  for (int n : {8, 16, 32}) {
    auto m = make_uniform_mesh(n);
    auto fm = fit_mesh(m, ls);

    // tiling
    double area = 0.0;
    for (size_t e = 0; e < fm.elements.size(); ++e) {
      CHECK(fm.element_area(int(e)) > 0.0);
      area += fm.element_area(int(e));
    }
    CHECK(area == Catch::Approx(4.0).epsilon(1e-12));

    // every interface node is on the zero set
    REQUIRE(!fm.interface_nodes.empty());
    for (int v : fm.interface_nodes)
      CHECK(std::abs(ls(fm.vertices[v])) < 1e-9);

    // interior edges shared by exactly two elements; gamma edges separate
    // region tags; no hanging nodes on a fitted uniform mesh
    std::map<std::pair<int, int>, std::vector<int>> uses;
    for (size_t e = 0; e < fm.elements.size(); ++e) {
      const Element& el = fm.elements[e];
      for (int k = 0; k < el.size(); ++k) {
        int u = el.nodes[k], v = el.nodes[(k + 1) % el.size()];
        if (u > v) std::swap(u, v);
        uses[{u, v}].push_back(int(e));
      }
    }
    for (auto& [edge, els] : uses) {
      REQUIRE(els.size() <= 2);
      if (els.size() == 1) {
        CHECK(fm.on_boundary[edge.first]);
        CHECK(fm.on_boundary[edge.second]);
      }
    }
    for (auto seg : fm.gamma_h) {
      int u = seg[0], v = seg[1];
      if (u > v) std::swap(u, v);
      auto& els = uses[{u, v}];
      REQUIRE(els.size() == 2);
      CHECK(fm.elements[els[0]].region != fm.elements[els[1]].region);
    }

    // gamma chains are closed: every interface node has segment degree 2
    std::map<int, int> degree;
    for (auto seg : fm.gamma_h) {
      degree[seg[0]]++;
      degree[seg[1]]++;
    }
    for (auto [node, d] : degree) CHECK(d == 2);

    // polyline ordering lists every interface node exactly once
    CHECK(fm.interface_nodes.size() == degree.size());
  }
}

TEST_CASE("region areas converge to the circle area quadratically") {
  auto ls = make_circle(0.5);
  const double exact = M_PI * 0.25;
  double e_prev = 0.0;
  for (int n : {16, 32}) {
    auto fm = fit_mesh(make_uniform_mesh(n), ls);
    auto [a1, a2] = region_areas(fm);
    CHECK(a1 + a2 == Catch::Approx(4.0).epsilon(1e-12));
    const double err = std::abs(a2 - exact);
    if (e_prev > 0.0) CHECK(e_prev / err >= 3.0);
    e_prev = err;
  }
}

TEST_CASE("local refinement with red/green closure") {
  auto m = make_uniform_mesh(4, 8);
  std::vector<char> marked(m.triangles.size(), 0);
  marked[0] = 1;  // a single corner triangle
  auto r = refine_marked(m, marked);

  double area = 0.0;
  for (size_t t = 0; t < r.triangles.size(); ++t) {
    CHECK(r.tri_area(int(t)) > 0.0);
    area += r.tri_area(int(t));
  }
  CHECK(area == Catch::Approx(4.0).epsilon(1e-13));

  // conforming: no hanging nodes anywhere
  std::map<std::pair<int, int>, int> edge_count;
  for (auto& tr : r.triangles)
    for (int k = 0; k < 3; ++k) {
      int u = tr[k], v = tr[(k + 1) % 3];
      if (u > v) std::swap(u, v);
      edge_count[{u, v}]++;
    }
  for (auto& [edge, c] : edge_count) {
    CHECK(c <= 2);
    if (c == 1) {
      CHECK(r.on_boundary[edge.first]);
      CHECK(r.on_boundary[edge.second]);
    }
  }
  bool any_green = false;
  for (char g : r.is_green) any_green |= (g != 0);
  CHECK(any_green);
}

TEST_CASE("hierarchy: nestedness and shared interface layer") {
  auto ls = make_circle(0.5);
  auto hier = build_hierarchy(ls, 8, 1);
  REQUIRE(hier.levels.size() == 2);
  const FittedMesh& f0 = hier.levels[0];
  const FittedMesh& f1 = hier.levels[1];

  // vertex nestedness
  std::unordered_set<VertexKey, VertexKeyHash> fine;
  for (size_t v = 0; v < f1.vertices.size(); ++v)
    fine.insert(vertex_key(f1.lattice[v], f1.vertices[v]));
  for (size_t v = 0; v < f0.vertices.size(); ++v)
    CHECK(fine.count(vertex_key(f0.lattice[v], f0.vertices[v])) == 1);

  // coarse level is strictly smaller but carries the same interface polyline
  CHECK(f0.vertices.size() < f1.vertices.size());
  std::set<std::pair<long long, long long>> g0, g1;
  auto keypt = [](Point2 p) {
    return std::pair<long long, long long>{llround(p.x * (1ll << 40)),
                                           llround(p.y * (1ll << 40))};
  };
  for (int v : f0.interface_nodes) g0.insert(keypt(f0.vertices[v]));
  for (int v : f1.interface_nodes) g1.insert(keypt(f1.vertices[v]));
  CHECK(g0 == g1);

  // interface-touching fine elements lie inside the level-0 zone
  for (size_t e = 0; e < f1.elements.size(); ++e) {
    const Element& el = f1.elements[e];
    bool gamma_touch = false;
    for (int k = 0; k < el.size(); ++k)
      gamma_touch |= !!f1.on_gamma[el.nodes[k]];
    if (gamma_touch) CHECK(point_in_zone(hier, 0, f1.element_centroid(int(e))));
  }

  double a0 = 0.0, a1 = 0.0;
  for (size_t e = 0; e < f0.elements.size(); ++e) a0 += f0.element_area(int(e));
  for (size_t e = 0; e < f1.elements.size(); ++e) a1 += f1.element_area(int(e));
  CHECK(a0 == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(a1 == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("hierarchy: L=0 and empty interface degenerate correctly") {
  auto ls = make_circle(0.5);
  auto h0 = build_hierarchy(ls, 8, 0);
  CHECK(h0.levels.size() == 1);

  LevelSet far{"far", {}, [](double x, double y) {
                 return (x - 5) * (x - 5) + y * y - 0.25;
               }};
  auto hier = build_hierarchy(far, 4, 2);
  for (int l = 0; l <= 2; ++l) {
    const int n = hier.level_n(l);
    CHECK(hier.levels[l].elements.size() == size_t(2) * n * n);
    for (char z : hier.zone_masks[l]) CHECK(!z);
  }
}

TEST_CASE("all three builtin interfaces mesh at production sizes") {
  auto reg = builtin_levelsets();
  for (auto name : {"circle", "cardioid"}) {
    for (int n : {8, 16, 32, 64}) {
      auto fm = fit_mesh(make_uniform_mesh(n), reg.lookup(name));
      CHECK(!fm.interface_nodes.empty());
    }
  }
  // cardioid region area converges to 3*pi/8
  auto c64 = fit_mesh(make_uniform_mesh(64), reg.lookup("cardioid"));
  CHECK(region_areas(c64).second == Catch::Approx(3 * M_PI / 8).margin(1e-3));

  // the five-star tips have curvature radius ~0.06, so the star resolves
  // only from n=128 on; coarser grids must refuse rather than mis-fit
  CHECK_THROWS_AS(fit_mesh(make_uniform_mesh(64),
                           reg.lookup("fivestar-circle")),
                  MeshTooCoarse);
  for (int n : {128, 256}) {
    auto fm = fit_mesh(make_uniform_mesh(n), reg.lookup("fivestar-circle"));
    CHECK(!fm.interface_nodes.empty());
    auto [a1, a2] = region_areas(fm);
    CHECK(a1 + a2 == Catch::Approx(4.0).epsilon(1e-12));
    // star area + circle area
    const double exact = M_PI * (0.09 + 0.5 * 0.09 * 0.09) + M_PI * 0.09;
    CHECK(a2 == Catch::Approx(exact).margin(2e-3));
  }

  // hierarchies only fit at the fine scale; the star builds from n0=16
  auto hier = build_hierarchy(reg.lookup("fivestar-circle"), 16, 3);
  CHECK(hier.levels.size() == 4);
  for (auto& f : hier.levels) CHECK(!f.interface_nodes.empty());
}
