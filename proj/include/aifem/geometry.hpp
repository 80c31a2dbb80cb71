#pragma once

// Level-set interface geometry: sign queries, robust edge/interface
// intersection, and the built-in interface catalogue.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace aifem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// The mesh does not resolve the interface (e.g. an edge is crossed twice);
// the caller must refine.
struct MeshTooCoarse : Error {
  explicit MeshTooCoarse(const std::string& msg) : Error(msg) {}
};

struct NonConvexQuad : Error {
  explicit NonConvexQuad(const std::string& msg) : Error(msg) {}
};

struct LookupError : Error {
  explicit LookupError(const std::string& msg) : Error(msg) {}
};

enum class RegionId : int {
  Region1 = 1,  // phi > 0
  Region2 = 2,  // phi < 0
};

enum class Side : int { Region1, Region2, OnInterface };

// Scalar field phi(x,y); the interface is its zero set, the sign selects
// the subdomain.
struct LevelSet {
  std::string name;
  std::map<std::string, double> params;
  std::function<double(double, double)> phi;

  double operator()(double x, double y) const {
    const double v = phi(x, y);
    if (!std::isfinite(v))
      throw Error("level set '" + name + "' not finite at (" +
                  std::to_string(x) + "," + std::to_string(y) + ")");
    return v;
  }
  double operator()(Point2 p) const { return (*this)(p.x, p.y); }
};

inline Side side(const LevelSet& ls, Point2 p, double snap_tol) {
  const double v = ls(p);
  if (std::abs(v) <= snap_tol) return Side::OnInterface;
  return v > 0 ? Side::Region1 : Side::Region2;
}

struct EdgeCut {
  double t;  // parameter in [0,1] along a->b
  Point2 p;
};

namespace detail {

// Bisect phi((1-t)a + t b) on a sign-change bracket down to |t1-t0| <= tol.
inline double bisect_root(const LevelSet& ls, Point2 a, Point2 b, double t0,
                          double t1, double s0, double tol) {
  for (int it = 0; it < 200 && (t1 - t0) > tol; ++it) {
    const double tm = 0.5 * (t0 + t1);
    const double sm = ls((1.0 - tm) * a + tm * b);
    if (sm == 0.0) return tm;
    if ((s0 > 0) == (sm > 0)) {
      t0 = tm;
      s0 = sm;
    } else {
      t1 = tm;
    }
  }
  return 0.5 * (t0 + t1);
}

}  // namespace detail

// Roots of t -> phi((1-t)a + t b), located by sign-change bracketing on a
// uniform scan of [0,1] followed by bisection.  Roots within snap distance of
// an endpoint are snapped and reported with t in {0,1}.  More than two roots
// means the mesh scale cannot represent the interface here.
inline std::vector<EdgeCut> edge_intersections(const LevelSet& ls, Point2 a,
                                               Point2 b, double tol = 1e-12,
                                               int nscan = 8,
                                               double endpoint_snap = 1e-9) {
  if (a.x == b.x && a.y == b.y) throw Error("edge_intersections: a == b");
  std::vector<double> s(nscan + 1);
  for (int k = 0; k <= nscan; ++k) {
    const double t = double(k) / nscan;
    s[k] = ls((1.0 - t) * a + t * b);
  }
  std::vector<double> roots;
  // a maximal run of exact-zero samples is one root (an edge lying on the
  // zero set contributes its endpoints)
  for (int k = 0; k <= nscan;) {
    if (s[k] != 0.0) {
      ++k;
      continue;
    }
    int j = k;
    while (j < nscan && s[j + 1] == 0.0) ++j;
    if (k == 0) roots.push_back(0.0);
    if (j == nscan) roots.push_back(1.0);
    if (k > 0 && j < nscan)
      roots.push_back(0.5 * (k + j) / nscan);
    k = j + 1;
  }
  for (int k = 0; k < nscan; ++k) {
    if (s[k] == 0.0 || s[k + 1] == 0.0) continue;
    if ((s[k] > 0) != (s[k + 1] > 0))
      roots.push_back(detail::bisect_root(ls, a, b, double(k) / nscan,
                                          double(k + 1) / nscan, s[k], tol));
  }
  std::sort(roots.begin(), roots.end());
  std::vector<EdgeCut> cuts;
  for (double t : roots) {
    if (t < endpoint_snap) t = 0.0;
    if (t > 1.0 - endpoint_snap) t = 1.0;
    if (!cuts.empty() && std::abs(cuts.back().t - t) <= endpoint_snap) continue;
    cuts.push_back({t, (1.0 - t) * a + t * b});
  }
  if (cuts.size() > 2)
    throw MeshTooCoarse("edge crosses the interface " +
                        std::to_string(cuts.size()) + " times");
  return cuts;
}

inline LevelSet make_circle(double r = 0.5) {
  return {"circle",
          {{"r", r}},
          [r](double x, double y) { return x * x + y * y - r * r; }};
}

inline LevelSet make_cardioid() {
  return {"cardioid",
          {},
          [](double x, double y) {
            const double xs = x + 0.5;
            const double r2 = xs * xs + y * y;
            const double w = r2 - 0.5 * xs;
            return w * w - 0.25 * r2;
          }};
}

// Two disjoint interfaces: a five-star around (-0.5,0) with radius
// 0.3 + 0.09 sin(5*theta), and a circle of radius 0.3 around (0.5,0).
// theta is measured from the star's own center.
inline LevelSet make_fivestar_circle() {
  return {"fivestar-circle",
          {},
          [](double x, double y) {
            const double rho1 = std::hypot(x + 0.5, y);
            const double theta = std::atan2(y, x + 0.5);
            const double star = rho1 - 0.3 - 0.09 * std::sin(5.0 * theta);
            const double rho2 = std::hypot(x - 0.5, y);
            const double circ = rho2 * rho2 - 0.09;
            return star * circ;
          }};
}

// Name -> factory registry.  User-defined level sets are registered through
// the same interface (see expression.hpp for string-defined ones).
class LevelSetRegistry {
 public:
  using Factory =
      std::function<LevelSet(const std::map<std::string, double>&)>;

  void add(const std::string& name, Factory f) { factories_[name] = f; }

  LevelSet lookup(const std::string& name,
                  const std::map<std::string, double>& params = {}) const {
    auto it = factories_.find(name);
    if (it == factories_.end())
      throw LookupError("unknown level set '" + name + "'");
    return it->second(params);
  }

  bool contains(const std::string& name) const {
    return factories_.count(name) > 0;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (auto& kv : factories_) out.push_back(kv.first);
    return out;
  }

 private:
  std::map<std::string, Factory> factories_;
};

inline LevelSetRegistry builtin_levelsets() {
  LevelSetRegistry reg;
  reg.add("circle", [](const std::map<std::string, double>& p) {
    const double r = p.count("r") ? p.at("r") : 0.5;
    return make_circle(r);
  });
  reg.add("cardioid",
          [](const std::map<std::string, double>&) { return make_cardioid(); });
  reg.add("fivestar-circle", [](const std::map<std::string, double>&) {
    return make_fivestar_circle();
  });
  return reg;
}

// Probabilistic sanity check: phi finite on a sample grid and its zero set
// has no plateau of exact zeros.
inline bool validate_levelset(const LevelSet& ls, double x0 = -1.0,
                              double x1 = 1.0, double y0 = -1.0,
                              double y1 = 1.0, int n = 101,
                              std::string* why = nullptr) {
  long zeros = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = x0 + (x1 - x0) * i / (n - 1);
      const double y = y0 + (y1 - y0) * j / (n - 1);
      const double v = ls.phi(x, y);
      if (!std::isfinite(v)) {
        if (why) *why = "phi not finite at sample point";
        return false;
      }
      if (v == 0.0) ++zeros;
    }
  if (zeros > n) {  // a genuine curve meets a grid in O(n) points at most
    if (why) *why = "zero plateau detected on sample grid";
    return false;
  }
  return true;
}

}  // namespace aifem
