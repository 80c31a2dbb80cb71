#pragma once

// P1/Q1 finite elements on the fitted mixed mesh: shape functions, local
// stiffness, assembly of the discrete weak form with non-homogeneous jump
// data, Dirichlet elimination, and two-valued solution reconstruction.

#include <Eigen/Dense>

#include "aifem/linalg.hpp"
#include "aifem/mesh.hpp"
#include "aifem/quadrature.hpp"

namespace aifem {

struct DofMap {
  std::vector<int> vertex_to_dof;  // -1 on the Dirichlet boundary
  std::vector<int> dof_to_vertex;
  int n_dofs = 0;
  std::vector<int> interface_dofs;  // dofs of the interface nodes {O_i}
};

inline DofMap build_dofmap(const FittedMesh& m) {
  DofMap d;
  d.vertex_to_dof.assign(m.vertices.size(), -1);
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    if (m.on_boundary[v]) continue;
    d.vertex_to_dof[v] = d.n_dofs++;
    d.dof_to_vertex.push_back(int(v));
  }
  for (int v : m.interface_nodes)
    if (d.vertex_to_dof[v] >= 0) d.interface_dofs.push_back(d.vertex_to_dof[v]);
  return d;
}

enum class GMode { Nodal, Exact };

using ScalarField = std::function<double(double, double)>;

struct ProblemData {
  double beta1 = 1.0;
  double beta2 = 1.0;
  ScalarField f;          // volume source (null = 0)
  ScalarField g;          // flux jump on the interface (null = 0)
  ScalarField q;          // solution jump on the interface (null = 0)
  GMode g_mode = GMode::Nodal;
  ScalarField dirichlet;  // boundary values (null = homogeneous)

  double beta(RegionId r) const {
    return r == RegionId::Region1 ? beta1 : beta2;
  }
};

// ---- shape functions ----

// bilinear image of the unit square; corners map to the quad's corners
inline Point2 q1_map(const std::array<Point2, 4>& qp, Point2 ref) {
  const double x = ref.x, y = ref.y;
  const double s1 = (1 - x) * (1 - y), s2 = x * (1 - y), s3 = x * y,
               s4 = (1 - x) * y;
  return s1 * qp[0] + s2 * qp[1] + s3 * qp[2] + s4 * qp[3];
}

inline std::array<double, 4> q1_shape(Point2 ref) {
  const double x = ref.x, y = ref.y;
  return {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
}

inline std::array<Point2, 4> q1_shape_grad_ref(Point2 ref) {
  const double x = ref.x, y = ref.y;
  return {Point2{-(1 - y), -(1 - x)}, Point2{(1 - y), -x}, Point2{y, x},
          Point2{-y, (1 - x)}};
}

inline Eigen::Matrix2d q1_jacobian(const std::array<Point2, 4>& qp,
                                   Point2 ref) {
  const auto g = q1_shape_grad_ref(ref);
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 4; ++i) {
    J(0, 0) += qp[i].x * g[i].x;
    J(0, 1) += qp[i].x * g[i].y;
    J(1, 0) += qp[i].y * g[i].x;
    J(1, 1) += qp[i].y * g[i].y;
  }
  return J;
}

// constant barycentric gradients; exact stiffness
struct TriGeometry {
  Point2 grad[3];
  double area;
};

inline TriGeometry tri_geometry(Point2 a, Point2 b, Point2 c) {
  const double twoA = cross(b - a, c - a);
  if (twoA <= 0.0) throw Error("tri_geometry: non-positive area");
  auto perp = [](Point2 v) { return Point2{-v.y, v.x}; };
  TriGeometry g;
  g.area = 0.5 * twoA;
  g.grad[0] = (1.0 / twoA) * perp(c - b);
  g.grad[1] = (1.0 / twoA) * perp(a - c);
  g.grad[2] = (1.0 / twoA) * perp(b - a);
  return g;
}

inline Eigen::Matrix3d local_stiffness_tri(Point2 a, Point2 b, Point2 c,
                                           double beta) {
  const TriGeometry g = tri_geometry(a, b, c);
  Eigen::Matrix3d K;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      K(i, j) = beta * g.area * dot(g.grad[i], g.grad[j]);
  return K;
}

inline Eigen::Matrix4d local_stiffness_quad(const std::array<Point2, 4>& qp,
                                            double beta,
                                            const QuadRule& rule) {
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const Point2 ref = rule.points[q];
    const Eigen::Matrix2d J = q1_jacobian(qp, ref);
    const double detJ = J.determinant();
    if (detJ <= 0.0)
      throw NonConvexQuad("local_stiffness_quad: non-positive Jacobian");
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    const auto gr = q1_shape_grad_ref(ref);
    Eigen::Vector2d g[4];
    for (int i = 0; i < 4; ++i)
      g[i] = Jit * Eigen::Vector2d(gr[i].x, gr[i].y);
    const double w = rule.weights[q] * detJ * beta;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) K(i, j) += w * g[i].dot(g[j]);
  }
  return K;
}

// ---- discrete fields ----

// Nodal coefficients plus the interface jump layer: gamma_offset is added
// to the nodal value on Region2-side elements only, realizing the two-valued
// trace along the interface.
struct DiscreteField {
  const FittedMesh* mesh = nullptr;
  std::vector<double> values;        // per vertex
  std::vector<double> gamma_offset;  // per vertex, Region2 side only

  double coeff(const Element& el, int k) const {
    const int v = el.nodes[k];
    double c = values[v];
    if (el.region == RegionId::Region2 && !gamma_offset.empty())
      c += gamma_offset[v];
    return c;
  }

  // jump [[u_h]] = (side 1) - (side 2) at a vertex
  double jump(int vertex) const {
    return gamma_offset.empty() ? 0.0 : -gamma_offset[vertex];
  }
};

inline DiscreteField make_field(const FittedMesh& m) {
  DiscreteField f;
  f.mesh = &m;
  f.values.assign(m.vertices.size(), 0.0);
  return f;
}

// z_{h,Gamma}: value -q(O_i) at each interface node, active only on the
// Region2 side; identically zero elsewhere.
inline DiscreteField build_z_gamma(const FittedMesh& m, const ScalarField& q) {
  DiscreteField z = make_field(m);
  z.gamma_offset.assign(m.vertices.size(), 0.0);
  if (q)
    for (int v : m.interface_nodes)
      z.gamma_offset[v] = -q(m.vertices[v].x, m.vertices[v].y);
  return z;
}

// u_h = ubar + z_gamma (coefficientwise; the result is two-valued at
// interface nodes)
inline DiscreteField reconstruct_uh(const DiscreteField& ubar,
                                    const DiscreteField& zgamma) {
  if (ubar.mesh != zgamma.mesh)
    throw Error("reconstruct_uh: fields live on different meshes");
  DiscreteField u = ubar;
  for (size_t v = 0; v < u.values.size(); ++v)
    u.values[v] += zgamma.values.empty() ? 0.0 : zgamma.values[v];
  if (!zgamma.gamma_offset.empty()) {
    if (u.gamma_offset.empty()) u.gamma_offset.assign(u.values.size(), 0.0);
    for (size_t v = 0; v < u.values.size(); ++v)
      u.gamma_offset[v] += zgamma.gamma_offset[v];
  }
  return u;
}

inline DiscreteField field_from_solution(const FittedMesh& m, const DofMap& d,
                                         const Vector& x,
                                         const ScalarField& dirichlet = {}) {
  DiscreteField f = make_field(m);
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    const int dof = d.vertex_to_dof[v];
    if (dof >= 0)
      f.values[v] = x[dof];
    else if (dirichlet)
      f.values[v] = dirichlet(m.vertices[v].x, m.vertices[v].y);
  }
  return f;
}

// value and gradient of a field at a reference point of one element
struct FieldSample {
  double value = 0.0;
  Point2 grad{0.0, 0.0};
  Point2 x{0.0, 0.0};
  double jacobian = 0.0;  // volume element at the sample point
};

inline FieldSample sample_field(const DiscreteField& f, int elem, Point2 ref) {
  const FittedMesh& m = *f.mesh;
  const Element& el = m.elements[elem];
  FieldSample s;
  if (el.kind == ElementKind::Tri3) {
    const Point2 a = m.vertices[el.nodes[0]], b = m.vertices[el.nodes[1]],
                 c = m.vertices[el.nodes[2]];
    const TriGeometry g = tri_geometry(a, b, c);
    const double l[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
    s.x = l[0] * a + l[1] * b + l[2] * c;
    s.jacobian = 2.0 * g.area;
    for (int k = 0; k < 3; ++k) {
      const double ck = f.coeff(el, k);
      s.value += ck * l[k];
      s.grad = s.grad + ck * g.grad[k];
    }
  } else {
    const std::array<Point2, 4> qp = {
        m.vertices[el.nodes[0]], m.vertices[el.nodes[1]],
        m.vertices[el.nodes[2]], m.vertices[el.nodes[3]]};
    const auto sh = q1_shape(ref);
    const auto gr = q1_shape_grad_ref(ref);
    const Eigen::Matrix2d J = q1_jacobian(qp, ref);
    s.jacobian = J.determinant();
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    s.x = q1_map(qp, ref);
    Eigen::Vector2d acc(0, 0);
    for (int k = 0; k < 4; ++k) {
      const double ck = f.coeff(el, k);
      s.value += ck * sh[k];
      acc += ck * (Jit * Eigen::Vector2d(gr[k].x, gr[k].y));
    }
    s.grad = {acc[0], acc[1]};
  }
  return s;
}

// ---- assembly ----

struct AssembledSystem {
  SparseOperator A;
  Vector b;
};

// Stiffness from per-element local matrices (beta by region tag); load from
// the volume source, the interface line term, and the stiffness action of
// z_{h,Gamma} on Region2 elements; Dirichlet dofs eliminated symmetrically.
inline AssembledSystem assemble(const FittedMesh& m, const ProblemData& data,
                                const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.elements.size() * 12);
  Vector b = Vector::Zero(dofs.n_dofs);

  const DiscreteField z = build_z_gamma(m, data.q);
  const QuadRule& tri_load = tri_rule_deg2();
  const QuadRule& quad_stiff = square_rule_2x2();
  const QuadRule& quad_load = square_rule_3x3();

  auto scatter = [&](const Element& el, const double* K, const double* bl,
                     int n) {
    for (int i = 0; i < n; ++i) {
      const int di = dofs.vertex_to_dof[el.nodes[i]];
      if (di < 0) continue;
      b[di] += bl[i];
      for (int j = 0; j < n; ++j) {
        const int dj = dofs.vertex_to_dof[el.nodes[j]];
        if (dj >= 0) trip.emplace_back(di, dj, K[i * n + j]);
      }
    }
  };

  for (const Element& el : m.elements) {
    const double beta = data.beta(el.region);
    const int n = el.size();
    double K[16] = {0}, bl[4] = {0}, zloc[4] = {0}, dloc[4] = {0};
    bool has_z = false, has_d = false;

    if (el.kind == ElementKind::Tri3) {
      const Point2 a = m.vertices[el.nodes[0]], bb = m.vertices[el.nodes[1]],
                   c = m.vertices[el.nodes[2]];
      const Eigen::Matrix3d Kt = local_stiffness_tri(a, bb, c, beta);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) K[i * 3 + j] = Kt(i, j);
      if (data.f) {
        const TriGeometry g = tri_geometry(a, bb, c);
        for (size_t qp = 0; qp < tri_load.points.size(); ++qp) {
          const Point2 r = tri_load.points[qp];
          const double l[3] = {1.0 - r.x - r.y, r.x, r.y};
          const Point2 x = l[0] * a + l[1] * bb + l[2] * c;
          const double w =
              tri_load.weights[qp] * 2.0 * g.area * data.f(x.x, x.y);
          for (int i = 0; i < 3; ++i) bl[i] += w * l[i];
        }
      }
    } else {
      const std::array<Point2, 4> qp = {
          m.vertices[el.nodes[0]], m.vertices[el.nodes[1]],
          m.vertices[el.nodes[2]], m.vertices[el.nodes[3]]};
      const Eigen::Matrix4d Kq = local_stiffness_quad(qp, beta, quad_stiff);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) K[i * 4 + j] = Kq(i, j);
      if (data.f) {
        for (size_t k = 0; k < quad_load.points.size(); ++k) {
          const Point2 r = quad_load.points[k];
          const auto sh = q1_shape(r);
          const double detJ = q1_jacobian(qp, r).determinant();
          const Point2 x = q1_map(qp, r);
          const double w = quad_load.weights[k] * detJ * data.f(x.x, x.y);
          for (int i = 0; i < 4; ++i) bl[i] += w * sh[i];
        }
      }
    }

    // load contribution -beta2 grad z_Gamma . grad v over Region2 elements
    if (data.q && el.region == RegionId::Region2) {
      for (int k = 0; k < n; ++k) {
        zloc[k] = z.gamma_offset[el.nodes[k]];
        has_z |= zloc[k] != 0.0;
      }
    }
    // inhomogeneous Dirichlet elimination
    if (data.dirichlet) {
      for (int k = 0; k < n; ++k)
        if (dofs.vertex_to_dof[el.nodes[k]] < 0) {
          const Point2 p = m.vertices[el.nodes[k]];
          dloc[k] = data.dirichlet(p.x, p.y);
          has_d |= dloc[k] != 0.0;
        }
    }
    if (has_z || has_d)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          bl[i] -= K[i * n + j] * (zloc[j] + dloc[j]);

    scatter(el, K, bl, n);
  }

  // interface line term: only the two endpoint traces are nonzero on a
  // segment, and they are linear along it
  if (data.g) {
    const Rule1D& gr = gauss1d(3);
    for (auto seg : m.gamma_h) {
      const Point2 a = m.vertices[seg[0]], bpt = m.vertices[seg[1]];
      const double len = dist(a, bpt);
      const double ga = data.g(a.x, a.y), gb = data.g(bpt.x, bpt.y);
      for (size_t k = 0; k < gr.points.size(); ++k) {
        const double t = gr.points[k];
        double gval;
        if (data.g_mode == GMode::Nodal) {
          gval = (1.0 - t) * ga + t * gb;
        } else {
          const Point2 x = (1.0 - t) * a + t * bpt;
          gval = data.g(x.x, x.y);
        }
        const double w = gr.weights[k] * len * gval;
        const int da = dofs.vertex_to_dof[seg[0]],
                  db = dofs.vertex_to_dof[seg[1]];
        if (da >= 0) b[da] += w * (1.0 - t);
        if (db >= 0) b[db] += w * t;
      }
    }
  }

  AssembledSystem sys;
  sys.A.resize(dofs.n_dofs, dofs.n_dofs);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  sys.b = std::move(b);
  return sys;
}

}  // namespace aifem
