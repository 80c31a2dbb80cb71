#pragma once

// Interface-adaptive geometric multigrid: per-level dof partition into an
// interface block (solved exactly) and a smoothing block (point
// Gauss-Seidel), nodal-interpolation prolongations, Galerkin-coarsened
// operators, the V-cycle, and the outer stationary iteration.

#include <memory>

#include "aifem/fem.hpp"
#include "aifem/meshgen.hpp"

namespace aifem {

struct MGLevel {
  int n_dofs = 0;
  SparseOperator A;
  SparseOperator P;  // prolongation from the next-coarser level (empty at 0)
  std::vector<int> interface_dofs;  // ascending; exact subspace solve
  std::vector<int> smooth_dofs;     // ascending; forward/backward GS
  std::vector<int> block_pos;       // dof -> index inside the block, or -1
  std::shared_ptr<DirectSolver> block_solver;  // cached factorization
  std::shared_ptr<DirectSolver> coarse_solver;  // level 0 only
};

struct MGConfig {
  double stopping_tol = std::exp(-20.0);
  int max_iters = 100;
  int pre_sweeps = 2;   // smoother applications before coarse correction
  int post_sweeps = 2;  // adjoint applications after
};

struct SolveStats {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;  // ||b - Ax||_2 per iteration, incl. start
  double contraction = 0.0;       // mean per-iteration residual reduction
};

namespace detail {

// prolongation between consecutive fitted meshes: unit entries at shared
// vertices, midpoint averages at the new far-field vertices
inline SparseOperator build_prolongation(const FittedMesh& coarse,
                                         const DofMap& cd,
                                         const FittedMesh& fine,
                                         const DofMap& fd) {
  std::unordered_map<VertexKey, int, VertexKeyHash> cvert;
  cvert.reserve(coarse.vertices.size() * 2);
  for (size_t v = 0; v < coarse.vertices.size(); ++v)
    cvert.emplace(vertex_key(coarse.lattice[v], coarse.vertices[v]), int(v));

  // midpoints of coarse lattice edges -> endpoint pair
  std::unordered_map<uint64_t, std::array<int, 2>> cmid;
  for (const Element& el : coarse.elements)
    for (int k = 0; k < el.size(); ++k) {
      const int a = el.nodes[k], b = el.nodes[(k + 1) % el.size()];
      const auto &la = coarse.lattice[a], &lb = coarse.lattice[b];
      if (la[0] == kNoLattice || lb[0] == kNoLattice) continue;
      if (((la[0] + lb[0]) | (la[1] + lb[1])) & 1) continue;
      cmid.emplace(lattice_key((la[0] + lb[0]) / 2, (la[1] + lb[1]) / 2),
                   std::array<int, 2>{a, b});
    }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(fd.n_dofs * 2);
  for (int dof = 0; dof < fd.n_dofs; ++dof) {
    const int v = fd.dof_to_vertex[dof];
    const auto key = vertex_key(fine.lattice[v], fine.vertices[v]);
    auto it = cvert.find(key);
    if (it != cvert.end()) {
      const int cdof = cd.vertex_to_dof[it->second];
      if (cdof >= 0) trip.emplace_back(dof, cdof, 1.0);
      continue;
    }
    if (fine.lattice[v][0] != kNoLattice) {
      auto mt = cmid.find(lattice_key(fine.lattice[v][0], fine.lattice[v][1]));
      if (mt != cmid.end()) {
        for (int endpoint : mt->second) {
          const int cdof = cd.vertex_to_dof[endpoint];
          if (cdof >= 0) trip.emplace_back(dof, cdof, 0.5);
        }
        continue;
      }
    }
    throw Error("build_prolongation: fine vertex has no coarse parent "
                "(hierarchy not nested)");
  }
  SparseOperator P(fd.n_dofs, cd.n_dofs);
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

}  // namespace detail

// Per-level structures from the mesh hierarchy and the fine operator.
// Level l >= 1 splits its dofs by the geometric predicate "node inside the
// refinement zone of level l-1"; level 0 is solved exactly.
inline std::vector<MGLevel> build_levels(const MeshHierarchy& hier,
                                         const SparseOperator& A_fine,
                                         const std::vector<DofMap>& dofs) {
  const int L = hier.L;
  if (int(dofs.size()) != L + 1)
    throw Error("build_levels: need one dof map per level");
  std::vector<MGLevel> levels(L + 1);

  levels[L].A = A_fine;
  levels[L].n_dofs = dofs[L].n_dofs;
  for (int l = L; l >= 1; --l) {
    levels[l].P = detail::build_prolongation(hier.levels[l - 1], dofs[l - 1],
                                             hier.levels[l], dofs[l]);
    levels[l - 1].A = SparseOperator(levels[l].P.transpose() * levels[l].A *
                                     levels[l].P);
    levels[l - 1].A.makeCompressed();
    levels[l - 1].n_dofs = dofs[l - 1].n_dofs;
  }

  for (int l = 1; l <= L; ++l) {
    MGLevel& lev = levels[l];
    const FittedMesh& m = hier.levels[l];
    lev.block_pos.assign(lev.n_dofs, -1);
    for (int dof = 0; dof < lev.n_dofs; ++dof) {
      const Point2 p = m.vertices[dofs[l].dof_to_vertex[dof]];
      if (point_in_zone(hier, l - 1, p)) {
        lev.block_pos[dof] = int(lev.interface_dofs.size());
        lev.interface_dofs.push_back(dof);
      } else {
        lev.smooth_dofs.push_back(dof);
      }
    }
    if (!lev.interface_dofs.empty()) {
      const int nb = int(lev.interface_dofs.size());
      std::vector<Eigen::Triplet<double>> trip;
      for (int bi = 0; bi < nb; ++bi) {
        const int dof = lev.interface_dofs[bi];
        for (SparseOperator::InnerIterator it(lev.A, dof); it; ++it) {
          const int bj = lev.block_pos[it.row()];
          if (bj >= 0) trip.emplace_back(bj, bi, it.value());
        }
      }
      SparseOperator Ab(nb, nb);
      Ab.setFromTriplets(trip.begin(), trip.end());
      Ab.makeCompressed();
      lev.block_solver = std::make_shared<DirectSolver>(Ab);
    }
  }
  levels[0].coarse_solver = std::make_shared<DirectSolver>(levels[0].A);
  return levels;
}

namespace detail {

// one Gauss-Seidel update of x_i from the current residual (A symmetric,
// columns double as rows)
inline void gs_update(const SparseOperator& A, const Vector& rhs, Vector& x,
                      int i) {
  double s = rhs[i], diag = 0.0;
  for (SparseOperator::InnerIterator it(A, i); it; ++it) {
    if (it.row() == i)
      diag = it.value();
    else
      s -= it.value() * x[it.row()];
  }
  x[i] = s / diag;
}

inline void block_correction(const MGLevel& lev, const Vector& rhs,
                             Vector& x) {
  if (!lev.block_solver) return;
  const Vector r = rhs - lev.A * x;
  Vector rb(lev.interface_dofs.size());
  for (size_t k = 0; k < lev.interface_dofs.size(); ++k)
    rb[k] = r[lev.interface_dofs[k]];
  const Vector yb = lev.block_solver->solve(rb);
  for (size_t k = 0; k < lev.interface_dofs.size(); ++k)
    x[lev.interface_dofs[k]] += yb[k];
}

}  // namespace detail

// successive subspace correction: exact interface-block solve, then one
// forward point-Gauss-Seidel sweep over the remaining dofs
inline void smooth(const MGLevel& lev, const Vector& rhs, Vector& x) {
  detail::block_correction(lev, rhs, x);
  for (int i : lev.smooth_dofs) detail::gs_update(lev.A, rhs, x, i);
}

// adjoint smoother: backward sweep first, then the exact block solve
inline void smooth_adjoint(const MGLevel& lev, const Vector& rhs, Vector& x) {
  for (auto it = lev.smooth_dofs.rbegin(); it != lev.smooth_dofs.rend(); ++it)
    detail::gs_update(lev.A, rhs, x, *it);
  detail::block_correction(lev, rhs, x);
}

// V-cycle correction operator B_l applied to rhs
inline Vector vcycle(const std::vector<MGLevel>& levels, int l,
                     const Vector& rhs, int pre_sweeps = 2,
                     int post_sweeps = 2) {
  if (l == 0) return levels[0].coarse_solver->solve(rhs);
  const MGLevel& lev = levels[l];
  Vector x = Vector::Zero(lev.n_dofs);
  for (int s = 0; s < pre_sweeps; ++s) smooth(lev, rhs, x);
  const Vector r = rhs - lev.A * x;
  const Vector rc = lev.P.transpose() * r;
  x += lev.P * vcycle(levels, l - 1, rc, pre_sweeps, post_sweeps);
  for (int s = 0; s < post_sweeps; ++s) smooth_adjoint(lev, rhs, x);
  return x;
}

// stationary iteration x <- x + B(b - Ax) from x = 0, stopping on the
// relative l2 residual
inline std::pair<Vector, SolveStats> solve_mg(
    const std::vector<MGLevel>& levels, const Vector& b,
    const MGConfig& cfg = {}) {
  const MGLevel& top = levels.back();
  Vector x = Vector::Zero(top.n_dofs);
  SolveStats stats;
  const double bnorm = b.norm();
  stats.residuals.push_back(bnorm);
  if (bnorm == 0.0) {
    stats.converged = true;
    return {x, stats};
  }
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Vector r = b - top.A * x;
    const double rn = r.norm();
    if (it > 0) stats.residuals.push_back(rn);
    if (rn / bnorm < cfg.stopping_tol) {
      stats.converged = true;
      break;
    }
    x += vcycle(levels, int(levels.size()) - 1, r);
    ++stats.iterations;
  }
  if (!stats.converged) {
    stats.residuals.push_back((b - top.A * x).norm());
  }
  const int n = stats.iterations;
  if (n > 0 && stats.residuals.size() >= 2) {
    const double first = stats.residuals.front();
    const double last = stats.residuals.back();
    stats.contraction = std::pow(last / first, 1.0 / n);
  }
  return {x, stats};
}

}  // namespace aifem
