// SPDX-License-Identifier: Apache-2.0
/// \file kernels.cpp
/// \brief Characteristic-sweep solver for the controller and observer
///        kernel equations on the triangular domain.

#include "twolane/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <utility>

#include <json.hpp>

#include "twolane/version.hpp"

namespace twolane {

namespace {

using Fields = std::array<std::vector<double>, 8>;

constexpr double kDomainSlack = 1e-9;  // relative tolerance on anchor points

/// Piecewise-linear interpolation on the lower-triangle lattice.  Cells away
/// from the diagonal use bilinear weights; diagonal cells use barycentric
/// weights on their three valid corners.
double tri_interp(const std::vector<double>& f, const TriMesh& mesh, double x,
                  double xi) {
  const int n = mesh.n;
  double gx = x / mesh.h;
  double gxi = xi / mesh.h;
  gx = std::clamp(gx, 0.0, static_cast<double>(n - 1));
  gxi = std::clamp(gxi, 0.0, gx);
  int i0 = std::min(static_cast<int>(gx), n - 2);
  int j0 = std::min(static_cast<int>(gxi), n - 2);
  if (j0 > i0) j0 = i0;
  const double fx = gx - i0;
  double fxi = gxi - j0;
  if (j0 == i0) {
    // Diagonal cell: corners (i0,j0), (i0+1,j0), (i0+1,j0+1).
    if (fxi > fx) fxi = fx;
    return f[mesh.idx(i0, j0)] * (1.0 - fx) +
           f[mesh.idx(i0 + 1, j0)] * (fx - fxi) +
           f[mesh.idx(i0 + 1, j0 + 1)] * fxi;
  }
  return f[mesh.idx(i0, j0)] * (1.0 - fx) * (1.0 - fxi) +
         f[mesh.idx(i0 + 1, j0)] * fx * (1.0 - fxi) +
         f[mesh.idx(i0, j0 + 1)] * (1.0 - fx) * fxi +
         f[mesh.idx(i0 + 1, j0 + 1)] * fx * fxi;
}

/// Linear interpolation along the xi = 0 edge row.
double edge0_interp(const std::vector<double>& f, const TriMesh& mesh,
                    double x) {
  const int n = mesh.n;
  double gx = std::clamp(x / mesh.h, 0.0, static_cast<double>(n - 1));
  const int i0 = std::min(static_cast<int>(gx), n - 2);
  const double fx = gx - i0;
  return f[mesh.idx(i0, 0)] * (1.0 - fx) + f[mesh.idx(i0 + 1, 0)] * fx;
}

/// Linear interpolation along the x = L edge row.
double edgeL_interp(const std::vector<double>& f, const TriMesh& mesh,
                    double xi) {
  const int n = mesh.n;
  double gxi = std::clamp(xi / mesh.h, 0.0, static_cast<double>(n - 1));
  const int j0 = std::min(static_cast<int>(gxi), n - 2);
  const double fxi = gxi - j0;
  return f[mesh.idx(n - 1, j0)] * (1.0 - fxi) +
         f[mesh.idx(n - 1, j0 + 1)] * fxi;
}

/// Where a node's characteristic picks up its data.
enum class AnchorKind : std::uint8_t {
  coeff_data,  ///< value frozen from the coefficient functions
  zero,        ///< artificial homogeneous condition
  tie_edge0,   ///< proportional to a partner component on the xi = 0 edge
  tie_edgeL,   ///< proportional to a partner component on the x = L edge
};

/// Precomputed per-node update recipe: the anchor geometry never changes
/// across sweeps, only tie data and the coupling integral do.
struct PathPlan {
  double ax = 0.0;        ///< anchor x (storage coordinates, m)
  double axi = 0.0;       ///< anchor xi (m)
  double t_flight = 0.0;  ///< signed characteristic time anchor -> node (s)
  int segments = 1;       ///< trapezoid segments along the path
  AnchorKind kind = AnchorKind::coeff_data;
  double data = 0.0;      ///< frozen data for coeff_data / zero
  double edge_pos = 0.0;  ///< edge coordinate for tie lookups
  int partner = 0;        ///< component index a tie reads
  double tie_coef = 0.0;  ///< multiplier on the partner edge value
};

/// Straight line A x + B xi = C used to mark reduced-regularity sets.
struct SepLine {
  double a = 0.0, b = 0.0, c = 0.0;
  double distance(double x, double xi) const {
    return std::fabs(a * x + b * xi - c) / std::hypot(a, b);
  }
};

/// Everything the sweep driver needs to know about one kernel family.
struct FamilyTable {
  std::array<std::pair<double, double>, 8> flow;  ///< storage-coord speeds
  std::array<std::string, 8> names;
  std::array<std::vector<PathPlan>, 8> plans;
  std::vector<SepLine> separatrices;
  /// Coupling terms at every node from the previous sweep's fields.
  std::function<void(const TriMesh&, const Fields&, Fields*)> build_rhs;
  /// Post-convergence boundary refresh (ties re-imposed from final fields).
  std::function<void(const TriMesh&, Fields*)> refresh;
};

/// Validates that an anchor landed inside the closed triangle (up to
/// round-off) and clamps it onto the domain.
void clamp_anchor(const TriMesh& mesh, const char* comp, double* ax,
                  double* axi) {
  const double slack = kDomainSlack * mesh.length;
  if (*ax < -slack || *ax > mesh.length + slack || *axi < -slack ||
      *axi > *ax + slack) {
    throw Error(ErrorKind::config,
                std::string("kernel solve: characteristic of ") + comp +
                    " leaves the domain; characteristic speeds are "
                    "inconsistent with the triangular geometry");
  }
  *ax = std::clamp(*ax, 0.0, mesh.length);
  *axi = std::clamp(*axi, 0.0, *ax);
}

/// Fills path geometry shared by every plan: flight time and sample count.
void finish_plan(const TriMesh& mesh, double x, double xi, double sx,
                 PathPlan* plan) {
  plan->t_flight = (sx != 0.0) ? (x - plan->ax) / sx : 0.0;
  const double dist = std::hypot(x - plan->ax, xi - plan->axi);
  plan->segments = std::max(1, static_cast<int>(std::ceil(dist / mesh.h)));
}

/// Trapezoidal integral of an interpolated lattice along anchor -> node,
/// weighted by the signed flight time.
double path_integral(const std::vector<double>& rhs, const TriMesh& mesh,
                     const PathPlan& plan, double x, double xi) {
  if (plan.t_flight == 0.0) return 0.0;
  const int m = plan.segments;
  double acc = 0.5 * (tri_interp(rhs, mesh, plan.ax, plan.axi) +
                      tri_interp(rhs, mesh, x, xi));
  for (int s = 1; s < m; ++s) {
    const double t = static_cast<double>(s) / m;
    acc += tri_interp(rhs, mesh, plan.ax + t * (x - plan.ax),
                      plan.axi + t * (xi - plan.axi));
  }
  return plan.t_flight * acc / m;
}

double plan_value(const PathPlan& plan, const TriMesh& mesh,
                  const Fields& prev) {
  switch (plan.kind) {
    case AnchorKind::coeff_data:
    case AnchorKind::zero:
      return plan.data;
    case AnchorKind::tie_edge0:
      return plan.tie_coef *
             edge0_interp(prev[static_cast<std::size_t>(plan.partner)], mesh,
                          plan.edge_pos);
    case AnchorKind::tie_edgeL:
      return plan.tie_coef *
             edgeL_interp(prev[static_cast<std::size_t>(plan.partner)], mesh,
                          plan.edge_pos);
  }
  return 0.0;
}

/// Successive-approximation driver shared by the three kernel families.
Fields run_sweeps(const FamilyTable& fam, const TriMesh& mesh,
                  const SolveOptions& opt, SolveStats* stats) {
  Fields f, fn, rhs;
  for (auto& v : f) v.assign(mesh.size(), 0.0);
  for (auto& v : fn) v.assign(mesh.size(), 0.0);
  for (auto& v : rhs) v.assign(mesh.size(), 0.0);

  stats->sweep_diffs.clear();
  for (int it = 1; it <= opt.max_iter; ++it) {
    fam.build_rhs(mesh, f, &rhs);
    double diff = 0.0;
    for (int c = 0; c < 8; ++c) {
      const std::size_t cs = static_cast<std::size_t>(c);
      for (int i = 0; i < mesh.n; ++i) {
        for (int j = 0; j <= i; ++j) {
          const std::size_t id = mesh.idx(i, j);
          const PathPlan& plan = fam.plans[cs][id];
          const double value =
              plan_value(plan, mesh, f) +
              path_integral(rhs[cs], mesh, plan, i * mesh.h, j * mesh.h);
          diff = std::max(diff, std::fabs(value - f[cs][id]));
          fn[cs][id] = value;
        }
      }
    }
    f.swap(fn);
    stats->sweep_diffs.push_back(diff);
    if (diff < opt.tol) {
      stats->iterations = it;
      fam.refresh(mesh, &f);
      return f;
    }
  }
  throw Error(ErrorKind::numerics,
              "kernel solve: no convergence within " +
                  std::to_string(opt.max_iter) + " sweeps; last change " +
                  std::to_string(stats->sweep_diffs.back()) +
                  " exceeds tolerance " + std::to_string(opt.tol));
}

// ---------------------------------------------------------------------------
// Family construction
// ---------------------------------------------------------------------------

// Component order within Fields: index 2a+b holds the K-like component (a,b)
// (acting on w-type variables of lane b in equation row a), index 4+2a+b the
// L-like component (a,b).
inline int kcomp(int a, int b) { return 2 * a + b; }
inline int lcomp(int a, int b) { return 4 + 2 * a + b; }

FamilyTable make_control_family(const LinearCoeffs& lc, const TriMesh& mesh) {
  FamilyTable fam;
  const double eps[2] = {lc.eps1, lc.eps2};
  const double mu[2] = {lc.mu1, lc.mu2};
  const double L = mesh.length;
  const double tie_col[2] = {lc.eps1 * lc.k_slow / lc.mu1,
                             lc.eps2 * lc.k_fast / lc.mu2};

  fam.names = {"k11", "k12", "k21", "k22", "l11", "l12", "l21", "l22"};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      fam.flow[static_cast<std::size_t>(kcomp(a, b))] = {mu[a], -eps[b]};
      fam.flow[static_cast<std::size_t>(lcomp(a, b))] = {mu[a], mu[b]};
    }
  }
  // Anchor-selection switches: l12 between its diagonal and the xi=0 tie,
  // l21 between its diagonal and the artificial zero row at x = L.
  fam.separatrices = {
      {lc.mu2, -lc.mu1, 0.0},
      {lc.mu1, -lc.mu2, (lc.mu1 - lc.mu2) * L},
  };

  for (auto& p : fam.plans) p.resize(mesh.size());
  for (int i = 0; i < mesh.n; ++i) {
    const double x = i * mesh.h;
    for (int j = 0; j <= i; ++j) {
      const double xi = j * mesh.h;
      const std::size_t id = mesh.idx(i, j);

      // K components: data on the diagonal, reached against the flow.
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          PathPlan plan;
          const double d = (eps[b] * x + mu[a] * xi) / (mu[a] + eps[b]);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "k", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = -lc.a_vw.m[a][b] / (eps[b] + mu[a]);
          finish_plan(mesh, x, xi, mu[a], &plan);
          fam.plans[static_cast<std::size_t>(kcomp(a, b))][id] = plan;
        }
      }

      // l11 / l22: characteristics parallel to the diagonal, data from the
      // xi = 0 reflection tie.
      for (int a = 0; a < 2; ++a) {
        PathPlan plan;
        plan.ax = x - xi;
        plan.axi = 0.0;
        clamp_anchor(mesh, "l_diag", &plan.ax, &plan.axi);
        plan.kind = AnchorKind::tie_edge0;
        plan.partner = kcomp(a, a);
        plan.tie_coef = tie_col[a];
        plan.edge_pos = plan.ax;
        finish_plan(mesh, x, xi, mu[a], &plan);
        fam.plans[static_cast<std::size_t>(lcomp(a, a))][id] = plan;
      }

      // l12: diagonal data when the back-traced characteristic meets the
      // diagonal before the xi = 0 edge (ties win only below the switch line).
      {
        PathPlan plan;
        if (lc.mu1 * xi >= lc.mu2 * x) {
          const double d = (lc.mu1 * xi - lc.mu2 * x) / (lc.mu1 - lc.mu2);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "l12", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = -lc.a_vv.m[0][1] / (lc.mu1 - lc.mu2);
        } else {
          plan.ax = x - (lc.mu1 / lc.mu2) * xi;
          plan.axi = 0.0;
          clamp_anchor(mesh, "l12", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::tie_edge0;
          plan.partner = kcomp(0, 1);
          plan.tie_coef = tie_col[1];
          plan.edge_pos = plan.ax;
        }
        finish_plan(mesh, x, xi, lc.mu1, &plan);
        fam.plans[static_cast<std::size_t>(lcomp(0, 1))][id] = plan;
      }

      // l21: data lies ahead along the flow, on the diagonal or on the
      // artificial zero row at x = L, whichever comes first (the x = L row
      // wins exact ties so the whole row stays homogeneous).
      {
        PathPlan plan;
        const double s_diag = (x - xi) / (lc.mu1 - lc.mu2);
        const double s_edge = (L - x) / lc.mu2;
        if (s_edge <= s_diag) {
          plan.ax = L;
          plan.axi = xi + lc.mu1 * s_edge;
          clamp_anchor(mesh, "l21", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::zero;
          plan.data = 0.0;
        } else {
          const double d = x + lc.mu2 * s_diag;
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "l21", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_vv.m[1][0] / (lc.mu1 - lc.mu2);
        }
        finish_plan(mesh, x, xi, lc.mu2, &plan);
        fam.plans[static_cast<std::size_t>(lcomp(1, 0))][id] = plan;
      }
    }
  }

  // Coupling terms.  In the deviation variables the simulator evolves, the
  // coefficient blocks are position-independent, so every sweep reuses the
  // same four matrices; the relaxation rate of the row's own lane enters as
  // a self-term on each component.
  const Mat2 aww = lc.a_ww;
  const Mat2 awv = lc.a_wv;
  const Mat2 avw = lc.a_vw;
  const Mat2 avv = lc.a_vv;
  fam.build_rhs = [aww, awv, avw, avv](const TriMesh& m, const Fields& f,
                                       Fields* rhs) {
    for (int i = 0; i < m.n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const std::size_t id = m.idx(i, j);
        for (int a = 0; a < 2; ++a) {
          const double ka0 = f[static_cast<std::size_t>(kcomp(a, 0))][id];
          const double ka1 = f[static_cast<std::size_t>(kcomp(a, 1))][id];
          const double la0 = f[static_cast<std::size_t>(lcomp(a, 0))][id];
          const double la1 = f[static_cast<std::size_t>(lcomp(a, 1))][id];
          const double self = avv.m[a][a];
          for (int b = 0; b < 2; ++b) {
            (*rhs)[static_cast<std::size_t>(kcomp(a, b))][id] =
                ka0 * aww.m[0][b] + ka1 * aww.m[1][b] + la0 * avw.m[0][b] +
                la1 * avw.m[1][b] -
                self * f[static_cast<std::size_t>(kcomp(a, b))][id];
            (*rhs)[static_cast<std::size_t>(lcomp(a, b))][id] =
                ka0 * awv.m[0][b] + ka1 * awv.m[1][b] + la0 * avv.m[0][b] +
                la1 * avv.m[1][b] -
                self * f[static_cast<std::size_t>(lcomp(a, b))][id];
          }
        }
      }
    }
  };

  fam.refresh = [tie_col](const TriMesh& m, Fields* f) {
    for (int i = 0; i < m.n; ++i) {
      const std::size_t id = m.idx(i, 0);
      (*f)[static_cast<std::size_t>(lcomp(0, 0))][id] =
          tie_col[0] * (*f)[static_cast<std::size_t>(kcomp(0, 0))][id];
      (*f)[static_cast<std::size_t>(lcomp(1, 1))][id] =
          tie_col[1] * (*f)[static_cast<std::size_t>(kcomp(1, 1))][id];
      if (i >= 1) {
        // The (0,0) corner keeps its diagonal data; the tie applies on the
        // rest of the edge (the switch line of l12 starts at the corner).
        (*f)[static_cast<std::size_t>(lcomp(0, 1))][id] =
            tie_col[1] * (*f)[static_cast<std::size_t>(kcomp(0, 1))][id];
      }
    }
  };
  return fam;
}

// Observer component order within Fields: index 2a+b holds N(a,b) (the
// K-like block), index 4+2a+b holds M(a,b).
inline int ncomp(int a, int b) { return 2 * a + b; }
inline int mcomp(int a, int b) { return 4 + 2 * a + b; }

/// Reflected-orientation observer family: storage coordinates are
/// (xb, xib) = (L - x, L - xi), again a lower triangle.
FamilyTable make_observer_family(const LinearCoeffs& lc, const TriMesh& mesh) {
  FamilyTable fam;
  const double eps[2] = {lc.eps1, lc.eps2};
  const double mu[2] = {lc.mu1, lc.mu2};
  const double L = mesh.length;
  const double tie_row[2] = {lc.k_slow, lc.k_fast};

  fam.names = {"n11", "n12", "n21", "n22", "m11", "m12", "m21", "m22"};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      fam.flow[static_cast<std::size_t>(ncomp(a, b))] = {mu[a], -eps[b]};
      fam.flow[static_cast<std::size_t>(mcomp(a, b))] = {eps[a], eps[b]};
    }
  }
  fam.separatrices = {
      {lc.eps2, -lc.eps1, (lc.eps2 - lc.eps1) * L},  // m12 switch line
      {lc.eps1, -lc.eps2, 0.0},                      // m21 switch line
  };

  for (auto& p : fam.plans) p.resize(mesh.size());
  for (int i = 0; i < mesh.n; ++i) {
    const double x = i * mesh.h;  // reflected coordinate
    for (int j = 0; j <= i; ++j) {
      const double xi = j * mesh.h;
      const std::size_t id = mesh.idx(i, j);

      // N components: diagonal data, upstream anchor.
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          PathPlan plan;
          const double d = (eps[b] * x + mu[a] * xi) / (mu[a] + eps[b]);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "n", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_vw.m[a][b] / (eps[b] + mu[a]);
          finish_plan(mesh, x, xi, mu[a], &plan);
          fam.plans[static_cast<std::size_t>(ncomp(a, b))][id] = plan;
        }
      }

      // m11 / m22: characteristics parallel to the diagonal; data lies
      // ahead on the x = L edge (the reflected inlet), via the row tie.
      for (int a = 0; a < 2; ++a) {
        PathPlan plan;
        plan.ax = L;
        plan.axi = xi + (L - x);
        clamp_anchor(mesh, "m_diag", &plan.ax, &plan.axi);
        plan.kind = AnchorKind::tie_edgeL;
        plan.partner = ncomp(a, a);
        plan.tie_coef = tie_row[a];
        plan.edge_pos = plan.axi;
        finish_plan(mesh, x, xi, eps[a], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(a, a))][id] = plan;
      }

      // m12: data ahead along the flow, on the diagonal or on the x = L tie
      // row, whichever comes first (the diagonal wins exact ties).
      {
        PathPlan plan;
        const double s_diag = (x - xi) / (eps[1] - eps[0]);
        const double s_edge = (L - x) / eps[0];
        if (s_diag <= s_edge) {
          const double d = x + eps[0] * s_diag;
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "m12", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_ww.m[0][1] / (eps[1] - eps[0]);
        } else {
          plan.ax = L;
          plan.axi = xi + eps[1] * s_edge;
          clamp_anchor(mesh, "m12", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::tie_edgeL;
          plan.partner = ncomp(0, 1);
          plan.tie_coef = tie_row[0];
          plan.edge_pos = plan.axi;
        }
        finish_plan(mesh, x, xi, eps[0], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(0, 1))][id] = plan;
      }

      // m21: upstream anchors on the diagonal or on the artificial zero
      // edge xi = 0 (the zero edge wins exact ties, so the injection gain
      // column built from it vanishes identically).
      {
        PathPlan plan;
        if (eps[1] * xi > eps[0] * x) {
          const double d = (eps[1] * xi - eps[0] * x) / (eps[1] - eps[0]);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "m21", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_ww.m[1][0] / (eps[0] - eps[1]);
        } else {
          plan.ax = x - (eps[1] / eps[0]) * xi;
          plan.axi = 0.0;
          clamp_anchor(mesh, "m21", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::zero;
          plan.data = 0.0;
        }
        finish_plan(mesh, x, xi, eps[1], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(1, 0))][id] = plan;
      }
    }
  }

  // Coupling terms.  As with the feedback family, the deviation-variable
  // coefficient blocks carry no position dependence; the lane's own
  // relaxation rate appears through the diagonal of the velocity block.
  const Mat2 aww = lc.a_ww;
  const Mat2 awv = lc.a_wv;
  const Mat2 avw = lc.a_vw;
  const Mat2 avv = lc.a_vv;
  fam.build_rhs = [aww, awv, avw, avv](const TriMesh& m, const Fields& f,
                                       Fields* rhs) {
    for (int i = 0; i < m.n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const std::size_t id = m.idx(i, j);
        for (int b = 0; b < 2; ++b) {
          const double m0b = f[static_cast<std::size_t>(mcomp(0, b))][id];
          const double m1b = f[static_cast<std::size_t>(mcomp(1, b))][id];
          const double n0b = f[static_cast<std::size_t>(ncomp(0, b))][id];
          const double n1b = f[static_cast<std::size_t>(ncomp(1, b))][id];
          for (int a = 0; a < 2; ++a) {
            const double nab = f[static_cast<std::size_t>(ncomp(a, b))][id];
            const double mab = f[static_cast<std::size_t>(mcomp(a, b))][id];
            (*rhs)[static_cast<std::size_t>(ncomp(a, b))][id] =
                -aww.m[b][b] * nab + avw.m[a][0] * m0b + avw.m[a][1] * m1b +
                avv.m[a][0] * n0b + avv.m[a][1] * n1b;
            (*rhs)[static_cast<std::size_t>(mcomp(a, b))][id] =
                aww.m[b][b] * mab - aww.m[a][0] * m0b - aww.m[a][1] * m1b -
                awv.m[a][0] * n0b - awv.m[a][1] * n1b;
          }
        }
      }
    }
  };

  fam.refresh = [tie_row](const TriMesh& m, Fields* f) {
    const int last = m.n - 1;
    for (int j = 0; j < m.n; ++j) {
      const std::size_t id = m.idx(last, j);
      (*f)[static_cast<std::size_t>(mcomp(0, 0))][id] =
          tie_row[0] * (*f)[static_cast<std::size_t>(ncomp(0, 0))][id];
      (*f)[static_cast<std::size_t>(mcomp(1, 1))][id] =
          tie_row[1] * (*f)[static_cast<std::size_t>(ncomp(1, 1))][id];
      if (j <= last - 1) {
        // The (L, L) corner keeps m12's diagonal data.
        (*f)[static_cast<std::size_t>(mcomp(0, 1))][id] =
            tie_row[0] * (*f)[static_cast<std::size_t>(ncomp(0, 1))][id];
      }
    }
  };
  return fam;
}

/// Direct-orientation observer family on the upper triangle {x <= xi},
/// stored transposed: storage (X, Xi) = (physical xi, physical x).
FamilyTable make_observer_direct_family(const LinearCoeffs& lc,
                                        const TriMesh& mesh) {
  FamilyTable fam;
  const double eps[2] = {lc.eps1, lc.eps2};
  const double mu[2] = {lc.mu1, lc.mu2};
  const double L = mesh.length;
  const double tie_row[2] = {lc.k_slow, lc.k_fast};

  fam.names = {"n11", "n12", "n21", "n22", "m11", "m12", "m21", "m22"};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      // Physical flow (mu_a, -eps_b) for N and (eps_a, eps_b) for M turns
      // into swapped storage components.
      fam.flow[static_cast<std::size_t>(ncomp(a, b))] = {-eps[b], mu[a]};
      fam.flow[static_cast<std::size_t>(mcomp(a, b))] = {eps[b], eps[a]};
    }
  }
  fam.separatrices = {
      {lc.eps1, -lc.eps2, 0.0},                      // m12 switch line
      {lc.eps2, -lc.eps1, (lc.eps2 - lc.eps1) * L},  // m21 switch line
  };

  for (auto& p : fam.plans) p.resize(mesh.size());
  for (int i = 0; i < mesh.n; ++i) {
    const double X = i * mesh.h;  // physical xi
    for (int j = 0; j <= i; ++j) {
      const double Xi = j * mesh.h;  // physical x
      const std::size_t id = mesh.idx(i, j);

      // N: diagonal data ahead along the flow (storage-x speed negative).
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          PathPlan plan;
          const double d = (eps[b] * Xi + mu[a] * X) / (mu[a] + eps[b]);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "n_direct", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_vw.m[a][b] / (eps[b] + mu[a]);
          finish_plan(mesh, X, Xi, -eps[b], &plan);
          fam.plans[static_cast<std::size_t>(ncomp(a, b))][id] = plan;
        }
      }

      // m11 / m22: upstream anchor on the physical x = 0 edge (storage
      // xi = 0 row), via the row tie.
      for (int a = 0; a < 2; ++a) {
        PathPlan plan;
        plan.ax = X - Xi;
        plan.axi = 0.0;
        clamp_anchor(mesh, "m_diag_direct", &plan.ax, &plan.axi);
        plan.kind = AnchorKind::tie_edge0;
        plan.partner = ncomp(a, a);
        plan.tie_coef = tie_row[a];
        plan.edge_pos = plan.ax;
        finish_plan(mesh, X, Xi, eps[a], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(a, a))][id] = plan;
      }

      // m12: upstream anchor on the diagonal (exact ties included) or on
      // the physical x = 0 tie row.
      {
        PathPlan plan;
        if (eps[1] * Xi >= eps[0] * X) {
          const double d = (eps[1] * Xi - eps[0] * X) / (eps[1] - eps[0]);
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "m12_direct", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_ww.m[0][1] / (eps[1] - eps[0]);
        } else {
          plan.ax = X - (eps[1] / eps[0]) * Xi;
          plan.axi = 0.0;
          clamp_anchor(mesh, "m12_direct", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::tie_edge0;
          plan.partner = ncomp(0, 1);
          plan.tie_coef = tie_row[0];
          plan.edge_pos = plan.ax;
        }
        finish_plan(mesh, X, Xi, eps[1], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(0, 1))][id] = plan;
      }

      // m21: data ahead on the diagonal or on the artificial zero edge
      // physical xi = L (storage x = L row); the zero edge wins exact ties.
      {
        PathPlan plan;
        const double s_diag = (X - Xi) / (eps[1] - eps[0]);
        const double s_edge = (L - X) / eps[0];
        if (s_edge <= s_diag) {
          plan.ax = L;
          plan.axi = Xi + eps[1] * s_edge;
          clamp_anchor(mesh, "m21_direct", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::zero;
          plan.data = 0.0;
        } else {
          const double d = X + eps[0] * s_diag;
          plan.ax = d;
          plan.axi = d;
          clamp_anchor(mesh, "m21_direct", &plan.ax, &plan.axi);
          plan.kind = AnchorKind::coeff_data;
          plan.data = lc.a_ww.m[1][0] / (eps[0] - eps[1]);
        }
        finish_plan(mesh, X, Xi, eps[0], &plan);
        fam.plans[static_cast<std::size_t>(mcomp(1, 0))][id] = plan;
      }
    }
  }

  // Coupling terms.  In the exponentially weighted velocity variables the
  // coupling blocks are the constant relaxation matrices; the diagonal of
  // the velocity-velocity block supplies the row rate terms exactly.
  const Mat2 aww = lc.a_ww;
  const Mat2 awv = lc.a_wv;
  const Mat2 avw = lc.a_vw;
  const Mat2 avv = lc.a_vv;
  fam.build_rhs = [aww, awv, avw, avv](const TriMesh& m, const Fields& f,
                                       Fields* rhs) {
    for (int i = 0; i < m.n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const std::size_t id = m.idx(i, j);
        for (int b = 0; b < 2; ++b) {
          const double m0b = f[static_cast<std::size_t>(mcomp(0, b))][id];
          const double m1b = f[static_cast<std::size_t>(mcomp(1, b))][id];
          const double n0b = f[static_cast<std::size_t>(ncomp(0, b))][id];
          const double n1b = f[static_cast<std::size_t>(ncomp(1, b))][id];
          for (int a = 0; a < 2; ++a) {
            const double nab = f[static_cast<std::size_t>(ncomp(a, b))][id];
            const double mab = f[static_cast<std::size_t>(mcomp(a, b))][id];
            (*rhs)[static_cast<std::size_t>(ncomp(a, b))][id] =
                aww.m[b][b] * nab - avw.m[a][0] * m0b - avw.m[a][1] * m1b -
                avv.m[a][0] * n0b - avv.m[a][1] * n1b;
            (*rhs)[static_cast<std::size_t>(mcomp(a, b))][id] =
                -aww.m[b][b] * mab + aww.m[a][0] * m0b + aww.m[a][1] * m1b +
                awv.m[a][0] * n0b + awv.m[a][1] * n1b;
          }
        }
      }
    }
  };

  fam.refresh = [tie_row](const TriMesh& m, Fields* f) {
    for (int i = 0; i < m.n; ++i) {
      const std::size_t id = m.idx(i, 0);
      (*f)[static_cast<std::size_t>(mcomp(0, 0))][id] =
          tie_row[0] * (*f)[static_cast<std::size_t>(ncomp(0, 0))][id];
      (*f)[static_cast<std::size_t>(mcomp(1, 1))][id] =
          tie_row[1] * (*f)[static_cast<std::size_t>(ncomp(1, 1))][id];
      if (i >= 1) {
        (*f)[static_cast<std::size_t>(mcomp(0, 1))][id] =
            tie_row[0] * (*f)[static_cast<std::size_t>(ncomp(0, 1))][id];
      }
    }
  };
  return fam;
}

// ---------------------------------------------------------------------------
// Residual engine
// ---------------------------------------------------------------------------

ResidualReport residual_engine(const FamilyTable& fam, const TriMesh& mesh,
                               const Fields& f) {
  Fields rhs;
  for (auto& v : rhs) v.assign(mesh.size(), 0.0);
  fam.build_rhs(mesh, f, &rhs);

  ResidualReport report;
  report.equations.resize(8);
  for (int c = 0; c < 8; ++c) {
    const std::size_t cs = static_cast<std::size_t>(c);
    EquationResidual& eq = report.equations[cs];
    eq.name = fam.names[cs];
    const double sx = fam.flow[cs].first;
    const double sxi = fam.flow[cs].second;
    double sum_sq = 0.0;
    for (int i = 2; i <= mesh.n - 2; ++i) {
      const double x = i * mesh.h;
      for (int j = 1; j <= i - 1; ++j) {
        const double xi = j * mesh.h;
        bool excluded = false;
        for (const SepLine& line : fam.separatrices) {
          if (line.distance(x, xi) <= 2.0 * mesh.h) {
            excluded = true;
            break;
          }
        }
        if (excluded) continue;
        const double dfdx = (f[cs][mesh.idx(i + 1, j)] -
                             f[cs][mesh.idx(i - 1, j)]) /
                            (2.0 * mesh.h);
        const double dfdxi = (f[cs][mesh.idx(i, j + 1)] -
                              f[cs][mesh.idx(i, j - 1)]) /
                             (2.0 * mesh.h);
        const double res = sx * dfdx + sxi * dfdxi - rhs[cs][mesh.idx(i, j)];
        eq.max_abs = std::max(eq.max_abs, std::fabs(res));
        sum_sq += res * res;
        ++eq.nodes;
      }
    }
    eq.rms = eq.nodes > 0 ? std::sqrt(sum_sq / eq.nodes) : 0.0;
    report.interior_max = std::max(report.interior_max, eq.max_abs);
  }

  // Every node whose characteristic has zero flight time carries an imposed
  // condition; re-evaluate its data against the final fields.
  for (int c = 0; c < 8; ++c) {
    const std::size_t cs = static_cast<std::size_t>(c);
    for (int i = 0; i < mesh.n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const std::size_t id = mesh.idx(i, j);
        const PathPlan& plan = fam.plans[cs][id];
        if (plan.t_flight != 0.0) continue;
        const double expected = plan_value(plan, mesh, f);
        report.boundary_max =
            std::max(report.boundary_max, std::fabs(f[cs][id] - expected));
      }
    }
  }
  return report;
}

Fields fields_of(const KernelSet& ks) {
  return {ks.k11, ks.k12, ks.k21, ks.k22, ks.l11, ks.l12, ks.l21, ks.l22};
}
Fields fields_of(const ObserverKernelSet& oks) {
  return {oks.n11, oks.n12, oks.n21, oks.n22,
          oks.m11, oks.m12, oks.m21, oks.m22};
}
Fields fields_of(const DirectObserverKernelSet& dks) {
  return {dks.n11, dks.n12, dks.n21, dks.n22,
          dks.m11, dks.m12, dks.m21, dks.m22};
}

}  // namespace

TriMesh TriMesh::make(double length, int n) {
  if (!(length > 0.0)) {
    throw Error(ErrorKind::config, "kernel mesh: length must be positive");
  }
  if (n < 16) {
    throw Error(ErrorKind::config, "kernel mesh: need at least 16 nodes");
  }
  TriMesh mesh;
  mesh.n = n;
  mesh.length = length;
  mesh.h = length / static_cast<double>(n - 1);
  return mesh;
}

KernelSet solve_control_kernels(const LinearCoeffs& lc, const TriMesh& mesh,
                                const SolveOptions& opt) {
  const FamilyTable fam = make_control_family(lc, mesh);
  KernelSet ks;
  ks.mesh = mesh;
  Fields f = run_sweeps(fam, mesh, opt, &ks.stats);
  ks.k11 = std::move(f[0]);
  ks.k12 = std::move(f[1]);
  ks.k21 = std::move(f[2]);
  ks.k22 = std::move(f[3]);
  ks.l11 = std::move(f[4]);
  ks.l12 = std::move(f[5]);
  ks.l21 = std::move(f[6]);
  ks.l22 = std::move(f[7]);

  // Inlet-edge diagnostic gain of the target dynamics.  The reference
  // formula is written for the exponentially weighted kernel components,
  // which differ from the stored ones by the row weight of the fast lane.
  ks.theta.resize(static_cast<std::size_t>(mesh.n));
  for (int i = 0; i < mesh.n; ++i) {
    const std::size_t e = mesh.idx(i, 0);
    const double row_weight = std::exp(lc.rate2() * i * mesh.h);
    ks.theta[static_cast<std::size_t>(i)] =
        row_weight * (-lc.eps1 * lc.k_slow * ks.k21[e] - lc.mu1 * ks.l21[e]);
  }
  return ks;
}

ObserverKernelSet solve_observer_kernels(const LinearCoeffs& lc,
                                         const TriMesh& mesh,
                                         const SolveOptions& opt) {
  const FamilyTable fam = make_observer_family(lc, mesh);
  ObserverKernelSet oks;
  oks.mesh = mesh;
  Fields f = run_sweeps(fam, mesh, opt, &oks.stats);
  oks.n11 = std::move(f[0]);
  oks.n12 = std::move(f[1]);
  oks.n21 = std::move(f[2]);
  oks.n22 = std::move(f[3]);
  oks.m11 = std::move(f[4]);
  oks.m12 = std::move(f[5]);
  oks.m21 = std::move(f[6]);
  oks.m22 = std::move(f[7]);

  // Injection gains and the inlet-edge diagnostic gain on the physical
  // axis: index i corresponds to x = i h, i.e. reflected row n-1-i.  The
  // gains feeding the weighted velocity equations pick up that equation's
  // exponential row weight, since the stored kernels are unweighted.
  const int n = mesh.n;
  const double eps[2] = {lc.eps1, lc.eps2};
  auto gain = [&](const std::vector<double>& m_field, int b, double rate) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      g[static_cast<std::size_t>(i)] = std::exp(rate * i * mesh.h) * eps[b] *
                                       m_field[mesh.idx(n - 1 - i, 0)];
    }
    return g;
  };
  oks.p11 = gain(oks.m11, 0, 0.0);
  oks.p12 = gain(oks.m12, 1, 0.0);
  oks.p21 = gain(oks.m21, 0, 0.0);
  oks.p22 = gain(oks.m22, 1, 0.0);
  oks.q11 = gain(oks.n11, 0, lc.rate1());
  oks.q12 = gain(oks.n12, 1, lc.rate1());
  oks.q21 = gain(oks.n21, 0, lc.rate2());
  oks.q22 = gain(oks.n22, 1, lc.rate2());
  oks.lambda.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t e = mesh.idx(n - 1, n - 1 - i);
    oks.lambda[static_cast<std::size_t>(i)] =
        oks.m21[e] - lc.k_fast * oks.n21[e];
  }
  return oks;
}

DirectObserverKernelSet solve_observer_kernels_direct(const LinearCoeffs& lc,
                                                      const TriMesh& mesh,
                                                      const SolveOptions& opt) {
  const FamilyTable fam = make_observer_direct_family(lc, mesh);
  DirectObserverKernelSet dks;
  dks.mesh = mesh;
  Fields f = run_sweeps(fam, mesh, opt, &dks.stats);
  dks.n11 = std::move(f[0]);
  dks.n12 = std::move(f[1]);
  dks.n21 = std::move(f[2]);
  dks.n22 = std::move(f[3]);
  dks.m11 = std::move(f[4]);
  dks.m12 = std::move(f[5]);
  dks.m21 = std::move(f[6]);
  dks.m22 = std::move(f[7]);
  return dks;
}

ResidualReport kernel_residual(const KernelSet& ks, const LinearCoeffs& lc) {
  const FamilyTable fam = make_control_family(lc, ks.mesh);
  return residual_engine(fam, ks.mesh, fields_of(ks));
}

ResidualReport kernel_residual(const ObserverKernelSet& oks,
                               const LinearCoeffs& lc) {
  const FamilyTable fam = make_observer_family(lc, oks.mesh);
  return residual_engine(fam, oks.mesh, fields_of(oks));
}

ResidualReport kernel_residual(const DirectObserverKernelSet& dks,
                               const LinearCoeffs& lc) {
  const FamilyTable fam = make_observer_direct_family(lc, dks.mesh);
  return residual_engine(fam, dks.mesh, fields_of(dks));
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

namespace {

void fnv_feed(std::uint64_t* hash, const void* data, std::size_t len) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    *hash ^= bytes[i];
    *hash *= 1099511628211ULL;
  }
}

void fnv_feed_double(std::uint64_t* hash, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  fnv_feed(hash, &bits, sizeof(bits));
}

std::string hex_key(std::uint64_t key) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(key));
  return std::string(buf);
}

nlohmann::json mesh_to_json(const TriMesh& mesh) {
  return {{"n", mesh.n}, {"h", mesh.h}, {"length", mesh.length}};
}

bool mesh_matches(const nlohmann::json& j, const TriMesh& mesh) {
  return j.at("n").get<int>() == mesh.n &&
         j.at("h").get<double>() == mesh.h &&
         j.at("length").get<double>() == mesh.length;
}

std::vector<double> array_field(const nlohmann::json& j, const char* name,
                                std::size_t expected) {
  std::vector<double> v = j.at(name).get<std::vector<double>>();
  if (v.size() != expected) {
    throw Error(ErrorKind::io, std::string("kernel cache: field '") + name +
                                   "' has unexpected length");
  }
  return v;
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& payload) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::io,
                  "kernel cache: cannot write " + tmp.string());
    }
    out << payload;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::uint64_t kernel_cache_key(const LinearCoeffs& lc, const TriMesh& mesh,
                               double tol, const std::string& family) {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a offset basis
  fnv_feed(&hash, family.data(), family.size());
  const int version = kKernelSolverVersion;
  fnv_feed(&hash, &version, sizeof(version));
  fnv_feed(&hash, &mesh.n, sizeof(mesh.n));
  fnv_feed_double(&hash, mesh.length);
  fnv_feed_double(&hash, tol);
  const Mat2* blocks[4] = {&lc.a_ww, &lc.a_wv, &lc.a_vw, &lc.a_vv};
  for (const Mat2* blk : blocks) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) fnv_feed_double(&hash, blk->m[a][b]);
    }
  }
  for (double v : {lc.eps1, lc.eps2, lc.mu1, lc.mu2, lc.k_slow, lc.k_fast,
                   lc.l_slow, lc.l_fast, lc.seg_length}) {
    fnv_feed_double(&hash, v);
  }
  return hash;
}

KernelSet solve_control_kernels_cached(const LinearCoeffs& lc,
                                       const TriMesh& mesh,
                                       const SolveOptions& opt,
                                       const std::string& cache_dir) {
  if (cache_dir.empty()) return solve_control_kernels(lc, mesh, opt);
  const std::string key = hex_key(kernel_cache_key(lc, mesh, opt.tol,
                                                   "control"));
  const std::filesystem::path path =
      std::filesystem::path(cache_dir) / ("kernels_control_" + key + ".json");
  if (std::filesystem::exists(path)) {
    try {
      std::ifstream in(path, std::ios::binary);
      const nlohmann::json j = nlohmann::json::parse(in);
      if (j.at("family") == "control" && j.at("key") == key &&
          j.at("solver_version").get<int>() == kKernelSolverVersion &&
          mesh_matches(j.at("mesh"), mesh)) {
        KernelSet ks;
        ks.mesh = mesh;
        const std::size_t sz = mesh.size();
        ks.k11 = array_field(j, "k11", sz);
        ks.k12 = array_field(j, "k12", sz);
        ks.k21 = array_field(j, "k21", sz);
        ks.k22 = array_field(j, "k22", sz);
        ks.l11 = array_field(j, "l11", sz);
        ks.l12 = array_field(j, "l12", sz);
        ks.l21 = array_field(j, "l21", sz);
        ks.l22 = array_field(j, "l22", sz);
        ks.theta =
            array_field(j, "theta", static_cast<std::size_t>(mesh.n));
        ks.stats.iterations = j.at("iterations").get<int>();
        return ks;
      }
    } catch (const std::exception&) {
      // Unreadable or stale cache entry: fall through to a fresh solve.
    }
  }
  KernelSet ks = solve_control_kernels(lc, mesh, opt);
  nlohmann::json j;
  j["family"] = "control";
  j["key"] = key;
  j["solver_version"] = kKernelSolverVersion;
  j["mesh"] = mesh_to_json(mesh);
  j["tol"] = opt.tol;
  j["k11"] = ks.k11;
  j["k12"] = ks.k12;
  j["k21"] = ks.k21;
  j["k22"] = ks.k22;
  j["l11"] = ks.l11;
  j["l12"] = ks.l12;
  j["l21"] = ks.l21;
  j["l22"] = ks.l22;
  j["theta"] = ks.theta;
  j["iterations"] = ks.stats.iterations;
  std::filesystem::create_directories(cache_dir);
  atomic_write(path, j.dump());
  return ks;
}

ObserverKernelSet solve_observer_kernels_cached(const LinearCoeffs& lc,
                                                const TriMesh& mesh,
                                                const SolveOptions& opt,
                                                const std::string& cache_dir) {
  if (cache_dir.empty()) return solve_observer_kernels(lc, mesh, opt);
  const std::string key = hex_key(kernel_cache_key(lc, mesh, opt.tol,
                                                   "observer"));
  const std::filesystem::path path =
      std::filesystem::path(cache_dir) / ("kernels_observer_" + key + ".json");
  if (std::filesystem::exists(path)) {
    try {
      std::ifstream in(path, std::ios::binary);
      const nlohmann::json j = nlohmann::json::parse(in);
      if (j.at("family") == "observer" && j.at("key") == key &&
          j.at("solver_version").get<int>() == kKernelSolverVersion &&
          mesh_matches(j.at("mesh"), mesh)) {
        ObserverKernelSet oks;
        oks.mesh = mesh;
        const std::size_t sz = mesh.size();
        const std::size_t ne = static_cast<std::size_t>(mesh.n);
        oks.m11 = array_field(j, "m11", sz);
        oks.m12 = array_field(j, "m12", sz);
        oks.m21 = array_field(j, "m21", sz);
        oks.m22 = array_field(j, "m22", sz);
        oks.n11 = array_field(j, "n11", sz);
        oks.n12 = array_field(j, "n12", sz);
        oks.n21 = array_field(j, "n21", sz);
        oks.n22 = array_field(j, "n22", sz);
        oks.lambda = array_field(j, "lambda", ne);
        oks.p11 = array_field(j, "p11", ne);
        oks.p12 = array_field(j, "p12", ne);
        oks.p21 = array_field(j, "p21", ne);
        oks.p22 = array_field(j, "p22", ne);
        oks.q11 = array_field(j, "q11", ne);
        oks.q12 = array_field(j, "q12", ne);
        oks.q21 = array_field(j, "q21", ne);
        oks.q22 = array_field(j, "q22", ne);
        oks.stats.iterations = j.at("iterations").get<int>();
        return oks;
      }
    } catch (const std::exception&) {
      // Unreadable or stale cache entry: fall through to a fresh solve.
    }
  }
  ObserverKernelSet oks = solve_observer_kernels(lc, mesh, opt);
  nlohmann::json j;
  j["family"] = "observer";
  j["key"] = key;
  j["solver_version"] = kKernelSolverVersion;
  j["mesh"] = mesh_to_json(mesh);
  j["tol"] = opt.tol;
  j["m11"] = oks.m11;
  j["m12"] = oks.m12;
  j["m21"] = oks.m21;
  j["m22"] = oks.m22;
  j["n11"] = oks.n11;
  j["n12"] = oks.n12;
  j["n21"] = oks.n21;
  j["n22"] = oks.n22;
  j["lambda"] = oks.lambda;
  j["p11"] = oks.p11;
  j["p12"] = oks.p12;
  j["p21"] = oks.p21;
  j["p22"] = oks.p22;
  j["q11"] = oks.q11;
  j["q12"] = oks.q12;
  j["q21"] = oks.q21;
  j["q22"] = oks.q22;
  j["iterations"] = oks.stats.iterations;
  std::filesystem::create_directories(cache_dir);
  atomic_write(path, j.dump());
  return oks;
}

}  // namespace twolane
