// SPDX-License-Identifier: Apache-2.0
/// \file kernels.hpp
/// \brief Backstepping kernel equations for the boundary controller and the
///        boundary observer, solved by successive approximations along
///        characteristics on a triangular lattice.
///
/// Feedback kernels (K_ij, L_ij) live on the lower triangle
/// T = {0 <= xi <= x <= L}.  Observer kernels are solved in reflected
/// coordinates xb = L - x, xib = L - xi, which again form a lower triangle;
/// the stored observer fields are the reflected ones, and the injection
/// gains are exported on the physical x axis.
///
/// All stored kernels act on the physical characteristic deviations
/// (w-tilde, v-tilde).  In these variables the coupling blocks of the kernel
/// equations are the constant relaxation matrices, so the solution stays
/// O(|a|/speed) across the whole triangle.  The equivalent kernels acting on
/// the exponentially weighted velocity states grow like exp(rate * x) with
/// rate = a_vv[i][i] / mu_i and differ only by exact exponential row/column
/// factors; the quantities that feed the weighted equations (injection gains
/// q_ij, the diagnostic theta) apply that factor at export.
///
/// Discretization: uniform lattice with spacing h = L / (n - 1).  Each sweep
/// recomputes every component by tracing its characteristic from the node to
/// the boundary or diagonal that carries its data and applying trapezoidal
/// quadrature to the coupling terms of the previous sweep (pure Jacobi:
/// within a sweep no component reads another component's updated values, so
/// results do not depend on update order).

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "twolane/errors.hpp"
#include "twolane/linearize.hpp"

namespace twolane {

/// Triangular lattice over {0 <= xi <= x <= L} with n nodes per edge.
struct TriMesh {
  int n = 0;          ///< nodes per edge (>= 16)
  double h = 0.0;     ///< lattice spacing L / (n - 1)
  double length = 0.0;

  static TriMesh make(double length, int n);

  std::size_t size() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2;
  }
  /// Row-major triangular index of node (i, j), j <= i; x = i h, xi = j h.
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2 +
           static_cast<std::size_t>(j);
  }
  bool operator==(const TriMesh& other) const {
    return n == other.n && h == other.h && length == other.length;
  }
};

/// Iteration settings of the kernel solver.
struct SolveOptions {
  double tol = 1e-9;   ///< max-norm change between sweeps declaring converged
  int max_iter = 200;  ///< sweep budget before Error(numerics)
};

/// Convergence record of one solve.
struct SolveStats {
  int iterations = 0;
  std::vector<double> sweep_diffs;  ///< max-norm change after each sweep
};

/// State-feedback kernels on the lower triangle, plus the inlet-edge
/// diagnostic gain theta.  Vectors are indexed by TriMesh::idx.
struct KernelSet {
  TriMesh mesh;
  std::vector<double> k11, k12, k21, k22;  ///< kernels acting on w~
  std::vector<double> l11, l12, l21, l22;  ///< kernels acting on v~
  std::vector<double> theta;               ///< theta(x_i) at the n x-nodes
  SolveStats stats;
};

/// Observer kernels in reflected coordinates, plus output-injection gains on
/// the physical axis (index i corresponds to x = i h).
struct ObserverKernelSet {
  TriMesh mesh;
  std::vector<double> m11, m12, m21, m22;  ///< transform block acting on w-error
  std::vector<double> n11, n12, n21, n22;  ///< transform block for the v-error
  std::vector<double> lambda;              ///< inlet-edge diagnostic gain
  std::vector<double> p11, p12, p21, p22;  ///< injection gains, w~ equations
  std::vector<double> q11, q12, q21, q22;  ///< injection gains, vbar equations
  SolveStats stats;
};

/// Observer kernels solved in the direct (unreflected) orientation on the
/// upper triangle {x <= xi}; node (i_x, i_xi) with i_x <= i_xi is stored at
/// mesh.idx(i_xi, i_x).  Used to cross-check the reflected solver.
struct DirectObserverKernelSet {
  TriMesh mesh;
  std::vector<double> m11, m12, m21, m22;
  std::vector<double> n11, n12, n21, n22;
  SolveStats stats;
};

KernelSet solve_control_kernels(const LinearCoeffs& lc, const TriMesh& mesh,
                                const SolveOptions& opt = {});
ObserverKernelSet solve_observer_kernels(const LinearCoeffs& lc,
                                         const TriMesh& mesh,
                                         const SolveOptions& opt = {});
DirectObserverKernelSet solve_observer_kernels_direct(
    const LinearCoeffs& lc, const TriMesh& mesh, const SolveOptions& opt = {});

/// Finite-difference residual of one kernel equation over the strictly
/// interior lattice nodes that lie farther than 2h from the solution's
/// lines of reduced regularity (where an artificial boundary value meets
/// in-domain data, the exact kernels jump or kink and centered differences
/// do not converge).
struct EquationResidual {
  std::string name;
  double max_abs = 0.0;
  double rms = 0.0;
  int nodes = 0;
};

/// Residual report for a kernel family: one entry per transport equation,
/// plus the largest violation of any imposed boundary/diagonal condition.
struct ResidualReport {
  std::vector<EquationResidual> equations;
  double interior_max = 0.0;
  double boundary_max = 0.0;
};

ResidualReport kernel_residual(const KernelSet& ks, const LinearCoeffs& lc);
ResidualReport kernel_residual(const ObserverKernelSet& oks,
                               const LinearCoeffs& lc);
ResidualReport kernel_residual(const DirectObserverKernelSet& dks,
                               const LinearCoeffs& lc);

/// FNV-1a key of a kernel solve: coefficients, mesh, tolerance, family tag,
/// and solver version.  Stable across runs on one platform.
std::uint64_t kernel_cache_key(const LinearCoeffs& lc, const TriMesh& mesh,
                               double tol, const std::string& family);

/// Cache-aware wrappers: look for <cache_dir>/kernels_<family>_<key>.json,
/// validate its key and mesh, and fall back to a fresh solve (writing the
/// cache file) on any mismatch.  An empty cache_dir disables caching.
KernelSet solve_control_kernels_cached(const LinearCoeffs& lc,
                                       const TriMesh& mesh,
                                       const SolveOptions& opt,
                                       const std::string& cache_dir);
ObserverKernelSet solve_observer_kernels_cached(const LinearCoeffs& lc,
                                                const TriMesh& mesh,
                                                const SolveOptions& opt,
                                                const std::string& cache_dir);

}  // namespace twolane
