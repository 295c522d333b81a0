#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "bstab/operators.hpp"
#include "bstab/saddle.hpp"

namespace bstab {

using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

struct SpectrumOptions {
  int n_eigs = 12;                  // requested eigenvalues near the shifts
  std::vector<Cplx> shifts = {Cplx(0.0, 0.0)};
  double margin = 0.0;              // unstable set = { Re >= -margin }
  double cluster_tol = 1e-6;        // relative clustering of repeated eigenvalues
  double residual_tol = 1e-8;
  bool force_dense = false;         // dense oracle regardless of grid size
  int dense_limit = 24;             // grids up to this size go dense by default
  unsigned seed = 12345;            // Arnoldi start vector
};

/// One distinct eigenvalue of the unstable set with an orthonormal basis of
/// its eigenspace. Conjugate partners appear as separate entries.
struct EigenGroup {
  Cplx lambda;
  int geo_mult = 0;        // ell_i
  int alg_mult = 0;        // N_i (cluster size)
  MatXc vectors;           // n_state x geo_mult
  double max_residual = 0.0;
};

/// Spectrum of one operator (primal or adjoint), ordered by descending real
/// part, with the unstable cluster resolved into distinct eigenvalues.
struct SpectralData {
  std::vector<Cplx> eigenvalues;     // sorted, as computed near the shifts
  std::vector<double> residuals;     // matching order
  int N = 0;                         // algebraic count with Re >= -margin
  int M = 0;                         // distinct unstable eigenvalues
  int K = 0;                         // max geometric multiplicity
  double margin = 0.0;
  std::vector<EigenGroup> groups;    // unstable set only
  bool from_dense_oracle = false;

  /// Leading stable real part (Re lambda_{N+1}); 0 if not resolved.
  double stable_margin = 0.0;
};

SpectralData compute_spectrum(const BlockOperator& op, const SpectrumOptions& opts = {});

/// Eigenvalues/residuals/multiplicities as a JSON document.
std::string spectrum_report_json(const SpectralData& sd);

/// Oblique spectral decomposition built from matched primal/adjoint
/// eigen-data: P_N w = V (W^T V)^{-1} W^T w over the real-blocked bases.
struct SubspaceDecomposition {
  int N = 0;
  MatX V;        // right basis, n_state x N
  MatX W_tilde;  // normalized left basis: W_tilde^T V = I
  MatX A_u;      // restriction of the operator to the unstable subspace
  double gram_cond = 1.0;

  Vec apply_PN(const Vec& w) const {
    if (N == 0) return Vec::Zero(w.size());
    return V * (W_tilde.transpose() * w);
  }
  Vec apply_complement(const Vec& w) const { return w - apply_PN(w); }
  Vec coords(const Vec& w) const { return W_tilde.transpose() * w; }
};

struct ProjectionOptions {
  double gram_cond_limit = 1e8;  // beyond this the pairing is declared defective
};

SubspaceDecomposition build_projection(const BlockOperator& op, const SpectralData& spec,
                                       const SpectralData& adjoint_spec,
                                       const ProjectionOptions& opts = {});

/// Contour around the unstable cluster: a union of disjoint circles, one per
/// connected component of the cluster, so every loop stays well clear of the
/// spectrum and the trapezoid rule converges geometrically.
struct ContourParams {
  struct Loop {
    Cplx center;
    double radius;
  };
  std::vector<Loop> loops;
  int nodes_per_loop = 48;
};

/// Loop layout separating the unstable cluster of `spec` from the stable
/// spectrum (uses stable_margin for the gap).
ContourParams choose_contour(const SpectralData& spec);

/// Trapezoid contour integral of the resolvent applied to probes (one
/// factorization per node, shared across probes). Agrees with the
/// biorthogonal P_N when the contour encloses exactly the unstable cluster.
std::vector<Vec> contour_projection_apply(const BlockOperator& op, const ContourParams& cp,
                                          const std::vector<Vec>& probes);
Vec contour_projection_apply(const BlockOperator& op, const ContourParams& cp, const Vec& probe);

/// Invariant-subspace basis of a dense matrix for the eigenvalue cluster
/// { Re >= -margin }, via complex Schur reordering; robust for defective
/// clusters. Returns a real orthonormal basis.
MatX unstable_invariant_basis(const MatX& A, double margin);

}  // namespace bstab
