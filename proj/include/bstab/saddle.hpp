#pragma once

#include <Eigen/SparseLU>
#include <complex>

#include "bstab/grid.hpp"
#include "bstab/stencils.hpp"

namespace bstab {

using Cplx = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<Cplx>;
using VecC = Eigen::VectorXcd;

/// Divergence-constrained solver: factorizes
///
///   [ S   G   0 ] [ w  ]   [ b ]
///   [ D   0   1 ] [ pi ] = [ 0 ]
///   [ 0  1^T  0 ] [ mu ]   [ 0 ]
///
/// for a given state block S (n_state x n_state). The velocity part of the
/// returned w is exactly divergence-free and satisfies P(S w - b) = 0, i.e.
/// this inverts the Leray-projected operator over the solenoidal subspace.
/// The 1-border pins the constant pressure mode.
class SaddleSolver {
public:
  SaddleSolver() = default;
  void factorize(const Grid2D& g, const SpMat& S);
  bool ready() const { return ready_; }
  /// Returns the state part of the solution (size n_state).
  Vec solve(const Vec& b_state) const;

private:
  int n_state_ = 0, n_c_ = 0;
  Eigen::SparseLU<SpMat> lu_;
  bool ready_ = false;
};

/// Complex-shifted variant for resolvent and contour work.
class SaddleSolverC {
public:
  SaddleSolverC() = default;
  void factorize(const Grid2D& g, const SpMat& A, Cplx shift);  // S = A - shift I
  bool ready() const { return ready_; }
  VecC solve(const VecC& b_state) const;

private:
  int n_state_ = 0, n_c_ = 0;
  Eigen::SparseLU<SpMatC> lu_;
  bool ready_ = false;
};

/// Assemble the bordered saddle matrix from a state block (shared by both
/// solvers; exposed for tests).
SpMat assemble_saddle(const Grid2D& g, const SpMat& S);

}  // namespace bstab
