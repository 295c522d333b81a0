#include "bstab/saddle.hpp"

#include <vector>

#include "bstab/errors.hpp"

namespace bstab {

SpMat assemble_saddle(const Grid2D& g, const SpMat& S) {
  const int ns = g.n_state(), nc = g.n_c(), nv = g.n_vel();
  const SpMat D = stencils::divergence(g);
  const SpMat G = stencils::gradient(g);
  std::vector<Triplet> t;
  t.reserve(S.nonZeros() + 2 * D.nonZeros() + 2 * nc);
  for (int k = 0; k < S.outerSize(); ++k)
    for (SpMat::InnerIterator it(S, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < G.outerSize(); ++k)
    for (SpMat::InnerIterator it(G, k); it; ++it)
      t.emplace_back(it.row(), ns + it.col(), it.value());  // gradient hits velocity rows only
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it)
      t.emplace_back(ns + it.row(), it.col(), it.value());
  (void)nv;
  for (int i = 0; i < nc; ++i) {
    t.emplace_back(ns + i, ns + nc, 1.0);
    t.emplace_back(ns + nc, ns + i, 1.0);
  }
  SpMat K(ns + nc + 1, ns + nc + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

void SaddleSolver::factorize(const Grid2D& g, const SpMat& S) {
  n_state_ = g.n_state();
  n_c_ = g.n_c();
  const SpMat K = assemble_saddle(g, S);
  lu_.compute(K);
  if (lu_.info() != Eigen::Success)
    throw FactorizationSingular("SaddleSolver: LU factorization failed (shift at an eigenvalue?)");
  ready_ = true;
}

Vec SaddleSolver::solve(const Vec& b_state) const {
  Vec b = Vec::Zero(n_state_ + n_c_ + 1);
  b.head(n_state_) = b_state;
  const Vec sol = lu_.solve(b);
  return sol.head(n_state_);
}

void SaddleSolverC::factorize(const Grid2D& g, const SpMat& A, Cplx shift) {
  n_state_ = g.n_state();
  n_c_ = g.n_c();
  SpMat eye(A.rows(), A.cols());
  eye.setIdentity();
  const SpMat Kr = assemble_saddle(g, A);
  // Promote to complex and subtract the shift on the state diagonal.
  std::vector<Eigen::Triplet<Cplx>> t;
  t.reserve(Kr.nonZeros() + n_state_);
  for (int k = 0; k < Kr.outerSize(); ++k)
    for (SpMat::InnerIterator it(Kr, k); it; ++it)
      t.emplace_back(it.row(), it.col(), Cplx(it.value(), 0.0));
  for (int i = 0; i < n_state_; ++i) t.emplace_back(i, i, -shift);
  SpMatC K(Kr.rows(), Kr.cols());
  K.setFromTriplets(t.begin(), t.end());
  lu_.compute(K);
  if (lu_.info() != Eigen::Success)
    throw FactorizationSingular("SaddleSolverC: LU factorization failed at shift");
  ready_ = true;
}

VecC SaddleSolverC::solve(const VecC& b_state) const {
  VecC b = VecC::Zero(n_state_ + n_c_ + 1);
  b.head(n_state_) = b_state;
  const VecC sol = lu_.solve(b);
  return sol.head(n_state_);
}

}  // namespace bstab
