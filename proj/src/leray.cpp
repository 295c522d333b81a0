#include "bstab/leray.hpp"

#include <vector>

#include "bstab/errors.hpp"

namespace bstab {

LerayProjector::LerayProjector(const Grid2D& g)
    : grid_(g), D_(stencils::divergence(g)), G_(stencils::gradient(g)) {
  const int nc = g.n_c();
  // Bordered pressure-Poisson system: [ DG  1 ; 1^T  0 ].
  SpMat L = D_ * G_;
  std::vector<Triplet> t;
  t.reserve(L.nonZeros() + 2 * nc);
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < nc; ++i) {
    t.emplace_back(i, nc, 1.0);
    t.emplace_back(nc, i, 1.0);
  }
  SpMat B(nc + 1, nc + 1);
  B.setFromTriplets(t.begin(), t.end());
  poisson_.compute(B);
  if (poisson_.info() != Eigen::Success)
    throw FactorizationSingular("LerayProjector: pressure system factorization failed");
}

Vec LerayProjector::pressure_solve(const Vec& rhs) const {
  Vec b = Vec::Zero(grid_.n_c() + 1);
  b.head(grid_.n_c()) = rhs;
  const Vec sol = poisson_.solve(b);
  Vec pi = sol.head(grid_.n_c());
  pi.array() -= pi.mean();  // pinned modulo constants
  return pi;
}

Vec LerayProjector::project_vel(const Vec& vel) const {
  const Vec pi = pressure_solve(D_ * vel);
  return vel - G_ * pi;
}

Vec LerayProjector::project_state(const Vec& state) const {
  Vec out = state;
  out.head(grid_.n_vel()) = project_vel(state.head(grid_.n_vel()));
  return out;
}

double LerayProjector::divergence_inf(const Vec& x) const {
  const Vec vel = (x.size() == grid_.n_state()) ? Vec(x.head(grid_.n_vel())) : x;
  return (D_ * vel).cwiseAbs().maxCoeff();
}

}  // namespace bstab
