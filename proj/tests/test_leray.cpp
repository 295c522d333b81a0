#include <doctest.h>

#include "bstab/grid.hpp"
#include "bstab/leray.hpp"
#include "bstab/norms.hpp"
#include "bstab/rng.hpp"
#include <Eigen/QR>

#include "bstab/saddle.hpp"
#include "bstab/stencils.hpp"

using namespace bstab;

TEST_CASE("leray projector invariants on random fields") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  LerayProjector P(g);
  Rng rng(100);

  for (int it = 0; it < 100; ++it) {
    Vec v = rng.gaussian_vec(g.n_vel());
    Vec pv = P.project_vel(v);
    // Range is discretely divergence-free.
    CHECK(P.divergence_inf(pv) < 1e-10 * v.norm());
    // Idempotent.
    Vec ppv = P.project_vel(pv);
    CHECK((ppv - pv).norm() < 1e-10 * (pv.norm() + 1e-300));
  }
}

TEST_CASE("leray kills gradients and fixes solenoidal fields") {
  Grid2D g = build_grid(16, 12, 1.0, 1.5);
  LerayProjector P(g);
  Rng rng(101);
  const SpMat G = stencils::gradient(g);
  const SpMat C = stencils::stream_curl(g);

  for (int it = 0; it < 50; ++it) {
    Vec s = rng.gaussian_vec(g.n_c());
    Vec gs = G * s;
    CHECK(P.project_vel(gs).norm() < 1e-10 * gs.norm());

    Vec psi = rng.gaussian_vec(g.n_psi());
    Vec w = C * psi;  // exactly divergence-free by construction
    CHECK(P.divergence_inf(w) < 1e-12 * w.norm());
    CHECK((P.project_vel(w) - w).norm() < 1e-10 * w.norm());
  }
}

TEST_CASE("projector equals orthogonal projection onto the stream-curl range") {
  Grid2D g = build_grid(8, 8, 1.0, 1.0);
  LerayProjector P(g);
  Eigen::MatrixXd C = Eigen::MatrixXd(stencils::stream_curl(g));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(g.n_vel(), g.n_psi());
  Rng rng(5);
  for (int it = 0; it < 10; ++it) {
    Vec v = rng.gaussian_vec(g.n_vel());
    Vec a = P.project_vel(v);
    Vec b = Q * (Q.transpose() * v);
    CHECK((a - b).norm() < 1e-10 * v.norm());
  }
}

TEST_CASE("saddle solver inverts the projected operator on the subspace") {
  Grid2D g = build_grid(8, 8, 1.0, 1.0);
  LerayProjector P(g);
  // S = I - 0.5 * Lap (SPD-ish state block), constrained solve.
  SpMat L(g.n_state(), g.n_state());
  {
    std::vector<Triplet> t;
    SpMat Lv = stencils::laplacian_vel(g), Lc = stencils::laplacian_c(g);
    for (int k = 0; k < Lv.outerSize(); ++k)
      for (SpMat::InnerIterator it(Lv, k); it; ++it)
        t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < Lc.outerSize(); ++k)
      for (SpMat::InnerIterator it(Lc, k); it; ++it)
        t.emplace_back(g.n_vel() + it.row(), g.n_vel() + it.col(), it.value());
    L.setFromTriplets(t.begin(), t.end());
  }
  SpMat eye(g.n_state(), g.n_state());
  eye.setIdentity();
  SpMat S = eye - 0.5 * L;

  SaddleSolver solver;
  solver.factorize(g, S);

  Rng rng(42);
  Vec b = rng.gaussian_vec(g.n_state());
  Vec w = solver.solve(b);
  // Constraint satisfied...
  CHECK(P.divergence_inf(w) < 1e-10 * w.norm());
  // ...and the projected residual vanishes.
  Vec r = S * w - b;
  Vec pr = P.project_state(r);
  pr.tail(g.n_c()).setZero();  // scalar rows are unconstrained and exact
  CHECK(pr.norm() < 1e-9 * b.norm());
  CHECK((S * w - b).tail(g.n_c()).norm() < 1e-9 * b.norm());
}
