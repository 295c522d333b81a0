#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "bstab/errors.hpp"
#include "bstab/norms.hpp"
#include "bstab/operators.hpp"
#include "bstab/rng.hpp"

using namespace bstab;

namespace {

VelocityField random_solenoidal(const Grid2D& g, Rng& rng, double scale = 1.0) {
  const SpMat C = stencils::stream_curl(g);
  Vec w = C * Vec(scale * rng.gaussian_vec(g.n_psi()));
  VelocityField z(g);
  z.u = w.head(g.n_u());
  z.v = w.tail(g.n_v());
  return z;
}

}  // namespace

TEST_CASE("advection is skew-symmetric for solenoidal advecting fields") {
  Grid2D g = build_grid(12, 10, 1.0, 1.2);
  Rng rng(21);
  for (int it = 0; it < 20; ++it) {
    VelocityField a = random_solenoidal(g, rng);
    Vec b = rng.gaussian_vec(g.n_vel());
    const SpMat Adv = stencils::advect_vel_in_b(g, a.u, a.v);
    CHECK(std::abs(b.dot(Adv * b)) < 1e-12 * b.squaredNorm() * (a.u.norm() + a.v.norm()));

    Vec s = rng.gaussian_vec(g.n_c());
    const SpMat AdvS = stencils::advect_scal_in_s(g, a.u, a.v);
    CHECK(std::abs(s.dot(AdvS * s)) < 1e-12 * s.squaredNorm() * (a.u.norm() + a.v.norm()));
  }
}

TEST_CASE("stokes-heat operator: definiteness and decoupled spectrum") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  const double nu = 1.0, kap = 1.0;
  BlockOperator op = assemble_stokes_heat(g, nu, kap);
  CHECK_THROWS_AS(assemble_stokes_heat(g, -1.0, 1.0), ConfigError);

  // Dense eigensolve on the solenoidal reduction.
  Eigen::MatrixXd B = solenoidal_basis(g);
  Eigen::MatrixXd Ared = reduce_dense(op, B);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(Ared);
  const double max_re = eig.eigenvalues().real().maxCoeff();
  CHECK(max_re < 0.0);

  // Union-of-spectra: velocity sub-block and heat sub-block separately.
  const int np = g.n_psi();
  Eigen::MatrixXd Av = Ared.topLeftCorner(np, np);
  Eigen::MatrixXd Ah = Ared.bottomRightCorner(g.n_c(), g.n_c());
  CHECK(Ared.topRightCorner(np, g.n_c()).norm() == 0.0);     // gamma = 0
  CHECK(Ared.bottomLeftCorner(g.n_c(), np).norm() == 0.0);   // theta_e = 0

  Eigen::VectorXd full = eig.eigenvalues().real();
  std::sort(full.begin(), full.end());
  Eigen::EigenSolver<Eigen::MatrixXd> ev(Av), eh(Ah);
  Eigen::VectorXd uni(np + g.n_c());
  uni.head(np) = ev.eigenvalues().real();
  uni.tail(g.n_c()) = eh.eigenvalues().real();
  std::sort(uni.begin(), uni.end());
  CHECK((full - uni).cwiseAbs().maxCoeff() < 1e-8 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("heat block ground eigenvalue approaches -kappa 2 pi^2") {
  double prev_err = 1e9;
  for (int n : {16, 32}) {
    Grid2D g = build_grid(n, n, 1.0, 1.0);
    Eigen::MatrixXd Lc = Eigen::MatrixXd(stencils::laplacian_c(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Lc);
    const double ground = eig.eigenvalues().maxCoeff();  // least negative
    const double err = std::abs(-ground - 2.0 * M_PI * M_PI);
    CHECK(err < 0.05 * 2.0 * M_PI * M_PI);
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("assemble_block consistency and adjoint by transpose") {
  Grid2D g = build_grid(12, 12, 1.0, 1.0);
  Rng rng(33);

  // Zero equilibrium, zero gamma: identical to stokes-heat, entrywise.
  BlockOperator a = assemble_block(g, 0.7, 0.3, 0.0, VelocityField(g), ScalarField(g));
  BlockOperator b = assemble_stokes_heat(g, 0.7, 0.3);
  CHECK((a.raw() - b.raw()).norm() == 0.0);

  // Nontrivial equilibrium.
  VelocityField ye = random_solenoidal(g, rng);
  ScalarField te(g, rng.gaussian_vec(g.n_c()));
  BlockOperator op = assemble_block(g, 0.05, 0.04, 2.5, ye, te);
  BlockOperator adj = op.make_adjoint();
  CHECK((SpMat(adj.raw().transpose()) - op.raw()).norm() == 0.0);

  // <A x, y> = <x, A* y> in the discrete L2 pairing for random x, y.
  for (int it = 0; it < 100; ++it) {
    Vec x = rng.gaussian_vec(g.n_state());
    Vec y = rng.gaussian_vec(g.n_state());
    const double lhs = inner_l2(g, op.apply(x), y);
    const double rhs = inner_l2(g, x, adj.apply(y));
    CHECK(std::abs(lhs - rhs) <
          1e-10 * norm_l2(g, x) * norm_l2(g, y) * std::max(1.0, op.raw().norm()));
  }
}

TEST_CASE("block operator preserves the solenoidal subspace") {
  Grid2D g = build_grid(10, 10, 1.0, 1.0);
  Rng rng(4);
  VelocityField ye = random_solenoidal(g, rng);
  ScalarField te(g, rng.gaussian_vec(g.n_c()));
  BlockOperator op = assemble_block(g, 0.1, 0.1, 1.0, ye, te);
  for (int it = 0; it < 20; ++it) {
    Vec x = rng.gaussian_vec(g.n_state());
    x = op.leray().project_state(x);
    Vec y = op.apply(x);
    CHECK(op.leray().divergence_inf(y) < 1e-10 * (y.norm() + 1e-300));
  }
}

TEST_CASE("nonlinear terms: quadratic scaling and advection identity") {
  Grid2D g = build_grid(14, 14, 1.0, 1.0);
  Rng rng(55);
  LerayProjector P(g);
  VelocityField z = random_solenoidal(g, rng);
  ScalarField h(g, rng.gaussian_vec(g.n_c()));

  VelocityField Nz(g), Nz2(g);
  ScalarField Mh(g), Mh2(g);
  nonlinear_terms(g, P, z, h, Nz, Mh);

  // Zero input -> zero output.
  VelocityField z0(g);
  ScalarField h0(g), M0(g);
  VelocityField N0(g);
  nonlinear_terms(g, P, z0, h0, N0, M0);
  CHECK(N0.u.norm() == 0.0);
  CHECK(M0.s.norm() == 0.0);

  // Inputs x2 -> outputs x4.
  VelocityField zz(g);
  zz.u = 2.0 * z.u;
  zz.v = 2.0 * z.v;
  ScalarField hh(g, 2.0 * h.s);
  nonlinear_terms(g, P, zz, hh, Nz2, Mh2);
  CHECK((Nz2.u - 4.0 * Nz.u).norm() < 1e-12 * Nz2.u.norm());
  CHECK((Mh2.s - 4.0 * Mh.s).norm() < 1e-12 * Mh2.s.norm());

  // Skew-symmetry of scalar advection: <z.grad h, h> ~ 0.
  const double ip = inner_l2(g, Mh.s, h.s);
  CHECK(std::abs(ip) < 1e-8 * (z.u.norm() + z.v.norm()) * h.s.squaredNorm());

  // N_q output is divergence-free after projection.
  Vec nvel(g.n_vel());
  nvel.head(g.n_u()) = Nz.u;
  nvel.tail(g.n_v()) = Nz.v;
  CHECK(P.divergence_inf(nvel) < 1e-10 * (nvel.norm() + 1e-300));
}

TEST_CASE("nonlinear estimate surrogates have stable constants") {
  // Discrete shadows of ||N(z)||_q <= C ||z||^2 and ||M[z]h||_q <= C ||z|| ||h||.
  Rng rng(77);
  const double q = 3.0, p = 1.1;
  double prev_cn = -1.0, prev_cm = -1.0;
  for (int n : {12, 16, 24}) {
    Grid2D g = build_grid(n, n, 1.0, 1.0);
    LerayProjector P(g);
    BesovProxy proxy(g, q, p);
    double cn = 0.0, cm = 0.0;
    for (int it = 0; it < 30; ++it) {
      VelocityField z = random_solenoidal(g, rng, 1e-2);
      ScalarField h(g, 1e-2 * rng.gaussian_vec(g.n_c()));
      VelocityField Nz(g);
      ScalarField Mh(g);
      nonlinear_terms(g, P, z, h, Nz, Mh);
      const double wz = w2q_proxy_norm(g, z, q);
      cn = std::max(cn, lq_norm(g, Nz, q) / (wz * wz));
      cm = std::max(cm, lq_norm(g, Mh, q) / (wz * lq_norm(g, h, q)));
    }
    if (prev_cn > 0.0) {
      CHECK(cn < 10.0 * prev_cn);
      CHECK(cm < 10.0 * prev_cm);
    }
    prev_cn = cn;
    prev_cm = cm;
  }
}

TEST_CASE("sparse triplet export format") {
  Grid2D g = build_grid(8, 8, 1.0, 1.0);
  BlockOperator op = assemble_stokes_heat(g, 1.0, 1.0);
  std::ostringstream os;
  op.export_triplets(os);
  std::istringstream is(os.str());
  int rows, cols;
  long nnz;
  is >> rows >> cols >> nnz;
  CHECK(rows == g.n_state());
  CHECK(cols == g.n_state());
  CHECK(nnz == op.raw().nonZeros());
  int r, c;
  double v;
  long count = 0;
  while (is >> r >> c >> v) {
    CHECK(r >= 0);
    CHECK(r < rows);
    CHECK(c >= 0);
    CHECK(c < cols);
    ++count;
  }
  CHECK(count == nnz);
}
