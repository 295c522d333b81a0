#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "bstab/equilibrium.hpp"
#include "bstab/errors.hpp"
#include "bstab/norms.hpp"
#include "bstab/rng.hpp"
#include "bstab/scenario.hpp"
#include "bstab/spectral.hpp"

using namespace bstab;

namespace {

// Bundled unstable configuration: N = 4 with two real eigenvalues and one
// conjugate pair at 16x16.
Scenario unstable_scenario() {
  Scenario s;
  s.nx = s.ny = 16;
  s.nu = s.kappa = 0.01;
  s.gamma = 5.0;
  s.forcing = "manufactured";
  s.amp = 1.0;
  s.strat = 1.0;
  return s;
}

struct Fixture {
  Grid2D g;
  Equilibrium eq;
  BlockOperator op, adj;
  Fixture(const Scenario& s)
      : g(s.make_grid()),
        eq([&] {
          ForcingBundle fb = build_forcing(s, g);
          return solve_steady(g, s.nu, s.kappa, s.gamma, fb.f, fb.gsrc, fb.init);
        }()),
        op(assemble_block(g, s.nu, s.kappa, s.gamma, eq.ye, eq.theta_e)),
        adj(op.make_adjoint()) {}
};

const Fixture& fixture16() {
  static Fixture f(unstable_scenario());
  return f;
}

}  // namespace

TEST_CASE("diffusion-only spectrum: stable, matches heat ground state") {
  Grid2D g = build_grid(12, 12, 1.0, 1.0);
  BlockOperator op = assemble_stokes_heat(g, 0.7, 0.4);
  SpectrumOptions so;
  so.n_eigs = 6;
  SpectralData sd = compute_spectrum(op, so);
  CHECK(sd.N == 0);
  CHECK(sd.M == 0);
  CHECK(sd.stable_margin < 0.0);
  // Leading eigenvalue is the slowest diffusive mode: -kappa * (heat ground)
  // here since kappa < nu and the heat ground eigenvalue is the smallest.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> heat(
      Eigen::MatrixXd(stencils::laplacian_c(g)));
  const double expect = 0.4 * heat.eigenvalues().maxCoeff();
  CHECK(sd.eigenvalues[0].real() == doctest::Approx(expect).epsilon(1e-8));
  CHECK(std::abs(sd.eigenvalues[0].imag()) < 1e-10);
}

TEST_CASE("unstable scenario: dense spectrum structure") {
  const Fixture& fx = fixture16();
  SpectrumOptions so;
  so.n_eigs = 12;
  SpectralData sd = compute_spectrum(fx.op, so);

  CHECK(sd.N == 4);
  CHECK(sd.M == 4);
  CHECK(sd.K == 1);
  CHECK(sd.stable_margin < -0.3);
  // Conjugate-pair closure within the unstable set.
  int complex_groups = 0;
  for (const auto& grp : sd.groups)
    if (std::abs(grp.lambda.imag()) > 1e-8) ++complex_groups;
  CHECK(complex_groups == 2);
  // Residuals meet the contract.
  for (double r : sd.residuals) CHECK(r <= 1e-8);
}

TEST_CASE("arnoldi matches the dense oracle at 16x16") {
  const Fixture& fx = fixture16();
  SpectrumOptions dense;
  dense.n_eigs = 10;
  SpectralData sd_dense = compute_spectrum(fx.op, dense);

  SpectrumOptions arn = dense;
  arn.dense_limit = 0;  // force the iterative path
  arn.shifts = {Cplx(0.0, 0.0), Cplx(0.0, 3.6), Cplx(0.0, -3.6)};
  SpectralData sd_arn = compute_spectrum(fx.op, arn);

  REQUIRE(sd_arn.N == sd_dense.N);
  REQUIRE(sd_arn.M == sd_dense.M);
  for (int i = 0; i < sd_dense.N; ++i) {
    CHECK(std::abs(sd_arn.eigenvalues[i] - sd_dense.eigenvalues[i]) <
          1e-6 * std::max(1.0, std::abs(sd_dense.eigenvalues[i])));
  }
  for (std::size_t gi = 0; gi < sd_dense.groups.size(); ++gi)
    CHECK(sd_arn.groups[gi].geo_mult == sd_dense.groups[gi].geo_mult);
  // The adjoint spectrum agrees too (transpose has identical eigenvalues).
  SpectralData sd_adj = compute_spectrum(fx.adj, dense);
  for (int i = 0; i < sd_dense.N; ++i)
    CHECK(std::abs(sd_adj.eigenvalues[i].real() - sd_dense.eigenvalues[i].real()) < 1e-7);
}

TEST_CASE("subspace decomposition invariants") {
  const Fixture& fx = fixture16();
  SpectrumOptions so;
  so.n_eigs = 10;
  SpectralData spec = compute_spectrum(fx.op, so);
  SpectralData aspec = compute_spectrum(fx.adj, so);
  SubspaceDecomposition dec = build_projection(fx.op, spec, aspec);

  REQUIRE(dec.N == 4);
  // Biorthogonal normalization: W~^T V = I.
  CHECK((dec.W_tilde.transpose() * dec.V - MatX::Identity(4, 4)).norm() < 1e-10);

  Rng rng(7);
  const Grid2D& g = fx.g;
  for (int it = 0; it < 20; ++it) {
    Vec w = fx.op.leray().project_state(rng.gaussian_vec(g.n_state()));
    const Vec pw = dec.apply_PN(w);
    // Idempotence and invariance.
    CHECK((dec.apply_PN(pw) - pw).norm() < 1e-8 * w.norm());
    const Vec apw = fx.op.apply(pw);
    const Vec paw = dec.apply_PN(fx.op.apply(w));
    CHECK((apw - paw).norm() < 1e-8 * fx.op.apply(w).norm() + 1e-10);
    // Complement decomposition w = w_N + zeta with P zeta ~ 0.
    const Vec zeta = dec.apply_complement(w);
    CHECK(dec.apply_PN(zeta).norm() < 1e-8 * w.norm());
  }

  // rank(V) = N exactly.
  Eigen::ColPivHouseholderQR<MatX> qr(dec.V);
  CHECK(qr.rank() == 4);

  // Restricted matrix reproduces the unstable eigenvalues.
  Eigen::EigenSolver<MatX> es(dec.A_u);
  std::vector<Cplx> got;
  for (int i = 0; i < 4; ++i) got.push_back(es.eigenvalues()(i));
  for (const auto& grp : spec.groups) {
    double best = 1e9;
    for (const auto& l : got) best = std::min(best, std::abs(l - grp.lambda));
    CHECK(best < 1e-8 * std::max(1.0, std::abs(grp.lambda)));
  }
}

TEST_CASE("empty unstable set gives the zero projector") {
  Grid2D g = build_grid(8, 8, 1.0, 1.0);
  BlockOperator op = assemble_stokes_heat(g, 1.0, 1.0);
  SpectrumOptions so;
  SpectralData spec = compute_spectrum(op, so);
  SpectralData aspec = compute_spectrum(op.make_adjoint(), so);
  REQUIRE(spec.N == 0);
  SubspaceDecomposition dec = build_projection(op, spec, aspec);
  CHECK(dec.N == 0);
  Rng rng(1);
  Vec w = rng.gaussian_vec(g.n_state());
  CHECK(dec.apply_PN(w).norm() == 0.0);
}

TEST_CASE("contour projector agrees with the biorthogonal projector") {
  const Fixture& fx = fixture16();
  SpectrumOptions so;
  so.n_eigs = 10;
  SpectralData spec = compute_spectrum(fx.op, so);
  SpectralData aspec = compute_spectrum(fx.adj, so);
  SubspaceDecomposition dec = build_projection(fx.op, spec, aspec);

  ContourParams cp = choose_contour(spec);

  Rng rng(23);
  // Unstable eigenvector probe: projector acts as the identity.
  const Vec evec = dec.V.col(0);
  const Vec pe = contour_projection_apply(fx.op, cp, evec);
  CHECK((pe - dec.apply_PN(evec)).norm() < 1e-6 * evec.norm());
  CHECK((pe - evec).norm() < 1e-5 * evec.norm());

  // Stable-subspace probe: output near zero.
  Vec zeta = dec.apply_complement(fx.op.leray().project_state(rng.gaussian_vec(fx.g.n_state())));
  const Vec pz = contour_projection_apply(fx.op, cp, zeta);
  CHECK(pz.norm() < 1e-6 * zeta.norm());

  // Random probes match the biorthogonal representation.
  for (int it = 0; it < 3; ++it) {
    Vec w = fx.op.leray().project_state(rng.gaussian_vec(fx.g.n_state()));
    const Vec a = contour_projection_apply(fx.op, cp, w);
    const Vec b = dec.apply_PN(w);
    CHECK((a - b).norm() < 1e-6 * w.norm());
  }
}

TEST_CASE("schur invariant basis handles defective clusters") {
  // Jordan block with eigenvalue 0.5 embedded among stable directions.
  MatX A = MatX::Zero(6, 6);
  A(0, 0) = 0.5; A(0, 1) = 1.0; A(1, 1) = 0.5;  // defective pair
  A(2, 2) = -1.0; A(3, 3) = -2.0; A(4, 4) = -3.0; A(5, 5) = -4.0;
  // Conjugate by a random similarity to hide the structure.
  Rng rng(3);
  MatX S(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) S(i, j) = rng.gaussian();
  const MatX M = S * A * S.inverse();

  const MatX V = unstable_invariant_basis(M, 0.0);
  REQUIRE(V.cols() == 2);
  // Invariance: M V stays in span(V).
  const MatX MV = M * V;
  const MatX resid = MV - V * (V.transpose() * MV);
  CHECK(resid.norm() < 1e-8 * MV.norm());
}

TEST_CASE("spectrum report is valid JSON with the expected counts") {
  const Fixture& fx = fixture16();
  SpectrumOptions so;
  SpectralData sd = compute_spectrum(fx.op, so);
  const std::string json = spectrum_report_json(sd);
  CHECK(json.find("\"N\": 4") != std::string::npos);
  CHECK(json.find("\"unstable_groups\"") != std::string::npos);
}
