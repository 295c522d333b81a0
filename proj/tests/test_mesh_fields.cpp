#include <doctest.h>

#include <cmath>

#include "bstab/errors.hpp"
#include "bstab/grid.hpp"
#include "bstab/norms.hpp"
#include "bstab/patch.hpp"
#include "bstab/rng.hpp"
#include "bstab/stencils.hpp"

using namespace bstab;

TEST_CASE("grid spacings and rejection of bad input") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  CHECK(g.dx() == 1.0 / 16);  // exact by definition
  CHECK(g.dy() == 1.0 / 16);

  Grid2D g2 = build_grid(8, 16, 1.0, 2.0);
  CHECK(g2.dx() == 1.0 / 8);
  CHECK(g2.dy() == 1.0 / 8);

  CHECK_THROWS_AS(build_grid(2, 2, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(16, 16, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("index maps round-trip") {
  Grid2D g = build_grid(7, 5, 1.0, 1.0);
  // Every stored DOF has a unique in-range index; inverting (i,j) recovers it.
  std::vector<int> seen(g.n_state(), 0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) seen[g.iu(i, j)]++;
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) seen[g.iv(i, j)]++;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) seen[g.ic(i, j)]++;
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("state pack/unpack bijection on random states") {
  Grid2D g = build_grid(9, 6, 2.0, 1.0);
  Rng rng(7);
  for (int it = 0; it < 1000; ++it) {
    Vec x = rng.gaussian_vec(g.n_state());
    VelocityField vel(g);
    ScalarField h(g);
    unpack_state(g, x, vel, h);
    Vec back = pack_state(g, vel, h);
    REQUIRE((back - x).norm() == 0.0);
  }
}

TEST_CASE("lq_norm basics") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  ScalarField one(g);
  one.s.setOnes();
  CHECK(lq_norm(g, one, 2.0) == doctest::Approx(1.0).epsilon(1e-14));

  ScalarField zero(g);
  CHECK(lq_norm(g, zero, 3.0) == 0.0);
  CHECK_THROWS_AS(lq_norm(g, one, 0.5), ConfigError);

  // sin(pi x) sin(pi y): ||.||_2 = 1/2 up to quadrature error.
  auto f = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
  ScalarField s(g, stencils::sample_c(g, f));
  CHECK(lq_norm(g, s, 2.0) == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("lq_norm convergence under refinement") {
  // Midpoint quadrature is exact for sin*sin squared, so probe convergence
  // on a function with a nonvanishing quadrature error instead.
  auto f = [](double x, double y) { return std::exp(x) * std::sin(M_PI * y); };
  const double exact = std::sqrt((std::exp(2.0) - 1.0) / 4.0);
  double prev_err = -1.0;
  for (int n : {8, 16, 32, 64}) {
    Grid2D g = build_grid(n, n, 1.0, 1.0);
    ScalarField s(g, stencils::sample_c(g, f));
    const double err = std::abs(lq_norm(g, s, 2.0) - exact);
    if (prev_err > 0.0) CHECK(err < prev_err / 1.9);  // at least first order
    prev_err = err;
  }
}

TEST_CASE("lq_norm triangle inequality and homogeneity") {
  Grid2D g = build_grid(12, 10, 1.0, 1.3);
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    const double q = 2.0 + 3.0 * rng.uniform();
    Vec a = rng.gaussian_vec(g.n_c()), b = rng.gaussian_vec(g.n_c());
    ScalarField fa(g, a), fb(g, b), fab(g, a + b);
    CHECK(lq_norm(g, fab, q) <= lq_norm(g, fa, q) + lq_norm(g, fb, q) + 1e-12);
    const double c = rng.uniform(0.1, 10.0);
    ScalarField fc(g, c * a);
    CHECK(lq_norm(g, fc, q) ==
          doctest::Approx(c * lq_norm(g, fa, q)).epsilon(1e-12));
  }
}

TEST_CASE("besov proxy: zero, homogeneity, admissibility") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  const double q = 3.0, p = 1.1;
  BesovProxy proxy(g, q, p);

  ScalarField zero(g);
  CHECK(proxy.value(zero) == 0.0);

  Rng rng(3);
  ScalarField f(g, rng.gaussian_vec(g.n_c()));
  ScalarField f2(g, 2.0 * f.s);
  const double a = proxy.value(f), b = proxy.value(f2);
  CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-10));

  CHECK_THROWS_AS(BesovProxy(g, 2.0, 1.2), ConfigError);   // q too small
  CHECK_THROWS_AS(BesovProxy(g, 3.0, 1.2), ConfigError);   // p at the 2q/(2q-1) edge
  CHECK_THROWS_AS(BesovProxy(g, 3.0, 1.1, 2), ConfigError);  // too few scales
}

TEST_CASE("besov proxy penalizes roughness at matched Lq norm") {
  Grid2D g = build_grid(32, 32, 1.0, 1.0);
  const double q = 3.0, p = 1.1;
  BesovProxy proxy(g, q, p);

  auto smooth = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
  ScalarField fs(g, stencils::sample_c(g, smooth));

  // Sharp interior bump, rescaled to the same L^q norm.
  auto bump = [](double x, double y) {
    const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    return std::exp(-r2 / (2.0 * 0.03 * 0.03));
  };
  ScalarField fb(g, stencils::sample_c(g, bump));
  fb.s *= lq_norm(g, fs, q) / lq_norm(g, fb, q);
  REQUIRE(lq_norm(g, fb, q) == doctest::Approx(lq_norm(g, fs, q)).epsilon(1e-12));

  CHECK(proxy.value(fb) > proxy.value(fs));
}

TEST_CASE("besov proxy sandwiched between Lq and W2q regression constants") {
  // Constants measured once on this fixed seed/grid and frozen with margin.
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  const double q = 3.0, p = 1.1;
  BesovProxy proxy(g, q, p);
  Rng rng(19);
  for (int it = 0; it < 20; ++it) {
    ScalarField f(g, rng.gaussian_vec(g.n_c()));
    const double bes = proxy.value(f);
    CHECK(bes >= 0.05 * lq_norm(g, f, q));
    CHECK(bes <= 10.0 * w2q_proxy_norm(g, f, q));
  }
}

TEST_CASE("patch mask validity") {
  Grid2D g = build_grid(16, 16, 1.0, 1.0);
  PatchMask m(g, 0.3, 0.7, 0.3, 0.7);
  CHECK(m.mask_c().sum() > 0.0);
  CHECK(m.mask_u().maxCoeff() == 1.0);
  CHECK_THROWS(PatchMask(g, -0.1, 0.5, 0.3, 0.7));  // leaks outside
  CHECK_THROWS(PatchMask(g, 0.7, 0.3, 0.3, 0.7));   // empty
}
