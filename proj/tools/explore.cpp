// Scratch bring-up driver; not part of the shipped CLI.
#include <cstdio>
#include <iostream>
#include <optional>

#include "bstab/equilibrium.hpp"
#include "bstab/leray.hpp"
#include "bstab/spectral.hpp"
#include "bstab/stencils.hpp"

using namespace bstab;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 16;
  const double nu = argc > 2 ? std::atof(argv[2]) : 0.05;
  const double kap = argc > 3 ? std::atof(argv[3]) : 0.05;
  const double gamma = argc > 4 ? std::atof(argv[4]) : 10.0;
  const double amp = argc > 5 ? std::atof(argv[5]) : 1.0;
  const int ramp = argc > 6 ? std::atoi(argv[6]) : 1;

  const int family = argc > 7 ? std::atoi(argv[7]) : 0;  // 0: cell, 1: stratified, 2: manufactured
  const double strat = argc > 8 ? std::atof(argv[8]) : 1.0;
  Grid2D g = build_grid(n, n, 1.0, 1.0);
  VelocityField f(g);
  ScalarField src(g, stencils::sample_c(g, [&](double x, double y) {
                    if (family == 1) return amp * std::sin(M_PI * y);
                    return amp * std::sin(M_PI * x) * std::sin(M_PI * y);
                  }));
  std::optional<Equilibrium> init;
  if (family == 2) {
    // Target fields: one shear cell + adverse stratification; forcing is
    // whatever makes them an exact discrete equilibrium.
    Vec psi(g.n_psi());
    for (int j = 1; j <= g.ny() - 1; ++j)
      for (int i = 1; i <= g.nx() - 1; ++i) {
        const double x = i * g.dx(), y = j * g.dy();
        psi[g.lpsi(i, j)] = amp / M_PI * std::pow(std::sin(M_PI * x) * std::sin(M_PI * y), 2);
      }
    const Vec yv = stencils::stream_curl(g) * psi;
    VelocityField Y(g);
    Y.u = yv.head(g.n_u());
    Y.v = yv.tail(g.n_v());
    ScalarField Theta(g, stencils::sample_c(g, [&](double x, double y) {
                        return strat * std::sin(M_PI * x) * std::sin(2.0 * M_PI * y);
                      }));
    // f = -(nu Lap Y - (Y.grad)Y + gamma Theta e2),  g = -(kap Lap T - Y.grad T)
    Vec fv = -(nu * (stencils::laplacian_vel(g) * yv) -
               stencils::advect_vel_in_b(g, Y.u, Y.v) * yv +
               gamma * (stencils::buoyancy(g) * Theta.s));
    f.u = fv.head(g.n_u());
    f.v = fv.tail(g.n_v());
    src.s = -(kap * (stencils::laplacian_c(g) * Theta.s) -
              stencils::advect_scal_in_s(g, Y.u, Y.v) * Theta.s);
    Equilibrium seed(g);
    seed.ye = Y;
    seed.theta_e = Theta;
    init = std::move(seed);
  }
  try {
    Equilibrium eq = (family == 2) ? solve_steady(g, nu, kap, gamma, f, src, init)
                                   : continuation_ramp(g, nu, kap, gamma, f, src, ramp);
    std::printf("newton ok: iters=%d residual=%.3e |ye|=%.4f |te|=%.4f\n", eq.newton_iters,
                eq.residual_norm, eq.ye.u.cwiseAbs().maxCoeff() + eq.ye.v.cwiseAbs().maxCoeff(),
                eq.theta_e.s.cwiseAbs().maxCoeff());
    {
      // x-variance of theta_e and solenoidal buoyancy leakage diagnostics
      double xvar = 0.0;
      for (int j = 0; j < g.ny(); ++j) {
        double mean = 0.0;
        for (int i = 0; i < g.nx(); ++i) mean += eq.theta_e.s[g.lc(i, j)];
        mean /= g.nx();
        for (int i = 0; i < g.nx(); ++i)
          xvar = std::max(xvar, std::abs(eq.theta_e.s[g.lc(i, j)] - mean));
      }
      LerayProjector P(g);
      Vec b = stencils::buoyancy(g) * eq.theta_e.s;
      std::printf("theta_e x-variation=%.3e |P B theta|=%.3e\n", xvar,
                  P.project_vel(b).norm());
    }
    BlockOperator op = assemble_block(g, nu, kap, gamma, eq.ye, eq.theta_e);
    SpectrumOptions so;
    so.n_eigs = 12;
    SpectralData sd = compute_spectrum(op, so);
    std::printf("N=%d M=%d K=%d stable_margin=%.5f\n", sd.N, sd.M, sd.K, sd.stable_margin);
    for (std::size_t i = 0; i < sd.eigenvalues.size() && i < 8; ++i)
      std::printf("  lambda[%zu] = %+.6f %+.6fi  (res %.2e)\n", i, sd.eigenvalues[i].real(),
                  sd.eigenvalues[i].imag(), sd.residuals[i]);
  } catch (const std::exception& e) {
    std::printf("FAILED: %s\n", e.what());
    return 1;
  }
  return 0;
}
