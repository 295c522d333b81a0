#pragma once

#include <optional>
#include <string>

#include "bstab/grid.hpp"
#include "bstab/operators.hpp"

namespace bstab {

/// Steady state of the forced system: velocity, temperature, recovered
/// pressure (mean zero), with the forcing pair that produced it.
struct Equilibrium {
  Equilibrium(const Grid2D& g) : ye(g), theta_e(g), pressure(g), f(g), gsrc(g) {}
  VelocityField ye;
  ScalarField theta_e;
  ScalarField pressure;
  VelocityField f;
  ScalarField gsrc;
  double nu = 0.0, kappa = 0.0, gamma = 0.0;
  double residual_norm = 0.0;
  int newton_iters = 0;
};

struct SteadyOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 10;
};

/// Projected steady residual [P(nu Lap y - (y.grad)y + gamma th e2 + f);
/// kap Lap th - y.grad th + g]. The reference-temperature constant is
/// conservative and absorbed by the pressure, so it never appears here.
Vec steady_residual(const Grid2D& g, const LerayProjector& P, double nu, double kappa,
                    double gamma, const VelocityField& y, const ScalarField& th,
                    const VelocityField& f, const ScalarField& gsrc);

/// Damped Newton on the solenoidal manifold; the Jacobian at each iterate is
/// the assemble_block linearization, solved in divergence-constrained form.
/// Throws NonConvergence (with the residual history) when the forcing is too
/// strong for the initial guess.
Equilibrium solve_steady(const Grid2D& g, double nu, double kappa, double gamma,
                         const VelocityField& f, const ScalarField& gsrc,
                         const std::optional<Equilibrium>& init = std::nullopt,
                         const SteadyOptions& opts = {});

/// Ramp the forcing in `steps` equal increments, each converged state
/// seeding the next solve.
Equilibrium continuation_ramp(const Grid2D& g, double nu, double kappa, double gamma,
                              const VelocityField& f, const ScalarField& gsrc, int steps,
                              const SteadyOptions& opts = {});

/// Versioned snapshot: JSON header plus little-endian float64 field blocks.
void save_equilibrium(const std::string& path, const Grid2D& g, const Equilibrium& eq);
Equilibrium load_equilibrium(const std::string& path, const Grid2D& g);

}  // namespace bstab
