#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bstab/equilibrium.hpp"
#include "bstab/integrator.hpp"
#include "bstab/patch.hpp"

namespace bstab {

/// Full description of one experiment: grid, physics, forcing family,
/// control patch, norms, synthesis and integration parameters.
struct Scenario {
  std::string name = "scenario";

  int nx = 16, ny = 16;
  double Lx = 1.0, Ly = 1.0;

  double nu = 0.01, kappa = 0.01, gamma = 5.0, theta_bar = 0.0;

  // Forcing families:
  //   manufactured - forcing computed so a prescribed shear cell plus
  //                  stratification is an exact discrete equilibrium
  //   cell         - heat source amp sin(pi x/Lx) sin(pi y/Ly)
  //   stratified   - x-independent heat source amp sin(pi y/Ly)
  //   none         - zero forcing
  std::string forcing = "manufactured";
  double amp = 1.0;     // velocity-cell amplitude (manufactured) or heat amp
  double strat = 1.0;   // stratification amplitude (manufactured only)
  int ramp_steps = 1;

  double patch_x0 = 0.25, patch_x1 = 0.75, patch_y0 = 0.25, patch_y1 = 0.75;

  double q = 3.0, p = 1.1;

  double gamma0_fraction = 0.5;  // gamma0 = fraction * |Re lambda_{N+1}|
  std::string strategy = "auto";  // auto | pole_placement | lqr
  int k_override = 0;
  double margin = 0.0;
  double gamma1_factor = 1.25;

  int n_eigs = 12;
  double omega_guess = 3.6;
  bool force_dense = false;

  double dt = 2e-3;
  double t_final = 12.0;
  int sample_every = 10;
  int checkpoint_every = 0;
  double cfl_safety = 0.9;
  std::string scheme = "imex-cn-ab2";  // or implicit-euler

  std::string out_dir = "out";
  std::uint64_t seed = 42;
  double ic_scale = 1e-3;  // V^{q,p}-proxy norm of the nonlinear IC

  Grid2D make_grid() const { return Grid2D(nx, ny, Lx, Ly); }
  PatchMask make_patch(const Grid2D& g) const {
    return PatchMask(g, patch_x0, patch_x1, patch_y0, patch_y1);
  }
  IntegratorConfig make_integrator() const;
  void validate() const;  // throws ConfigError on inadmissible settings
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
/// FNV-1a over the canonical serialization.
std::string scenario_hash(const Scenario& s);

struct ForcingBundle {
  ForcingBundle(const Grid2D& g) : f(g), gsrc(g) {}
  VelocityField f;
  ScalarField gsrc;
  std::optional<Equilibrium> init;  // manufactured families carry the target
};

ForcingBundle build_forcing(const Scenario& s, const Grid2D& g);

}  // namespace bstab
