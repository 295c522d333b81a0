#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bstab/feedback.hpp"
#include "bstab/norms.hpp"
#include "bstab/operators.hpp"

namespace bstab {

enum class Scheme { ImexCnAb2, ImplicitEuler };

struct IntegratorConfig {
  double dt = 1e-3;
  double t_final = 10.0;
  Scheme scheme = Scheme::ImexCnAb2;
  double cfl_safety = 0.8;
  bool project_per_stage = true;
  int sample_every = 10;      // trace cadence in steps
  int checkpoint_every = 0;   // full-state cadence; 0 disables
  double blowup_factor = 1e6;
  double q = 3.0, p = 1.1;    // norms recorded in the trace
};

/// Time series of norms, control amplitudes and solenoidality defects, plus
/// optional full-state checkpoints for Duhamel verification.
struct SimulationTrace {
  std::vector<double> t;
  std::vector<double> lq_zh;
  std::vector<double> besov_z;
  std::vector<double> lq_h;
  std::vector<std::vector<double>> ctrl;  // per sample, K entries
  std::vector<double> div_inf;

  std::vector<double> chk_t;
  std::vector<Vec> chk_state;

  bool blown_up = false;
  bool nan_abort = false;
  double last_good_time = 0.0;
  int K = 0;
  double dt = 0.0;
  std::string note;

  void to_csv(const std::string& path) const;
};

/// CFL-style step bound from the equilibrium field, initial data magnitude
/// and the diffusivities.
double cfl_bound(const Grid2D& g, const BlockOperator& op, const Vec& w0, double cfl_safety);

/// Linear closed loop w' = A w + F(w); pass law = nullptr for open loop.
SimulationTrace simulate_linear(const BlockOperator& op, const FeedbackLaw* law, const Vec& w0,
                                const IntegratorConfig& cfg);

/// Full translated nonlinear dynamics with the frozen linear law.
SimulationTrace simulate_nonlinear(const BlockOperator& op, const FeedbackLaw* law,
                                   const VelocityField& z0, const ScalarField& h0,
                                   const IntegratorConfig& cfg);

/// Reconstruct the variation-of-parameters right-hand side from checkpoints
/// using the dense reduced propagator (grids <= 16x16) and report the largest
/// relative defect. `nonlinear` switches the quadratic source on.
double verify_duhamel(const BlockOperator& op, const FeedbackLaw* law,
                      const SimulationTrace& trace, bool nonlinear);

}  // namespace bstab
