#pragma once

#include <string>
#include <vector>

#include "bstab/integrator.hpp"

namespace bstab {

/// Log-linear decay fit of a trace column against time.
struct DecayFit {
  double gamma_tilde = 0.0;   // -slope of log ||.||
  double prefactor = 0.0;     // M s.t. ||w(t)|| ~ M ||w0|| e^{-gamma t}
  double t_a = 0.0, t_b = 0.0;
  double fit_residual = 0.0;  // RMS of the log-linear fit
  bool monotone = true;
  bool window_shrunk = false;
  int samples = 0;
};

enum class TraceColumn { LqZh, BesovZ, LqH };

struct FitWindow {
  double t_a = -1.0;          // negative: skip the first 10% of the horizon
  double t_b = -1.0;          // negative: stop at the 1e-10 roundoff floor
  double floor_rel = 1e-10;
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values,
                   const FitWindow& window = {});
DecayFit fit_decay(const SimulationTrace& trace, TraceColumn col, const FitWindow& window = {});

/// Trapezoid L^p-in-time norm of a trace column, p in (1, inf).
double lp_time_norm(const std::vector<double>& t, const std::vector<double>& values, double p);
double lp_time_norm(const SimulationTrace& trace, TraceColumn col, double p);

/// Regression of fitted decay rates against the targeted gamma0 values:
/// the qualitative rate relation requires a positive slope in [0.7, 1.1]
/// and monotone growth.
struct RateRelation {
  double slope = 0.0;
  double intercept = 0.0;
  bool monotone = false;
  bool slope_in_range = false;
};

RateRelation rate_relation_check(const std::vector<double>& gamma0,
                                 const std::vector<double>& gamma_tilde);

const std::vector<double>& trace_column(const SimulationTrace& trace, TraceColumn col);

}  // namespace bstab
