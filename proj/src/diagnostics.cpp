#include "bstab/diagnostics.hpp"

#include <cmath>
#include <numeric>

#include "bstab/errors.hpp"

namespace bstab {

const std::vector<double>& trace_column(const SimulationTrace& trace, TraceColumn col) {
  switch (col) {
    case TraceColumn::LqZh: return trace.lq_zh;
    case TraceColumn::BesovZ: return trace.besov_z;
    default: return trace.lq_h;
  }
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values,
                   const FitWindow& window) {
  if (t.size() != values.size() || t.size() < 2)
    throw ConfigError("fit_decay: malformed trace");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError("fit_decay: times must increase strictly");

  const double T = t.back();
  double ta = window.t_a >= 0.0 ? window.t_a : 0.1 * T;
  double tb = window.t_b >= 0.0 ? window.t_b : T;

  DecayFit fit;
  const double v0 = values.front();
  const double floor_abs = window.floor_rel * std::abs(v0);

  // Shrink the window ahead of the roundoff floor / nonpositive samples.
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < ta) continue;
    if (t[i] > tb) break;
    if (!(values[i] > floor_abs)) {
      tb = t[i] - 1e-300;
      fit.window_shrunk = true;
      break;
    }
  }

  std::vector<double> xs, ys;
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < ta || t[i] > tb) continue;
    if (!(values[i] > 0.0)) continue;
    xs.push_back(t[i]);
    ys.push_back(std::log(values[i]));
    if (values[i] > prev * (1.0 + 1e-12)) monotone = false;
    prev = values[i];
  }
  if (xs.size() < 10)
    throw NumericalError("fit_decay: fewer than 10 usable samples in the fit window");

  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw NumericalError("fit_decay: degenerate time window");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    rss += r * r;
  }

  fit.gamma_tilde = -slope;
  fit.prefactor = std::exp(intercept) / std::abs(v0);
  fit.t_a = xs.front();
  fit.t_b = xs.back();
  fit.fit_residual = std::sqrt(rss / n);
  fit.monotone = monotone;
  fit.samples = int(xs.size());
  return fit;
}

DecayFit fit_decay(const SimulationTrace& trace, TraceColumn col, const FitWindow& window) {
  return fit_decay(trace.t, trace_column(trace, col), window);
}

double lp_time_norm(const std::vector<double>& t, const std::vector<double>& values, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("lp_time_norm: p in (1, inf)");
  if (t.size() != values.size() || t.size() < 2)
    throw ConfigError("lp_time_norm: malformed trace");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double a = std::pow(std::abs(values[i - 1]), p);
    const double b = std::pow(std::abs(values[i]), p);
    acc += 0.5 * (a + b) * (t[i] - t[i - 1]);
  }
  return std::pow(acc, 1.0 / p);
}

double lp_time_norm(const SimulationTrace& trace, TraceColumn col, double p) {
  return lp_time_norm(trace.t, trace_column(trace, col), p);
}

RateRelation rate_relation_check(const std::vector<double>& gamma0,
                                 const std::vector<double>& gamma_tilde) {
  if (gamma0.size() != gamma_tilde.size() || gamma0.size() < 3)
    throw ConfigError("rate_relation_check: need at least 3 runs");
  const double n = double(gamma0.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < gamma0.size(); ++i) {
    sx += gamma0[i];
    sy += gamma_tilde[i];
    sxx += gamma0[i] * gamma0[i];
    sxy += gamma0[i] * gamma_tilde[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-14 * std::max(1.0, sxx))
    throw ConfigError("rate_relation_check: gamma0 values are degenerate");

  RateRelation rr;
  rr.slope = (n * sxy - sx * sy) / denom;
  rr.intercept = (sy - rr.slope * sx) / n;
  rr.monotone = true;
  // Requires gamma0 sorted ascending for the monotonicity reading.
  std::vector<std::size_t> order(gamma0.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return gamma0[a] < gamma0[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (gamma_tilde[order[i]] <= gamma_tilde[order[i - 1]]) rr.monotone = false;
  rr.slope_in_range = rr.slope >= 0.7 && rr.slope <= 1.1;
  return rr;
}

}  // namespace bstab
