#include "bstab/equilibrium.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "bstab/errors.hpp"
#include "bstab/norms.hpp"
#include "bstab/saddle.hpp"

namespace bstab {

using nlohmann::json;

Vec steady_residual(const Grid2D& g, const LerayProjector& P, double nu, double kappa,
                    double gamma, const VelocityField& y, const ScalarField& th,
                    const VelocityField& f, const ScalarField& gsrc) {
  const SpMat Lv = stencils::laplacian_vel(g);
  const SpMat Lc = stencils::laplacian_c(g);
  Vec yvel(g.n_vel());
  yvel.head(g.n_u()) = y.u;
  yvel.tail(g.n_v()) = y.v;

  Vec rv = nu * (Lv * yvel);
  rv -= stencils::advect_vel_in_b(g, y.u, y.v) * yvel;
  rv += gamma * (stencils::buoyancy(g) * th.s);
  rv.head(g.n_u()) += f.u;
  rv.tail(g.n_v()) += f.v;
  rv = P.project_vel(rv);

  Vec rs = kappa * (Lc * th.s);
  rs -= stencils::advect_scal_in_s(g, y.u, y.v) * th.s;
  rs += gsrc.s;

  Vec r(g.n_state());
  r.head(g.n_vel()) = rv;
  r.tail(g.n_c()) = rs;
  return r;
}

namespace {

// Unprojected velocity-row right-hand side; used for pressure recovery.
Vec steady_rhs_raw_vel(const Grid2D& g, double nu, double gamma, const VelocityField& y,
                       const ScalarField& th, const VelocityField& f) {
  const SpMat Lv = stencils::laplacian_vel(g);
  Vec yvel(g.n_vel());
  yvel.head(g.n_u()) = y.u;
  yvel.tail(g.n_v()) = y.v;
  Vec rv = nu * (Lv * yvel);
  rv -= stencils::advect_vel_in_b(g, y.u, y.v) * yvel;
  rv += gamma * (stencils::buoyancy(g) * th.s);
  rv.head(g.n_u()) += f.u;
  rv.tail(g.n_v()) += f.v;
  return rv;
}

}  // namespace

Equilibrium solve_steady(const Grid2D& g, double nu, double kappa, double gamma,
                         const VelocityField& f, const ScalarField& gsrc,
                         const std::optional<Equilibrium>& init, const SteadyOptions& opts) {
  if (!(nu > 0.0) || !(kappa > 0.0)) throw ConfigError("solve_steady: nu, kappa must be positive");
  if (!f.u.allFinite() || !f.v.allFinite() || !gsrc.s.allFinite())
    throw ConfigError("solve_steady: forcing must be finite");

  LerayProjector P(g);
  VelocityField y = init ? init->ye : VelocityField(g);
  ScalarField th = init ? init->theta_e : ScalarField(g);
  // Keep the iterate on the solenoidal manifold from the start.
  {
    Vec yv(g.n_vel());
    yv.head(g.n_u()) = y.u;
    yv.tail(g.n_v()) = y.v;
    yv = P.project_vel(yv);
    y.u = yv.head(g.n_u());
    y.v = yv.tail(g.n_v());
  }

  std::vector<double> history;
  Vec r = steady_residual(g, P, nu, kappa, gamma, y, th, f, gsrc);
  double rn = norm_l2(g, r);
  history.push_back(rn);

  SpMat eye(g.n_state(), g.n_state());
  eye.setIdentity();

  auto try_step = [&](const Vec& delta, VelocityField& y_new, ScalarField& th_new, Vec& r_new,
                      double& rn_new) {
    double alpha = 1.0;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      y_new.u = y.u + alpha * delta.head(g.n_u());
      y_new.v = y.v + alpha * delta.segment(g.n_u(), g.n_v());
      th_new.s = th.s + alpha * delta.tail(g.n_c());
      r_new = steady_residual(g, P, nu, kappa, gamma, y_new, th_new, f, gsrc);
      rn_new = norm_l2(g, r_new);
      if (std::isfinite(rn_new) && rn_new < rn) return true;
      alpha *= 0.5;
    }
    return false;
  };

  int iter = 0;
  double shift = 0.0;  // pseudo-transient regularization, 0 = pure Newton
  for (; iter < opts.max_iter && rn > opts.tol; ++iter) {
    const BlockOperator jac = assemble_block(g, nu, kappa, gamma, y, th);
    VelocityField y_new(g);
    ScalarField th_new(g);
    Vec r_new;
    double rn_new = rn;
    bool accepted = false;

    // Pure (or current-shift) Newton step with damping; a stall near a
    // singular Jacobian (bifurcation point) falls back to increasingly
    // transient steps (shift I - J) delta = r and recovers.
    for (double s = shift; s <= 1e6; s = (s == 0.0) ? 1e-2 : 64.0 * s) {
      SaddleSolver solver;
      try {
        solver.factorize(g, SpMat(jac.raw() - s * eye));
      } catch (const FactorizationSingular&) {
        continue;
      }
      const Vec delta = solver.solve(Vec(-r));
      if (!delta.allFinite()) continue;
      if (try_step(delta, y_new, th_new, r_new, rn_new)) {
        accepted = true;
        shift = (s > 0.0 && rn_new > 0.5 * rn) ? s : 0.0;  // relax back to Newton
        break;
      }
    }
    if (!accepted) {
      history.push_back(rn_new);
      throw NonConvergence("solve_steady: Newton stalled even with transient damping; "
                           "consider continuation_ramp", history);
    }
    y = y_new;
    th = th_new;
    r = r_new;
    rn = rn_new;
    history.push_back(rn);
  }
  if (rn > opts.tol)
    throw NonConvergence("solve_steady: Newton did not reach tolerance within max_iter; "
                         "consider continuation_ramp", history);

  Equilibrium eq(g);
  eq.ye = y;
  eq.theta_e = th;
  eq.f = f;
  eq.gsrc = gsrc;
  eq.nu = nu;
  eq.kappa = kappa;
  eq.gamma = gamma;
  eq.residual_norm = rn;
  eq.newton_iters = iter;
  // Pressure from the projection residual of the raw velocity rows.
  const Vec rv = steady_rhs_raw_vel(g, nu, gamma, y, th, f);
  eq.pressure.s = P.pressure_solve(P.divergence() * rv);
  return eq;
}

Equilibrium continuation_ramp(const Grid2D& g, double nu, double kappa, double gamma,
                              const VelocityField& f, const ScalarField& gsrc, int steps,
                              const SteadyOptions& opts) {
  if (steps < 1) throw ConfigError("continuation_ramp: steps >= 1 required");
  std::optional<Equilibrium> seed;
  auto at_scale = [&](double scale) {
    VelocityField fs(g);
    fs.u = scale * f.u;
    fs.v = scale * f.v;
    ScalarField gs(g, Vec(scale * gsrc.s));
    seed = solve_steady(g, nu, kappa, gamma, fs, gs, seed, opts);
  };

  double reached = 0.0;
  for (int s = 1; s <= steps; ++s) {
    const double target = double(s) / steps;
    // Bisect the increment when a step straddles a fold/bifurcation.
    int splits = 0;
    double next = target;
    while (true) {
      try {
        at_scale(next);
        reached = next;
        if (next >= target) break;
        next = target;
      } catch (const NonConvergence& e) {
        if (++splits > 6)
          throw NonConvergence("continuation_ramp: step " + std::to_string(s) + "/" +
                                   std::to_string(steps) + " failed after bisection: " + e.what(),
                               e.residual_history);
        next = 0.5 * (reached + next);
      }
    }
  }
  return *seed;
}

namespace {

void write_block(std::ofstream& os, const Vec& x) {
  os.write(reinterpret_cast<const char*>(x.data()),
           static_cast<std::streamsize>(sizeof(double) * x.size()));
}

Vec read_block(std::ifstream& is, Eigen::Index n) {
  Vec x(n);
  is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!is) throw ConfigError("snapshot: truncated field block");
  return x;
}

}  // namespace

void save_equilibrium(const std::string& path, const Grid2D& g, const Equilibrium& eq) {
  json header = {
      {"format", "bstab-equilibrium"},
      {"version", 1},
      {"endian", "little"},
      {"grid", {{"nx", g.nx()}, {"ny", g.ny()}, {"Lx", g.Lx()}, {"Ly", g.Ly()}}},
      {"physics", {{"nu", eq.nu}, {"kappa", eq.kappa}, {"gamma", eq.gamma}}},
      {"residual_norm", eq.residual_norm},
      {"newton_iters", eq.newton_iters},
      {"blocks", {"ye_u", "ye_v", "theta_e", "pressure", "f_u", "f_v", "g"}},
  };
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("save_equilibrium: cannot open " + path);
  os << header.dump() << "\n";
  write_block(os, eq.ye.u);
  write_block(os, eq.ye.v);
  write_block(os, eq.theta_e.s);
  write_block(os, eq.pressure.s);
  write_block(os, eq.f.u);
  write_block(os, eq.f.v);
  write_block(os, eq.gsrc.s);
}

Equilibrium load_equilibrium(const std::string& path, const Grid2D& g) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_equilibrium: cannot open " + path);
  std::string line;
  std::getline(is, line);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "bstab-equilibrium")
    throw ConfigError("load_equilibrium: not an equilibrium snapshot: " + path);
  if (header["grid"]["nx"] != g.nx() || header["grid"]["ny"] != g.ny())
    throw ConfigError("load_equilibrium: snapshot grid mismatch");

  Equilibrium eq(g);
  eq.nu = header["physics"]["nu"];
  eq.kappa = header["physics"]["kappa"];
  eq.gamma = header["physics"]["gamma"];
  eq.residual_norm = header["residual_norm"];
  eq.newton_iters = header.value("newton_iters", 0);
  eq.ye.u = read_block(is, g.n_u());
  eq.ye.v = read_block(is, g.n_v());
  eq.theta_e.s = read_block(is, g.n_c());
  eq.pressure.s = read_block(is, g.n_c());
  eq.f.u = read_block(is, g.n_u());
  eq.f.v = read_block(is, g.n_v());
  eq.gsrc.s = read_block(is, g.n_c());
  return eq;
}

}  // namespace bstab
