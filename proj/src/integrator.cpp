#include "bstab/integrator.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <fstream>

#include "bstab/errors.hpp"
#include "bstab/saddle.hpp"

namespace bstab {

void SimulationTrace::to_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("trace: cannot open " + path);
  os << "t,lq_zh,besov_proxy_z,lq_h";
  for (int k = 1; k <= K; ++k) os << ",ctrl_" << k;
  os << ",div_inf\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i] << "," << lq_zh[i] << "," << besov_z[i] << "," << lq_h[i];
    for (int k = 0; k < K; ++k) os << "," << ctrl[i][k];
    os << "," << div_inf[i] << "\n";
  }
}

double cfl_bound(const Grid2D& g, const BlockOperator& op, const Vec& w0, double cfl_safety) {
  const double hmin = std::min(g.dx(), g.dy());
  double vmax = 1e-6;
  vmax = std::max(vmax, op.ye_u().size() ? op.ye_u().cwiseAbs().maxCoeff() : 0.0);
  vmax = std::max(vmax, op.ye_v().size() ? op.ye_v().cwiseAbs().maxCoeff() : 0.0);
  if (w0.size() == g.n_state()) {
    vmax += w0.head(g.n_vel()).cwiseAbs().maxCoeff();
  }
  // Diffusion is implicit; nu, kappa enter only as an effective velocity.
  const double veff = vmax + (op.nu + op.kappa) / hmin;
  return cfl_safety * hmin / veff;
}

namespace {

struct NormRecorder {
  const Grid2D& g;
  BesovProxy proxy;
  double q;
  NormRecorder(const Grid2D& grid, double q_, double p_) : g(grid), proxy(grid, q_, p_), q(q_) {}

  void record(SimulationTrace& tr, double time, const Vec& w, const LerayProjector& P,
              const FeedbackLaw* law) {
    tr.t.push_back(time);
    tr.lq_zh.push_back(lq_norm_state(g, w, q));
    VelocityField z(g);
    ScalarField h(g);
    unpack_state(g, w, z, h);
    tr.besov_z.push_back(proxy.value(z));
    tr.lq_h.push_back(lq_norm(g, h, q));
    std::vector<double> c(tr.K, 0.0);
    if (law && law->K > 0) {
      const Vec amp = law->control(w);
      for (int k = 0; k < tr.K; ++k) c[k] = amp[k];
    }
    tr.ctrl.push_back(std::move(c));
    tr.div_inf.push_back(P.divergence_inf(w));
  }
};

SimulationTrace run_imex(const BlockOperator& op, const FeedbackLaw* law, const Vec& w0,
                         const IntegratorConfig& cfg, bool nonlinear) {
  const Grid2D& g = op.grid();
  if (!(cfg.dt > 0.0)) throw CflViolation("integrator: dt must be positive");
  const double bound = cfl_bound(g, op, w0, cfg.cfl_safety);
  if (cfg.dt > bound)
    throw CflViolation("integrator: dt = " + std::to_string(cfg.dt) +
                       " exceeds the advective bound " + std::to_string(bound));

  const LerayProjector& P = op.leray();
  Vec w = P.project_state(w0);

  SimulationTrace tr;
  tr.K = law ? law->K : 0;
  tr.dt = cfg.dt;

  // Implicit factorization: CN uses I - dt/2 A, implicit Euler I - dt A.
  const double theta = (cfg.scheme == Scheme::ImexCnAb2) ? 0.5 : 1.0;
  SpMat eye(g.n_state(), g.n_state());
  eye.setIdentity();
  SaddleSolver solver;
  solver.factorize(g, SpMat(eye - (theta * cfg.dt) * op.raw()));

  auto explicit_rhs = [&](const Vec& state) {
    Vec e = Vec::Zero(g.n_state());
    if (nonlinear) e -= nonlinear_state(g, state);
    if (law && law->K > 0) e += law->apply(state);
    return e;
  };

  NormRecorder rec(g, cfg.q, cfg.p);
  rec.record(tr, 0.0, w, P, law);
  const double norm0 = w.norm();
  if (cfg.checkpoint_every > 0) {
    tr.chk_t.push_back(0.0);
    tr.chk_state.push_back(w);
  }

  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  Vec e_prev = explicit_rhs(w);
  tr.last_good_time = 0.0;

  for (long n = 0; n < nsteps; ++n) {
    const double t_new = (n + 1) * cfg.dt;
    Vec e_now = (n == 0) ? e_prev : explicit_rhs(w);
    Vec e_extrap;
    if (cfg.scheme == Scheme::ImexCnAb2)
      e_extrap = (n == 0) ? e_now : Vec(1.5 * e_now - 0.5 * e_prev);
    else
      e_extrap = e_now;
    e_prev = e_now;

    Vec b;
    if (cfg.scheme == Scheme::ImexCnAb2)
      b = w + (0.5 * cfg.dt) * (op.raw() * w) + cfg.dt * e_extrap;
    else
      b = w + cfg.dt * e_extrap;

    Vec w_new = solver.solve(b);
    if (cfg.project_per_stage) w_new = P.project_state(w_new);

    if (!w_new.allFinite()) {
      tr.nan_abort = true;
      tr.note = "NaN detected at t = " + std::to_string(t_new);
      break;
    }
    if (norm0 > 0.0 && w_new.norm() > cfg.blowup_factor * norm0) {
      tr.blown_up = true;
      tr.note = "norm exceeded blowup factor at t = " + std::to_string(t_new);
      break;
    }

    w = std::move(w_new);
    tr.last_good_time = t_new;
    if ((n + 1) % std::max(1, cfg.sample_every) == 0 || n + 1 == nsteps)
      rec.record(tr, t_new, w, P, law);
    if (cfg.checkpoint_every > 0 && (n + 1) % cfg.checkpoint_every == 0) {
      tr.chk_t.push_back(t_new);
      tr.chk_state.push_back(w);
    }
  }
  return tr;
}

}  // namespace

SimulationTrace simulate_linear(const BlockOperator& op, const FeedbackLaw* law, const Vec& w0,
                                const IntegratorConfig& cfg) {
  return run_imex(op, law, w0, cfg, /*nonlinear=*/false);
}

SimulationTrace simulate_nonlinear(const BlockOperator& op, const FeedbackLaw* law,
                                   const VelocityField& z0, const ScalarField& h0,
                                   const IntegratorConfig& cfg) {
  const Vec w0 = pack_state(op.grid(), z0, h0);
  return run_imex(op, law, w0, cfg, /*nonlinear=*/true);
}

double verify_duhamel(const BlockOperator& op, const FeedbackLaw* law,
                      const SimulationTrace& trace, bool nonlinear) {
  const Grid2D& g = op.grid();
  if (g.nx() > 16 || g.ny() > 16)
    throw ConfigError("verify_duhamel: dense propagator restricted to grids <= 16x16");
  if (trace.chk_state.size() < 3)
    throw ConfigError("verify_duhamel: trace carries no checkpoints");

  const MatX B = solenoidal_basis(g);
  MatX A = law ? reduce_closed_loop_dense(op, *law, B) : reduce_dense(op, B);

  const double dtc = trace.chk_t[1] - trace.chk_t[0];
  const MatX E = (A * dtc).exp();

  auto reduce = [&](const Vec& w) { return Vec(B.transpose() * w); };
  auto source = [&](const Vec& w) {
    return nonlinear ? Vec(-(B.transpose() * nonlinear_state(g, w))) : Vec::Zero(B.cols());
  };

  Vec lin = reduce(trace.chk_state[0]);
  Vec duh = Vec::Zero(B.cols());
  Vec src_prev = source(trace.chk_state[0]);
  const double scale = lin.norm();
  double max_defect = 0.0;

  for (std::size_t j = 1; j < trace.chk_state.size(); ++j) {
    const Vec src_now = source(trace.chk_state[j]);
    lin = E * lin;
    duh = E * duh + 0.5 * dtc * (E * src_prev + src_now);
    src_prev = src_now;
    const Vec defect = reduce(trace.chk_state[j]) - (lin + duh);
    max_defect = std::max(max_defect, defect.norm() / (scale + 1e-300));
  }
  return max_defect;
}

}  // namespace bstab
