#include "bstab/feedback.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <nlohmann/json.hpp>

#include "bstab/errors.hpp"
#include "bstab/rng.hpp"

namespace bstab {

using nlohmann::json;

ReducedAdjointVectors reduced_adjoint_vectors(const Grid2D& g, const SpectralData& adjoint_spec,
                                              const PatchMask& mask, double small_tol) {
  ReducedAdjointVectors out;
  const double dV = g.cell_volume();
  for (const auto& grp : adjoint_spec.groups) {
    ReducedAdjointVectors::Group rg;
    rg.lambda = grp.lambda;
    rg.geo_mult = grp.geo_mult;
    rg.vectors.resize(g.n_u() + g.n_c(), grp.geo_mult);
    for (int c = 0; c < grp.geo_mult; ++c) {
      const VecC full = grp.vectors.col(c);
      // Drop the wall-normal (second) velocity component, mask to omega.
      VecC red(g.n_u() + g.n_c());
      red.head(g.n_u()) =
          mask.mask_u().cast<Cplx>().cwiseProduct(full.head(g.n_u()));
      red.tail(g.n_c()) =
          mask.mask_c().cast<Cplx>().cwiseProduct(full.tail(g.n_c()));
      rg.vectors.col(c) = red;
      const double nrm = std::sqrt(dV) * red.norm();
      out.norms.push_back(nrm);
      out.flagged_small.push_back(nrm < small_tol);
    }
    out.groups.push_back(std::move(rg));
  }
  return out;
}

std::vector<Actuator> make_actuators(const Grid2D& g, const ReducedAdjointVectors& rav, int K,
                                     const PatchMask& mask, unsigned seed) {
  // Real span of the masked reduced adjoint vectors.
  std::vector<Vec> span;
  for (const auto& grp : rav.groups) {
    for (int c = 0; c < grp.geo_mult; ++c) {
      const VecC v = grp.vectors.col(c);
      if (grp.lambda.imag() < -1e-9) continue;  // conjugate partner spans the same plane
      Vec re = v.real(), im = v.imag();
      if (re.norm() > 1e-14) span.push_back(re);
      if (std::abs(grp.lambda.imag()) > 1e-9 && im.norm() > 1e-14) span.push_back(im);
    }
  }
  if (span.empty()) throw PolePlacementFailed("make_actuators: empty reduced adjoint span");

  Rng rng(seed);
  const double dV = g.cell_volume();
  std::vector<Actuator> acts;
  std::vector<Vec> ortho;
  for (int k = 0; k < K; ++k) {
    // Seeded generic combination, then Gram-Schmidt in the omega pairing.
    Vec cand = Vec::Zero(g.n_u() + g.n_c());
    for (const Vec& s : span) cand += rng.gaussian() * s;
    for (const Vec& o : ortho) cand -= (dV * o.dot(cand)) * o;
    for (const Vec& o : ortho) cand -= (dV * o.dot(cand)) * o;
    const double nrm = std::sqrt(dV) * cand.norm();
    if (nrm < 1e-12)
      throw PolePlacementFailed("make_actuators: reduced span has dimension < K on omega");
    cand /= nrm;
    ortho.push_back(cand);
    Actuator a;
    a.u1 = cand.head(g.n_u()).cwiseProduct(mask.mask_u());
    a.u2 = cand.tail(g.n_c()).cwiseProduct(mask.mask_c());
    acts.push_back(std::move(a));
  }
  return acts;
}

RankReport build_rank_matrices(const Grid2D& g, const std::vector<Actuator>& actuators,
                               const ReducedAdjointVectors& rav, double rank_tol) {
  const int K = int(actuators.size());
  int max_ell = 0;
  for (const auto& grp : rav.groups) max_ell = std::max(max_ell, grp.geo_mult);
  if (K < max_ell)
    throw ConfigError("build_rank_matrices: K = " + std::to_string(K) +
                      " < max geometric multiplicity " + std::to_string(max_ell));

  RankReport rep;
  rep.rank_tol = rank_tol;
  rep.verdict = true;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  const double dV = g.cell_volume();

  for (const auto& grp : rav.groups) {
    MatXc U(grp.geo_mult, K);
    for (int j = 0; j < grp.geo_mult; ++j)
      for (int k = 0; k < K; ++k) {
        const VecC& phi = grp.vectors.col(j);
        Cplx acc = actuators[k].u1.cast<Cplx>().cwiseProduct(phi.head(g.n_u())).sum();
        acc += actuators[k].u2.cast<Cplx>().cwiseProduct(phi.tail(g.n_c())).sum();
        U(j, k) = dV * acc;
      }
    Eigen::JacobiSVD<MatXc> svd(U);
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    const int rank = int((sv.array() > rank_tol * std::max(smax, 1e-300)).count());
    rep.U.push_back(U);
    rep.sigma_max.push_back(smax);
    rep.sigma_min.push_back(smin);
    rep.ranks.push_back(rank);
    rep.required.push_back(grp.geo_mult);
    if (rank < grp.geo_mult) rep.verdict = false;
    const double ratio = (smax > 0.0) ? smin / smax : 0.0;
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
  }
  if (rav.groups.empty()) {
    rep.verdict = false;
    rep.worst_ratio = 0.0;
  }
  return rep;
}

MatX place_poles(const MatX& A, const MatX& B, const std::vector<Cplx>& poles, unsigned seed) {
  const int N = int(A.rows()), K = int(B.cols());
  if (int(poles.size()) != N) throw PolePlacementFailed("place_poles: need N poles");

  Rng rng(seed);
  for (int attempt = 0; attempt < 4; ++attempt) {
    MatXc X(N, N), Z(K, N);
    bool ok = true;
    for (int j = 0; j < N; ++j) {
      // Conjugate-symmetric closing: reuse the partner's data.
      int partner = -1;
      for (int i = 0; i < j; ++i)
        if (std::abs(std::conj(poles[i]) - poles[j]) < 1e-12 * std::max(1.0, std::abs(poles[j])))
          partner = i;
      if (partner >= 0 && std::abs(poles[j].imag()) > 0.0) {
        X.col(j) = X.col(partner).conjugate();
        Z.col(j) = Z.col(partner).conjugate();
        continue;
      }
      VecC z(K);
      for (int k = 0; k < K; ++k)
        z[k] = (std::abs(poles[j].imag()) > 0.0)
                   ? Cplx(rng.gaussian(), rng.gaussian())
                   : Cplx(rng.gaussian(), 0.0);
      MatXc M = poles[j] * MatXc::Identity(N, N) - A.cast<Cplx>();
      Eigen::PartialPivLU<MatXc> lu(M);
      const VecC x = lu.solve(B.cast<Cplx>() * z);
      if (!x.allFinite()) { ok = false; break; }
      X.col(j) = x;
      Z.col(j) = z;
    }
    if (!ok) continue;
    Eigen::JacobiSVD<MatXc> svd(X);
    const double cond =
        svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    if (!(cond < 1e10)) continue;
    const MatXc Gc = Z * X.inverse();
    if (Gc.imag().cwiseAbs().maxCoeff() > 1e-6 * (1.0 + Gc.real().cwiseAbs().maxCoeff()))
      continue;
    MatX G = Gc.real();
    // Verify placement before accepting.
    Eigen::EigenSolver<MatX> check(A + B * G);
    bool matched = true;
    std::vector<bool> used(N, false);
    for (int j = 0; j < N; ++j) {
      double best = 1e300;
      int bi = -1;
      for (int i = 0; i < N; ++i) {
        if (used[i]) continue;
        const double d = std::abs(check.eigenvalues()(i) - poles[j]);
        if (d < best) { best = d; bi = i; }
      }
      used[bi] = true;
      if (best > 1e-8 * std::max(1.0, std::abs(poles[j]))) matched = false;
    }
    if (matched) return G;
  }
  throw PolePlacementFailed("place_poles: eigenstructure assignment failed "
                            "(pair numerically uncontrollable?)");
}

MatX lqr_gain(const MatX& A, const MatX& B, double shift) {
  const int N = int(A.rows());
  const MatX As = A + shift * MatX::Identity(N, N);
  MatX H(2 * N, 2 * N);
  H.topLeftCorner(N, N) = As;
  H.topRightCorner(N, N) = -B * B.transpose();
  H.bottomLeftCorner(N, N) = -MatX::Identity(N, N);
  H.bottomRightCorner(N, N) = -As.transpose();
  Eigen::EigenSolver<MatX> es(H);
  MatXc basis(2 * N, N);
  int found = 0;
  for (int i = 0; i < 2 * N && found < N; ++i)
    if (es.eigenvalues()(i).real() < 0.0) basis.col(found++) = es.eigenvectors().col(i);
  if (found != N) throw PolePlacementFailed("lqr_gain: Hamiltonian stable subspace defective");
  const MatXc X1 = basis.topRows(N), X2 = basis.bottomRows(N);
  const MatXc Pc = X2 * X1.inverse();
  const MatX P = Pc.real();
  return -B.transpose() * P;
}

Vec FeedbackLaw::control_literal(const Grid2D& g, const PatchMask& mask, const Vec& w) const {
  // (P_N w, p_k)_omega with the pairing integrated over omega only.
  const Vec wn = V * (W_tilde.transpose() * w);
  const Vec m = mask.mask_state(g);
  Vec c(K);
  for (int k = 0; k < K; ++k) c[k] = g.cell_volume() * (m.cwiseProduct(wn)).dot(p[k]);
  return c;
}

FeedbackLaw synthesize_feedback(const BlockOperator& op, const SubspaceDecomposition& dec,
                                const SpectralData& spec, const SpectralData& adjoint_spec,
                                const PatchMask& mask, double gamma0,
                                const SynthesisOptions& opts) {
  const Grid2D& g = op.grid();
  FeedbackLaw law;
  law.x0 = mask.x0();
  law.x1 = mask.x1();
  law.y0 = mask.y0();
  law.y1 = mask.y1();
  law.gamma0 = gamma0;

  if (dec.N == 0) {
    law.N = 0;
    law.K = 0;
    law.V = MatX::Zero(g.n_state(), 0);
    law.W_tilde = MatX::Zero(g.n_state(), 0);
    return law;  // nothing to stabilize: F = 0
  }

  if (!(gamma0 > 0.0) || !(spec.stable_margin < 0.0) || !(gamma0 < -spec.stable_margin))
    throw GammaOutOfRange("synthesize_feedback: need 0 < gamma0 < |Re lambda_{N+1}| = " +
                          std::to_string(-spec.stable_margin));

  const int K = opts.k_override > 0 ? opts.k_override : spec.K;
  law.gamma1 = opts.gamma1_factor * gamma0;

  // Actuators from the reduced adjoint span; Kalman rank must hold.
  const ReducedAdjointVectors rav = reduced_adjoint_vectors(g, adjoint_spec, mask);
  law.actuators = make_actuators(g, rav, K, mask, opts.seed);
  const RankReport rank = build_rank_matrices(g, law.actuators, rav, opts.rank_tol);
  if (!rank.verdict)
    throw PolePlacementFailed("synthesize_feedback: rank condition failed for the seeded "
                              "actuators (sigma ratio " +
                              std::to_string(rank.worst_ratio) + ")");
  law.rank_ratio = rank.worst_ratio;

  // Projected input matrix: coordinates of the projected actuator fields.
  std::vector<Vec> fields;
  MatX Bu(dec.N, K);
  for (int k = 0; k < K; ++k) {
    Vec b = Vec::Zero(g.n_state());
    b.head(g.n_u()) = law.actuators[k].u1;  // second fluid component absent
    b.tail(g.n_c()) = law.actuators[k].u2;
    b = op.leray().project_state(b);
    fields.push_back(b);
    Bu.col(k) = dec.W_tilde.transpose() * b;
  }

  // Desired poles: keep each unstable frequency, move the real part left of
  // gamma1 with a small deterministic spread between distinct levels.
  Eigen::EigenSolver<MatX> au_eig(dec.A_u);
  std::vector<Cplx> open;
  for (int i = 0; i < dec.N; ++i) open.push_back(au_eig.eigenvalues()(i));
  std::sort(open.begin(), open.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  std::vector<Cplx> poles;
  int level = 0;
  for (std::size_t i = 0; i < open.size(); ++i) {
    if (i > 0 && std::abs(open[i] - std::conj(open[i - 1])) <
                     1e-9 * std::max(1.0, std::abs(open[i]))) {
      poles.push_back(std::conj(poles.back()));  // conjugate partner
      continue;
    }
    poles.push_back(Cplx(-law.gamma1 * (1.0 + 0.08 * level), open[i].imag()));
    ++level;
  }

  GainStrategy strat = opts.strategy;
  MatX G;
  try {
    if (strat == GainStrategy::Lqr) throw PolePlacementFailed("lqr requested");
    G = place_poles(dec.A_u, Bu, poles, opts.seed + 1);
  } catch (const PolePlacementFailed&) {
    if (strat == GainStrategy::PolePlacement) throw;
    G = lqr_gain(dec.A_u, Bu, law.gamma1);
    Eigen::EigenSolver<MatX> cl(dec.A_u + Bu * G);
    poles.clear();
    for (int i = 0; i < dec.N; ++i) poles.push_back(cl.eigenvalues()(i));
  }
  law.gain = G;
  law.placed_poles = poles;

  // Sensor realization p_k = W alpha_k with (w_N, p_k)_omega = gain_k . coords.
  const Vec m = mask.mask_state(g);
  MatX W = dec.W_tilde;  // any basis of the left subspace works; reuse W_tilde
  MatX S(dec.N, dec.N);
  for (int j = 0; j < dec.N; ++j)
    S.col(j) = g.cell_volume() * dec.V.transpose() * m.cwiseProduct(W.col(j));
  Eigen::JacobiSVD<MatX> ssvd(S);
  const double scond =
      ssvd.singularValues()(0) / ssvd.singularValues()(ssvd.singularValues().size() - 1);
  if (!(scond < 1e10))
    throw GramIllConditioned("synthesize_feedback: omega-pairing Gram for sensors is singular",
                             scond);
  Eigen::PartialPivLU<MatX> slu(S);
  for (int k = 0; k < K; ++k) {
    const Vec gk = G.row(k).transpose();
    const Vec alpha = slu.solve(gk);
    law.p.push_back(W * alpha);
    law.sensors.push_back(dec.W_tilde * gk);
  }
  law.fields = std::move(fields);
  law.N = dec.N;
  law.K = K;
  law.V = dec.V;
  law.W_tilde = dec.W_tilde;
  return law;
}

ClosedLoopOperator assemble_closed_loop(const BlockOperator& op, const FeedbackLaw& law) {
  return ClosedLoopOperator{&op, &law};
}

MatX reduce_closed_loop_dense(const BlockOperator& op, const FeedbackLaw& law,
                              const MatX& basis) {
  MatX A = reduce_dense(op, basis);
  for (int k = 0; k < law.K; ++k)
    A += (basis.transpose() * law.fields[k]) * (basis.transpose() * law.sensors[k]).transpose();
  return A;
}

void save_feedback_law(const std::string& path, const Grid2D& g, const FeedbackLaw& law) {
  json poles = json::array();
  for (const auto& p : law.placed_poles) poles.push_back({{"re", p.real()}, {"im", p.imag()}});
  json gain = json::array();
  for (int r = 0; r < law.gain.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < law.gain.cols(); ++c) row.push_back(law.gain(r, c));
    gain.push_back(row);
  }
  json header = {
      {"format", "bstab-feedback-law"},
      {"version", 1},
      {"endian", "little"},
      {"grid", {{"nx", g.nx()}, {"ny", g.ny()}, {"Lx", g.Lx()}, {"Ly", g.Ly()}}},
      {"N", law.N},
      {"K", law.K},
      {"gamma0", law.gamma0},
      {"gamma1", law.gamma1},
      {"rank_ratio", law.rank_ratio},
      {"placed_poles", poles},
      {"gain", gain},
      {"patch", {{"x0", law.x0}, {"x1", law.x1}, {"y0", law.y0}, {"y1", law.y1}}},
  };
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("save_feedback_law: cannot open " + path);
  os << header.dump() << "\n";
  auto blk = [&](const Vec& x) {
    os.write(reinterpret_cast<const char*>(x.data()),
             static_cast<std::streamsize>(sizeof(double) * x.size()));
  };
  for (const auto& a : law.actuators) { blk(a.u1); blk(a.u2); }
  for (const auto& x : law.p) blk(x);
  for (const auto& x : law.sensors) blk(x);
  for (const auto& x : law.fields) blk(x);
  for (int c = 0; c < law.N; ++c) blk(law.V.col(c));
  for (int c = 0; c < law.N; ++c) blk(law.W_tilde.col(c));
}

FeedbackLaw load_feedback_law(const std::string& path, const Grid2D& g) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_feedback_law: cannot open " + path);
  std::string line;
  std::getline(is, line);
  json h = json::parse(line, nullptr, false);
  if (h.is_discarded() || h.value("format", "") != "bstab-feedback-law")
    throw ConfigError("load_feedback_law: not a feedback-law file: " + path);
  if (h["grid"]["nx"] != g.nx() || h["grid"]["ny"] != g.ny())
    throw ConfigError("load_feedback_law: grid mismatch");

  FeedbackLaw law;
  law.N = h["N"];
  law.K = h["K"];
  law.gamma0 = h["gamma0"];
  law.gamma1 = h["gamma1"];
  law.rank_ratio = h["rank_ratio"];
  law.x0 = h["patch"]["x0"];
  law.x1 = h["patch"]["x1"];
  law.y0 = h["patch"]["y0"];
  law.y1 = h["patch"]["y1"];
  for (const auto& p : h["placed_poles"]) law.placed_poles.emplace_back(p["re"], p["im"]);
  law.gain.resize(law.K, law.N);
  for (int r = 0; r < law.K; ++r)
    for (int c = 0; c < law.N; ++c) law.gain(r, c) = h["gain"][r][c];

  auto blk = [&](Eigen::Index n) {
    Vec x(n);
    is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(sizeof(double) * n));
    if (!is) throw ConfigError("load_feedback_law: truncated block");
    return x;
  };
  for (int k = 0; k < law.K; ++k) {
    Actuator a;
    a.u1 = blk(g.n_u());
    a.u2 = blk(g.n_c());
    law.actuators.push_back(std::move(a));
  }
  for (int k = 0; k < law.K; ++k) law.p.push_back(blk(g.n_state()));
  for (int k = 0; k < law.K; ++k) law.sensors.push_back(blk(g.n_state()));
  for (int k = 0; k < law.K; ++k) law.fields.push_back(blk(g.n_state()));
  law.V.resize(g.n_state(), law.N);
  law.W_tilde.resize(g.n_state(), law.N);
  for (int c = 0; c < law.N; ++c) law.V.col(c) = blk(g.n_state());
  for (int c = 0; c < law.N; ++c) law.W_tilde.col(c) = blk(g.n_state());
  return law;
}

}  // namespace bstab
