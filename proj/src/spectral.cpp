#include "bstab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <nlohmann/json.hpp>

#include "bstab/errors.hpp"
#include "bstab/rng.hpp"

namespace bstab {

namespace {

VecC apply_c(const BlockOperator& op, const VecC& x) {
  const Vec re = op.apply(x.real());
  const Vec im = op.apply(x.imag());
  return re + Cplx(0.0, 1.0) * im;
}

double rel_residual(const BlockOperator& op, Cplx lambda, const VecC& v) {
  const VecC r = apply_c(op, v) - lambda * v;
  return r.norm() / v.norm();
}

struct RawPair {
  Cplx lambda;
  VecC vec;       // unit norm
  double residual;
};

bool lambda_less(const Cplx& a, const Cplx& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

/// Cluster the unstable eigenpairs into distinct eigenvalues and reveal the
/// geometric multiplicity of each cluster by the numerical rank of its
/// eigenvector bundle.
std::vector<EigenGroup> make_groups(std::vector<RawPair>& pairs, double cluster_tol) {
  std::sort(pairs.begin(), pairs.end(),
            [](const RawPair& a, const RawPair& b) { return lambda_less(a.lambda, b.lambda); });
  std::vector<EigenGroup> groups;
  std::vector<std::vector<const RawPair*>> members;
  for (const auto& p : pairs) {
    bool placed = false;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const double scale = std::max(1.0, std::abs(groups[gi].lambda));
      if (std::abs(p.lambda - groups[gi].lambda) <= cluster_tol * scale) {
        members[gi].push_back(&p);
        placed = true;
        break;
      }
    }
    if (!placed) {
      EigenGroup g;
      g.lambda = p.lambda;
      groups.push_back(g);
      members.push_back({&p});
    }
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& mem = members[gi];
    MatXc bundle(mem[0]->vec.size(), mem.size());
    double maxres = 0.0;
    Cplx lam_mean{0.0, 0.0};
    for (std::size_t c = 0; c < mem.size(); ++c) {
      bundle.col(c) = mem[c]->vec;
      maxres = std::max(maxres, mem[c]->residual);
      lam_mean += mem[c]->lambda;
    }
    groups[gi].lambda = lam_mean / double(mem.size());
    groups[gi].alg_mult = int(mem.size());
    Eigen::JacobiSVD<MatXc> svd(bundle, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv[k] > 1e-8 * sv[0]) ++rank;
    groups[gi].geo_mult = rank;
    groups[gi].vectors = svd.matrixU().leftCols(rank);
    groups[gi].max_residual = maxres;
  }
  return groups;
}

void finalize(SpectralData& sd, std::vector<RawPair>& all, const SpectrumOptions& opts,
              int keep) {
  std::sort(all.begin(), all.end(),
            [](const RawPair& a, const RawPair& b) { return lambda_less(a.lambda, b.lambda); });
  if (int(all.size()) > keep) all.resize(keep);

  sd.margin = opts.margin;
  std::vector<RawPair> unstable;
  for (const auto& p : all) {
    sd.eigenvalues.push_back(p.lambda);
    sd.residuals.push_back(p.residual);
    if (p.lambda.real() >= -opts.margin) unstable.push_back(p);
  }
  sd.N = int(unstable.size());
  if (sd.N < int(all.size())) sd.stable_margin = all[sd.N].lambda.real();
  if (!unstable.empty()) {
    sd.groups = make_groups(unstable, opts.cluster_tol);
    sd.M = int(sd.groups.size());
    for (const auto& g : sd.groups) sd.K = std::max(sd.K, g.geo_mult);
  }
}

SpectralData dense_spectrum(const BlockOperator& op, const SpectrumOptions& opts) {
  const Grid2D& g = op.grid();
  const MatX B = solenoidal_basis(g);
  const MatX A = reduce_dense(op, B);
  Eigen::EigenSolver<MatX> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");

  const Eigen::VectorXcd lam = es.eigenvalues();
  const MatXc vecs = es.eigenvectors();

  std::vector<int> order(lam.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return lambda_less(lam[a], lam[b]); });

  std::vector<RawPair> kept;
  const int keep = std::min<int>(std::max(opts.n_eigs, 1), int(lam.size()));
  for (int r = 0; r < keep; ++r) {
    const int idx = order[r];
    RawPair p;
    p.lambda = lam[idx];
    p.vec = B * vecs.col(idx);
    p.vec /= p.vec.norm();
    p.residual = rel_residual(op, p.lambda, p.vec);
    kept.push_back(std::move(p));
  }

  SpectralData sd;
  sd.from_dense_oracle = true;
  finalize(sd, kept, opts, keep);
  // The dense path resolves the entire spectrum; report the exact margin.
  if (keep < int(lam.size())) {
    int nun = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam[i].real() >= -opts.margin) ++nun;
    sd.N = nun;  // in case keep < N + 1 the count still reflects the truth
    double stable_best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam[i].real() < -opts.margin) stable_best = std::max(stable_best, lam[i].real());
    sd.stable_margin = stable_best;
  }
  return sd;
}

/// Complex Arnoldi with modified Gram-Schmidt (one reorthogonalization pass)
/// on the shift-inverted, divergence-constrained operator.
struct ArnoldiResult {
  std::vector<RawPair> converged;
};

ArnoldiResult arnoldi_at_shift(const BlockOperator& op, Cplx shift, int n_want, int m,
                               Rng& rng, double residual_tol) {
  const Grid2D& g = op.grid();
  SaddleSolverC solver;
  solver.factorize(g, op.raw(), shift);

  ArnoldiResult out;
  const int n = g.n_state();

  for (int attempt = 0; attempt < 2; ++attempt) {
    MatXc Q(n, m + 1);
    MatXc H = MatXc::Zero(m + 1, m);
    Vec start = op.leray().project_state(rng.gaussian_vec(n));
    VecC q0 = start.cast<Cplx>();
    q0 /= q0.norm();
    Q.col(0) = q0;

    int built = 0;
    for (int j = 0; j < m; ++j) {
      VecC w = solver.solve(Q.col(j));
      for (int i = 0; i <= j; ++i) {
        const Cplx hij = Q.col(i).dot(w);  // conjugating dot
        H(i, j) += hij;
        w -= hij * Q.col(i);
      }
      for (int i = 0; i <= j; ++i) {  // re-orthogonalize
        const Cplx corr = Q.col(i).dot(w);
        H(i, j) += corr;
        w -= corr * Q.col(i);
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      built = j + 1;
      if (hn < 1e-12) break;  // invariant subspace found
      Q.col(j + 1) = w / hn;
    }

    Eigen::ComplexEigenSolver<MatXc> ritz(H.topLeftCorner(built, built));
    const auto& theta = ritz.eigenvalues();
    const auto& y = ritz.eigenvectors();

    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      if (std::abs(theta[k]) < 1e-14) continue;
      const Cplx lambda = shift + 1.0 / theta[k];
      VecC v = Q.leftCols(built) * y.col(k);
      v /= v.norm();
      const double res = rel_residual(op, lambda, v);
      if (res <= residual_tol) {
        RawPair p{lambda, std::move(v), res};
        out.converged.push_back(std::move(p));
      }
    }
    if (int(out.converged.size()) >= n_want) break;
  }
  return out;
}

SpectralData arnoldi_spectrum(const BlockOperator& op, const SpectrumOptions& opts) {
  Rng rng(opts.seed);
  std::vector<RawPair> pool;
  const int m = std::max(2 * opts.n_eigs + 16, 48);

  for (const Cplx& shift : opts.shifts) {
    ArnoldiResult res;
    try {
      res = arnoldi_at_shift(op, shift, opts.n_eigs, m, rng, opts.residual_tol);
    } catch (const FactorizationSingular&) {
      // Shift collides with an eigenvalue; nudge and retry once.
      res = arnoldi_at_shift(op, shift + Cplx(1e-3, 1e-3), opts.n_eigs, m, rng,
                             opts.residual_tol);
    }
    for (auto& p : res.converged) {
      bool dup = false;
      for (const auto& q : pool) {
        const double scale = std::max(1.0, std::abs(q.lambda));
        if (std::abs(p.lambda - q.lambda) <= 1e-7 * scale &&
            std::abs(q.vec.dot(p.vec)) > 0.99) {
          dup = true;
          break;
        }
      }
      if (!dup) pool.push_back(std::move(p));
    }
  }
  if (pool.empty())
    throw ArnoldiStagnation("compute_spectrum: no converged Ritz pairs near the shifts; "
                            "retry with different shifts");

  SpectralData sd;
  finalize(sd, pool, opts, opts.n_eigs);
  return sd;
}

}  // namespace

SpectralData compute_spectrum(const BlockOperator& op, const SpectrumOptions& opts) {
  const Grid2D& g = op.grid();
  const bool dense = opts.force_dense || (g.nx() <= opts.dense_limit && g.ny() <= opts.dense_limit);
  return dense ? dense_spectrum(op, opts) : arnoldi_spectrum(op, opts);
}

std::string spectrum_report_json(const SpectralData& sd) {
  nlohmann::json j;
  j["N"] = sd.N;
  j["M"] = sd.M;
  j["K"] = sd.K;
  j["margin"] = sd.margin;
  j["stable_margin"] = sd.stable_margin;
  j["dense_oracle"] = sd.from_dense_oracle;
  auto evs = nlohmann::json::array();
  for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i)
    evs.push_back({{"re", sd.eigenvalues[i].real()},
                   {"im", sd.eigenvalues[i].imag()},
                   {"residual", sd.residuals[i]}});
  j["eigenvalues"] = evs;
  auto gr = nlohmann::json::array();
  for (const auto& g : sd.groups)
    gr.push_back({{"re", g.lambda.real()},
                  {"im", g.lambda.imag()},
                  {"geo_mult", g.geo_mult},
                  {"alg_mult", g.alg_mult},
                  {"max_residual", g.max_residual}});
  j["unstable_groups"] = gr;
  return j.dump(2);
}

namespace {

/// Real-blocked basis of the span of the groups' eigenvectors: a real column
/// per real eigenvalue direction, [Re v | Im v] per conjugate-pair direction
/// (only the Im > 0 member contributes).
MatX real_block_basis(const std::vector<EigenGroup>& groups, int n, double im_tol) {
  std::vector<Vec> cols;
  for (const auto& g : groups) {
    if (g.lambda.imag() < -im_tol) continue;  // conjugate partner carries it
    for (int c = 0; c < g.geo_mult; ++c) {
      const VecC v = g.vectors.col(c);
      if (std::abs(g.lambda.imag()) <= im_tol) {
        // Rotate the phase so the vector is essentially real.
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        const Cplx phase = v[imax] / std::abs(v[imax]);
        cols.push_back((v / phase).real());
      } else {
        cols.push_back(v.real());
        cols.push_back(v.imag());
      }
    }
  }
  MatX V(n, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) V.col(c) = cols[c].normalized();
  return V;
}

}  // namespace

SubspaceDecomposition build_projection(const BlockOperator& op, const SpectralData& spec,
                                       const SpectralData& adjoint_spec,
                                       const ProjectionOptions& opts) {
  SubspaceDecomposition dec;
  const int n = op.grid().n_state();
  if (spec.N == 0) {
    dec.N = 0;
    dec.V = MatX::Zero(n, 0);
    dec.W_tilde = MatX::Zero(n, 0);
    dec.A_u = MatX::Zero(0, 0);
    return dec;
  }

  const double im_tol = 1e-9;
  MatX V = real_block_basis(spec.groups, n, im_tol);
  MatX W = real_block_basis(adjoint_spec.groups, n, im_tol);

  const bool complete = (V.cols() == spec.N && W.cols() == spec.N);
  double cond = std::numeric_limits<double>::infinity();
  if (complete) {
    const MatX gram = W.transpose() * V;
    Eigen::JacobiSVD<MatX> svd(gram);
    cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  }

  if (!complete || cond > opts.gram_cond_limit) {
    // Defective or ill-paired cluster. On dense-oracle data, fall back to
    // Schur invariant subspaces, which carry the full algebraic dimension.
    if (!spec.from_dense_oracle)
      throw GramIllConditioned(
          "build_projection: primal/adjoint cluster pairing is numerically defective; "
          "use the dense oracle or tighten the eigensolver tolerance",
          cond);
    const MatX B = solenoidal_basis(op.grid());
    const MatX A = reduce_dense(op, B);
    V = B * unstable_invariant_basis(A, spec.margin);
    W = B * unstable_invariant_basis(A.transpose(), spec.margin);
    if (V.cols() != spec.N || W.cols() != spec.N)
      throw GramIllConditioned("build_projection: invariant-subspace dimensions disagree with N",
                               cond);
  }

  const int N = int(V.cols());
  MatX gram = W.transpose() * V;
  Eigen::JacobiSVD<MatX> svd(gram);
  dec.gram_cond =
      svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  if (dec.gram_cond > opts.gram_cond_limit)
    throw GramIllConditioned("build_projection: Gram matrix is numerically singular",
                             dec.gram_cond);

  dec.N = N;
  dec.V = V;
  // Normalize the left basis so W_tilde^T V = I.
  dec.W_tilde = gram.partialPivLu().solve(W.transpose()).transpose();

  dec.A_u.resize(N, N);
  for (int j = 0; j < N; ++j) dec.A_u.col(j) = dec.W_tilde.transpose() * op.apply(V.col(j));
  return dec;
}

ContourParams choose_contour(const SpectralData& spec) {
  if (spec.groups.empty()) throw ConfigError("choose_contour: empty unstable cluster");
  std::vector<Cplx> pts;
  for (const auto& grp : spec.groups) pts.push_back(grp.lambda);
  double re_min = 1e300;
  for (const auto& l : pts) re_min = std::min(re_min, l.real());
  const double gap = std::max(re_min - spec.stable_margin, 1e-6);

  // Single-linkage components with merge distance proportional to the gap.
  std::vector<int> comp(pts.size());
  std::iota(comp.begin(), comp.end(), 0);
  const double merge_dist = 1.4 * gap;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if (comp[i] != comp[j] && std::abs(pts[i] - pts[j]) < merge_dist) {
          const int from = std::max(comp[i], comp[j]), to = std::min(comp[i], comp[j]);
          for (auto& c : comp)
            if (c == from) c = to;
          changed = true;
        }
  }

  ContourParams cp;
  for (std::size_t ci = 0; ci < pts.size(); ++ci) {
    if (comp[ci] != int(ci)) continue;  // not a representative
    double re_lo = 1e300, re_hi = -1e300, im_lo = 1e300, im_hi = -1e300;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (comp[j] != int(ci)) continue;
      re_lo = std::min(re_lo, pts[j].real());
      re_hi = std::max(re_hi, pts[j].real());
      im_lo = std::min(im_lo, pts[j].imag());
      im_hi = std::max(im_hi, pts[j].imag());
    }
    ContourParams::Loop loop;
    loop.center = Cplx(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
    double diam = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (comp[j] == int(ci)) diam = std::max(diam, std::abs(pts[j] - loop.center));
    loop.radius = diam + 0.4 * gap;
    cp.loops.push_back(loop);
  }
  return cp;
}

std::vector<Vec> contour_projection_apply(const BlockOperator& op, const ContourParams& cp,
                                          const std::vector<Vec>& probes) {
  const Grid2D& g = op.grid();
  std::vector<VecC> b;
  std::vector<VecC> acc(probes.size(), VecC::Zero(g.n_state()));
  for (const Vec& p : probes) b.push_back(op.leray().project_state(p).cast<Cplx>());

  for (const auto& loop : cp.loops)
    for (int j = 0; j < cp.nodes_per_loop; ++j) {
      const double th = 2.0 * M_PI * j / cp.nodes_per_loop;
      const Cplx rot(std::cos(th), std::sin(th));
      const Cplx node = loop.center + loop.radius * rot;
      SaddleSolverC solver;
      try {
        solver.factorize(g, op.raw(), node);
      } catch (const FactorizationSingular&) {
        throw FactorizationSingular("contour_projection: resolvent solve failed at node " +
                                    std::to_string(j) + " (contour touches the spectrum?)");
      }
      const Cplx weight = loop.radius * rot / double(cp.nodes_per_loop);
      for (std::size_t pi = 0; pi < probes.size(); ++pi) {
        // (lambda - A)^{-1} b = -(A - lambda)^{-1} b
        acc[pi] -= weight * solver.solve(b[pi]);
      }
    }

  std::vector<Vec> out;
  for (auto& a : acc) out.push_back(a.real());
  return out;
}

Vec contour_projection_apply(const BlockOperator& op, const ContourParams& cp, const Vec& probe) {
  return contour_projection_apply(op, cp, std::vector<Vec>{probe})[0];
}

MatX unstable_invariant_basis(const MatX& A, double margin) {
  const int m = int(A.rows());
  Eigen::ComplexSchur<MatXc> schur(A.cast<Cplx>(), true);
  if (schur.info() != Eigen::Success) throw NumericalError("complex Schur failed");
  MatXc T = schur.matrixT();
  MatXc U = schur.matrixU();

  auto unstable = [&](int i) { return T(i, i).real() >= -margin; };

  // Adjacent 1x1 Schur swap: moves the (i+1)-th eigenvalue up one slot.
  auto swap_up = [&](int i) {
    const Cplx a = T(i, i), b = T(i, i + 1), c = T(i + 1, i + 1);
    Eigen::Vector2cd v;
    v << b, c - a;
    const double nv = v.norm();
    if (nv < 1e-300) {  // equal diagonal with zero coupling: plain permutation
      T.row(i).swap(T.row(i + 1));
      T.col(i).swap(T.col(i + 1));
      U.col(i).swap(U.col(i + 1));
      return;
    }
    Eigen::Matrix2cd G;
    G.col(0) = v / nv;
    G(0, 1) = -std::conj(G(1, 0));
    G(1, 1) = std::conj(G(0, 0));
    T.middleCols(i, 2) = T.middleCols(i, 2) * G;
    T.middleRows(i, 2) = G.adjoint() * T.middleRows(i, 2);
    U.middleCols(i, 2) = U.middleCols(i, 2) * G;
    T(i + 1, i) = Cplx(0.0, 0.0);
  };

  int filled = 0;
  for (int scan = 0; scan < m; ++scan) {
    if (!unstable(scan)) continue;
    for (int k = scan; k > filled; --k) swap_up(k - 1);
    ++filled;
  }
  if (filled == 0) return MatX::Zero(m, 0);

  const MatXc Uc = U.leftCols(filled);
  // The cluster is conjugation-closed, so the realified span has the same
  // dimension; extract an orthonormal real basis by SVD.
  MatX cand(m, 2 * filled);
  cand.leftCols(filled) = Uc.real();
  cand.rightCols(filled) = Uc.imag();
  Eigen::JacobiSVD<MatX> svd(cand, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-10 * sv[0]) ++rank;
  if (rank != filled)
    throw NumericalError("unstable_invariant_basis: realified rank " + std::to_string(rank) +
                         " != cluster size " + std::to_string(filled));
  return svd.matrixU().leftCols(rank);
}

}  // namespace bstab
