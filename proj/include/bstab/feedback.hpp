#pragma once

#include <string>
#include <vector>

#include "bstab/patch.hpp"
#include "bstab/spectral.hpp"

namespace bstab {

/// Adjoint eigenvectors with the wall-normal-omitted structure: only the
/// first (d-1 = 1) velocity component and the temperature, masked to omega.
/// Stored stacked as [u-block ; center-block], complex.
struct ReducedAdjointVectors {
  struct Group {
    Cplx lambda;
    int geo_mult = 0;
    MatXc vectors;  // (n_u + n_c) x geo_mult, masked
  };
  std::vector<Group> groups;
  std::vector<double> norms;   // omega-pairing norm per vector, tiny => flagged
  std::vector<bool> flagged_small;
};

ReducedAdjointVectors reduced_adjoint_vectors(const Grid2D& g, const SpectralData& adjoint_spec,
                                              const PatchMask& mask,
                                              double small_tol = 1e-8);

/// One control shape: x-velocity component on u-faces plus a temperature
/// component at centers, both supported in omega. The second velocity
/// component is structurally absent (reduced dimension d-1).
struct Actuator {
  Vec u1;  // n_u
  Vec u2;  // n_c
};

/// Seeded generic actuators drawn from the span of the reduced adjoint
/// vectors on omega, orthonormalized in the omega pairing.
std::vector<Actuator> make_actuators(const Grid2D& g, const ReducedAdjointVectors& rav, int K,
                                     const PatchMask& mask, unsigned seed);

/// Kalman-style rank data: one ell_i x K matrix per distinct unstable
/// eigenvalue, entries (u_k, reduced adjoint vector)_omega.
struct RankReport {
  std::vector<MatXc> U;
  std::vector<double> sigma_min, sigma_max;
  std::vector<int> ranks;
  std::vector<int> required;  // ell_i
  bool verdict = false;
  double worst_ratio = 0.0;   // min_i sigma_min/sigma_max
  double rank_tol = 1e-8;
};

RankReport build_rank_matrices(const Grid2D& g, const std::vector<Actuator>& actuators,
                               const ReducedAdjointVectors& rav, double rank_tol = 1e-8);

enum class GainStrategy { Auto, PolePlacement, Lqr };

/// The assembled interior-localized law
///   F(w) = [ P(m sum_k (P_N w, p_k)_omega u_k^1) ; m sum_k (...) u_k^2 ].
/// sensors[k] is the state functional realizing the omega pairing exactly;
/// fields[k] is the projected actuator state. apply() uses the equivalent
/// low-rank form sum_k <sensors_k, w> fields_k.
struct FeedbackLaw {
  int N = 0, K = 0;
  double gamma0 = 0.0, gamma1 = 0.0;
  std::vector<Cplx> placed_poles;
  std::vector<Actuator> actuators;
  std::vector<Vec> p;        // sensor field combinations of adjoint vectors
  std::vector<Vec> sensors;  // s_k with c_k = sensors[k] . w  (plain dot)
  std::vector<Vec> fields;   // b_k, projected actuator states
  MatX gain;                 // K x N in unstable coordinates
  MatX V, W_tilde;           // the decomposition the law was designed on
  double rank_ratio = 0.0;   // worst sigma_min/sigma_max of the U_i
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // patch box

  Vec control(const Vec& w) const {
    Vec c(K);
    for (int k = 0; k < K; ++k) c[k] = sensors[k].dot(w);
    return c;
  }
  Vec apply(const Vec& w) const {
    Vec out = Vec::Zero(w.size());
    for (int k = 0; k < K; ++k) out += sensors[k].dot(w) * fields[k];
    return out;
  }
  /// Literal evaluation of the paper-form pairing (P_N w, p_k)_omega.
  Vec control_literal(const Grid2D& g, const PatchMask& mask, const Vec& w) const;
};

struct SynthesisOptions {
  GainStrategy strategy = GainStrategy::Auto;
  double gamma1_factor = 1.25;  // placed poles at Re <= -gamma1 = -1.25 gamma0
  unsigned seed = 99;
  double rank_tol = 1e-8;
  int k_override = 0;           // 0: K = spectral K
};

FeedbackLaw synthesize_feedback(const BlockOperator& op, const SubspaceDecomposition& dec,
                                const SpectralData& spec, const SpectralData& adjoint_spec,
                                const PatchMask& mask, double gamma0,
                                const SynthesisOptions& opts = {});

/// Sparse-plus-low-rank closed loop A_F w = A w + F(w).
struct ClosedLoopOperator {
  const BlockOperator* op = nullptr;
  const FeedbackLaw* law = nullptr;
  Vec apply(const Vec& w) const {
    Vec out = op->apply(w);
    if (law && law->K > 0) out += law->apply(w);
    return out;
  }
};

ClosedLoopOperator assemble_closed_loop(const BlockOperator& op, const FeedbackLaw& law);

/// Dense reduction of the closed loop onto a solenoidal basis.
MatX reduce_closed_loop_dense(const BlockOperator& op, const FeedbackLaw& law,
                              const MatX& basis);

void save_feedback_law(const std::string& path, const Grid2D& g, const FeedbackLaw& law);
FeedbackLaw load_feedback_law(const std::string& path, const Grid2D& g);

/// Pole placement by eigenstructure assignment (Moore): returns the real gain
/// G with eig(A + B G) = poles. Poles must be closed under conjugation and
/// disjoint from eig(A).
MatX place_poles(const MatX& A, const MatX& B, const std::vector<Cplx>& poles, unsigned seed);

/// LQR gain via the Hamiltonian eigenvector method on (A + shift I, B):
/// closed-loop spectrum of A + B G lies left of -shift.
MatX lqr_gain(const MatX& A, const MatX& B, double shift);

}  // namespace bstab
