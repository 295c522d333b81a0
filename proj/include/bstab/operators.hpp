#pragma once

#include <iosfwd>
#include <memory>

#include "bstab/grid.hpp"
#include "bstab/leray.hpp"
#include "bstab/stencils.hpp"

namespace bstab {

/// Sparse realization of the coupled generator acting on (z, h):
///
///   z' = P[ nu Lap z - (y_e.grad)z - (z.grad)y_e + gamma h e_2 ]
///   h' =    kap Lap h -  y_e.grad h -  z.grad theta_e
///
/// stored full-size with the Leray projection applied in matvec. The adjoint
/// flag holds the exact sparse transpose, which is the discrete adjoint in
/// the uniform-weight midpoint pairing; the coupling blocks switch places
/// under transposition exactly as in the continuous adjoint.
class BlockOperator {
public:
  double nu = 0.0, kappa = 0.0, gamma = 0.0;
  bool adjoint = false;

  const Grid2D& grid() const { return *grid_; }
  const SpMat& raw() const { return raw_; }
  const LerayProjector& leray() const { return *leray_; }

  /// y = P A P x (projection on both sides; inputs already solenoidal pass
  /// through the input projection unchanged).
  Vec apply(const Vec& state) const;

  /// Equilibrium fields this operator was linearized at.
  const Vec& ye_u() const { return ye_u_; }
  const Vec& ye_v() const { return ye_v_; }
  const Vec& theta_e() const { return te_; }

  BlockOperator make_adjoint() const;

  /// Text export: "rows cols nnz" header, then "row col value" per line.
  void export_triplets(std::ostream& os) const;

private:
  friend BlockOperator assemble_block(const Grid2D&, double, double, double, const VelocityField&,
                                      const ScalarField&, bool);
  std::shared_ptr<const Grid2D> grid_;
  std::shared_ptr<const LerayProjector> leray_;
  SpMat raw_;
  Vec ye_u_, ye_v_, te_;
};

/// Coupled operator at a general equilibrium; `adjoint` transposes.
BlockOperator assemble_block(const Grid2D& g, double nu, double kappa, double gamma,
                             const VelocityField& ye, const ScalarField& theta_e,
                             bool adjoint = false);

/// Pure diffusion block diag(nu P Lap, kap Lap); rejects nonpositive nu, kap.
BlockOperator assemble_stokes_heat(const Grid2D& g, double nu, double kappa);

/// Quadratic terms of the translated dynamics: N_q(z) = P[(z.grad)z] and
/// M_q[z]h = z.grad h, both in divergence form.
void nonlinear_terms(const Grid2D& g, const LerayProjector& P, const VelocityField& z,
                     const ScalarField& h, VelocityField& Nz, ScalarField& Mh);

/// Nonlinearity evaluated on a stacked state; returns the stacked
/// [N_q(z); M_q[z]h] (no projection applied to the velocity part; constrained
/// solvers and the projector consume it raw).
Vec nonlinear_state(const Grid2D& g, const Vec& state);

/// Orthonormal basis of the discretely divergence-free velocity subspace
/// (QR of the stream-function curl), padded with the identity on the scalar
/// block. Columns: n_psi + n_c. Used by dense spectral oracles.
Eigen::MatrixXd solenoidal_basis(const Grid2D& g);

/// Dense reduction B^T raw B of an operator to the solenoidal basis; its
/// eigenvalues are exactly those of the projected operator on the subspace.
Eigen::MatrixXd reduce_dense(const BlockOperator& op, const Eigen::MatrixXd& basis);

}  // namespace bstab
