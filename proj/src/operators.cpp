#include "bstab/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <ostream>
#include <vector>

#include "bstab/errors.hpp"

namespace bstab {

namespace {

void append_block(std::vector<Triplet>& t, const SpMat& M, int row0, int col0, double scale) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

}  // namespace

Vec BlockOperator::apply(const Vec& state) const {
  Vec x = leray_->project_state(state);
  Vec y = raw_ * x;
  return leray_->project_state(y);
}

BlockOperator BlockOperator::make_adjoint() const {
  BlockOperator adj = *this;
  adj.raw_ = SpMat(raw_.transpose());
  adj.adjoint = !adjoint;
  return adj;
}

void BlockOperator::export_triplets(std::ostream& os) const {
  os << raw_.rows() << " " << raw_.cols() << " " << raw_.nonZeros() << "\n";
  for (int k = 0; k < raw_.outerSize(); ++k)
    for (SpMat::InnerIterator it(raw_, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

BlockOperator assemble_block(const Grid2D& g, double nu, double kappa, double gamma,
                             const VelocityField& ye, const ScalarField& theta_e, bool adjoint) {
  if (!(nu > 0.0) || !(kappa > 0.0))
    throw ConfigError("assemble_block: nu and kappa must be positive");
  if (ye.u.size() != g.n_u() || ye.v.size() != g.n_v() || theta_e.s.size() != g.n_c())
    throw ConfigError("assemble_block: equilibrium fields on mismatched grid");

  const int nv = g.n_vel();
  std::vector<Triplet> t;

  // Velocity rows: nu Lap - Oseen + gamma buoyancy.
  append_block(t, stencils::laplacian_vel(g), 0, 0, nu);
  append_block(t, stencils::advect_vel_in_b(g, ye.u, ye.v), 0, 0, -1.0);  // (y_e.grad) z
  append_block(t, stencils::advect_vel_in_a(g, ye.u, ye.v), 0, 0, -1.0);  // (z.grad) y_e
  if (gamma != 0.0) append_block(t, stencils::buoyancy(g), 0, nv, gamma);

  // Scalar rows: kap Lap - y_e.grad h - z.grad theta_e.
  append_block(t, stencils::laplacian_c(g), nv, nv, kappa);
  append_block(t, stencils::advect_scal_in_s(g, ye.u, ye.v), nv, nv, -1.0);
  append_block(t, stencils::advect_scal_in_a(g, theta_e.s), nv, 0, -1.0);

  BlockOperator op;
  op.nu = nu;
  op.kappa = kappa;
  op.gamma = gamma;
  op.grid_ = std::make_shared<Grid2D>(g);
  op.leray_ = std::make_shared<LerayProjector>(g);
  op.ye_u_ = ye.u;
  op.ye_v_ = ye.v;
  op.te_ = theta_e.s;
  SpMat A(g.n_state(), g.n_state());
  A.setFromTriplets(t.begin(), t.end());
  op.raw_ = adjoint ? SpMat(A.transpose()) : A;
  op.adjoint = adjoint;
  return op;
}

BlockOperator assemble_stokes_heat(const Grid2D& g, double nu, double kappa) {
  return assemble_block(g, nu, kappa, 0.0, VelocityField(g), ScalarField(g), false);
}

void nonlinear_terms(const Grid2D& g, const LerayProjector& P, const VelocityField& z,
                     const ScalarField& h, VelocityField& Nz, ScalarField& Mh) {
  const Vec zvel = pack_state(g, z, ScalarField(g)).head(g.n_vel());
  const Vec adv = stencils::advect_vel_in_b(g, z.u, z.v) * zvel;
  const Vec proj = P.project_vel(adv);
  Nz.u = proj.head(g.n_u());
  Nz.v = proj.tail(g.n_v());
  Mh.s = stencils::advect_scal_in_s(g, z.u, z.v) * h.s;
}

Vec nonlinear_state(const Grid2D& g, const Vec& state) {
  VelocityField z(g);
  ScalarField h(g);
  unpack_state(g, state, z, h);
  Vec out(g.n_state());
  const Vec zvel = state.head(g.n_vel());
  out.head(g.n_vel()) = stencils::advect_vel_in_b(g, z.u, z.v) * zvel;
  out.tail(g.n_c()) = stencils::advect_scal_in_s(g, z.u, z.v) * h.s;
  return out;
}

Eigen::MatrixXd solenoidal_basis(const Grid2D& g) {
  const SpMat C = stencils::stream_curl(g);
  Eigen::MatrixXd Cd = Eigen::MatrixXd(C);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Cd);
  Eigen::MatrixXd Q =
      qr.householderQ() * Eigen::MatrixXd::Identity(g.n_vel(), g.n_psi());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(g.n_state(), g.n_psi() + g.n_c());
  B.topLeftCorner(g.n_vel(), g.n_psi()) = Q;
  B.bottomRightCorner(g.n_c(), g.n_c()).setIdentity();
  return B;
}

Eigen::MatrixXd reduce_dense(const BlockOperator& op, const Eigen::MatrixXd& basis) {
  return basis.transpose() * (op.raw() * basis);
}

}  // namespace bstab
