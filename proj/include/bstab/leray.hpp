#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "bstab/grid.hpp"
#include "bstab/stencils.hpp"

namespace bstab {

/// Discrete Helmholtz/Leray projector onto the kernel of the staggered
/// divergence. Built from the factorized pressure-Poisson operator D*G with
/// the constant null space pinned by a mean-zero Lagrange multiplier, so the
/// projector is exactly idempotent and its range exactly divergence-free at
/// solver precision.
class LerayProjector {
public:
  explicit LerayProjector(const Grid2D& g);

  /// Project the stacked velocity blocks (size n_vel).
  Vec project_vel(const Vec& vel) const;
  /// Project the velocity part of a full state; scalar block untouched.
  Vec project_state(const Vec& state) const;

  /// Solve (D G) pi = rhs with mean(pi) = 0. rhs must be cell-sized.
  Vec pressure_solve(const Vec& rhs) const;

  const SpMat& divergence() const { return D_; }
  const SpMat& gradient() const { return G_; }
  const Grid2D& grid() const { return grid_; }

  double divergence_inf(const Vec& vel_or_state) const;

private:
  Grid2D grid_;
  SpMat D_, G_;
  Eigen::SparseLU<SpMat> poisson_;
};

}  // namespace bstab
