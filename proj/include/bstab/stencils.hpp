#pragma once

#include <Eigen/SparseCore>
#include <functional>

#include "bstab/grid.hpp"

namespace bstab {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Second-order 5-point stencils on the staggered layout. Homogeneous
/// Dirichlet walls enter through pinned normal faces and ghost reflection
/// (ghost = -interior) for tangential/scalar values.
namespace stencils {

/// Divergence: velocity blocks -> cell centers, size n_c x n_vel.
SpMat divergence(const Grid2D& g);

/// Gradient: cell centers -> velocity blocks. Exactly -divergence(g)^T.
SpMat gradient(const Grid2D& g);

/// Component Laplacians (negative definite).
SpMat laplacian_u(const Grid2D& g);
SpMat laplacian_v(const Grid2D& g);
SpMat laplacian_c(const Grid2D& g);

/// Vector Laplacian on the stacked velocity blocks, size n_vel x n_vel.
SpMat laplacian_vel(const Grid2D& g);

/// Divergence-form advection of a velocity field: b -> div(a (x) b) on faces,
/// as a matrix acting on the stacked velocity blocks of b. Skew-symmetric
/// whenever a is discretely divergence-free.
SpMat advect_vel_in_b(const Grid2D& g, const Vec& au, const Vec& av);

/// Same bilinear form, as a matrix acting on the stacked blocks of a
/// (the "stretching" direction: a -> div(a (x) b) with b frozen).
SpMat advect_vel_in_a(const Grid2D& g, const Vec& bu, const Vec& bv);

/// Divergence-form scalar advection div(s a): matrix in s with a frozen
/// (size n_c x n_c) and matrix in a with s frozen (size n_c x n_vel).
SpMat advect_scal_in_s(const Grid2D& g, const Vec& au, const Vec& av);
SpMat advect_scal_in_a(const Grid2D& g, const Vec& s);

/// Buoyancy lift: cell scalar -> v-faces (two-cell average), n_vel x n_c
/// with zero u rows.
SpMat buoyancy(const Grid2D& g);

/// Discrete curl of a stream function on interior nodes: psi -> (u,v),
/// size n_vel x n_psi. Its range is exactly the kernel of divergence(g).
SpMat stream_curl(const Grid2D& g);

/// Sample an analytic function at the DOF locations of each block.
Vec sample_u(const Grid2D& g, const std::function<double(double, double)>& f);
Vec sample_v(const Grid2D& g, const std::function<double(double, double)>& f);
Vec sample_c(const Grid2D& g, const std::function<double(double, double)>& f);

}  // namespace stencils

}  // namespace bstab
