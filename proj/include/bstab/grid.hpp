#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace bstab {

using Vec = Eigen::VectorXd;

/// Uniform staggered (MAC) grid on the rectangle [0,Lx] x [0,Ly].
///
/// Layout: u on vertical faces, v on horizontal faces, scalars at cell
/// centers. Faces on the boundary carry the homogeneous Dirichlet value and
/// are not stored; only interior degrees of freedom enter state vectors.
///
/// Stored index ranges:
///   u(i,j):  i = 1..nx-1,  j = 0..ny-1   at (i*dx, (j+1/2)*dy)
///   v(i,j):  i = 0..nx-1,  j = 1..ny-1   at ((i+1/2)*dx, j*dy)
///   s(i,j):  i = 0..nx-1,  j = 0..ny-1   at ((i+1/2)*dx, (j+1/2)*dy)
///
/// State vectors stack [u-block | v-block | scalar-block].
class Grid2D {
public:
  Grid2D(int nx, int ny, double Lx, double Ly) : nx_(nx), ny_(ny), Lx_(Lx), Ly_(Ly) {
    if (nx < 4 || ny < 4)
      throw std::invalid_argument("Grid2D: too coarse, need nx,ny >= 4 (got " +
                                  std::to_string(nx) + "x" + std::to_string(ny) + ")");
    if (!(Lx > 0.0) || !(Ly > 0.0))
      throw std::invalid_argument("Grid2D: domain extents must be positive");
    dx_ = Lx / nx;
    dy_ = Ly / ny;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double Lx() const { return Lx_; }
  double Ly() const { return Ly_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_volume() const { return dx_ * dy_; }

  // Block sizes.
  int n_u() const { return (nx_ - 1) * ny_; }
  int n_v() const { return nx_ * (ny_ - 1); }
  int n_vel() const { return n_u() + n_v(); }
  int n_c() const { return nx_ * ny_; }
  int n_state() const { return n_vel() + n_c(); }
  /// Interior grid nodes = dimension of the discretely divergence-free space.
  int n_psi() const { return (nx_ - 1) * (ny_ - 1); }

  // Local (within-block) index maps.
  int lu(int i, int j) const { return (i - 1) + (nx_ - 1) * j; }  // i in [1,nx-1], j in [0,ny-1]
  int lv(int i, int j) const { return i + nx_ * (j - 1); }        // i in [0,nx-1], j in [1,ny-1]
  int lc(int i, int j) const { return i + nx_ * j; }              // i in [0,nx-1], j in [0,ny-1]
  int lpsi(int i, int j) const { return (i - 1) + (nx_ - 1) * (j - 1); }  // interior node (i,j)

  // Global state-vector indices.
  int iu(int i, int j) const { return lu(i, j); }
  int iv(int i, int j) const { return n_u() + lv(i, j); }
  int ic(int i, int j) const { return n_vel() + lc(i, j); }

  // Physical locations of degrees of freedom.
  double xu(int i) const { return i * dx_; }
  double yu(int j) const { return (j + 0.5) * dy_; }
  double xv(int i) const { return (i + 0.5) * dx_; }
  double yv(int j) const { return j * dy_; }
  double xc(int i) const { return (i + 0.5) * dx_; }
  double yc(int j) const { return (j + 0.5) * dy_; }

  bool same_as(const Grid2D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && Lx_ == o.Lx_ && Ly_ == o.Ly_;
  }

private:
  int nx_, ny_;
  double Lx_, Ly_, dx_, dy_;
};

inline Grid2D build_grid(int nx, int ny, double Lx, double Ly) { return Grid2D(nx, ny, Lx, Ly); }

/// Cell-centered scalar field (temperature, pressure, forcing densities).
struct ScalarField {
  explicit ScalarField(const Grid2D& g) : s(Vec::Zero(g.n_c())) {}
  ScalarField(const Grid2D& g, const Vec& values) : s(values) {
    if (s.size() != g.n_c()) throw std::invalid_argument("ScalarField: size mismatch");
  }
  Vec s;
};

/// Face-normal velocity components; boundary faces are implicit zeros.
struct VelocityField {
  explicit VelocityField(const Grid2D& g) : u(Vec::Zero(g.n_u())), v(Vec::Zero(g.n_v())) {}
  Vec u, v;
};

/// Flat stacked state (z1, z2, h). Pack/unpack is the identity on the
/// underlying coefficients; the block order is fixed by Grid2D.
struct StateVector {
  explicit StateVector(const Grid2D& g) : x(Vec::Zero(g.n_state())) {}
  StateVector(const Grid2D& g, Vec values) : x(std::move(values)) {
    if (x.size() != g.n_state()) throw std::invalid_argument("StateVector: size mismatch");
  }
  Vec x;
};

inline Vec pack_state(const Grid2D& g, const VelocityField& vel, const ScalarField& h) {
  Vec x(g.n_state());
  x.segment(0, g.n_u()) = vel.u;
  x.segment(g.n_u(), g.n_v()) = vel.v;
  x.segment(g.n_vel(), g.n_c()) = h.s;
  return x;
}

inline void unpack_state(const Grid2D& g, const Vec& x, VelocityField& vel, ScalarField& h) {
  vel.u = x.segment(0, g.n_u());
  vel.v = x.segment(g.n_u(), g.n_v());
  h.s = x.segment(g.n_vel(), g.n_c());
}

inline Eigen::Ref<const Vec> vel_part(const Grid2D& g, const Vec& x) {
  return x.segment(0, g.n_vel());
}
inline Eigen::Ref<const Vec> scal_part(const Grid2D& g, const Vec& x) {
  return x.segment(g.n_vel(), g.n_c());
}

}  // namespace bstab
