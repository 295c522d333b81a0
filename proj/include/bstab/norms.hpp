#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "bstab/grid.hpp"
#include "bstab/stencils.hpp"

namespace bstab {

/// Midpoint-rule discrete L^2(Omega) inner product over any block layout.
inline double inner_l2(const Grid2D& g, const Vec& a, const Vec& b) {
  return g.cell_volume() * a.dot(b);
}
inline double norm_l2(const Grid2D& g, const Vec& a) { return std::sqrt(inner_l2(g, a, a)); }

/// Midpoint-rule L^q norm, q in (1, inf): (sum dV |x_i|^q)^(1/q).
double lq_norm(const Grid2D& g, const Vec& x, double q);
double lq_norm(const Grid2D& g, const ScalarField& f, double q);
double lq_norm(const Grid2D& g, const VelocityField& f, double q);
double lq_norm_state(const Grid2D& g, const Vec& state, double q);

/// Discrete W^{2,q} surrogate ||f||_q + ||Lap f||_q used by the K-functional.
double w2q_proxy_norm(const Grid2D& g, const ScalarField& f, double q);
double w2q_proxy_norm(const Grid2D& g, const VelocityField& f, double q);

bool besov_exponents_admissible(double q, double p);

/// Discrete stand-in for the interpolation norm between L^q and W^{2,q}:
///   ( sum_j [ t_j^{-(1-1/p)} K(t_j, f) ]^p  dlog t )^{1/p},
/// K(t, f) = ||f - g_t||_q + t (||g_t||_q + ||Lap g_t||_q) with the splitting
/// g_t obtained from one Tikhonov smoothing solve (I + t^2 Lap^T Lap) g = f
/// per scale. Scales are log-uniform on [dx^2, 1]. Homogeneous of degree 1.
class BesovProxy {
public:
  BesovProxy(const Grid2D& g, double q, double p, int levels = 8);

  double value(const ScalarField& f) const;
  double value(const VelocityField& f) const;
  /// Fluid Besov proxy + L^q of the scalar part: the product-space norm used
  /// for smallness gates on stacked states.
  double vqp_norm(const Vec& state) const;

  const std::vector<double>& scales() const { return scales_; }

private:
  struct Smoother {
    Eigen::SimplicialLDLT<SpMat> fact;
    SpMat lap;
  };
  double k_functional(const Smoother& sm, const Vec& f, double t) const;
  double combine(const std::vector<double>& kvals) const;

  const Grid2D grid_;
  double q_, p_;
  std::vector<double> scales_;
  // One factorization per (scale, block kind).
  std::vector<std::unique_ptr<Smoother>> sm_c_, sm_u_, sm_v_;
};

/// One-off convenience wrappers.
double besov_proxy_norm(const Grid2D& g, const ScalarField& f, double q, double p, int levels = 8);
double besov_proxy_norm(const Grid2D& g, const VelocityField& f, double q, double p, int levels = 8);

}  // namespace bstab
