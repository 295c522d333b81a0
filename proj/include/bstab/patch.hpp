#pragma once

#include "bstab/grid.hpp"

namespace bstab {

/// Axis-aligned control patch omega, strictly inside the domain, realized as
/// 0/1 indicator weights at every degree-of-freedom location.
class PatchMask {
public:
  PatchMask(const Grid2D& g, double x0, double x1, double y0, double y1)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), mu_(Vec::Zero(g.n_u())), mv_(Vec::Zero(g.n_v())),
        mc_(Vec::Zero(g.n_c())) {
    if (!(x0 < x1 && y0 < y1)) throw std::invalid_argument("PatchMask: empty rectangle");
    if (!(x0 > 0.0 && y0 > 0.0 && x1 < g.Lx() && y1 < g.Ly()))
      throw std::invalid_argument("PatchMask: patch must lie strictly inside the domain");

    int hits = 0;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 1; i < g.nx(); ++i)
        if (inside(g.xu(i), g.yu(j))) { mu_[g.lu(i, j)] = 1.0; ++hits; }
    for (int j = 1; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (inside(g.xv(i), g.yv(j))) { mv_[g.lv(i, j)] = 1.0; ++hits; }
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (inside(g.xc(i), g.yc(j))) { mc_[g.lc(i, j)] = 1.0; ++hits; }
    if (hits == 0)
      throw std::invalid_argument("PatchMask: patch contains no grid locations; enlarge omega");
  }

  bool inside(double x, double y) const { return x >= x0_ && x <= x1_ && y >= y0_ && y <= y1_; }

  const Vec& mask_u() const { return mu_; }
  const Vec& mask_v() const { return mv_; }
  const Vec& mask_c() const { return mc_; }

  /// Indicator over the whole state layout.
  Vec mask_state(const Grid2D& g) const {
    Vec m(g.n_state());
    m.segment(0, g.n_u()) = mu_;
    m.segment(g.n_u(), g.n_v()) = mv_;
    m.segment(g.n_vel(), g.n_c()) = mc_;
    return m;
  }

  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }

private:
  double x0_, x1_, y0_, y1_;
  Vec mu_, mv_, mc_;
};

}  // namespace bstab
