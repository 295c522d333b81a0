#include "bstab/stencils.hpp"

#include <vector>

namespace bstab::stencils {

namespace {

// Pinned-face accessors: boundary-normal faces hold the Dirichlet zero.
inline double at_u(const Grid2D& g, const Vec& u, int i, int j) {
  if (i <= 0 || i >= g.nx()) return 0.0;
  return u[g.lu(i, j)];
}
inline double at_v(const Grid2D& g, const Vec& v, int i, int j) {
  if (j <= 0 || j >= g.ny()) return 0.0;
  return v[g.lv(i, j)];
}

}  // namespace

SpMat divergence(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(4 * g.n_c());
  const double ax = 1.0 / g.dx(), ay = 1.0 / g.dy();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.lc(i, j);
      if (i + 1 <= g.nx() - 1) t.emplace_back(row, g.lu(i + 1, j), ax);
      if (i >= 1) t.emplace_back(row, g.lu(i, j), -ax);
      if (j + 1 <= g.ny() - 1) t.emplace_back(row, g.n_u() + g.lv(i, j + 1), ay);
      if (j >= 1) t.emplace_back(row, g.n_u() + g.lv(i, j), -ay);
    }
  SpMat D(g.n_c(), g.n_vel());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SpMat gradient(const Grid2D& g) {
  // Summation by parts on the staggered grid makes -D^T the exact gradient.
  SpMat G = SpMat(-divergence(g).transpose());
  return G;
}

SpMat laplacian_u(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(5 * g.n_u());
  const double ix2 = 1.0 / (g.dx() * g.dx()), iy2 = 1.0 / (g.dy() * g.dy());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) {
      const int row = g.lu(i, j);
      double diag = -2.0 * ix2;
      if (i - 1 >= 1) t.emplace_back(row, g.lu(i - 1, j), ix2);
      if (i + 1 <= g.nx() - 1) t.emplace_back(row, g.lu(i + 1, j), ix2);
      // Tangential walls: ghost reflection u(ghost) = -u(first interior),
      // so a wall side deepens the diagonal by 2/dy^2 instead of 1/dy^2.
      if (j - 1 >= 0) { t.emplace_back(row, g.lu(i, j - 1), iy2); diag -= iy2; }
      else diag -= 2.0 * iy2;
      if (j + 1 <= g.ny() - 1) { t.emplace_back(row, g.lu(i, j + 1), iy2); diag -= iy2; }
      else diag -= 2.0 * iy2;
      t.emplace_back(row, row, diag);
    }
  SpMat L(g.n_u(), g.n_u());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SpMat laplacian_v(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(5 * g.n_v());
  const double ix2 = 1.0 / (g.dx() * g.dx()), iy2 = 1.0 / (g.dy() * g.dy());
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.lv(i, j);
      double diag = -2.0 * iy2;
      if (j - 1 >= 1) t.emplace_back(row, g.lv(i, j - 1), iy2);
      if (j + 1 <= g.ny() - 1) t.emplace_back(row, g.lv(i, j + 1), iy2);
      if (i - 1 >= 0) { t.emplace_back(row, g.lv(i - 1, j), ix2); diag -= ix2; }
      else diag -= 2.0 * ix2;
      if (i + 1 <= g.nx() - 1) { t.emplace_back(row, g.lv(i + 1, j), ix2); diag -= ix2; }
      else diag -= 2.0 * ix2;
      t.emplace_back(row, row, diag);
    }
  SpMat L(g.n_v(), g.n_v());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SpMat laplacian_c(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(5 * g.n_c());
  const double ix2 = 1.0 / (g.dx() * g.dx()), iy2 = 1.0 / (g.dy() * g.dy());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.lc(i, j);
      double diag = 0.0;
      if (i - 1 >= 0) { t.emplace_back(row, g.lc(i - 1, j), ix2); diag -= ix2; }
      else diag -= 2.0 * ix2;
      if (i + 1 <= g.nx() - 1) { t.emplace_back(row, g.lc(i + 1, j), ix2); diag -= ix2; }
      else diag -= 2.0 * ix2;
      if (j - 1 >= 0) { t.emplace_back(row, g.lc(i, j - 1), iy2); diag -= iy2; }
      else diag -= 2.0 * iy2;
      if (j + 1 <= g.ny() - 1) { t.emplace_back(row, g.lc(i, j + 1), iy2); diag -= iy2; }
      else diag -= 2.0 * iy2;
      t.emplace_back(row, row, diag);
    }
  SpMat L(g.n_c(), g.n_c());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

SpMat laplacian_vel(const Grid2D& g) {
  SpMat Lu = laplacian_u(g), Lv = laplacian_v(g);
  std::vector<Triplet> t;
  t.reserve(Lu.nonZeros() + Lv.nonZeros());
  for (int k = 0; k < Lu.outerSize(); ++k)
    for (SpMat::InnerIterator it(Lu, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < Lv.outerSize(); ++k)
    for (SpMat::InnerIterator it(Lv, k); it; ++it)
      t.emplace_back(g.n_u() + it.row(), g.n_u() + it.col(), it.value());
  SpMat L(g.n_vel(), g.n_vel());
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

namespace {

// Accumulates the divergence-form advection div(a (x) b) with a frozen
// (linear in b) or b frozen (linear in a). One routine serves both: the
// flux a_face * b_face is bilinear, so each flux contributes coefficient
// (frozen factor)/2 to the two DOFs of the varying factor.
enum class Vary { A, B };

SpMat advect_vel(const Grid2D& g, const Vec& fu, const Vec& fv, Vary vary) {
  std::vector<Triplet> t;
  t.reserve(16 * g.n_vel());
  const double ax = 1.0 / g.dx(), ay = 1.0 / g.dy();
  const int nu = g.n_u();

  // Flux helper: deposit d(flux)/d(varying DOFs) * sign / h at a row.
  // Each flux = (p1+p2)/2 * (q1+q2)/2 with p from a-samples, q from b-samples.
  auto add = [&](int row, double coeff, int col) {
    if (col >= 0 && coeff != 0.0) t.emplace_back(row, col, coeff);
  };

  // --- u-momentum rows ---
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) {
      const int row = g.lu(i, j);
      // x-fluxes at cell centers ic = i-1 and ic = i:
      for (int s = 0; s < 2; ++s) {
        const int ic = i - 1 + s;
        const double sgn = (s == 1 ? 1.0 : -1.0) * ax;
        // a-samples: u at faces ic, ic+1 ; b-samples likewise.
        const int c1 = (ic >= 1) ? g.lu(ic, j) : -1;
        const int c2 = (ic + 1 <= g.nx() - 1) ? g.lu(ic + 1, j) : -1;
        const double abar = 0.5 * (at_u(g, fu, ic, j) + at_u(g, fu, ic + 1, j));
        if (vary == Vary::B) {
          add(row, sgn * abar * 0.5, c1);
          add(row, sgn * abar * 0.5, c2);
        } else {
          const double bbar = abar;  // frozen factor is b here
          add(row, sgn * bbar * 0.5, c1);
          add(row, sgn * bbar * 0.5, c2);
        }
      }
      // y-fluxes at nodes jn = j and jn = j+1 (wall nodes carry zero flux):
      for (int s = 0; s < 2; ++s) {
        const int jn = j + s;
        if (jn == 0 || jn == g.ny()) continue;
        const double sgn = (s == 1 ? 1.0 : -1.0) * ay;
        // advecting sample: v averaged across the node; advected: u across.
        const int av1 = g.lv(i - 1, jn), av2 = g.lv(i, jn);
        const int bu1 = g.lu(i, jn - 1), bu2 = g.lu(i, jn);
        const double vbar = 0.5 * (fv[g.lv(i - 1, jn)] + fv[g.lv(i, jn)]);
        const double ubar = 0.5 * (fu[g.lu(i, jn - 1)] + fu[g.lu(i, jn)]);
        if (vary == Vary::B) {
          add(row, sgn * vbar * 0.5, bu1);
          add(row, sgn * vbar * 0.5, bu2);
        } else {
          add(row, sgn * ubar * 0.5, nu + av1);
          add(row, sgn * ubar * 0.5, nu + av2);
        }
      }
    }

  // --- v-momentum rows ---
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = nu + g.lv(i, j);
      // x-fluxes at nodes in = i and in = i+1 (side-wall nodes: zero flux):
      for (int s = 0; s < 2; ++s) {
        const int in = i + s;
        if (in == 0 || in == g.nx()) continue;
        const double sgn = (s == 1 ? 1.0 : -1.0) * ax;
        const int au1 = g.lu(in, j - 1), au2 = g.lu(in, j);
        const int bv1 = g.lv(in - 1, j), bv2 = g.lv(in, j);
        const double ubar = 0.5 * (fu[g.lu(in, j - 1)] + fu[g.lu(in, j)]);
        const double vbar = 0.5 * (fv[g.lv(in - 1, j)] + fv[g.lv(in, j)]);
        if (vary == Vary::B) {
          add(row, sgn * ubar * 0.5, nu + bv1);
          add(row, sgn * ubar * 0.5, nu + bv2);
        } else {
          add(row, sgn * vbar * 0.5, au1);
          add(row, sgn * vbar * 0.5, au2);
        }
      }
      // y-fluxes at cell centers jc = j-1 and jc = j:
      for (int s = 0; s < 2; ++s) {
        const int jc = j - 1 + s;
        const double sgn = (s == 1 ? 1.0 : -1.0) * ay;
        const int c1 = (jc >= 1) ? g.lv(i, jc) : -1;
        const int c2 = (jc + 1 <= g.ny() - 1) ? g.lv(i, jc + 1) : -1;
        const double abar = 0.5 * (at_v(g, fv, i, jc) + at_v(g, fv, i, jc + 1));
        add(row, sgn * abar * 0.5, c1 >= 0 ? nu + c1 : -1);
        add(row, sgn * abar * 0.5, c2 >= 0 ? nu + c2 : -1);
      }
    }

  SpMat A(g.n_vel(), g.n_vel());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

SpMat advect_vel_in_b(const Grid2D& g, const Vec& au, const Vec& av) {
  return advect_vel(g, au, av, Vary::B);
}

SpMat advect_vel_in_a(const Grid2D& g, const Vec& bu, const Vec& bv) {
  return advect_vel(g, bu, bv, Vary::A);
}

SpMat advect_scal_in_s(const Grid2D& g, const Vec& au, const Vec& av) {
  std::vector<Triplet> t;
  t.reserve(8 * g.n_c());
  const double ax = 1.0 / g.dx(), ay = 1.0 / g.dy();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.lc(i, j);
      // Wall fluxes vanish with the pinned normal velocity.
      if (i + 1 <= g.nx() - 1) {
        const double a = au[g.lu(i + 1, j)];
        t.emplace_back(row, g.lc(i, j), ax * a * 0.5);
        t.emplace_back(row, g.lc(i + 1, j), ax * a * 0.5);
      }
      if (i >= 1) {
        const double a = au[g.lu(i, j)];
        t.emplace_back(row, g.lc(i - 1, j), -ax * a * 0.5);
        t.emplace_back(row, g.lc(i, j), -ax * a * 0.5);
      }
      if (j + 1 <= g.ny() - 1) {
        const double a = av[g.lv(i, j + 1)];
        t.emplace_back(row, g.lc(i, j), ay * a * 0.5);
        t.emplace_back(row, g.lc(i, j + 1), ay * a * 0.5);
      }
      if (j >= 1) {
        const double a = av[g.lv(i, j)];
        t.emplace_back(row, g.lc(i, j - 1), -ay * a * 0.5);
        t.emplace_back(row, g.lc(i, j), -ay * a * 0.5);
      }
    }
  SpMat A(g.n_c(), g.n_c());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SpMat advect_scal_in_a(const Grid2D& g, const Vec& s) {
  std::vector<Triplet> t;
  t.reserve(4 * g.n_c());
  const double ax = 1.0 / g.dx(), ay = 1.0 / g.dy();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.lc(i, j);
      if (i + 1 <= g.nx() - 1)
        t.emplace_back(row, g.lu(i + 1, j), ax * 0.5 * (s[g.lc(i, j)] + s[g.lc(i + 1, j)]));
      if (i >= 1)
        t.emplace_back(row, g.lu(i, j), -ax * 0.5 * (s[g.lc(i - 1, j)] + s[g.lc(i, j)]));
      if (j + 1 <= g.ny() - 1)
        t.emplace_back(row, g.n_u() + g.lv(i, j + 1),
                       ay * 0.5 * (s[g.lc(i, j)] + s[g.lc(i, j + 1)]));
      if (j >= 1)
        t.emplace_back(row, g.n_u() + g.lv(i, j),
                       -ay * 0.5 * (s[g.lc(i, j - 1)] + s[g.lc(i, j)]));
    }
  SpMat A(g.n_c(), g.n_vel());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SpMat buoyancy(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(2 * g.n_v());
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.n_u() + g.lv(i, j);
      t.emplace_back(row, g.lc(i, j - 1), 0.5);
      t.emplace_back(row, g.lc(i, j), 0.5);
    }
  SpMat B(g.n_vel(), g.n_c());
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

SpMat stream_curl(const Grid2D& g) {
  std::vector<Triplet> t;
  t.reserve(2 * g.n_vel());
  const double ax = 1.0 / g.dx(), ay = 1.0 / g.dy();
  auto psi_col = [&](int i, int j) -> int {
    if (i < 1 || i > g.nx() - 1 || j < 1 || j > g.ny() - 1) return -1;  // boundary psi = 0
    return g.lpsi(i, j);
  };
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) {
      const int row = g.lu(i, j);
      if (int c = psi_col(i, j + 1); c >= 0) t.emplace_back(row, c, ay);
      if (int c = psi_col(i, j); c >= 0) t.emplace_back(row, c, -ay);
    }
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int row = g.n_u() + g.lv(i, j);
      if (int c = psi_col(i + 1, j); c >= 0) t.emplace_back(row, c, -ax);
      if (int c = psi_col(i, j); c >= 0) t.emplace_back(row, c, ax);
    }
  SpMat C(g.n_vel(), g.n_psi());
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

Vec sample_u(const Grid2D& g, const std::function<double(double, double)>& f) {
  Vec x(g.n_u());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) x[g.lu(i, j)] = f(g.xu(i), g.yu(j));
  return x;
}

Vec sample_v(const Grid2D& g, const std::function<double(double, double)>& f) {
  Vec x(g.n_v());
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 0; i < g.nx(); ++i) x[g.lv(i, j)] = f(g.xv(i), g.yv(j));
  return x;
}

Vec sample_c(const Grid2D& g, const std::function<double(double, double)>& f) {
  Vec x(g.n_c());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) x[g.lc(i, j)] = f(g.xc(i), g.yc(j));
  return x;
}

}  // namespace bstab::stencils
