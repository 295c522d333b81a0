#include "bstab/norms.hpp"

#include <cmath>

#include "bstab/errors.hpp"

namespace bstab {

namespace {

double lq_of_vec(double dV, const Vec& x, double q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]), q);
  return std::pow(dV * acc, 1.0 / q);
}

void check_q(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw ConfigError("lq_norm: require q in (1, inf)");
}

}  // namespace

double lq_norm(const Grid2D& g, const Vec& x, double q) {
  check_q(q);
  return lq_of_vec(g.cell_volume(), x, q);
}

double lq_norm(const Grid2D& g, const ScalarField& f, double q) { return lq_norm(g, f.s, q); }

double lq_norm(const Grid2D& g, const VelocityField& f, double q) {
  check_q(q);
  const double dV = g.cell_volume();
  return std::pow(std::pow(lq_of_vec(dV, f.u, q), q) + std::pow(lq_of_vec(dV, f.v, q), q),
                  1.0 / q);
}

double lq_norm_state(const Grid2D& g, const Vec& state, double q) {
  check_q(q);
  if (state.size() != g.n_state()) throw ConfigError("lq_norm_state: size mismatch");
  return lq_of_vec(g.cell_volume(), state, q);
}

double w2q_proxy_norm(const Grid2D& g, const ScalarField& f, double q) {
  const SpMat L = stencils::laplacian_c(g);
  return lq_norm(g, f.s, q) + lq_norm(g, Vec(L * f.s), q);
}

double w2q_proxy_norm(const Grid2D& g, const VelocityField& f, double q) {
  const SpMat Lu = stencils::laplacian_u(g), Lv = stencils::laplacian_v(g);
  VelocityField lap(g);
  lap.u = Lu * f.u;
  lap.v = Lv * f.v;
  return lq_norm(g, f, q) + lq_norm(g, lap, q);
}

bool besov_exponents_admissible(double q, double p) {
  return q > 2.0 && p > 1.0 && p < 2.0 * q / (2.0 * q - 1.0);
}

BesovProxy::BesovProxy(const Grid2D& g, double q, double p, int levels)
    : grid_(g), q_(q), p_(p) {
  if (!besov_exponents_admissible(q, p))
    throw ConfigError("BesovProxy: need q > 2 and 1 < p < 2q/(2q-1)");
  if (levels < 3) throw ConfigError("BesovProxy: need at least 3 scales");

  const double t_min = g.dx() * g.dx();
  // Log-uniform ladder from 1 down to dx^2.
  const double ratio = std::pow(t_min, 1.0 / (levels - 1));
  double t = 1.0;
  for (int j = 0; j < levels; ++j) {
    scales_.push_back(t);
    t *= ratio;
  }

  auto make = [&](const SpMat& lap) {
    std::vector<std::unique_ptr<Smoother>> out;
    const SpMat lap2 = SpMat(lap.transpose()) * lap;
    SpMat eye(lap.rows(), lap.cols());
    eye.setIdentity();
    for (double tj : scales_) {
      auto sm = std::make_unique<Smoother>();
      sm->lap = lap;
      SpMat sys = eye + (tj * tj) * lap2;
      sm->fact.compute(sys);
      if (sm->fact.info() != Eigen::Success)
        throw FactorizationSingular("BesovProxy: smoothing system factorization failed");
      out.push_back(std::move(sm));
    }
    return out;
  };
  sm_c_ = make(stencils::laplacian_c(g));
  sm_u_ = make(stencils::laplacian_u(g));
  sm_v_ = make(stencils::laplacian_v(g));
}

double BesovProxy::k_functional(const Smoother& sm, const Vec& f, double t) const {
  const Vec smooth = sm.fact.solve(f);
  const Vec rough = f - smooth;
  const double dV = grid_.cell_volume();
  const double lq_rough = lq_of_vec(dV, rough, q_);
  const double w2q = lq_of_vec(dV, smooth, q_) + lq_of_vec(dV, Vec(sm.lap * smooth), q_);
  return lq_rough + t * w2q;
}

double BesovProxy::combine(const std::vector<double>& kvals) const {
  const double theta = 1.0 - 1.0 / p_;
  const double dlog = std::log(scales_[0] / scales_[1]);  // constant by construction
  double acc = 0.0;
  for (std::size_t j = 0; j < scales_.size(); ++j)
    acc += std::pow(std::pow(scales_[j], -theta) * kvals[j], p_) * dlog;
  return std::pow(acc, 1.0 / p_);
}

double BesovProxy::value(const ScalarField& f) const {
  std::vector<double> kv;
  for (std::size_t j = 0; j < scales_.size(); ++j)
    kv.push_back(k_functional(*sm_c_[j], f.s, scales_[j]));
  return combine(kv);
}

double BesovProxy::value(const VelocityField& f) const {
  std::vector<double> kv;
  for (std::size_t j = 0; j < scales_.size(); ++j) {
    // Joint K-functional: split each component with the same scale, take the
    // joint L^q of the rough and smooth parts.
    const Vec su = sm_u_[j]->fact.solve(f.u);
    const Vec sv = sm_v_[j]->fact.solve(f.v);
    const double dV = grid_.cell_volume();
    auto joint_q = [&](const Vec& a, const Vec& b) {
      return std::pow(std::pow(lq_of_vec(dV, a, q_), q_) + std::pow(lq_of_vec(dV, b, q_), q_),
                      1.0 / q_);
    };
    const double rough = joint_q(Vec(f.u - su), Vec(f.v - sv));
    const double w2q =
        joint_q(su, sv) + joint_q(Vec(sm_u_[j]->lap * su), Vec(sm_v_[j]->lap * sv));
    kv.push_back(rough + scales_[j] * w2q);
  }
  return combine(kv);
}

double BesovProxy::vqp_norm(const Vec& state) const {
  VelocityField vel(grid_);
  ScalarField h(grid_);
  unpack_state(grid_, state, vel, h);
  return value(vel) + lq_norm(grid_, h, q_);
}

double besov_proxy_norm(const Grid2D& g, const ScalarField& f, double q, double p, int levels) {
  return BesovProxy(g, q, p, levels).value(f);
}

double besov_proxy_norm(const Grid2D& g, const VelocityField& f, double q, double p, int levels) {
  return BesovProxy(g, q, p, levels).value(f);
}

}  // namespace bstab
