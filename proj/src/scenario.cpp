#include "bstab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bstab/errors.hpp"
#include "bstab/norms.hpp"

namespace bstab {

IntegratorConfig Scenario::make_integrator() const {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.sample_every = sample_every;
  cfg.checkpoint_every = checkpoint_every;
  cfg.cfl_safety = cfl_safety;
  cfg.q = q;
  cfg.p = p;
  if (scheme == "imex-cn-ab2") cfg.scheme = Scheme::ImexCnAb2;
  else if (scheme == "implicit-euler") cfg.scheme = Scheme::ImplicitEuler;
  else throw ConfigError("scenario: unknown scheme '" + scheme + "'");
  return cfg;
}

void Scenario::validate() const {
  if (nx < 4 || ny < 4 || !(Lx > 0) || !(Ly > 0))
    throw ConfigError("scenario: invalid grid block");
  if (!(nu > 0) || !(kappa > 0)) throw ConfigError("scenario: nu, kappa must be positive");
  if (!besov_exponents_admissible(q, p))
    throw ConfigError("scenario: inadmissible norm exponents, need q > 2 and 1 < p < 2q/(2q-1)");
  if (!(patch_x0 > 0 && patch_x1 < Lx && patch_y0 > 0 && patch_y1 < Ly &&
        patch_x0 < patch_x1 && patch_y0 < patch_y1))
    throw ConfigError("scenario: patch must lie strictly inside the domain");
  if (!(gamma0_fraction > 0) || !(gamma0_fraction < 1))
    throw ConfigError("scenario: gamma0_fraction must be in (0,1)");
  if (strategy != "auto" && strategy != "pole_placement" && strategy != "lqr")
    throw ConfigError("scenario: unknown strategy '" + strategy + "'");
  if (forcing != "manufactured" && forcing != "cell" && forcing != "stratified" &&
      forcing != "none")
    throw ConfigError("scenario: unknown forcing family '" + forcing + "'");
  if (!(dt > 0) || !(t_final > 0)) throw ConfigError("scenario: invalid integrator block");
  if (ramp_steps < 1) throw ConfigError("scenario: ramp_steps >= 1");
  (void)make_integrator();
}

namespace {

using KvMap = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

KvMap parse_kv(const std::string& text) {
  KvMap out;
  std::string section = "";
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("scenario: malformed section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("scenario: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    out[section][key] = val;
  }
  return out;
}

struct Reader {
  const KvMap& kv;
  const std::string& sec;
  template <typename T>
  void get(const std::string& key, T& slot) const {
    auto s = kv.find(sec);
    if (s == kv.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    std::istringstream is(it->second);
    if constexpr (std::is_same_v<T, std::string>) slot = it->second;
    else if (!(is >> slot))
      throw ConfigError("scenario: cannot parse [" + sec + "] " + key + " = " + it->second);
  }
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  const KvMap kv = parse_kv(text);
  Scenario s;
  {
    Reader r{kv, "scenario"};
    r.get("name", s.name);
  }
  {
    Reader r{kv, "grid"};
    r.get("nx", s.nx); r.get("ny", s.ny); r.get("Lx", s.Lx); r.get("Ly", s.Ly);
  }
  {
    Reader r{kv, "physics"};
    r.get("nu", s.nu); r.get("kappa", s.kappa); r.get("gamma", s.gamma);
    r.get("theta_bar", s.theta_bar);
  }
  {
    Reader r{kv, "forcing"};
    r.get("family", s.forcing); r.get("amp", s.amp); r.get("strat", s.strat);
    r.get("ramp_steps", s.ramp_steps);
  }
  {
    Reader r{kv, "patch"};
    r.get("x0", s.patch_x0); r.get("x1", s.patch_x1);
    r.get("y0", s.patch_y0); r.get("y1", s.patch_y1);
  }
  {
    Reader r{kv, "norms"};
    r.get("q", s.q); r.get("p", s.p);
  }
  {
    Reader r{kv, "synthesis"};
    r.get("gamma0_fraction", s.gamma0_fraction); r.get("strategy", s.strategy);
    r.get("k_override", s.k_override); r.get("margin", s.margin);
    r.get("gamma1_factor", s.gamma1_factor);
  }
  {
    Reader r{kv, "spectrum"};
    r.get("n_eigs", s.n_eigs); r.get("omega_guess", s.omega_guess);
    int fd = -1; r.get("force_dense", fd);
    if (fd >= 0) s.force_dense = fd != 0;
  }
  {
    Reader r{kv, "integrator"};
    r.get("dt", s.dt); r.get("t_final", s.t_final); r.get("sample_every", s.sample_every);
    r.get("checkpoint_every", s.checkpoint_every); r.get("cfl_safety", s.cfl_safety);
    r.get("scheme", s.scheme);
  }
  {
    Reader r{kv, "run"};
    r.get("out_dir", s.out_dir); r.get("seed", s.seed); r.get("ic_scale", s.ic_scale);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("scenario: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  os.precision(17);
  os << "[scenario]\nname = \"" << s.name << "\"\n\n";
  os << "[grid]\nnx = " << s.nx << "\nny = " << s.ny << "\nLx = " << s.Lx
     << "\nLy = " << s.Ly << "\n\n";
  os << "[physics]\nnu = " << s.nu << "\nkappa = " << s.kappa << "\ngamma = " << s.gamma
     << "\ntheta_bar = " << s.theta_bar << "\n\n";
  os << "[forcing]\nfamily = \"" << s.forcing << "\"\namp = " << s.amp
     << "\nstrat = " << s.strat << "\nramp_steps = " << s.ramp_steps << "\n\n";
  os << "[patch]\nx0 = " << s.patch_x0 << "\nx1 = " << s.patch_x1 << "\ny0 = " << s.patch_y0
     << "\ny1 = " << s.patch_y1 << "\n\n";
  os << "[norms]\nq = " << s.q << "\np = " << s.p << "\n\n";
  os << "[synthesis]\ngamma0_fraction = " << s.gamma0_fraction << "\nstrategy = \""
     << s.strategy << "\"\nk_override = " << s.k_override << "\nmargin = " << s.margin
     << "\ngamma1_factor = " << s.gamma1_factor << "\n\n";
  os << "[spectrum]\nn_eigs = " << s.n_eigs << "\nomega_guess = " << s.omega_guess
     << "\nforce_dense = " << (s.force_dense ? 1 : 0) << "\n\n";
  os << "[integrator]\ndt = " << s.dt << "\nt_final = " << s.t_final << "\nsample_every = "
     << s.sample_every << "\ncheckpoint_every = " << s.checkpoint_every
     << "\ncfl_safety = " << s.cfl_safety << "\nscheme = \"" << s.scheme << "\"\n\n";
  os << "[run]\nout_dir = \"" << s.out_dir << "\"\nseed = " << s.seed
     << "\nic_scale = " << s.ic_scale << "\n";
  return os.str();
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = serialize_scenario(s);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

ForcingBundle build_forcing(const Scenario& s, const Grid2D& g) {
  ForcingBundle fb(g);
  if (s.forcing == "none") return fb;

  if (s.forcing == "cell") {
    fb.gsrc.s = stencils::sample_c(g, [&](double x, double y) {
      return s.amp * std::sin(M_PI * x / g.Lx()) * std::sin(M_PI * y / g.Ly());
    });
    return fb;
  }
  if (s.forcing == "stratified") {
    fb.gsrc.s = stencils::sample_c(
        g, [&](double, double y) { return s.amp * std::sin(M_PI * y / g.Ly()); });
    return fb;
  }

  // manufactured: a single shear cell with an adverse stratification; the
  // forcing is whatever makes this pair an exact discrete equilibrium.
  Vec psi(g.n_psi());
  for (int j = 1; j <= g.ny() - 1; ++j)
    for (int i = 1; i <= g.nx() - 1; ++i) {
      const double sx = std::sin(M_PI * i * g.dx() / g.Lx());
      const double sy = std::sin(M_PI * j * g.dy() / g.Ly());
      psi[g.lpsi(i, j)] = s.amp / M_PI * sx * sx * sy * sy;
    }
  const Vec yv = stencils::stream_curl(g) * psi;
  VelocityField Y(g);
  Y.u = yv.head(g.n_u());
  Y.v = yv.tail(g.n_v());
  ScalarField Theta(g, stencils::sample_c(g, [&](double x, double y) {
                      return s.strat * std::sin(M_PI * x / g.Lx()) *
                             std::sin(2.0 * M_PI * y / g.Ly());
                    }));
  Vec fv = -(s.nu * (stencils::laplacian_vel(g) * yv) -
             stencils::advect_vel_in_b(g, Y.u, Y.v) * yv +
             s.gamma * (stencils::buoyancy(g) * Theta.s));
  fb.f.u = fv.head(g.n_u());
  fb.f.v = fv.tail(g.n_v());
  fb.gsrc.s = -(s.kappa * (stencils::laplacian_c(g) * Theta.s) -
                stencils::advect_scal_in_s(g, Y.u, Y.v) * Theta.s);
  Equilibrium seed(g);
  seed.ye = Y;
  seed.theta_e = Theta;
  fb.init = std::move(seed);
  return fb;
}

}  // namespace bstab
