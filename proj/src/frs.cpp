#include "reachplan/frs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "reachplan/lie.hpp"

namespace reachplan::frs {

void FrsModel::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("FrsModel: horizon must be positive");
  if (space.count() != 1 + states.size() + params.size() || space.name(0) != "t")
    throw std::invalid_argument("FrsModel: space must be (t, states..., params...)");
  if (f.size() != states.size() || g.size() != states.size())
    throw std::invalid_argument("FrsModel: one f and g component per state");
  if (Xs.dim() != states.size() || X0.size() != states.size() || K.dim() != params.size())
    throw std::invalid_argument("FrsModel: box dimensions do not match the model");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (space.name(1 + i) != states[i]) throw std::invalid_argument("FrsModel: state order does not match space");
    if (X0[i].lo > X0[i].hi || X0[i].lo < Xs[i].lo || X0[i].hi > Xs[i].hi)
      throw std::invalid_argument("FrsModel: X0 must lie inside Xs");
  }
  for (const auto& p : f)
    if (p.space() != space) throw std::invalid_argument("FrsModel: f space mismatch");
  for (const auto& p : g)
    if (p.space() != space) throw std::invalid_argument("FrsModel: g space mismatch");
}

FrsModel dubins_model(const vehicle::ModelConfig& cfg) {
  FrsModel m;
  m.space = vehicle::model_space();
  m.states = {"x", "y", "th"};
  m.params = {"k1", "k2"};
  const auto f = vehicle::dubins_poly(m.space, 3);
  const auto env = vehicle::error_envelope(m.space, cfg);
  m.f.assign(f.begin(), f.end());
  m.g.assign(env.g().begin(), env.g().end());
  m.Xs = cfg.Xs;
  m.X0 = {cfg.X0[0], cfg.X0[1], {cfg.x0_heading, cfg.x0_heading}};
  m.K = cfg.K;
  m.T = cfg.horizon;
  m.g_id = env.id();
  return m;
}

FrsModel sanity_model_1d() {
  FrsModel m;
  m.space = VariableSpace({"t", "x", "k"});
  m.states = {"x"};
  m.params = {"k"};
  m.f = {Polynomial::variable(m.space, "k")};
  m.g = {Polynomial::constant(m.space, 0.1)};
  m.Xs = Box({{-1.0, 1.0}});
  m.X0 = {{-0.1, 0.1}};
  m.K = Box({{-0.5, 0.5}});
  m.T = 1.0;
  m.g_id = "const0.1";
  return m;
}

namespace {

std::vector<AffineMap> scaling_maps(const FrsModel& m) {
  std::vector<AffineMap> maps;
  maps.push_back({0.5 * m.T, 0.5 * m.T});
  for (std::size_t i = 0; i < m.states.size(); ++i) maps.push_back({0.5 * m.Xs[i].width(), m.Xs[i].center()});
  for (std::size_t i = 0; i < m.params.size(); ++i) maps.push_back({0.5 * m.K[i].width(), m.K[i].center()});
  return maps;
}

// Model fields in scaled coordinates: dz_i/dt = f_i(map(z)) / scale_i.
struct ScaledModel {
  std::vector<Polynomial> f, g;
  double time_rate = 1.0;
  std::vector<std::size_t> state_idx, param_idx, all_idx;
};

ScaledModel scale_model(const FrsModel& m, const std::vector<AffineMap>& maps) {
  ScaledModel s;
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    const double sc = maps[1 + i].scale;
    s.f.push_back(m.f[i].affine_substitute(maps).scale(1.0 / sc));
    s.g.push_back(m.g[i].affine_substitute(maps).scale(1.0 / sc));
    s.state_idx.push_back(1 + i);
  }
  for (std::size_t i = 0; i < m.params.size(); ++i) s.param_idx.push_back(1 + m.states.size() + i);
  s.time_rate = 1.0 / maps[0].scale;
  for (std::size_t i = 0; i < m.space.count(); ++i) s.all_idx.push_back(i);
  return s;
}

double to_unit(const AffineMap& m, double x) { return (x - m.offset) / m.scale; }

int round_up_even(int d) { return d % 2 == 0 ? d : d + 1; }

}  // namespace

int required_two_l(const FrsModel& model, int d_dec) {
  int need = d_dec;
  for (std::size_t i = 0; i < model.states.size(); ++i) {
    need = std::max(need, d_dec - 1 + std::max(model.f[i].degree(), 0));
    need = std::max(need, d_dec - 1 + std::max(model.g[i].degree(), 0));
  }
  return round_up_even(need);
}

FrsProgram build_program(const FrsModel& model, int d_dec, int two_l) {
  model.validate();
  if (d_dec < 1) throw std::invalid_argument("build_program: decision degree must be positive");
  const int need = required_two_l(model, d_dec);
  if (two_l == 0) two_l = need;
  if (two_l < need || two_l % 2 != 0)
    throw std::invalid_argument("build_program: relaxation degree " + std::to_string(two_l) +
                                " too small, need at least " + std::to_string(need));

  const auto maps = scaling_maps(model);
  const auto sm = scale_model(model, maps);
  const auto& sp = model.space;
  FrsProgram out{sos::SosProgram(sp), {}, {}, {}, d_dec, two_l, maps};
  auto& prog = out.program;

  std::vector<std::size_t> xk = sm.state_idx;
  xk.insert(xk.end(), sm.param_idx.begin(), sm.param_idx.end());
  out.v = prog.add_polynomial(sm.all_idx, d_dec);
  out.w = prog.add_polynomial(xk, d_dec);
  for (std::size_t i = 0; i < model.states.size(); ++i) out.q.push_back(prog.add_polynomial(sm.all_idx, d_dec));

  const auto gens_all = sos::unit_box_generators(sp, sm.all_idx);
  const auto gens_xk = sos::unit_box_generators(sp, xk);

  lie::VectorField f;
  f.time_var = 0;
  f.time_rate = sm.time_rate;
  f.state_vars = sm.state_idx;
  f.components = sm.f;
  const sos::LinPoly Lf = out.v.map([&](const Polynomial& p) { return lie::lie_f(p, f); });

  sos::LinPoly qsum(sp);
  for (const auto& q : out.q) qsum = qsum + q;
  prog.add_sos("(i) -Lf v - q", -Lf - qsum, sm.all_idx, gens_all, two_l);
  for (std::size_t i = 0; i < model.states.size(); ++i) {
    const std::size_t xi = sm.state_idx[i];
    const Polynomial& gi = sm.g[i];
    const sos::LinPoly Lg = out.v.map([&](const Polynomial& p) { return p.partial(xi) * gi; });
    const std::string tag = "[" + model.states[i] + "]";
    prog.add_sos("(ii) Lg v + q" + tag, Lg + out.q[i], sm.all_idx, gens_all, two_l);
    prog.add_sos("(iii) -Lg v + q" + tag, -Lg + out.q[i], sm.all_idx, gens_all, two_l);
  }
  for (std::size_t i = 0; i < model.states.size(); ++i)
    prog.add_sos("(iv) q[" + model.states[i] + "]", out.q[i], sm.all_idx, gens_all, two_l);

  // (v) on X0 x K at t = 0; pinned coordinates are substituted
  std::vector<std::pair<std::size_t, double>> fixed{{0, -1.0}};
  std::vector<std::size_t> x0_vars;
  std::vector<Polynomial> x0_gens;
  for (std::size_t i = 0; i < model.states.size(); ++i) {
    const auto& m = maps[1 + i];
    const double a = to_unit(m, model.X0[i].lo), b = to_unit(m, model.X0[i].hi);
    const std::size_t xi = sm.state_idx[i];
    if (model.X0[i].lo == model.X0[i].hi) {
      fixed.emplace_back(xi, a);
    } else {
      const auto z = Polynomial::variable(sp, xi);
      x0_vars.push_back(xi);
      x0_gens.push_back((z - a) * (Polynomial::constant(sp, b) - z));
    }
  }
  for (auto pi : sm.param_idx) {
    x0_vars.push_back(pi);
    const auto z = Polynomial::variable(sp, pi);
    x0_gens.push_back(Polynomial::constant(sp, 1.0) - z * z);
  }
  const sos::LinPoly v0 = out.v.map([&](const Polynomial& p) { return p.fix(fixed); });
  prog.add_sos("(v) -v(0)", -v0, x0_vars, x0_gens, two_l);
  prog.add_sos("(vi) w", out.w, xk, gens_xk, two_l);
  prog.add_sos("(vii) w + v - 1", out.w + out.v - sos::LinPoly(Polynomial::constant(sp, 1.0)), sm.all_idx, gens_all,
               two_l);

  Box unit_xk(std::vector<Interval>(xk.size(), Interval{-1.0, 1.0}));
  // moments over the unit box in the (states, params) coordinates, embedded in the full space
  const VariableSpace sub = [&] {
    std::vector<std::string> names;
    for (auto i : xk) names.push_back(sp.name(i));
    return VariableSpace(names);
  }();
  const auto mom_sub = poly::box_moments(sub, unit_xk, d_dec);
  poly::MomentVector mom{sp, d_dec, {}};
  for (const auto& [e, val] : mom_sub.values) {
    poly::Exponent full(sp.count(), 0);
    for (std::size_t k = 0; k < xk.size(); ++k) full[xk[k]] = e[k];
    mom.values[full] = val;
  }
  prog.minimize_integral(out.w, mom);
  return out;
}

std::vector<double> Certificate::to_scaled(std::span<const double> physical) const {
  std::vector<double> z(physical.size());
  for (std::size_t i = 0; i < physical.size(); ++i) z[i] = to_unit(maps[i], physical[i]);
  return z;
}

double Certificate::w_at(std::span<const double> state, std::span<const double> params) const {
  std::vector<double> z(space.count(), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) z[1 + i] = to_unit(maps[1 + i], state[i]);
  for (std::size_t i = 0; i < params.size(); ++i)
    z[1 + states.size() + i] = to_unit(maps[1 + states.size() + i], params[i]);
  return w.eval(z);
}

double Certificate::v_at(double t, std::span<const double> state, std::span<const double> params) const {
  std::vector<double> z(space.count(), 0.0);
  z[0] = to_unit(maps[0], t);
  for (std::size_t i = 0; i < state.size(); ++i) z[1 + i] = to_unit(maps[1 + i], state[i]);
  for (std::size_t i = 0; i < params.size(); ++i)
    z[1 + states.size() + i] = to_unit(maps[1 + states.size() + i], params[i]);
  return v.eval(z);
}

Polynomial Certificate::w_physical() const {
  std::vector<AffineMap> inv;
  for (const auto& m : maps) inv.push_back(m.inverse());
  return w.affine_substitute(inv);
}

namespace {

nlohmann::json box_json(const std::vector<Interval>& iv) {
  auto j = nlohmann::json::array();
  for (const auto& i : iv) j.push_back({i.lo, i.hi});
  return j;
}

std::vector<Interval> box_from_json(const nlohmann::json& j) {
  std::vector<Interval> out;
  for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return out;
}

}  // namespace

nlohmann::json Certificate::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["variables"] = space.names();
  j["states"] = states;
  j["params"] = params;
  auto jm = nlohmann::json::array();
  for (std::size_t i = 0; i < maps.size(); ++i)
    jm.push_back({{"var", space.name(i)}, {"scale", maps[i].scale}, {"offset", maps[i].offset}});
  j["scaling_maps"] = jm;
  j["coordinates"] = "scaled: physical = scale * z + offset";
  j["T"] = T;
  j["Xs"] = box_json(Xs.intervals());
  j["X0"] = box_json(X0);
  j["K"] = box_json(K.intervals());
  j["d_dec"] = d_dec;
  j["two_l"] = two_l;
  j["v"] = poly::to_json(v);
  j["w"] = poly::to_json(w);
  auto jq = nlohmann::json::array();
  for (const auto& p : q) jq.push_back(poly::to_json(p));
  j["q"] = jq;
  j["g_id"] = g_id;
  j["config_hash"] = config_hash;
  j["diagnostics"] = diagnostics;
  return j;
}

Certificate Certificate::from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::invalid_argument("Certificate: unsupported schema version");
  Certificate c;
  c.space = VariableSpace(j.at("variables").get<std::vector<std::string>>());
  c.states = j.at("states").get<std::vector<std::string>>();
  c.params = j.at("params").get<std::vector<std::string>>();
  for (const auto& m : j.at("scaling_maps")) c.maps.push_back({m.at("scale").get<double>(), m.at("offset").get<double>()});
  if (c.maps.size() != c.space.count()) throw std::invalid_argument("Certificate: one scaling map per variable required");
  c.T = j.at("T").get<double>();
  c.Xs = Box(box_from_json(j.at("Xs")));
  c.X0 = box_from_json(j.at("X0"));
  c.K = Box(box_from_json(j.at("K")));
  c.d_dec = j.at("d_dec").get<int>();
  c.two_l = j.at("two_l").get<int>();
  c.v = poly::polynomial_from_json(j.at("v")).reembed(c.space);
  c.w = poly::polynomial_from_json(j.at("w")).reembed(c.space);
  for (const auto& p : j.at("q")) c.q.push_back(poly::polynomial_from_json(p).reembed(c.space));
  c.g_id = j.value("g_id", "");
  c.config_hash = j.value("config_hash", "");
  c.diagnostics = j.value("diagnostics", nlohmann::json::object());
  return c;
}

void Certificate::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_json().dump(1) << '\n';
}

Certificate Certificate::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return from_json(nlohmann::json::parse(is));
}

Certificate compute_frs(const FrsModel& model, const ComputeOptions& options) {
  auto prog = build_program(model, options.d_dec, options.two_l);
  const auto start = std::chrono::steady_clock::now();
  const auto P = prog.program.compile();
  const auto raw = sdp::solve(P, options.solver);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto sol = prog.program.recover(raw);
  if (sol.status != sdp::Status::optimal)
    throw std::runtime_error("compute_frs: solver returned " + sdp::to_string(sol.status) + ", no certificate emitted");

  Certificate c;
  c.space = model.space;
  c.states = model.states;
  c.params = model.params;
  c.maps = prog.maps;
  c.T = model.T;
  c.Xs = model.Xs;
  c.X0 = model.X0;
  c.K = model.K;
  c.d_dec = prog.d_dec;
  c.two_l = prog.two_l;
  c.v = prog.v.evaluate(sol.values);
  c.w = prog.w.evaluate(sol.values);
  for (const auto& q : prog.q) c.q.push_back(q.evaluate(sol.values));
  c.g_id = model.g_id;
  c.config_hash = options.config_hash;
  nlohmann::json d;
  d["status"] = sdp::to_string(sol.status);
  d["iterations"] = raw.iterations;
  d["objective"] = sol.objective;
  d["primal_infeasibility"] = raw.primal_infeasibility;
  d["dual_infeasibility"] = raw.dual_infeasibility;
  d["gap"] = raw.gap;
  d["blocks"] = P.block_sizes.size();
  d["rows"] = P.rows.size();
  d["free_variables"] = P.num_free;
  d["removed_rows"] = raw.removed_rows;
  d["solve_seconds"] = secs;
  auto reps = nlohmann::json::array();
  for (const auto& r : sol.reports)
    reps.push_back({{"name", r.name}, {"max_residual", r.max_residual}, {"min_gram_eig", r.min_gram_eig}, {"rows", r.rows}});
  d["constraints"] = reps;
  c.diagnostics = d;
  return c;
}

double IdentityReport::worst() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : minima) m = std::min(m, e.second);
  return m;
}

IdentityReport check_identities(const Certificate& cert, const FrsModel& model, int samples, std::uint64_t seed) {
  const auto sm = scale_model(model, cert.maps);
  lie::VectorField f;
  f.time_var = 0;
  f.time_rate = sm.time_rate;
  f.state_vars = sm.state_idx;
  f.components = sm.f;
  Polynomial qsum(cert.space);
  for (const auto& q : cert.q) qsum = qsum + q;
  const poly::CompiledPolynomial e1(-lie::lie_f(cert.v, f) - qsum);
  std::vector<poly::CompiledPolynomial> lg, qs;
  for (std::size_t i = 0; i < sm.state_idx.size(); ++i) {
    lg.emplace_back(cert.v.partial(sm.state_idx[i]) * sm.g[i]);
    qs.emplace_back(cert.q[i]);
  }
  const poly::CompiledPolynomial v(cert.v), w(cert.w);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> mins(6, std::numeric_limits<double>::infinity());
  const std::size_t n = cert.space.count();
  std::vector<double> z(n);
  for (int s = 0; s < samples; ++s) {
    for (auto& c : z) c = U(rng);
    mins[0] = std::min(mins[0], e1(z));
    for (std::size_t i = 0; i < lg.size(); ++i) {
      const double qi = qs[i](z);
      mins[1] = std::min(mins[1], qi - std::abs(lg[i](z)));
      mins[2] = std::min(mins[2], qi);
    }
    mins[4] = std::min(mins[4], w(z));
    mins[5] = std::min(mins[5], w(z) + v(z) - 1.0);
    // X0 x K at t = 0
    z[0] = -1.0;
    for (std::size_t i = 0; i < model.states.size(); ++i) {
      const auto& m = cert.maps[1 + i];
      const double a = to_unit(m, cert.X0[i].lo), b = to_unit(m, cert.X0[i].hi);
      z[1 + i] = a + (b - a) * 0.5 * (U(rng) + 1.0);
    }
    mins[3] = std::min(mins[3], -v(z));
  }
  IdentityReport rep;
  rep.samples = samples;
  const char* names[6] = {"-Lf v - sum q", "q - |Lg v|", "q", "-v(0)", "w", "w + v - 1"};
  for (int i = 0; i < 6; ++i) rep.minima.emplace_back(names[i], mins[static_cast<std::size_t>(i)]);
  return rep;
}

namespace {

struct PointChecker {
  const Certificate& cert;
  poly::CompiledPolynomial w;
  double tol;
  ValidationReport& rep;

  void check(std::span<const double> state, std::span<const double> params) {
    ++rep.points;
    std::vector<double> z(cert.space.count(), 0.0);
    bool inside = true;
    for (std::size_t i = 0; i < state.size(); ++i) {
      z[1 + i] = to_unit(cert.maps[1 + i], state[i]);
      inside = inside && cert.Xs[i].contains(state[i]);
    }
    for (std::size_t i = 0; i < params.size(); ++i) z[1 + state.size() + i] = to_unit(cert.maps[1 + state.size() + i], params[i]);
    if (!inside) ++rep.out_of_domain;
    const double margin = w(z) - 1.0;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_point.assign(state.begin(), state.end());
      rep.worst_point.insert(rep.worst_point.end(), params.begin(), params.end());
    }
    if (margin < -tol) ++rep.violations;
  }
};

}  // namespace

ValidationReport validate_certificate(const Certificate& cert, const FrsModel& model, int trajectories,
                                      std::uint64_t seed, double tol) {
  ValidationReport rep;
  rep.tol = tol;
  rep.min_margin = std::numeric_limits<double>::infinity();
  PointChecker chk{cert, poly::CompiledPolynomial(cert.w), tol, rep};
  const std::size_t ns = model.states.size(), np = model.params.size();
  std::vector<poly::CompiledPolynomial> f, g;
  for (std::size_t i = 0; i < ns; ++i) {
    f.emplace_back(model.f[i]);
    g.emplace_back(model.g[i]);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  const int steps = 100;
  const double dt = model.T / steps;
  const int corners = 1 << ns;

  for (int tr = 0; tr < trajectories; ++tr) {
    std::vector<double> x(ns), k(np);
    for (std::size_t i = 0; i < ns; ++i) x[i] = model.X0[i].lo + (model.X0[i].hi - model.X0[i].lo) * U01(rng);
    for (std::size_t i = 0; i < np; ++i) k[i] = model.K[i].lo + model.K[i].width() * U01(rng);
    // disturbance pieces; the first trajectories hold each constant corner
    std::vector<double> breaks;
    std::vector<std::vector<double>> vals;
    if (tr < corners) {
      std::vector<double> d(ns);
      for (std::size_t i = 0; i < ns; ++i) d[i] = (tr >> i) & 1 ? 1.0 : -1.0;
      vals.push_back(d);
    } else {
      const int nb = static_cast<int>(U01(rng) * 5.0);
      for (int b = 0; b < nb; ++b) breaks.push_back(model.T * U01(rng));
      std::sort(breaks.begin(), breaks.end());
      for (int b = 0; b <= nb; ++b) {
        std::vector<double> d(ns);
        for (auto& c : d) c = U01(rng) < 0.8 ? (U01(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * U01(rng) - 1.0;
        vals.push_back(d);
      }
    }
    ++rep.trajectories;
    chk.check(x, k);
    std::vector<double> pt(1 + ns + np);
    auto rhs = [&](double t, const std::vector<double>& s, const std::vector<double>& d) {
      pt[0] = t;
      for (std::size_t i = 0; i < ns; ++i) pt[1 + i] = s[i];
      for (std::size_t i = 0; i < np; ++i) pt[1 + ns + i] = k[i];
      std::vector<double> out(ns);
      for (std::size_t i = 0; i < ns; ++i) out[i] = f[i](pt) + g[i](pt) * d[i];
      return out;
    };
    for (int st = 0; st < steps; ++st) {
      const double t0 = st * dt;
      const auto piece = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t0 + 1e-12) - breaks.begin());
      const auto& d = vals[piece];
      auto axpy = [&](const std::vector<double>& a, double s, const std::vector<double>& b) {
        std::vector<double> r(ns);
        for (std::size_t i = 0; i < ns; ++i) r[i] = a[i] + s * b[i];
        return r;
      };
      const auto k1 = rhs(t0, x, d);
      const auto k2 = rhs(t0 + 0.5 * dt, axpy(x, 0.5 * dt, k1), d);
      const auto k3 = rhs(t0 + 0.5 * dt, axpy(x, 0.5 * dt, k2), d);
      const auto k4 = rhs(t0 + dt, axpy(x, dt, k3), d);
      for (std::size_t i = 0; i < ns; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      chk.check(x, k);
    }
  }
  return rep;
}

ValidationReport validate_unicycle(const Certificate& cert, const vehicle::ModelConfig& cfg, int trajectories,
                                   std::uint64_t seed, double tol) {
  ValidationReport rep;
  rep.tol = tol;
  rep.min_margin = std::numeric_limits<double>::infinity();
  PointChecker chk{cert, poly::CompiledPolynomial(cert.w), tol, rep};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  auto in = [&](const Interval& iv) { return iv.lo + iv.width() * U01(rng); };
  for (int tr = 0; tr < trajectories; ++tr) {
    vehicle::UnicycleState s0;
    s0.x = in(cfg.X0[0]);
    s0.y = in(cfg.X0[1]);
    s0.th = cfg.x0_heading;
    const vehicle::TrajParams k{in(cfg.K[0]), in(cfg.K[1])};
    // initial rates inside the envelope's t = 0 bound
    s0.thdot = std::clamp(k.k1 + (2.0 * U01(rng) - 1.0), -1.0, 1.0);
    s0.v = tr % 3 == 0 ? (k.k2 < 0.5 ? std::min(cfg.v_max, k.k2 + 1.0) : std::max(0.0, k.k2 - 1.0))
                       : cfg.v_max * U01(rng);
    const auto trace = vehicle::simulate_unicycle(s0, vehicle::ParamSchedule::constant(k), cert.T, cfg);
    ++rep.trajectories;
    const std::array<double, 2> kp{k.k1, k.k2};
    for (const auto& s : trace.states) {
      const std::array<double, 3> xs{s.x, s.y, s.th};
      chk.check(xs, kp);
    }
  }
  return rep;
}

}  // namespace reachplan::frs
