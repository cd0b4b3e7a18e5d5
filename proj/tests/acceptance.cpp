// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --cert CERT --work DIR [--only 1,3,...]
//
// Criteria that need the Dubins certificate read it from --cert; the CLI is
// exercised in-process through cli::dispatch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "reachplan/cli.hpp"
#include "reachplan/config.hpp"
#include "reachplan/frs.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/safeset.hpp"
#include "reachplan/simworld.hpp"
#include "reachplan/sos.hpp"
#include "reachplan/vehicle.hpp"

namespace fs = std::filesystem;
using namespace reachplan;
using Eigen::MatrixXd;
using nlohmann::json;
using poly::Polynomial;
using poly::VariableSpace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::string cert_path;
  fs::path work;
  frs::Certificate cert;
  bool cert_loaded = false;

  const frs::Certificate& certificate() {
    if (!cert_loaded) {
      if (cert_path.empty() || !fs::exists(cert_path)) throw std::runtime_error("certificate not found: " + cert_path);
      cert = frs::Certificate::load(cert_path);
      cert_loaded = true;
    }
    return cert;
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  std::vector<const char*> argv{"reachplan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (stdout_text) *stdout_text = out.str();
  return code;
}

double min_eig(const MatrixXd& A) { return Eigen::SelfAdjointEigenSolver<MatrixXd>(A).eigenvalues().minCoeff(); }

// ---------------------------------------------------------------- 1

struct Planted {
  sdp::SdpProblem problem;
  MatrixXd X;
  double objective = 0.0;
};

// Random strictly complementary pair X* S* = 0 with rank(X*) = r; m is in the
// range where both the primal and dual optima are unique.
Planted planted_sdp(int n, int r, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U(0.5, 2.0);
  MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = N01(rng);
  const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(R).householderQ();
  Eigen::VectorXd lx = Eigen::VectorXd::Zero(n), ls = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < r; ++i) lx(i) = U(rng);
  for (int i = r; i < n; ++i) ls(i) = U(rng);
  Planted out;
  out.X = Q * lx.asDiagonal() * Q.transpose();
  MatrixXd C = Q * ls.asDiagonal() * Q.transpose();
  out.problem.block_sizes = {n};
  for (int i = 0; i < m; ++i) {
    const double yi = N01(rng);
    sdp::SdpProblem::Row row;
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        const double a = N01(rng);
        row.entries.push_back({0, p, q, a});
        row.rhs += p == q ? a * out.X(p, p) : 2.0 * a * out.X(p, q);
        C(p, q) += yi * a;
        if (p != q) C(q, p) += yi * a;
      }
    out.problem.rows.push_back(row);
  }
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) out.problem.objective.push_back({0, p, q, C(p, q)});
  out.objective = C.cwiseProduct(out.X).sum();
  return out;
}

Outcome criterion_sos_core(Context&) {
  std::vector<std::string> fails;
  std::mt19937_64 rng(2024);

  // planted instances
  double worst_x = 0.0, worst_obj = 0.0;
  const int shapes[][3] = {{4, 2, 5}, {5, 2, 6}, {6, 3, 9}, {8, 3, 12}, {10, 4, 20}};
  for (const auto& sh : shapes) {
    const auto inst = planted_sdp(sh[0], sh[1], sh[2], rng);
    const auto s = sdp::solve(inst.problem);
    if (s.status != sdp::Status::optimal) {
      fails.push_back("planted n=" + std::to_string(sh[0]) + " status " + sdp::to_string(s.status));
      continue;
    }
    worst_x = std::max(worst_x, (s.X[0] - inst.X).cwiseAbs().maxCoeff());
    worst_obj = std::max(worst_obj, std::abs(s.primal_objective - inst.objective) / (1.0 + std::abs(inst.objective)));
  }
  if (worst_obj > 1e-6) fails.push_back("planted objective error " + num(worst_obj));

  // feasibility form: X* = B B^T, b = A(X*), no objective
  double worst_feas = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::normal_distribution<double> N01;
    const int n = 3 + trial, m = n + 2;
    MatrixXd B(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) B(i, j) = N01(rng);
    const MatrixXd Xs = B * B.transpose();
    sdp::SdpProblem P;
    P.block_sizes = {n};
    for (int i = 0; i < m; ++i) {
      sdp::SdpProblem::Row row;
      for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q) {
          const double a = N01(rng);
          row.entries.push_back({0, p, q, a});
          row.rhs += p == q ? a * Xs(p, p) : 2.0 * a * Xs(p, q);
        }
      P.rows.push_back(row);
    }
    const auto s = sdp::solve(P);
    if (s.status != sdp::Status::optimal) {
      fails.push_back("feasibility n=" + std::to_string(n) + " status " + sdp::to_string(s.status));
      continue;
    }
    const double res = sdp::equality_residual(P, s.X, s.x_free).cwiseAbs().maxCoeff();
    worst_feas = std::max({worst_feas, res, -min_eig(s.X[0])});
  }
  if (worst_feas > 1e-6) fails.push_back("feasibility residual " + num(worst_feas));

  // x^2 + 1 with basis [1, x]: the only Gram matrix is the identity
  const VariableSpace sx({"x"});
  const auto x = Polynomial::variable(sx, "x");
  double gram_err = std::numeric_limits<double>::infinity();
  {
    sos::SosProgram prog(sx);
    prog.add_sos("x2+1", sos::LinPoly(x * x + 1.0), {0}, {}, 2);
    const auto s = prog.solve();
    if (s.status != sdp::Status::optimal || s.raw.X.size() != 1)
      fails.push_back("x^2+1 status " + sdp::to_string(s.status));
    else
      gram_err = (s.raw.X[0] - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff();
    if (gram_err > 1e-6) fails.push_back("x^2+1 Gram error " + num(gram_err));
  }

  // x is not SOS
  {
    sos::SosProgram prog(sx);
    prog.add_sos("x", sos::LinPoly(x), {0}, {}, 2);
    const auto s = prog.solve();
    if (s.status != sdp::Status::infeasible_certificate) fails.push_back("x status " + sdp::to_string(s.status));
  }

  // Putinar lower bounds on the box, checked by sampling the certified polynomial
  const VariableSpace sxy({"x", "y"});
  const auto X = Polynomial::variable(sxy, "x"), Y = Polynomial::variable(sxy, "y");
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst_sample = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 5; ++trial) {
    Polynomial p(sxy);
    for (const auto& e : poly::monomials_up_to(2, 4)) p = p + Polynomial(sxy, {{e, U(rng)}});
    p = p + 0.5 * (X.pow(4) + Y.pow(4));
    sos::SosProgram prog(sxy);
    const int g = prog.add_variable();
    sos::LinPoly lhs(p);
    lhs.add_term(g, Polynomial::constant(sxy, -1.0));
    prog.add_sos("p-g", lhs, {0, 1}, sos::unit_box_generators(sxy, {0, 1}), 4);
    prog.minimize_variable(g, -1.0);
    const auto s = prog.solve();
    if (s.status != sdp::Status::optimal) {
      fails.push_back("Putinar status " + sdp::to_string(s.status));
      continue;
    }
    if (s.reports[0].min_gram_eig < -1e-7 || s.reports[0].max_residual > 1e-6)
      fails.push_back("Putinar multipliers eig " + num(s.reports[0].min_gram_eig) + " residual " +
                      num(s.reports[0].max_residual));
    const Polynomial cert = p - s.values[static_cast<std::size_t>(g)];
    for (int i = 0; i < 10000; ++i) {
      const std::vector<double> z{U(rng), U(rng)};
      worst_sample = std::min(worst_sample, cert.eval(z));
    }
  }
  if (worst_sample < -1e-6) fails.push_back("Putinar sample min " + num(worst_sample));

  std::string detail = "planted objective err " + num(worst_obj) + " (max entry of X - X* " + num(worst_x) +
                       "), feasibility residual " + num(worst_feas) + ", x^2+1 Gram err " + num(gram_err) +
                       ", x infeasible, Putinar sample min " + num(worst_sample);
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 2

Outcome criterion_error_envelope(Context&) {
  const auto env = vehicle::error_envelope_default();
  const vehicle::ModelConfig mc;
  double worst = -std::numeric_limits<double>::infinity(), worst_before_end = worst;
  vehicle::TrajParams at{};
  std::string where;
  int samples = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const vehicle::TrajParams k{-0.5 + i / 19.0, j / 19.0};
      const double sgn = k.k1 >= 0 ? 1.0 : -1.0;
      // largest initial mismatches the envelope admits at t = 0
      const std::vector<double> v0s{k.k2 < 0.5 ? std::min(mc.v_max, k.k2 + 1.0) : std::max(0.0, k.k2 - 1.0)};
      const std::vector<double> r0s{-k.k1, std::clamp(k.k1 - sgn, -1.0, 1.0)};
      for (double v0 : v0s)
        for (double r0 : r0s) {
          const vehicle::UnicycleState init{0, 0, 0, r0, v0};
          vehicle::ParamSchedule brake;
          brake.starts = {0.0, 1.0};
          brake.params = {k, planner::braking_plan(k)};
          vehicle::ParamSchedule flip;
          flip.starts = {0.0, 1.0};
          flip.params = {k, {-k.k1, 0.0}};
          for (const auto& [sched, dur, name] :
               {std::tuple{vehicle::ParamSchedule::constant(k), 1.0, "single plan"}, std::tuple{brake, 2.0, "brake"},
                std::tuple{flip, 2.0, "sign flip"}}) {
            const auto r = vehicle::validate_error_bound(sched, init, dur, env, mc);
            // the same run stopped one step before each envelope reaches zero
            const auto early = vehicle::validate_error_bound(sched, init, dur - 0.01, env, mc);
            ++samples;
            if (r.worst() > worst) {
              worst = r.worst();
              at = k;
              const auto c = static_cast<std::size_t>(
                  std::max_element(r.max_violation.begin(), r.max_violation.end()) - r.max_violation.begin());
              where = std::string(name) + " at t=" + num(r.argmax_t[c]);
            }
            worst_before_end = std::max(worst_before_end, early.worst());
          }
        }
    }
  const bool pass = worst <= 1e-12;
  return {pass, std::to_string(samples) + " runs, max violation " + num(worst) + " (k=" + num(at.k1) + "," +
                    num(at.k2) + ", " + where + "); excluding envelope end " + num(worst_before_end)};
}

// ---------------------------------------------------------------- 3

Outcome criterion_frs_validation(Context& ctx) {
  const auto& cert = ctx.certificate();
  const auto model = frs::dubins_model();
  const auto dist = frs::validate_certificate(cert, model, 1000, 101, 1e-4);
  const auto uni = frs::validate_unicycle(cert, vehicle::ModelConfig{}, 100, 202, 1e-4);
  double secs = -1.0;
  const fs::path side = ctx.cert_path + ".timing.json";
  if (fs::exists(side)) secs = json::parse(slurp(side)).value("solve_seconds", -1.0);
  std::vector<std::string> fails;
  if (!dist.ok()) fails.push_back(std::to_string(dist.violations) + " disturbed violations");
  if (!uni.ok()) fails.push_back(std::to_string(uni.violations) + " unicycle violations");
  if (dist.points + uni.points < 10000) fails.push_back("too few points");
  if (secs < 0.0) fails.push_back("solve time unknown (no " + side.filename().string() + ")");
  if (secs > 1800.0) fails.push_back("solve took " + num(secs) + " s");
  std::string detail = std::to_string(dist.trajectories) + " disturbed + " + std::to_string(uni.trajectories) +
                       " unicycle trajectories, " + std::to_string(dist.points + uni.points) +
                       " points, min w-1 " + num(std::min(dist.min_margin, uni.min_margin)) + ", out of domain " +
                       std::to_string(dist.out_of_domain + uni.out_of_domain) + ", solve " + num(secs) + " s";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 4

Outcome criterion_no_collisions(Context& ctx) {
  const auto& cert = ctx.certificate();
  const simworld::WorldConfig wc;
  const vehicle::ModelConfig& mc = wc.model;
  const auto env = vehicle::error_envelope_default();
  const double radius = wc.footprint.circumradius();
  const safeset::Vec2 c0{0.5 * (cert.X0[0].lo + cert.X0[0].hi), 0.5 * (cert.X0[1].lo + cert.X0[1].hi)};
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  auto U = [&](double lo, double hi) { return lo + (hi - lo) * U01(rng); };

  int safe_params = 0, trajectories = 0, collisions = 0, fallbacks = 0;
  double closest = std::numeric_limits<double>::infinity();
  for (int set = 0; set < 50; ++set) {
    std::vector<safeset::Obstacle> obs;
    const int n = 1 + set % 4;
    while (static_cast<int>(obs.size()) < n) {
      const safeset::Vec2 c{U(c0[0] + 0.3, cert.Xs[0].hi), U(-0.5, 0.5)};
      const double L = U(0.1, 0.2), a = U(0.0, M_PI);
      const safeset::Vec2 p{c[0] - 0.5 * L * std::cos(a), c[1] - 0.5 * L * std::sin(a)};
      const safeset::Vec2 q{c[0] + 0.5 * L * std::cos(a), c[1] + 0.5 * L * std::sin(a)};
      if (simworld::point_segment_distance(c0, p, q) < 0.3) continue;
      obs.push_back(safeset::Obstacle::segment(p, q));
    }
    // planning frame coincides with the world frame at this pose
    const safeset::Pose pose{c0[0], c0[1], 0.0};
    const auto pts = simworld::sense(obs, pose, cert, wc);
    const auto h = safeset::intersect(cert, pts, wc.intersect);
    if (h.fallback) ++fallbacks;

    auto check = [&](const std::vector<std::array<double, 2>>& centers) {
      ++trajectories;
      for (const auto& c : centers)
        for (const auto& o : obs) {
          const double d = simworld::point_segment_distance(c, o.a, o.b);
          closest = std::min(closest, d);
          if (d <= radius) {
            ++collisions;
            return;
          }
        }
    };
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        const vehicle::TrajParams k{mc.K[0].lo + mc.K[0].width() * (i + 0.5) / 50,
                                    mc.K[1].lo + mc.K[1].width() * (j + 0.5) / 50};
        const std::array<double, 2> kp{k.k1, k.k2};
        if (h(kp) < 0.0) continue;
        ++safe_params;
        std::vector<vehicle::DisturbanceSignal> ds;
        for (int m = 0; m < 8; ++m)
          ds.push_back(vehicle::DisturbanceSignal::constant({m & 1 ? 1.0 : -1.0, m & 2 ? 1.0 : -1.0, m & 4 ? 1.0 : -1.0}));
        for (int m = 0; m < 2; ++m) {
          std::vector<double> bps{U(0.1, 0.5), U(0.5, 0.9)};
          std::vector<std::array<double, 3>> vals;
          for (int s = 0; s < 3; ++s) vals.push_back({U(-1, 1) > 0 ? 1.0 : -1.0, U(-1, 1), U(-1, 1) > 0 ? 1.0 : -1.0});
          ds.emplace_back(bps, vals);
        }
        for (const auto& d : ds) {
          const auto tr = vehicle::simulate_disturbed({c0[0], c0[1], 0.0}, k, d, env, cert.T, 0.01);
          std::vector<std::array<double, 2>> cs;
          for (const auto& s : tr.states) cs.push_back({s.x, s.y});
          check(cs);
        }
        const double v_off = k.k2 < 0.5 ? std::min(mc.v_max, k.k2 + 1.0) : std::max(0.0, k.k2 - 1.0);
        for (const auto& [r0, v0] : {std::pair{-k.k1, v_off}, std::pair{U(-1, 1), U(0, mc.v_max)}}) {
          const auto tr = vehicle::simulate_unicycle({c0[0], c0[1], 0.0, r0, v0}, vehicle::ParamSchedule::constant(k),
                                                     cert.T, mc);
          std::vector<std::array<double, 2>> cs;
          for (const auto& s : tr.states) cs.push_back({s.x, s.y});
          check(cs);
        }
      }
  }
  std::vector<std::string> fails;
  if (collisions) fails.push_back(std::to_string(collisions) + " collisions");
  if (safe_params == 0) fails.push_back("no parameter was certified safe");
  std::string detail = "50 obstacle sets, " + std::to_string(safe_params) + " safe grid parameters, " +
                       std::to_string(trajectories) + " trajectories, " + std::to_string(collisions) +
                       " collisions, closest approach " + num(closest) + " m (radius " + num(radius) + "), " +
                       std::to_string(fallbacks) + " fallbacks";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 5

Outcome criterion_timing(Context&) {
  std::vector<std::string> fails;
  const auto r = planner::check_timing({});
  if (!r.ok) fails.push_back("defaults rejected");
  if (std::abs(r.T_min - 1.0) > 1e-12 || std::abs(r.T_sense_min - 1.5) > 1e-12 || std::abs(r.D_sense - 1.5) > 1e-12)
    fails.push_back("derived values " + num(r.T_min) + " " + num(r.T_sense_min) + " " + num(r.D_sense));
  planner::TimingConfig bad;
  bad.tau_plan = 0.6;
  if (planner::check_timing(bad).ok) fails.push_back("tau_plan 0.6 accepted");
  bad = {};
  bad.T_sense = 1.4;
  if (planner::check_timing(bad).ok) fails.push_back("T_sense 1.4 accepted");
  std::string text;
  if (run_cli({"check-timing"}, &text) != 0) fails.push_back("check-timing exit code");
  if (text.find("D_sense = 1.5 m") == std::string::npos) fails.push_back("check-timing output: " + text);
  if (run_cli({"check-timing", "--T", "0.9"}) != 1) fails.push_back("violating T not rejected by CLI");
  std::string detail = "T_min " + num(r.T_min) + " s, T_sense_min " + num(r.T_sense_min) + " s, D_sense " +
                       num(r.D_sense) + " m";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 6, 7

fs::path batch_report_path(const Context& ctx) { return ctx.work / "batch" / "report.json"; }

bool run_acceptance_batch(Context& ctx, double& seconds, std::string& error) {
  const fs::path dir = ctx.work / "batch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli({"batch", "--cert", ctx.cert_path, "--trials", "100", "--seed", "1", "--threads", "1",
                            "--out", batch_report_path(ctx).string()});
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(dir / "wall_seconds.txt") << seconds << "\n";
  if (code != 0) {
    error = "batch exit code " + std::to_string(code);
    return false;
  }
  return true;
}

Outcome criterion_batch(Context& ctx) {
  double secs = 0.0;
  std::string err;
  if (!run_acceptance_batch(ctx, secs, err)) return {false, err};
  const auto rep = json::parse(slurp(batch_report_path(ctx)));
  const auto& c = rep.at("counts");
  const int goal = c.value("goal-reached", 0), braked = c.value("braked-safely", 0),
            limit = c.value("iteration-limit", 0), crash = c.value("crash", 0);
  std::vector<std::string> fails;
  if (crash != 0) fails.push_back(std::to_string(crash) + " crashes");
  if (goal < 70) fails.push_back("goal rate below 70%");
  if (goal + braked + limit + crash != 100) fails.push_back("unclassified trials");
  if (secs > 1800.0) fails.push_back("batch took " + num(secs) + " s");
  std::string detail = "100 trials: " + std::to_string(goal) + " goal, " + std::to_string(braked) + " braked, " +
                       std::to_string(limit) + " limit, " + std::to_string(crash) + " crash, " + num(secs) + " s";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

Outcome criterion_trends(Context& ctx) {
  const fs::path timing = ctx.work / "batch" / "report.timing.json";
  if (!fs::exists(timing)) {
    double secs = 0.0;
    std::string err;
    if (!run_acceptance_batch(ctx, secs, err)) return {false, err};
  }
  const auto j = json::parse(slurp(timing));
  const double rho_i = j.at("spearman_intersect"), rho_o = j.at("spearman_optimize"), p = j.at("p_optimize_trend");
  std::vector<std::string> fails;
  if (!(rho_i > 0.8)) fails.push_back("intersect trend too weak");
  if (!(p >= 0.05)) fails.push_back("optimize time grows with obstacle count");
  std::string detail = "intersect rho " + num(rho_i) + ", optimize rho " + num(rho_o) + " (one-sided p " + num(p) + ")";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------- 8

Outcome criterion_determinism(Context& ctx) {
  const fs::path dir = ctx.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> fails;
  auto same = [&](const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || !fs::exists(b)) {
      fails.push_back("missing " + a.filename().string());
      return;
    }
    if (slurp(a) != slurp(b)) fails.push_back(a.filename().string() + " differs");
  };
  int compared = 0;
  for (const char* run : {"a", "b"}) {
    if (run_cli({"simulate", "--cert", ctx.cert_path, "--seed", "7", "--out-dir", (dir / run / "sim").string()}) > 1)
      fails.push_back("simulate failed");
  }
  same(dir / "a" / "sim" / "trace.csv", dir / "b" / "sim" / "trace.csv");
  same(dir / "a" / "sim" / "trial.json", dir / "b" / "sim" / "trial.json");
  compared += 2;

  // thread count must not change the report or the traces
  const std::vector<std::pair<std::string, std::string>> batches{{"a", "1"}, {"b", "3"}};
  for (const auto& [run, threads] : batches) {
    fs::create_directories(dir / run);
    if (run_cli({"batch", "--cert", ctx.cert_path, "--trials", "6", "--seed", "5", "--threads", threads, "--out",
                 (dir / run / "small.json").string()}) != 0)
      fails.push_back("batch failed");
  }
  same(dir / "a" / "small.json", dir / "b" / "small.json");
  ++compared;
  for (const auto& e : fs::directory_iterator(dir / "a" / "small_traces")) {
    same(e.path(), dir / "b" / "small_traces" / e.path().filename());
    ++compared;
  }

  const fs::path obs = dir / "obstacles.json";
  std::ofstream(obs) << safeset::obstacles_to_json(
                            {safeset::Obstacle::segment({0.6, 0.3}, {0.75, 0.4}), safeset::Obstacle::point({1.0, -0.2})})
                            .dump();
  for (const char* run : {"a", "b"})
    if (run_cli({"intersect", "--cert", ctx.cert_path, "--obstacles", obs.string(), "--pose", "0", "0", "0", "--out",
                 (dir / run / "h.json").string()}) != 0)
      fails.push_back("intersect failed");
  same(dir / "a" / "h.json", dir / "b" / "h.json");
  ++compared;

  std::string va, vb;
  run_cli({"validate-frs", "--cert", ctx.cert_path, "--samples", "50", "--unicycle", "10", "--json"}, &va);
  run_cli({"validate-frs", "--cert", ctx.cert_path, "--samples", "50", "--unicycle", "10", "--json"}, &vb);
  if (va.empty() || va != vb) fails.push_back("validate-frs output differs");
  ++compared;

  std::string detail = std::to_string(compared) + " artifact pairs compared byte for byte";
  for (const auto& f : fails) detail += "; " + f;
  return {fails.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Context ctx;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cert", ctx.cert_path, "Dubins FRS certificate");
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  ctx.work = work;
  fs::create_directories(ctx.work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(Context&)> run;
  };
  const std::vector<Criterion> all{
      {1, "sos-sdp-core", criterion_sos_core},
      {2, "error-envelope", criterion_error_envelope},
      {3, "frs-validation", criterion_frs_validation},
      {4, "safe-set-no-collisions", criterion_no_collisions},
      {5, "timing-arithmetic", criterion_timing},
      {6, "batch-outcomes", criterion_batch},
      {7, "planning-time-trends", criterion_trends},
      {8, "determinism", criterion_determinism},
  };
  const std::set<int> pick(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << " " << c.name << ": " << o.detail << " [" << num(secs)
              << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
