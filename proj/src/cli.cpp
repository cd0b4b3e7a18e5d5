#include "reachplan/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "reachplan/config.hpp"

namespace reachplan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DomainFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifacts are immutable: an existing path is a usage error.
void write_new(const std::string& path, const std::string& content) {
  if (fs::exists(path)) throw std::invalid_argument("refusing to overwrite existing file " + path);
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

json stamp(const config::RunConfig& c) {
  return {{"tool_version", config::kToolVersion}, {"config_hash", config::hash(c)}};
}

std::string csv_header(const config::RunConfig& c) {
  return std::string("# reachplan ") + config::kToolVersion + " config " + config::hash(c) + "\n";
}

void print(std::ostream& out, bool as_json, const json& j, const std::string& text) {
  if (as_json)
    out << j.dump(1) << '\n';
  else
    out << text;
}

frs::Certificate load_cert(const std::string& path) {
  if (!fs::exists(path)) throw std::invalid_argument("certificate not found: " + path);
  return frs::Certificate::load(path);
}

json report_json(const frs::ValidationReport& r) {
  return {{"trajectories", r.trajectories}, {"points", r.points}, {"violations", r.violations},
          {"out_of_domain", r.out_of_domain}, {"min_margin", r.min_margin}, {"worst_point", r.worst_point},
          {"tol", r.tol}, {"ok", r.ok()}};
}

// Smallest w over random samples of X0 x K (w >= 1 there by construction).
double x0_min_w(const frs::Certificate& cert, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double m = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    std::vector<double> x, k;
    for (const auto& iv : cert.X0) x.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi + 1e-300)(rng));
    for (const auto& iv : cert.K.intervals()) k.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
    m = std::min(m, cert.w_at(x, k));
  }
  return m;
}

void require_timing(const config::RunConfig& c) {
  const auto r = planner::check_timing(c.world.timing);
  if (!r.ok) {
    std::string msg = "timing check failed:";
    for (const auto& v : r.violations) msg += " " + v + ";";
    throw DomainFailure(msg);
  }
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reachability-based safe trajectory planning", "reachplan"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", config::kToolVersion);

  std::string config_path;
  bool as_json = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_flag("--json", as_json, "machine-readable output on stdout");
  };

  // flags that override the config
  std::optional<int> o_degree, o_two_l, o_trials, o_threads, o_obstacles, o_samples, o_unicycle;
  std::optional<std::uint64_t> o_seed;
  std::optional<double> o_tau_plan, o_tau_stop, o_T, o_T_sense, o_v_max;
  std::string cert_path, out_path, obstacles_path, log_path, out_dir;
  std::vector<double> pose{0.0, 0.0, 0.0}, goal, k_prev{0.0, 0.0};
  double v_des = 0.5;
  bool plot_data = false;

  auto* c_frs = app.add_subcommand("compute-frs", "solve the FRS program and write a certificate");
  common(c_frs);
  c_frs->add_option("--degree", o_degree, "degree of v and w");
  c_frs->add_option("--two-l", o_two_l, "relaxation degree (default: smallest valid)");
  c_frs->add_option("--out", out_path, "certificate path")->required();
  c_frs->add_option("--log", log_path, "per-iteration solver log (CSV)");

  auto* c_val = app.add_subcommand("validate-frs", "check a certificate against sampled trajectories");
  common(c_val);
  c_val->add_option("--cert", cert_path)->required();
  c_val->add_option("--samples", o_samples, "disturbed low-fidelity trajectories");
  c_val->add_option("--unicycle", o_unicycle, "closed-loop unicycle trajectories");
  c_val->add_option("--seed", o_seed);

  auto* c_int = app.add_subcommand("intersect", "safe parameter set for one obstacle snapshot");
  common(c_int);
  c_int->add_option("--cert", cert_path)->required();
  c_int->add_option("--obstacles", obstacles_path, "obstacle JSON (world frame)")->required()->check(CLI::ExistingFile);
  c_int->add_option("--pose", pose, "vehicle pose x y th")->expected(3);
  c_int->add_option("--out", out_path, "write h as JSON");

  auto* c_plan = app.add_subcommand("plan", "one planning step: intersect then optimize");
  common(c_plan);
  c_plan->add_option("--cert", cert_path)->required();
  c_plan->add_option("--obstacles", obstacles_path)->required()->check(CLI::ExistingFile);
  c_plan->add_option("--pose", pose)->expected(3);
  c_plan->add_option("--goal", goal)->expected(2)->required();
  c_plan->add_option("--v-des", v_des);
  c_plan->add_option("--k-prev", k_prev, "previous plan k1 k2")->expected(2);

  auto* c_sim = app.add_subcommand("simulate", "run one seeded trial");
  common(c_sim);
  c_sim->add_option("--cert", cert_path)->required();
  c_sim->add_option("--seed", o_seed)->required();
  c_sim->add_option("--obstacles", o_obstacles, "number of obstacles (default 1 + seed mod 10)");
  c_sim->add_option("--out-dir", out_dir, "directory for trace.csv and trial.json");

  auto* c_batch = app.add_subcommand("batch", "seeded Monte-Carlo batch");
  common(c_batch);
  c_batch->add_option("--cert", cert_path)->required();
  c_batch->add_option("--trials", o_trials);
  c_batch->add_option("--seed", o_seed);
  c_batch->add_option("--threads", o_threads);
  c_batch->add_option("--out", out_path, "report JSON")->required();
  c_batch->add_flag("--plot-data", plot_data, "also write trajectory and timing tables");

  auto* c_time = app.add_subcommand("check-timing", "check the replanning timing inequalities");
  common(c_time);

  for (auto* sub : {c_sim, c_batch, c_time}) {
    sub->add_option("--tau-plan", o_tau_plan);
    sub->add_option("--tau-stop", o_tau_stop);
    sub->add_option("--T", o_T);
    sub->add_option("--T-sense", o_T_sense);
    sub->add_option("--v-max", o_v_max);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load(config_path);
    if (o_degree) cfg.d_dec = *o_degree;
    if (o_two_l) cfg.two_l = *o_two_l;
    if (o_trials) cfg.trials = *o_trials;
    if (o_threads) cfg.threads = *o_threads;
    if (o_seed && (c_batch->parsed())) cfg.seed = *o_seed;
    if (o_seed && c_val->parsed()) cfg.validation.seed = *o_seed;
    if (o_samples) cfg.validation.trajectories = *o_samples;
    if (o_unicycle) cfg.validation.unicycle_trajectories = *o_unicycle;
    if (o_tau_plan) cfg.world.timing.tau_plan = *o_tau_plan;
    if (o_tau_stop) cfg.world.timing.tau_stop = *o_tau_stop;
    if (o_T) cfg.world.timing.T = *o_T;
    if (o_T_sense) cfg.world.timing.T_sense = *o_T_sense;
    if (o_v_max) cfg.world.timing.v_max = *o_v_max;
    config::validate(cfg);

    if (c_time->parsed()) {
      // report the minimal horizon, then judge the configured one
      const auto r = planner::check_timing(cfg.world.timing);
      json j = stamp(cfg);
      j["ok"] = r.ok;
      j["T_min"] = r.T_min;
      j["T_sense_min"] = r.T_sense_min;
      j["D_sense"] = r.D_sense;
      j["violations"] = r.violations;
      std::string text = "T >= " + fmt(r.T_min) + " s\nT_sense >= " + fmt(r.T_sense_min) + " s\nD_sense = " +
                         fmt(r.D_sense) + " m\n";
      for (const auto& v : r.violations) text += "violation: " + v + "\n";
      print(out, as_json, j, text);
      return r.ok ? 0 : 1;
    }

    if (c_frs->parsed()) {
      for (const auto& p : {out_path, out_path + ".timing.json"})
        if (fs::exists(p)) throw std::invalid_argument("refusing to overwrite existing file " + p);
      frs::ComputeOptions opt;
      opt.d_dec = cfg.d_dec;
      opt.two_l = cfg.two_l;
      opt.solver = cfg.frs_solver;
      opt.config_hash = config::frs_hash(cfg);
      std::ofstream log;
      if (!log_path.empty()) {
        if (fs::exists(log_path)) throw std::invalid_argument("refusing to overwrite existing file " + log_path);
        log.open(log_path);
        opt.solver.log = &log;
      }
      frs::Certificate cert;
      try {
        cert = frs::compute_frs(frs::dubins_model(cfg.world.model), opt);
      } catch (const std::runtime_error& e) {
        throw DomainFailure(e.what());
      }
      cert.diagnostics["tool_version"] = config::kToolVersion;
      json timing{{"tool_version", config::kToolVersion},
                  {"config_hash", cert.config_hash},
                  {"solve_seconds", cert.diagnostics.value("solve_seconds", 0.0)}};
      cert.diagnostics.erase("solve_seconds");
      write_new(out_path, cert.to_json().dump(1));
      // wall-clock data stays out of the certificate so it is reproducible
      write_new(out_path + ".timing.json", timing.dump(1));
      json j = cert.diagnostics;
      j["certificate"] = out_path;
      print(out, as_json, j,
            "certificate written to " + out_path + "\nstatus " + cert.diagnostics.value("status", "") + ", objective " +
                fmt(cert.diagnostics.value("objective", 0.0)) + "\n");
      return 0;
    }

    if (c_val->parsed()) {
      const auto cert = load_cert(cert_path);
      const auto model = frs::dubins_model(cfg.world.model);
      const auto& v = cfg.validation;
      const auto ids = frs::check_identities(cert, model, 2000, v.seed);
      const auto dist = frs::validate_certificate(cert, model, v.trajectories, v.seed, v.tol);
      const auto uni = frs::validate_unicycle(cert, cfg.world.model, v.unicycle_trajectories, v.seed + 1, v.tol);
      const double x0w = x0_min_w(cert, 1000, v.seed + 2);
      const bool ok = dist.ok() && uni.ok() && x0w >= 1.0 - v.tol;
      json j = stamp(cfg);
      j["certificate_config_hash"] = cert.config_hash;
      j["identities"] = json::object();
      for (const auto& [name, val] : ids.minima) j["identities"][name] = val;
      j["disturbed"] = report_json(dist);
      j["unicycle"] = report_json(uni);
      j["x0_min_w"] = x0w;
      j["ok"] = ok;
      std::string text = "disturbed: " + std::to_string(dist.points) + " points, " + std::to_string(dist.violations) +
                         " violations, min w-1 " + fmt(dist.min_margin) + "\nunicycle: " + std::to_string(uni.points) +
                         " points, " + std::to_string(uni.violations) + " violations, min w-1 " + fmt(uni.min_margin) +
                         "\nmin w on X0 x K: " + fmt(x0w) + "\n" + (ok ? "PASS\n" : "FAIL\n");
      print(out, as_json, j, text);
      return ok ? 0 : 1;
    }

    if (c_int->parsed() || c_plan->parsed()) {
      const auto cert = load_cert(cert_path);
      std::ifstream f(obstacles_path);
      const auto obstacles = safeset::obstacles_from_json(json::parse(f));
      const safeset::Pose p{pose[0], pose[1], pose[2]};
      const auto pts = simworld::sense(obstacles, p, cert, cfg.world);
      const auto h = pts.points.empty() ? [&] {
        auto s = safeset::fallback_h(cert);
        s.fallback = false;
        s.h = poly::Polynomial::constant(s.h.space(), 1.0);
        return s;
      }()
                                        : safeset::intersect(cert, pts, cfg.world.intersect);
      if (c_int->parsed()) {
        json j = h.to_json();
        j.update(stamp(cfg));
        if (!out_path.empty()) write_new(out_path, j.dump(1));
        print(out, as_json, j,
              std::to_string(h.obstacle_points) + " obstacle points, " +
                  (h.fallback ? std::string("solver fallback (empty safe set)") : "h of degree " + std::to_string(h.h.degree())) +
                  "\n");
        return h.fallback ? 1 : 0;
      }
      planner::CostSpec cost = cfg.world.weights;
      cost.goal = {goal[0], goal[1]};
      cost.v_des = v_des;
      const auto r = planner::optimize(h, cert.K, cost, p, {k_prev[0], k_prev[1]}, cfg.world.optimizer);
      json j = stamp(cfg);
      j["braking"] = r.braking;
      j["k"] = {r.k.k1, r.k.k2};
      j["cost"] = r.cost;
      j["h"] = r.h_value;
      j["reason"] = r.reason;
      j["obstacle_points"] = h.obstacle_points;
      print(out, as_json, j,
            (r.braking ? "braking: " + r.reason + "\n" : std::string()) + "k1 = " + fmt(r.k.k1) + " rad/s, k2 = " +
                fmt(r.k.k2) + " m/s\n");
      return 0;
    }

    if (c_sim->parsed()) {
      require_timing(cfg);
      const auto cert = load_cert(cert_path);
      const std::uint64_t seed = *o_seed;
      const int n = o_obstacles ? *o_obstacles : static_cast<int>(1 + seed % 10);
      const auto sc = simworld::make_scenario(seed, n, cfg.world.scenario);
      const auto r = simworld::run_trial(cert, sc, cfg.world);
      const std::string dir = out_dir.empty() ? (fs::path(cfg.out_dir) / ("sim_" + std::to_string(seed))).string() : out_dir;
      fs::create_directories(dir);
      const std::string tmp = (fs::path(dir) / ".trace.tmp").string();
      simworld::write_trace_csv(r, tmp);
      std::ifstream t(tmp);
      std::stringstream buf;
      buf << csv_header(cfg) << t.rdbuf();
      t.close();
      fs::remove(tmp);
      write_new((fs::path(dir) / "trace.csv").string(), buf.str());
      json j = simworld::trial_json(r);
      j.update(stamp(cfg));
      write_new((fs::path(dir) / "trial.json").string(), j.dump(1));
      print(out, as_json, j, "outcome " + simworld::to_string(r.outcome) + " after " + fmt(r.trace.back().t) + " s\n");
      return r.outcome == simworld::Outcome::crash ? 1 : 0;
    }

    if (c_batch->parsed()) {
      require_timing(cfg);
      if (fs::exists(out_path)) throw std::invalid_argument("refusing to overwrite existing file " + out_path);
      const auto cert = load_cert(cert_path);
      const auto gate = frs::validate_certificate(cert, frs::dubins_model(cfg.world.model),
                                                  cfg.validation.gate_trajectories, cfg.validation.seed, cfg.validation.tol);
      if (!gate.ok())
        throw DomainFailure("certificate failed validation (" + std::to_string(gate.violations) +
                            " violations); refusing to run the batch");
      {
        const fs::path r(out_path);
        for (const auto& p : {r, r.parent_path() / (r.stem().string() + ".timing.json"),
                              r.parent_path() / (r.stem().string() + "_traces")})
          if (fs::exists(p)) throw std::invalid_argument("refusing to overwrite existing path " + p.string());
      }
      simworld::BatchOptions bo;
      bo.trials = cfg.trials;
      bo.base_seed = cfg.seed;
      bo.threads = cfg.threads;
      const auto res = simworld::run_batch(cert, cfg.world, bo);

      const fs::path report(out_path);
      const fs::path base = report.parent_path();
      const std::string stem = report.stem().string();
      json rep = simworld::batch_report(res);
      rep.update(stamp(cfg));
      rep["base_seed"] = cfg.seed;
      auto seeds = json::array();
      for (const auto& t : res.trials) seeds.push_back(t.scenario.seed);
      rep["seeds"] = seeds;
      write_new(report.string(), rep.dump(1));
      json tim = simworld::batch_timing(res);
      tim.update(stamp(cfg));
      write_new((base / (stem + ".timing.json")).string(), tim.dump(1));
      for (std::size_t i = 0; i < res.trials.size(); ++i) {
        std::ostringstream name;
        name << "trial_" << std::setw(4) << std::setfill('0') << i << ".csv";
        const auto p = base / (stem + "_traces") / name.str();
        const auto tmp = base / (stem + "_traces") / ".tmp";
        fs::create_directories(p.parent_path());
        simworld::write_trace_csv(res.trials[i], tmp.string());
        std::ifstream t(tmp);
        std::stringstream buf;
        buf << csv_header(cfg) << t.rdbuf();
        t.close();
        fs::remove(tmp);
        write_new(p.string(), buf.str());
      }
      if (plot_data) {
        std::ostringstream tr, ob, g5;
        tr << csv_header(cfg) << "trial,seed,n_obstacles,outcome,t,x,y\n" << std::setprecision(10);
        ob << csv_header(cfg) << "trial,kind,ax,ay,bx,by\n" << std::setprecision(10);
        for (std::size_t i = 0; i < res.trials.size(); ++i) {
          const auto& t = res.trials[i];
          for (const auto& row : t.trace)
            tr << i << ',' << t.scenario.seed << ',' << t.scenario.n_obstacles << ',' << simworld::to_string(t.outcome)
               << ',' << row.t << ',' << row.s.x << ',' << row.s.y << '\n';
          for (const auto& o : t.scenario.obstacles)
            ob << i << ",obstacle," << o.a[0] << ',' << o.a[1] << ',' << o.b[0] << ',' << o.b[1] << '\n';
          ob << i << ",goal," << t.scenario.goal[0] << ',' << t.scenario.goal[1] << ',' << t.scenario.goal[0] << ','
             << t.scenario.goal[1] << '\n';
        }
        g5 << csv_header(cfg) << "n_obstacles,mean_intersect_ms,mean_optimize_ms\n";
        for (std::size_t i = 0; i < res.obstacle_counts.size(); ++i)
          g5 << res.obstacle_counts[i] << ',' << res.mean_intersect_ms[i] << ',' << res.mean_optimize_ms[i] << '\n';
        write_new((base / (stem + "_trajectories.csv")).string(), tr.str());
        write_new((base / (stem + "_scene.csv")).string(), ob.str());
        write_new((base / (stem + "_timing_by_obstacles.csv")).string(), g5.str());
      }
      json j = rep;
      j.erase("trial_summaries");
      j["spearman_intersect"] = res.spearman_intersect;
      j["p_optimize_trend"] = res.p_optimize_trend;
      std::string text = std::to_string(res.trials.size()) + " trials:";
      for (int o = 0; o < 4; ++o)
        text += " " + simworld::to_string(static_cast<simworld::Outcome>(o)) + " " + std::to_string(res.counts[o]);
      text += "\n";
      print(out, as_json, j, text);
      return res.crash_free() ? 0 : 1;
    }
  } catch (const DomainFailure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace reachplan::cli
