#include "reachplan/simworld.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace reachplan::simworld {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double segment_distance(const Obstacle& p, const Obstacle& q) {
  if (segments_intersect(p.a, p.b, q.a, q.b)) return 0.0;
  return std::min({point_segment_distance(p.a, q.a, q.b), point_segment_distance(p.b, q.a, q.b),
                   point_segment_distance(q.a, p.a, p.b), point_segment_distance(q.b, p.a, p.b)});
}

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

Vec2 planning_origin(const frs::Certificate& cert) {
  if (cert.X0.size() < 2) return {0.0, 0.0};
  return {0.5 * (cert.X0[0].lo + cert.X0[0].hi), 0.5 * (cert.X0[1].lo + cert.X0[1].hi)};
}

// Plans from state s; k_prev is the plan currently executing.
CycleRecord plan_from(const vehicle::UnicycleState& s, double t, const vehicle::TrajParams& k_prev,
                      const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg) {
  CycleRecord rec;
  rec.t = t;
  const safeset::Pose pose{s.x, s.y, s.th};
  const auto obs = sense(sc.obstacles, pose, cert, cfg);
  rec.sensed_points = static_cast<int>(obs.points.size());

  const double t0 = now_ms();
  safeset::SafeSetPoly h;
  if (obs.points.empty()) {
    h = safeset::fallback_h(cert);
    h.fallback = false;
    h.h = poly::Polynomial::constant(h.h.space(), 1.0);
  } else {
    h = safeset::intersect(cert, obs, cfg.intersect);
  }
  const double t1 = now_ms();
  planner::CostSpec cost = cfg.weights;
  cost.goal = sc.goal;
  cost.v_des = sc.v_des;
  rec.plan = planner::optimize(h, cert.K, cost, pose, k_prev, cfg.optimizer);
  const double t2 = now_ms();
  rec.intersect_ms = t1 - t0;
  rec.optimize_ms = t2 - t1;
  if (cfg.wall_clock && !rec.plan.braking && t2 - t0 > 1000.0 * cfg.timing.tau_plan) {
    rec.plan.braking = true;
    rec.plan.k = planner::braking_plan(k_prev);
    rec.plan.reason = "planning exceeded the wall-clock budget";
  }
  return rec;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa == 0.0 || sbb == 0.0 ? 0.0 : sab / std::sqrt(saa * sbb);
}

}  // namespace

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::goal_reached: return "goal-reached";
    case Outcome::braked_safely: return "braked-safely";
    case Outcome::iteration_limit: return "iteration-limit";
    case Outcome::crash: return "crash";
  }
  return "unknown";
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double L2 = dx * dx + dy * dy;
  double u = L2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - u * dx, p[1] - a[1] - u * dy);
}

Scenario make_scenario(std::uint64_t seed, int n_obstacles, const ScenarioConfig& cfg) {
  std::mt19937_64 rng(seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  // Dense layouts may not fit a short corridor; those draws are redrawn whole.
  for (int draw = 0; draw < 1000; ++draw) {
    Scenario sc;
    sc.seed = seed;
    sc.n_obstacles = n_obstacles;
    sc.v_des = U(cfg.v_min, cfg.v_max);
    const double r = U(cfg.goal_r_min, cfg.goal_r_max);
    const double ang = U(-cfg.goal_half_angle, cfg.goal_half_angle);
    sc.goal = {r * std::cos(ang), r * std::sin(ang)};
    const Vec2 start{sc.start.x, sc.start.y};
    const Vec2 dir{std::cos(ang), std::sin(ang)}, nrm{-std::sin(ang), std::cos(ang)};
    bool complete = true;
    for (int k = 0; k < n_obstacles && complete; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
        const double along = U(0.0, r), lat = U(-cfg.corridor_half_width, cfg.corridor_half_width);
        const Vec2 c{along * dir[0] + lat * nrm[0], along * dir[1] + lat * nrm[1]};
        if (std::hypot(c[0] - start[0], c[1] - start[1]) < cfg.clear_start) continue;
        if (std::hypot(c[0] - sc.goal[0], c[1] - sc.goal[1]) < cfg.clear_goal) continue;
        const double len = U(cfg.seg_min, cfg.seg_max), phi = U(0.0, kPi);
        const Vec2 h{0.5 * len * std::cos(phi), 0.5 * len * std::sin(phi)};
        const auto ob = Obstacle::segment({c[0] - h[0], c[1] - h[1]}, {c[0] + h[0], c[1] + h[1]});
        bool ok = true;
        for (const auto& o : sc.obstacles) ok = ok && segment_distance(ob, o) >= cfg.min_spacing;
        if (!ok) continue;
        sc.obstacles.push_back(ob);
        placed = true;
      }
      complete = placed;
    }
    if (complete) return sc;
  }
  throw std::runtime_error("make_scenario: could not place " + std::to_string(n_obstacles) + " obstacles");
}

std::optional<Collision> audit_collision(const std::vector<TraceRow>& trace, const std::vector<Obstacle>& obstacles,
                                         double radius) {
  for (const auto& row : trace)
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const double d = point_segment_distance({row.s.x, row.s.y}, obstacles[i].a, obstacles[i].b);
      if (d <= radius) return Collision{row.t, static_cast<int>(i), d};
    }
  return std::nullopt;
}

safeset::LocalObstacleSet sense(const std::vector<Obstacle>& obstacles, const safeset::Pose& pose,
                                const frs::Certificate& cert, const WorldConfig& cfg) {
  const Vec2 origin = planning_origin(cert);
  const double D = cfg.timing.v_max * cfg.timing.T_sense;
  auto local = safeset::localize(obstacles, pose, origin);
  safeset::LocalObstacleSet near;
  for (const auto& p : local.points)
    if (std::hypot(p[0] - origin[0], p[1] - origin[1]) <= D) near.points.push_back(p);
  std::vector<poly::Interval> keep;
  if (cert.Xs.dim() >= 2) keep = {cert.Xs[0], cert.Xs[1]};
  return safeset::dilate(near, cfg.footprint, safeset::kSegmentSpacing, keep);
}

CycleRecord plan_now(const WorldState& world, const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg) {
  CycleRecord rec = plan_from(world.s, world.t, world.active, cert, sc, cfg);
  rec.cycle = world.cycle;
  return rec;
}

CycleRecord step_cycle(WorldState& world, const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg,
                       std::vector<TraceRow>& trace) {
  const double tau = cfg.timing.tau_plan;
  // The vehicle is deterministic, so the prediction is also the executed motion.
  const auto run = vehicle::simulate_unicycle(world.s, vehicle::ParamSchedule::constant(world.active), tau, cfg.model);
  CycleRecord rec = plan_from(run.states.back(), world.t + tau, world.active, cert, sc, cfg);
  rec.cycle = world.cycle + 1;
  for (std::size_t i = 1; i < run.t.size(); ++i) trace.push_back({world.t + run.t[i], run.states[i], world.active, world.braking});
  world.t += tau;
  world.s = run.states.back();
  world.active = rec.plan.k;
  world.braking = rec.plan.braking;
  ++world.cycle;
  return rec;
}

TrialResult run_trial(const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg) {
  TrialResult res;
  res.scenario = sc;
  WorldState world;
  world.s = {sc.start.x, sc.start.y, sc.start.th, 0.0, sc.v_des};
  world.active = {0.0, sc.v_des};
  res.trace.push_back({0.0, world.s, world.active, false});

  const auto first = plan_now(world, cert, sc, cfg);
  world.active = first.plan.k;
  world.braking = first.plan.braking;
  res.trace.front().k = world.active;
  res.trace.front().braking = world.braking;
  res.cycles.push_back(first);

  auto reached = [&](std::size_t from) -> std::optional<std::size_t> {
    for (std::size_t i = from; i < res.trace.size(); ++i)
      if (std::hypot(res.trace[i].s.x - sc.goal[0], res.trace[i].s.y - sc.goal[1]) <= cfg.goal_radius) return i;
    return std::nullopt;
  };

  res.outcome = Outcome::iteration_limit;
  if (auto g = reached(0)) {
    res.outcome = Outcome::goal_reached;
  } else {
    for (int n = 0; n < cfg.max_cycles; ++n) {
      if (world.braking) {
        // hold the braking plan until the vehicle stops
        const double limit = world.t + 20.0;
        while (world.s.v >= cfg.stop_speed && world.t < limit) {
          const auto run =
              vehicle::simulate_unicycle(world.s, vehicle::ParamSchedule::constant(world.active), cfg.timing.tau_plan, cfg.model);
          for (std::size_t i = 1; i < run.t.size(); ++i) {
            res.trace.push_back({world.t + run.t[i], run.states[i], world.active, true});
            if (run.states[i].v < cfg.stop_speed) break;
          }
          world.t = res.trace.back().t;
          world.s = res.trace.back().s;
        }
        res.outcome = Outcome::braked_safely;
        break;
      }
      const std::size_t before = res.trace.size();
      res.cycles.push_back(step_cycle(world, cert, sc, cfg, res.trace));
      if (auto g = reached(before)) {
        res.trace.resize(*g + 1);
        res.cycles.pop_back();  // that plan never became active
        res.outcome = Outcome::goal_reached;
        break;
      }
    }
  }
  res.collision = audit_collision(res.trace, sc.obstacles, cfg.footprint.circumradius());
  if (res.collision) res.outcome = Outcome::crash;
  return res;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int i) {
  return splitmix64(base_seed * 0x100000001b3ULL + static_cast<std::uint64_t>(i));
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  return pearson(ranks(a), ranks(b));
}

double spearman_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman_permutation_p: bad sizes");
  if (a.size() > 10) throw std::invalid_argument("spearman_permutation_p: exact test limited to n <= 10");
  const auto ra = ranks(a);
  auto rb = ranks(b);
  const double obs = pearson(ra, rb);
  std::vector<std::size_t> perm(rb.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> pb(rb.size());
  long long hit = 0, total = 0;
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) pb[i] = rb[perm[i]];
    if (pearson(ra, pb) >= obs - 1e-12) ++hit;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(hit) / static_cast<double>(total);
}

BatchResult run_batch(const frs::Certificate& cert, const WorldConfig& cfg, const BatchOptions& opt) {
  BatchResult out;
  out.trials.resize(static_cast<std::size_t>(opt.trials));
  std::atomic<int> next{0};
  std::vector<std::string> errors(static_cast<std::size_t>(opt.trials));
  auto worker = [&] {
    for (int i = next++; i < opt.trials; i = next++) {
      try {
        const auto sc = make_scenario(trial_seed(opt.base_seed, i), 1 + i % 10, cfg.scenario);
        out.trials[static_cast<std::size_t>(i)] = run_trial(cert, sc, cfg);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min(opt.threads, opt.trials));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < opt.trials; ++i)
    if (!errors[static_cast<std::size_t>(i)].empty())
      throw std::runtime_error("trial " + std::to_string(i) + ": " + errors[static_cast<std::size_t>(i)]);

  std::vector<double> sum_i(10, 0.0), sum_o(10, 0.0), cnt(10, 0.0);
  for (const auto& t : out.trials) {
    ++out.counts[static_cast<int>(t.outcome)];
    const auto c = static_cast<std::size_t>(std::clamp(t.scenario.n_obstacles, 1, 10) - 1);
    for (const auto& r : t.cycles) {
      sum_i[c] += r.intersect_ms;
      sum_o[c] += r.optimize_ms;
      cnt[c] += 1.0;
    }
  }
  std::vector<double> xs;
  for (std::size_t c = 0; c < 10; ++c) {
    if (cnt[c] == 0.0) continue;
    xs.push_back(static_cast<double>(c + 1));
    out.obstacle_counts.push_back(static_cast<int>(c + 1));
    out.mean_intersect_ms.push_back(sum_i[c] / cnt[c]);
    out.mean_optimize_ms.push_back(sum_o[c] / cnt[c]);
  }
  if (xs.size() >= 2) {
    out.spearman_intersect = spearman(xs, out.mean_intersect_ms);
    out.spearman_optimize = spearman(xs, out.mean_optimize_ms);
    out.p_optimize_trend = spearman_permutation_p(xs, out.mean_optimize_ms);
  }
  return out;
}

void write_trace_csv(const TrialResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(10) << "t,x,y,th,thdot,v,k1,k2,braking\n";
  for (const auto& row : r.trace)
    f << row.t << ',' << row.s.x << ',' << row.s.y << ',' << row.s.th << ',' << row.s.thdot << ',' << row.s.v << ','
      << row.k.k1 << ',' << row.k.k2 << ',' << (row.braking ? 1 : 0) << '\n';
}

nlohmann::json trial_json(const TrialResult& r) {
  nlohmann::json j;
  j["seed"] = r.scenario.seed;
  j["n_obstacles"] = r.scenario.n_obstacles;
  j["obstacles"] = safeset::obstacles_to_json(r.scenario.obstacles)["obstacles"];
  j["goal"] = {r.scenario.goal[0], r.scenario.goal[1]};
  j["v_des"] = r.scenario.v_des;
  j["outcome"] = to_string(r.outcome);
  j["duration"] = r.trace.empty() ? 0.0 : r.trace.back().t;
  if (!r.trace.empty()) {
    const auto& s = r.trace.back().s;
    j["final_state"] = {s.x, s.y, s.th, s.thdot, s.v};
  }
  if (r.collision) j["collision"] = {{"t", r.collision->t}, {"obstacle", r.collision->obstacle}, {"distance", r.collision->distance}};
  auto plans = nlohmann::json::array();
  int braking = 0;
  for (const auto& c : r.cycles) {
    braking += c.plan.braking ? 1 : 0;
    nlohmann::json p{{"cycle", c.cycle}, {"t", c.t}, {"k", {c.plan.k.k1, c.plan.k.k2}}, {"braking", c.plan.braking},
                     {"sensed_points", c.sensed_points}, {"h", c.plan.h_value}};
    if (!c.plan.reason.empty()) p["reason"] = c.plan.reason;
    plans.push_back(p);
  }
  j["plans"] = plans;
  j["braking_plans"] = braking;
  return j;
}

nlohmann::json batch_report(const BatchResult& b) {
  nlohmann::json j;
  const int n = static_cast<int>(b.trials.size());
  nlohmann::json counts, pct;
  for (int o = 0; o < 4; ++o) {
    const auto name = to_string(static_cast<Outcome>(o));
    counts[name] = b.counts[o];
    pct[name] = n > 0 ? 100.0 * b.counts[o] / n : 0.0;
  }
  j["trials"] = n;
  j["counts"] = counts;
  j["percent"] = pct;
  j["crash_free"] = b.crash_free();
  auto by = nlohmann::json::array();
  for (int k = 1; k <= 10; ++k) {
    nlohmann::json row{{"n_obstacles", k}};
    for (int o = 0; o < 4; ++o) row[to_string(static_cast<Outcome>(o))] = 0;
    for (const auto& t : b.trials)
      if (t.scenario.n_obstacles == k) row[to_string(t.outcome)] = row[to_string(t.outcome)].get<int>() + 1;
    by.push_back(row);
  }
  j["by_obstacle_count"] = by;
  auto arr = nlohmann::json::array();
  for (const auto& t : b.trials) {
    auto tj = trial_json(t);
    tj.erase("plans");
    arr.push_back(tj);
  }
  j["trial_summaries"] = arr;
  return j;
}

nlohmann::json batch_timing(const BatchResult& b) {
  nlohmann::json j;
  auto means = nlohmann::json::array();
  for (std::size_t i = 0; i < b.mean_intersect_ms.size(); ++i)
    means.push_back({{"n_obstacles", b.obstacle_counts[i]},
                     {"mean_intersect_ms", b.mean_intersect_ms[i]},
                     {"mean_optimize_ms", b.mean_optimize_ms[i]}});
  j["by_obstacle_count"] = means;
  j["spearman_intersect"] = b.spearman_intersect;
  j["spearman_optimize"] = b.spearman_optimize;
  j["p_optimize_trend"] = b.p_optimize_trend;
  auto trials = nlohmann::json::array();
  for (const auto& t : b.trials) {
    auto cyc = nlohmann::json::array();
    for (const auto& c : t.cycles) cyc.push_back({c.cycle, c.sensed_points, c.intersect_ms, c.optimize_ms});
    trials.push_back({{"seed", t.scenario.seed}, {"n_obstacles", t.scenario.n_obstacles}, {"cycles", cyc}});
  }
  j["cycle_columns"] = {"cycle", "sensed_points", "intersect_ms", "optimize_ms"};
  j["trials"] = trials;
  return j;
}

}  // namespace reachplan::simworld
