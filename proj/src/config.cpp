#include "reachplan/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace reachplan::config {

using nlohmann::json;

namespace {

// Walks the config tree once per direction: writing a json tree or overlaying
// one onto the struct.
class Binder {
 public:
  Binder(json& node, bool reading, std::string path) : node_(node), reading_(reading), path_(std::move(path)) {}

  template <class T>
  void field(const char* name, T& value) {
    seen_.insert(name);
    if (!reading_) {
      put(node_[name], value);
      return;
    }
    if (!node_.contains(name)) return;
    get(node_.at(name), value, path_ + "." + name);
  }

  template <class F>
  void group(const char* name, F&& body) {
    seen_.insert(name);
    if (!reading_) {
      json sub = json::object();
      Binder b(sub, false, path_ + "." + name);
      body(b);
      node_[name] = sub;
      return;
    }
    if (!node_.contains(name)) return;
    json& sub = node_.at(name);
    if (!sub.is_object()) throw std::invalid_argument("config: " + path_ + "." + name + " must be an object");
    Binder b(sub, true, path_ + "." + name);
    body(b);
    b.finish();
  }

  void finish() const {
    if (!reading_) return;
    for (const auto& [k, v] : node_.items())
      if (!seen_.count(k)) throw std::invalid_argument("config: unknown key " + path_ + "." + k);
  }

 private:
  static void put(json& j, const poly::Box& b) {
    j = json::array();
    for (const auto& iv : b.intervals()) j.push_back({iv.lo, iv.hi});
  }
  template <class T>
  static void put(json& j, const T& v) {
    j = v;
  }

  static void get(const json& j, poly::Box& b, const std::string& path) {
    if (!j.is_array()) throw std::invalid_argument("config: " + path + " must be a list of [lo, hi]");
    std::vector<poly::Interval> iv;
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw std::invalid_argument("config: " + path + " must be a list of [lo, hi]");
      iv.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    b = poly::Box(iv);
  }
  static void get(const json& j, bool& v, const std::string& path) {
    if (!j.is_boolean()) throw std::invalid_argument("config: " + path + " must be a boolean");
    v = j.get<bool>();
  }
  static void get(const json& j, std::string& v, const std::string& path) {
    if (!j.is_string()) throw std::invalid_argument("config: " + path + " must be a string");
    v = j.get<std::string>();
  }
  static void get(const json& j, int& v, const std::string& path) {
    if (!j.is_number_integer()) throw std::invalid_argument("config: " + path + " must be an integer");
    v = j.get<int>();
  }
  static void get(const json& j, std::uint64_t& v, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
      throw std::invalid_argument("config: " + path + " must be a non-negative integer");
    v = j.get<std::uint64_t>();
  }
  static void get(const json& j, double& v, const std::string& path) {
    if (!j.is_number()) throw std::invalid_argument("config: " + path + " must be a number");
    v = j.get<double>();
  }

  json& node_;
  bool reading_;
  std::string path_;
  std::set<std::string> seen_;
};

void bind_solver(Binder& b, sdp::SolverOptions& s) {
  b.field("tol_primal", s.tol_primal);
  b.field("tol_dual", s.tol_dual);
  b.field("tol_gap", s.tol_gap);
  b.field("tol_infeasible", s.tol_infeasible);
  b.field("max_iterations", s.max_iterations);
  b.field("step_fraction", s.step_fraction);
  b.field("regularization", s.regularization);
  b.field("rank_tolerance", s.rank_tolerance);
}

void bind_model(Binder& b, vehicle::ModelConfig& m) {
  b.field("yaw_gain", m.yaw_gain);
  b.field("speed_gain", m.speed_gain);
  b.field("literal_controller_sign", m.literal_controller_sign);
  b.field("v_max", m.v_max);
  b.field("K", m.K);
  b.field("Xs", m.Xs);
  b.field("X0", m.X0);
  b.field("x0_heading", m.x0_heading);
  b.field("verr_exponent", m.verr_exponent);
  b.field("thdot_err_exponent", m.thdot_err_exponent);
  b.field("envelope_t_ref", m.envelope_t_ref);
  b.field("horizon", m.horizon);
  b.field("dt", m.dt);
}

void bind_frs(Binder& b, RunConfig& c) {
  b.group("model", [&](Binder& g) { bind_model(g, c.world.model); });
  b.group("frs", [&](Binder& g) {
    g.field("d_dec", c.d_dec);
    g.field("two_l", c.two_l);
    g.group("solver", [&](Binder& s) { bind_solver(s, c.frs_solver); });
  });
}

void bind(Binder& b, RunConfig& c) {
  bind_frs(b, c);
  auto& w = c.world;
  b.group("timing", [&](Binder& g) {
    g.field("tau_plan", w.timing.tau_plan);
    g.field("tau_stop", w.timing.tau_stop);
    g.field("T", w.timing.T);
    g.field("T_sense", w.timing.T_sense);
    g.field("v_max", w.timing.v_max);
  });
  b.group("intersect", [&](Binder& g) {
    g.field("degree", w.intersect.degree);
    g.group("solver", [&](Binder& s) { bind_solver(s, w.intersect.solver); });
  });
  b.group("optimizer", [&](Binder& g) {
    g.field("T", w.optimizer.T);
    g.field("prescan", w.optimizer.prescan);
    g.field("starts_per_axis", w.optimizer.starts_per_axis);
    g.field("fd_step", w.optimizer.fd_step);
    g.field("max_iterations", w.optimizer.max_iterations);
  });
  b.group("cost", [&](Binder& g) {
    g.field("w_goal", w.weights.w_goal);
    g.field("w_speed", w.weights.w_speed);
    g.field("w_change", w.weights.w_change);
  });
  b.group("footprint", [&](Binder& g) {
    g.field("half_length", w.footprint.half_length);
    g.field("half_width", w.footprint.half_width);
  });
  b.group("scenario", [&](Binder& g) {
    auto& s = w.scenario;
    g.field("goal_r_min", s.goal_r_min);
    g.field("goal_r_max", s.goal_r_max);
    g.field("goal_half_angle", s.goal_half_angle);
    g.field("v_min", s.v_min);
    g.field("v_max", s.v_max);
    g.field("seg_min", s.seg_min);
    g.field("seg_max", s.seg_max);
    g.field("min_spacing", s.min_spacing);
    g.field("clear_start", s.clear_start);
    g.field("clear_goal", s.clear_goal);
    g.field("corridor_half_width", s.corridor_half_width);
  });
  b.group("sim", [&](Binder& g) {
    g.field("goal_radius", w.goal_radius);
    g.field("max_cycles", w.max_cycles);
    g.field("stop_speed", w.stop_speed);
    g.field("wall_clock", w.wall_clock);
  });
  b.group("validation", [&](Binder& g) {
    g.field("trajectories", c.validation.trajectories);
    g.field("unicycle_trajectories", c.validation.unicycle_trajectories);
    g.field("tol", c.validation.tol);
    g.field("seed", c.validation.seed);
    g.field("gate_trajectories", c.validation.gate_trajectories);
  });
  b.group("batch", [&](Binder& g) {
    g.field("seed", c.seed);
    g.field("trials", c.trials);
    g.field("threads", c.threads);
  });
  b.group("output", [&](Binder& g) { g.field("dir", c.out_dir); });
}

}  // namespace

json to_json(const RunConfig& c) {
  json j = json::object();
  RunConfig copy = c;
  Binder b(j, false, "");
  bind(b, copy);
  return j;
}

void merge(RunConfig& c, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  json copy = j;
  RunConfig next = c;
  Binder b(copy, true, "");
  bind(b, next);
  b.finish();
  c = next;
}

RunConfig load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  RunConfig c;
  merge(c, j);
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
  };
  const auto& m = c.world.model;
  need(m.K.dim() == 2, "model.K must have two intervals");
  need(m.Xs.dim() == 3, "model.Xs must have three intervals");
  need(m.X0.dim() == 2, "model.X0 must have two intervals");
  for (const poly::Box* b : {&m.K, &m.Xs, &m.X0})
    for (const auto& iv : b->intervals()) need(iv.lo <= iv.hi, "box interval with lo > hi");
  need(m.dt > 0.0 && m.horizon > 0.0, "model.dt and model.horizon must be positive");
  need(c.d_dec >= 2 && c.d_dec % 2 == 0, "frs.d_dec must be an even integer >= 2");
  need(c.two_l >= 0 && c.two_l % 2 == 0, "frs.two_l must be 0 or an even integer");
  need(c.world.intersect.degree >= 2, "intersect.degree must be >= 2");
  need(c.world.optimizer.prescan >= 2 && c.world.optimizer.starts_per_axis >= 1, "optimizer grid sizes too small");
  need(c.world.max_cycles >= 1, "sim.max_cycles must be >= 1");
  need(c.trials >= 1 && c.threads >= 1, "batch.trials and batch.threads must be >= 1");
  const auto& s = c.world.scenario;
  need(s.goal_r_min <= s.goal_r_max && s.v_min <= s.v_max && s.seg_min <= s.seg_max, "scenario ranges with min > max");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash(const RunConfig& c) {
  // execution-only settings that cannot change results stay out of the hash
  json j = to_json(c);
  j["batch"].erase("threads");
  j.erase("output");
  return fnv1a_hex(j.dump());
}

std::string frs_hash(const RunConfig& c) {
  json j = json::object();
  RunConfig copy = c;
  Binder b(j, false, "");
  bind_frs(b, copy);
  return fnv1a_hex(j.dump());
}

}  // namespace reachplan::config
