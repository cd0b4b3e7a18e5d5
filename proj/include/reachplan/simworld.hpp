#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reachplan/frs.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/safeset.hpp"

namespace reachplan::simworld {

using safeset::Obstacle;
using safeset::Vec2;

struct ScenarioConfig {
  double goal_r_min = 1.5;
  double goal_r_max = 3.0;
  double goal_half_angle = 1.0471975511965976;  // 60 deg
  double v_min = 0.25;
  double v_max = 0.75;
  double seg_min = 0.1;
  double seg_max = 0.2;
  double min_spacing = 0.15;
  /// obstacle centers keep this distance from the start and the goal
  double clear_start = 0.8;
  double clear_goal = 0.3;
  double corridor_half_width = 0.3;
};

struct WorldConfig {
  vehicle::ModelConfig model;
  planner::TimingConfig timing;
  planner::CostSpec weights;  // goal and v_des are filled per scenario
  planner::OptimizerOptions optimizer;
  safeset::IntersectOptions intersect;
  safeset::Footprint footprint;
  ScenarioConfig scenario;
  double goal_radius = 0.25;
  int max_cycles = 60;
  double stop_speed = 0.01;
  /// Enforce tau_plan as a wall-clock budget (timing studies only; breaks
  /// host independence).
  bool wall_clock = false;
};

struct Scenario {
  std::uint64_t seed = 0;
  int n_obstacles = 0;
  std::vector<Obstacle> obstacles;
  Vec2 goal{};
  double v_des = 0.5;
  safeset::Pose start;
};

Scenario make_scenario(std::uint64_t seed, int n_obstacles, const ScenarioConfig& cfg = {});

struct TraceRow {
  double t = 0.0;
  vehicle::UnicycleState s;
  vehicle::TrajParams k;
  bool braking = false;
};

struct CycleRecord {
  int cycle = 0;
  double t = 0.0;  // time at which the plan becomes active
  planner::PlanResult plan;
  int sensed_points = 0;
  double intersect_ms = 0.0;
  double optimize_ms = 0.0;
};

struct Collision {
  double t = 0.0;
  int obstacle = -1;
  double distance = 0.0;
};

enum class Outcome { goal_reached, braked_safely, iteration_limit, crash };
std::string to_string(Outcome o);

struct TrialResult {
  Scenario scenario;
  Outcome outcome = Outcome::iteration_limit;
  std::vector<TraceRow> trace;
  std::vector<CycleRecord> cycles;
  std::optional<Collision> collision;
};

/// Distance from p to segment ab.
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// First sample whose center is within `radius` (closed) of an obstacle.
std::optional<Collision> audit_collision(const std::vector<TraceRow>& trace, const std::vector<Obstacle>& obstacles,
                                         double radius);

/// Obstacles sensed from `pose`: segment sample points within D_sense,
/// in the certificate's planning frame and dilated for the audit radius.
safeset::LocalObstacleSet sense(const std::vector<Obstacle>& obstacles, const safeset::Pose& pose,
                                const frs::Certificate& cert, const WorldConfig& cfg);

struct WorldState {
  double t = 0.0;
  vehicle::UnicycleState s;
  vehicle::TrajParams active;
  bool braking = false;
  int cycle = 0;
};

/// One replanning cycle: plan for the state predicted tau_plan ahead while the
/// active plan executes, then swap at the boundary. Appends executed samples
/// to `trace` (excluding the cycle's first sample).
CycleRecord step_cycle(WorldState& world, const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg,
                       std::vector<TraceRow>& trace);

/// Plans from the current state (used once at t = 0).
CycleRecord plan_now(const WorldState& world, const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg);

TrialResult run_trial(const frs::Certificate& cert, const Scenario& sc, const WorldConfig& cfg);

struct BatchOptions {
  int trials = 100;
  std::uint64_t base_seed = 1;
  int threads = 1;
};

/// Seed of trial i derived from the batch seed.
std::uint64_t trial_seed(std::uint64_t base_seed, int i);

struct BatchResult {
  std::vector<TrialResult> trials;
  int counts[4] = {0, 0, 0, 0};
  /// obstacle counts that produced cycles, with their mean planning times
  std::vector<int> obstacle_counts;
  std::vector<double> mean_intersect_ms, mean_optimize_ms;
  double spearman_intersect = 0.0;
  double spearman_optimize = 0.0;
  /// one-sided exact permutation p-value for a positive optimize-time trend
  double p_optimize_trend = 1.0;
  bool crash_free() const { return counts[3] == 0; }
};

BatchResult run_batch(const frs::Certificate& cert, const WorldConfig& cfg, const BatchOptions& opt);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);
/// P(rho >= observed) over all permutations of b (exact; n <= 10).
double spearman_permutation_p(const std::vector<double>& a, const std::vector<double>& b);

void write_trace_csv(const TrialResult& r, const std::string& path);
/// Deterministic per-trial summary (no wall-clock data).
nlohmann::json trial_json(const TrialResult& r);
/// Deterministic batch report (no wall-clock data).
nlohmann::json batch_report(const BatchResult& b);
/// Machine-dependent timing tables.
nlohmann::json batch_timing(const BatchResult& b);

}  // namespace reachplan::simworld
