#pragma once

#include <string>
#include <vector>

#include "reachplan/safeset.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::planner {

using safeset::Pose;
using safeset::Vec2;
using vehicle::TrajParams;

struct TimingConfig {
  double tau_plan = 0.5;
  double tau_stop = 0.5;
  double T = 1.0;
  double T_sense = 1.5;
  double v_max = 1.0;
};

struct TimingReport {
  bool ok = true;
  std::vector<std::string> violations;
  double T_min = 0.0;        // tau_plan + tau_stop
  double T_sense_min = 0.0;  // T + tau_plan, with T at its minimum
  double D_sense = 0.0;      // v_max * T_sense
};

/// Checks tau_plan + tau_stop <= T and T + tau_plan <= T_sense.
TimingReport check_timing(const TimingConfig& cfg);

struct CostSpec {
  Vec2 goal{};  // world frame
  double v_des = 0.5;
  double w_goal = 1.0;
  double w_speed = 1.0;
  /// Weight on (k - k_prev)^2; 0 disables.
  double w_change = 0.0;
};

struct OptimizerOptions {
  double T = 1.0;
  int prescan = 25;
  int starts_per_axis = 3;
  double fd_step = 1e-4;  // scaled parameter units
  int max_iterations = 60;
};

struct PlanResult {
  bool braking = false;
  TrajParams k;
  double cost = 0.0;
  double h_value = 0.0;
  std::string reason;
};

/// Endpoint after T seconds of the undisturbed Dubins car started at the origin
/// with zero heading (closed form).
std::array<double, 3> dubins_endpoint(const TrajParams& k, double T);

/// J(k) for a goal expressed in the vehicle frame.
double plan_cost(const TrajParams& k, const Vec2& goal_local, const CostSpec& cost, const TrajParams& k_prev, double T);

/// Minimizes the cost subject to h(k) >= 0 and k in K. When h is negative on
/// the whole prescan grid the result requests braking.
PlanResult optimize(const safeset::SafeSetPoly& h, const poly::Box& K, const CostSpec& cost, const Pose& pose,
                    const TrajParams& k_prev, const OptimizerOptions& opt = {});

/// Keeps the yaw-rate command and drops the speed command to zero.
TrajParams braking_plan(const TrajParams& k);

}  // namespace reachplan::planner
