#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reachplan/frs.hpp"

namespace reachplan::safeset {

using Vec2 = std::array<double, 2>;

/// World-frame obstacle: a segment (a != b) or a point (a == b).
struct Obstacle {
  Vec2 a{};
  Vec2 b{};
  double sensed_time = 0.0;

  static Obstacle point(Vec2 p) { return {p, p, 0.0}; }
  static Obstacle segment(Vec2 a, Vec2 b) { return {a, b, 0.0}; }
  double length() const;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double th = 0.0;
};

/// Point obstacles in the planning frame.
struct LocalObstacleSet {
  std::vector<Vec2> points;
};

/// Segments are sampled with spacing <= this (half the vehicle width).
inline constexpr double kSegmentSpacing = 0.05;

/// World to planning frame: rotate by -pose.th about the vehicle, then place
/// the vehicle center at `origin`. Segments become points at <= 0.05 m spacing.
LocalObstacleSet localize(const std::vector<Obstacle>& obstacles, const Pose& pose, Vec2 origin = {0.0, 0.0});

/// Vehicle footprint and audit geometry.
struct Footprint {
  double half_length = 0.1;
  double half_width = 0.05;
  double circumradius() const;
};

/// Replaces every point by offset copies so that translated footprints around
/// them cover the closed disk of radius circumradius + spacing/2. Points whose
/// copies all fall outside `keep` (the certificate's position box) are dropped.
LocalObstacleSet dilate(const LocalObstacleSet& pts, const Footprint& fp, double spacing,
                        const std::vector<poly::Interval>& keep);

/// Offsets used by dilate().
std::vector<Vec2> dilation_offsets(const Footprint& fp, double spacing);

struct SafeSetPoly {
  /// h over (params...) in scaled coordinates; physical = scale * z + offset.
  poly::Polynomial h;
  std::vector<poly::AffineMap> maps;
  std::vector<std::string> params;
  bool fallback = false;
  int obstacle_points = 0;
  nlohmann::json diagnostics;

  /// h at physical parameters.
  double operator()(std::span<const double> k) const;
  nlohmann::json to_json() const;
  static SafeSetPoly from_json(const nlohmann::json& j);
};

struct IntersectOptions {
  int degree = 6;
  sdp::SolverOptions solver;
};

/// h with {h >= 0} inside the parameters whose FRS slice avoids every point.
/// Each point fixes the leading position states; remaining states stay free.
/// Solver trouble returns the constant -1.
SafeSetPoly intersect(const frs::Certificate& cert, const LocalObstacleSet& obs, const IntersectOptions& opt = {});

SafeSetPoly fallback_h(const frs::Certificate& cert);

double safe_margin(const SafeSetPoly& h, std::span<const double> k);

std::vector<Obstacle> obstacles_from_json(const nlohmann::json& j);
nlohmann::json obstacles_to_json(const std::vector<Obstacle>& obs);

}  // namespace reachplan::safeset
