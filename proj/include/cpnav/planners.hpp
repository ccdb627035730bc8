#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpnav/types.hpp"
#include "cpnav/world.hpp"

namespace cpnav::planners {

enum class SegmentKind { free_flight, collide, recover };

const char* to_string(SegmentKind k);

struct PlanSegment {
  SegmentKind kind = SegmentKind::free_flight;
  Vec2 target{0, 0};
  // Speed pinned at the target: collide segments pin the approach speed,
  // terminal segments pin rest (0). Unset on interior route waypoints.
  std::optional<double> speed;
  int obstacle_id = -1;  // the obstacle a collide/recover segment belongs to
};

struct Plan {
  std::string planner;
  std::vector<PlanSegment> segments;
  double plan_time_ms = 0;   // wall clock, informational
  std::uint64_t work = 0;    // expansions / iterations / intersection queries
  bool used_fallback = false;

  // Length of the piecewise-linear route from `start` through all targets.
  double nominal_length(const Vec2& start) const;
};

std::string plan_to_json(const Plan& p);

struct CpParams {
  double collide_speed = 2.5;
  double nominal_f_max = 63.0;  // expected peak force at the collide speed
  double eta = 0.01;
  double d0 = 0.2;
  double inflation = 0.28;      // arm length added to obstacle radii
};

struct AstarParams {
  double resolution = 0.1;
  double inflation = 0.28;
  double prune_max_leg = 0.5;   // bound on line-of-sight shortcut length
};

struct RrtStarParams {
  int max_iters = 5000;
  double step = 0.5;
  double goal_bias = 0.1;
  double rewire_radius = 1.5;
  double inflation = 0.28;
  double max_leg = 0.5;         // waypoint legs are split to at most this
};

// Contact-prioritized route construction: draw the line to the goal, aim at
// the first inflated obstacle on it, bounce off, side-step, repeat. Falls
// back to grid search for the remainder when both side waypoints are blocked.
Plan cp_plan(const Vec2& start, const Vec2& goal, const world::Map& m, const CpParams& prm);

// 8-connected grid search over inflated obstacles with line-of-sight
// shortcutting bounded by prune_max_leg.
Plan astar_plan(const Vec2& start, const Vec2& goal, const world::Map& m,
                const AstarParams& prm);

// Sampling planner; deterministic per seed, path legs split to max_leg.
Plan rrt_star_plan(const Vec2& start, const Vec2& goal, const world::Map& m,
                   const RrtStarParams& prm, std::uint64_t seed);

}  // namespace cpnav::planners
