#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpnav/types.hpp"

namespace cpnav::world {

// Vertical cylindrical pole, described in the horizontal plane.
struct Obstacle {
  int id = 0;
  Vec2 center{0, 0};
  double radius = 0;
};

// Vertical wall panel; a segment in the horizontal plane, full height.
struct Wall {
  Vec2 a{0, 0};
  Vec2 b{0, 0};
};

struct Map {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  double altitude = 1.0;  // nominal flight altitude
  Vec2 start{0, 0};
  Vec2 goal{0, 0};
  std::vector<Obstacle> obstacles;
  std::vector<Wall> walls;
  bool ground = false;  // enable the z = 0 ground plane for contact

  bool contains(const Vec2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
  const Obstacle* find(int id) const {
    for (const auto& o : obstacles)
      if (o.id == id) return &o;
    return nullptr;
  }
};

// Planner-side view of a partially known environment: same frame and
// endpoints as the full map, obstacle list restricted to discovered ones.
struct KnownMap {
  Map map;                 // obstacles = discovered subset
  std::set<int> ids;       // discovered obstacle ids

  static KnownMap none_of(const Map& full) {
    KnownMap k;
    k.map = full;
    k.map.obstacles.clear();
    return k;
  }
  // Idempotent; keeps obstacle order stable (sorted by id) for determinism.
  void discover(const Obstacle& o);
};

struct Hit {
  int obstacle_id = -1;
  double distance = 0;  // metres along the segment to the inflated surface
};

// First inflated obstacle intersected by segment a->b, by entry distance.
// A start point already inside an inflated disk reports distance 0 for that
// obstacle. Zero-length segments degenerate to a point-inclusion test.
std::optional<Hit> first_intersection(const Vec2& a, const Vec2& b, const Map& m,
                                      double inflation);

// Shortest distance from point p to segment a->b.
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Adds every obstacle whose center lies within `range` of pos (boundary
// inclusive) to `known`. Returns the number of newly discovered obstacles.
int discover_visible(const Vec2& pos, double range, const Map& full, KnownMap& known);

// Minimum of (distance to center - radius - inflation) over the sample points
// and all obstacles not in `exclude`. +inf when no obstacle participates.
double min_clearance(const std::vector<Vec2>& samples, const Map& m, double inflation,
                     const std::set<int>& exclude = {});

struct RandomMapSpec {
  double xmin = -10, xmax = 10, ymin = -10, ymax = 10;
  double altitude = 1.0;
  Vec2 start{-8, -8};
  Vec2 goal{8, 8};
  int count = 30;
  double radius = 0.3;
  double min_center_spacing = 2.5;  // pole center-to-center clearance
  double endpoint_keepout = 1.1;    // no pole center this close to start/goal
  int max_attempts_per_obstacle = 100000;
};

// Rejection-sampled pole field; deterministic per seed. Throws PlanningError
// if a pole cannot be placed within the attempt budget.
Map generate_random_map(const RandomMapSpec& spec, std::uint64_t seed);

// JSON map file round-trip. Field names are a stable contract.
Map load_map(const std::string& path);
void save_map(const Map& m, const std::string& path);
std::string map_to_json(const Map& m);
Map map_from_json(const std::string& text);

}  // namespace cpnav::world
