#include "cpnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cpnav::world {

using nlohmann::json;

void KnownMap::discover(const Obstacle& o) {
  if (ids.count(o.id)) return;
  ids.insert(o.id);
  auto& obs = map.obstacles;
  auto it = std::lower_bound(obs.begin(), obs.end(), o.id,
                             [](const Obstacle& a, int id) { return a.id < id; });
  obs.insert(it, o);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 <= 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

std::optional<Hit> first_intersection(const Vec2& a, const Vec2& b, const Map& m,
                                      double inflation) {
  const Vec2 d = b - a;
  const double len = d.norm();
  std::optional<Hit> best;
  for (const auto& o : m.obstacles) {
    const double rr = o.radius + inflation;
    const Vec2 f = a - o.center;
    double entry;
    if (f.squaredNorm() <= rr * rr) {
      entry = 0.0;  // start already inside the inflated disk
    } else if (len <= 0) {
      continue;
    } else {
      // Solve |f + t d|^2 = rr^2 for t in [0,1], smallest root.
      const double A = d.squaredNorm();
      const double B = 2.0 * f.dot(d);
      const double C = f.squaredNorm() - rr * rr;
      const double disc = B * B - 4 * A * C;
      if (disc < 0) continue;
      const double t = (-B - std::sqrt(disc)) / (2 * A);
      if (t < 0 || t > 1) continue;
      entry = t * len;
    }
    if (!best || entry < best->distance) best = Hit{o.id, entry};
  }
  return best;
}

int discover_visible(const Vec2& pos, double range, const Map& full, KnownMap& known) {
  int added = 0;
  for (const auto& o : full.obstacles) {
    if ((o.center - pos).norm() <= range && !known.ids.count(o.id)) {
      known.discover(o);
      ++added;
    }
  }
  return added;
}

double min_clearance(const std::vector<Vec2>& samples, const Map& m, double inflation,
                     const std::set<int>& exclude) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : m.obstacles) {
    if (exclude.count(o.id)) continue;
    for (const auto& p : samples) {
      best = std::min(best, (p - o.center).norm() - o.radius - inflation);
    }
  }
  return best;
}

Map generate_random_map(const RandomMapSpec& spec, std::uint64_t seed) {
  Map m;
  m.xmin = spec.xmin;
  m.xmax = spec.xmax;
  m.ymin = spec.ymin;
  m.ymax = spec.ymax;
  m.altitude = spec.altitude;
  m.start = spec.start;
  m.goal = spec.goal;
  Rng rng(seed);
  // Inset so whole poles stay inside the bounds.
  const double x0 = spec.xmin + spec.radius, x1 = spec.xmax - spec.radius;
  const double y0 = spec.ymin + spec.radius, y1 = spec.ymax - spec.radius;
  for (int i = 0; i < spec.count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts_per_obstacle; ++attempt) {
      Vec2 c(rng.uniform(x0, x1), rng.uniform(y0, y1));
      if ((c - spec.start).norm() < spec.endpoint_keepout) continue;
      if ((c - spec.goal).norm() < spec.endpoint_keepout) continue;
      bool ok = true;
      for (const auto& o : m.obstacles) {
        if ((c - o.center).norm() < spec.min_center_spacing) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      m.obstacles.push_back(Obstacle{i, c, spec.radius});
      placed = true;
      break;
    }
    if (!placed)
      throw PlanningError("generate_random_map: placement failed for obstacle " +
                          std::to_string(i));
  }
  return m;
}

std::string map_to_json(const Map& m) {
  json j;
  j["bounds"] = {{"xmin", m.xmin}, {"xmax", m.xmax}, {"ymin", m.ymin}, {"ymax", m.ymax}};
  j["altitude"] = m.altitude;
  j["start"] = {m.start.x(), m.start.y()};
  j["goal"] = {m.goal.x(), m.goal.y()};
  j["obstacles"] = json::array();
  for (const auto& o : m.obstacles)
    j["obstacles"].push_back(
        {{"id", o.id}, {"x", o.center.x()}, {"y", o.center.y()}, {"radius", o.radius}});
  j["walls"] = json::array();
  for (const auto& w : m.walls)
    j["walls"].push_back(
        {{"x1", w.a.x()}, {"y1", w.a.y()}, {"x2", w.b.x()}, {"y2", w.b.y()}});
  j["ground"] = m.ground;
  return j.dump(2) + "\n";
}

Map map_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("map parse error: ") + e.what());
  }
  Map m;
  try {
    const auto& b = j.at("bounds");
    m.xmin = b.at("xmin");
    m.xmax = b.at("xmax");
    m.ymin = b.at("ymin");
    m.ymax = b.at("ymax");
    m.altitude = j.at("altitude");
    m.start = Vec2(j.at("start").at(0), j.at("start").at(1));
    m.goal = Vec2(j.at("goal").at(0), j.at("goal").at(1));
    for (const auto& o : j.at("obstacles"))
      m.obstacles.push_back(Obstacle{o.at("id"), Vec2(o.at("x"), o.at("y")), o.at("radius")});
    if (j.contains("walls"))
      for (const auto& w : j["walls"])
        m.walls.push_back(Wall{Vec2(w.at("x1"), w.at("y1")), Vec2(w.at("x2"), w.at("y2"))});
    if (j.contains("ground")) m.ground = j["ground"];
  } catch (const json::exception& e) {
    throw ConfigError(std::string("map field error: ") + e.what());
  }
  if (m.xmax <= m.xmin || m.ymax <= m.ymin) throw ConfigError("map bounds are empty");
  for (const auto& o : m.obstacles)
    if (o.radius <= 0) throw ConfigError("obstacle radius must be positive");
  return m;
}

Map load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return map_from_json(ss.str());
}

void save_map(const Map& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write map file: " + path);
  out << map_to_json(m);
}

}  // namespace cpnav::world
