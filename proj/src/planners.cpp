#include "cpnav/planners.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <nlohmann/json.hpp>

namespace cpnav::planners {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool point_free(const Vec2& p, const world::Map& m, double inflation, double margin = 0.0) {
  for (const auto& o : m.obstacles)
    if ((p - o.center).norm() <= o.radius + inflation + margin) return false;
  return true;
}

}  // namespace

const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::free_flight: return "free_flight";
    case SegmentKind::collide: return "collide";
    case SegmentKind::recover: return "recover";
  }
  return "?";
}

double Plan::nominal_length(const Vec2& start) const {
  double len = 0;
  Vec2 prev = start;
  for (const auto& s : segments) {
    len += (s.target - prev).norm();
    prev = s.target;
  }
  return len;
}

std::string plan_to_json(const Plan& p) {
  nlohmann::json j;
  j["planner"] = p.planner;
  j["plan_time_ms"] = p.plan_time_ms;
  j["work"] = p.work;
  j["used_fallback"] = p.used_fallback;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : p.segments) {
    nlohmann::json js;
    js["kind"] = to_string(s.kind);
    js["target"] = {s.target.x(), s.target.y()};
    if (s.speed) js["speed"] = *s.speed;
    js["obstacle_id"] = s.obstacle_id;
    j["segments"].push_back(js);
  }
  return j.dump(2) + "\n";
}

Plan cp_plan(const Vec2& start, const Vec2& goal, const world::Map& m,
             const CpParams& prm) {
  const auto t0 = Clock::now();
  Plan plan;
  plan.planner = "cp";

  auto blocked_line = [&](const Vec2& a, const Vec2& b) {
    ++plan.work;
    return world::first_intersection(a, b, m, prm.inflation);
  };

  if (!point_free(goal, m, prm.inflation))
    throw PlanningError("cp_plan: goal inside an inflated obstacle");

  Vec2 s = start;
  const int cap = 4 * static_cast<int>(m.obstacles.size()) + 4;
  for (int iter = 0;; ++iter) {
    if (iter >= cap) throw PlanningError("cp_plan: iteration cap exceeded");
    const auto hit = blocked_line(s, goal);
    if (!hit) {
      plan.segments.push_back(PlanSegment{SegmentKind::free_flight, goal, 0.0, -1});
      break;
    }
    const world::Obstacle* o = m.find(hit->obstacle_id);
    const Vec2 to_center = o->center - s;
    if (to_center.norm() < 1e-9)
      throw PlanningError("cp_plan: degenerate approach direction");
    const Vec2 dir = to_center.normalized();
    plan.segments.push_back(
        PlanSegment{SegmentKind::collide, o->center, prm.collide_speed, o->id});

    const double rr = o->radius + prm.inflation;
    const Vec2 contact_nom = o->center - rr * dir;
    const Vec2 r_n = contact_nom - (prm.eta * prm.nominal_f_max + prm.d0) * dir;
    plan.segments.push_back(PlanSegment{SegmentKind::recover, r_n, 0.0, o->id});

    // Side waypoints perpendicular to the approach, nearer-to-goal first;
    // ties break to the right of the approach direction.
    const Vec2 n(-dir.y(), dir.x());
    std::array<Vec2, 2> cands = {o->center + std::numbers::sqrt2 * rr * n,
                                 o->center - std::numbers::sqrt2 * rr * n};
    if ((cands[1] - goal).norm() <= (cands[0] - goal).norm() + 1e-12)
      std::swap(cands[0], cands[1]);

    std::optional<Vec2> chosen;
    for (const auto& c : cands) {
      if (!m.contains(c)) continue;
      if (!point_free(c, m, prm.inflation)) continue;
      if (blocked_line(r_n, c)) continue;
      chosen = c;
      break;
    }
    if (!chosen) {
      // Boxed in: hand the remainder to the grid planner.
      AstarParams ap;
      ap.inflation = prm.inflation;
      Plan rest = astar_plan(r_n, goal, m, ap);
      for (const auto& seg : rest.segments) plan.segments.push_back(seg);
      plan.work += rest.work;
      plan.used_fallback = true;
      break;
    }
    plan.segments.push_back(PlanSegment{SegmentKind::free_flight, *chosen, {}, -1});
    s = *chosen;
  }
  plan.plan_time_ms = ms_since(t0);
  return plan;
}

namespace {

struct GridSpec {
  double x0, y0, res;
  int nx, ny;
  int index(int ix, int iy) const { return iy * nx + ix; }
  Vec2 center(int ix, int iy) const { return Vec2(x0 + ix * res, y0 + iy * res); }
};

// Cell freeness with a per-obstacle chord-sag margin so straight legs between
// adjacent free centers cannot dip inside an inflated disk.
bool cell_free(const Vec2& c, const world::Map& m, double inflation, double res) {
  for (const auto& o : m.obstacles) {
    const double rr = o.radius + inflation;
    const double margin = res * res / (4.0 * rr) + 1e-6;
    if ((c - o.center).norm() <= rr + margin) return false;
  }
  return true;
}

}  // namespace

Plan astar_plan(const Vec2& start, const Vec2& goal, const world::Map& m,
                const AstarParams& prm) {
  const auto t0 = Clock::now();
  Plan plan;
  plan.planner = "astar";

  const double res = prm.resolution;
  if (res <= 0) throw PlanningError("astar_plan: non-positive resolution");
  GridSpec g;
  g.res = res;
  g.x0 = m.xmin + 0.5 * res;
  g.y0 = m.ymin + 0.5 * res;
  g.nx = std::max(2, static_cast<int>(std::floor((m.xmax - m.xmin) / res)));
  g.ny = std::max(2, static_cast<int>(std::floor((m.ymax - m.ymin) / res)));
  if (g.nx < 2 || g.ny < 2) throw PlanningError("astar_plan: bounds too small for grid");

  std::vector<char> free_cell(g.nx * g.ny);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      free_cell[g.index(ix, iy)] = cell_free(g.center(ix, iy), m, prm.inflation, res);

  auto nearest_free = [&](const Vec2& p) -> std::pair<int, int> {
    const int cx = std::clamp(static_cast<int>(std::lround((p.x() - g.x0) / res)), 0, g.nx - 1);
    const int cy = std::clamp(static_cast<int>(std::lround((p.y() - g.y0) / res)), 0, g.ny - 1);
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> bc{-1, -1};
    const int rad = static_cast<int>(std::ceil(1.0 / res)) + 1;  // search within ~1 m
    for (int dy = -rad; dy <= rad; ++dy)
      for (int dx = -rad; dx <= rad; ++dx) {
        const int ix = cx + dx, iy = cy + dy;
        if (ix < 0 || iy < 0 || ix >= g.nx || iy >= g.ny) continue;
        if (!free_cell[g.index(ix, iy)]) continue;
        const double d = (g.center(ix, iy) - p).norm();
        if (d < best) {
          best = d;
          bc = {ix, iy};
        }
      }
    if (bc.first < 0) throw PlanningError("astar_plan: no free cell near endpoint");
    return bc;
  };
  const auto [sx, sy] = nearest_free(start);
  const auto [gx, gy] = nearest_free(goal);
  const Vec2 goal_center = g.center(gx, gy);

  struct QItem {
    double f;
    int idx;
    bool operator<(const QItem& o) const {
      return f != o.f ? f > o.f : idx > o.idx;  // min-heap, deterministic ties
    }
  };
  const int n = g.nx * g.ny;
  std::vector<double> gcost(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  std::priority_queue<QItem> open;
  const int s_idx = g.index(sx, sy), g_idx = g.index(gx, gy);
  gcost[s_idx] = 0;
  open.push(QItem{(g.center(sx, sy) - goal_center).norm(), s_idx});

  static const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  std::uint64_t expansions = 0;
  bool found = false;
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    ++expansions;
    if (idx == g_idx) {
      found = true;
      break;
    }
    const int ix = idx % g.nx, iy = idx / g.nx;
    for (int k = 0; k < 8; ++k) {
      const int jx = ix + dxs[k], jy = iy + dys[k];
      if (jx < 0 || jy < 0 || jx >= g.nx || jy >= g.ny) continue;
      const int jdx = g.index(jx, jy);
      if (!free_cell[jdx] || closed[jdx]) continue;
      if (k >= 4) {  // no corner cutting through blocked cardinals
        if (!free_cell[g.index(ix, jy)] || !free_cell[g.index(jx, iy)]) continue;
      }
      const double step = (k < 4) ? res : res * std::numbers::sqrt2;
      const double cand = gcost[idx] + step;
      if (cand < gcost[jdx] - 1e-12) {
        gcost[jdx] = cand;
        parent[jdx] = idx;
        open.push(QItem{cand + (g.center(jx, jy) - goal_center).norm(), jdx});
      }
    }
  }
  plan.work = expansions;
  if (!found) throw PlanningError("astar_plan: goal unreachable on grid");

  std::vector<Vec2> pts;
  for (int idx = g_idx; idx != -1; idx = parent[idx])
    pts.push_back(g.center(idx % g.nx, idx / g.nx));
  std::reverse(pts.begin(), pts.end());
  pts.insert(pts.begin(), start);
  pts.push_back(goal);

  // Greedy shortcutting, bounded so polynomial fitting stays well posed.
  std::vector<Vec2> pruned{pts.front()};
  size_t i = 0;
  while (i + 1 < pts.size()) {
    size_t best = i + 1;
    for (size_t j = pts.size() - 1; j > i + 1; --j) {
      if ((pts[j] - pts[i]).norm() > prm.prune_max_leg) continue;
      if (!world::first_intersection(pts[i], pts[j], m, prm.inflation)) {
        best = j;
        break;
      }
    }
    if ((pts[best] - pruned.back()).norm() > 1e-9) pruned.push_back(pts[best]);
    i = best;
  }

  for (size_t k = 1; k < pruned.size(); ++k) {
    PlanSegment seg{SegmentKind::free_flight, pruned[k], {}, -1};
    if (k + 1 == pruned.size()) seg.speed = 0.0;
    plan.segments.push_back(seg);
  }
  plan.plan_time_ms = ms_since(t0);
  return plan;
}

Plan rrt_star_plan(const Vec2& start, const Vec2& goal, const world::Map& m,
                   const RrtStarParams& prm, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Plan plan;
  plan.planner = "rrt_star";

  struct Node {
    Vec2 p;
    int parent;
    double edge;
  };
  std::vector<Node> nodes{{start, -1, 0}};
  auto cost_of = [&](int i) {
    double c = 0;
    while (i > 0) {
      c += nodes[i].edge;
      i = nodes[i].parent;
    }
    return c;
  };
  auto clear_line = [&](const Vec2& a, const Vec2& b) {
    return !world::first_intersection(a, b, m, prm.inflation);
  };

  Rng rng(seed);
  for (int it = 0; it < prm.max_iters; ++it) {
    Vec2 sample;
    if (rng.uniform01() < prm.goal_bias)
      sample = goal;
    else
      sample = Vec2(rng.uniform(m.xmin, m.xmax), rng.uniform(m.ymin, m.ymax));

    int nearest = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i].p - sample).norm();
      if (d < dmin) {
        dmin = d;
        nearest = static_cast<int>(i);
      }
    }
    if (dmin < 1e-9) continue;
    const Vec2 x_new =
        nodes[nearest].p + std::min(prm.step, dmin) * (sample - nodes[nearest].p) / dmin;
    if (!m.contains(x_new) || !point_free(x_new, m, prm.inflation)) continue;
    if (!clear_line(nodes[nearest].p, x_new)) continue;

    // Choose the cheapest reachable parent in the rewire ball.
    int parent = nearest;
    double parent_cost = cost_of(nearest) + (nodes[nearest].p - x_new).norm();
    std::vector<int> near;
    for (size_t i = 0; i < nodes.size(); ++i)
      if ((nodes[i].p - x_new).norm() <= prm.rewire_radius) near.push_back(static_cast<int>(i));
    for (int i : near) {
      if (i == nearest) continue;
      const double c = cost_of(i) + (nodes[i].p - x_new).norm();
      if (c < parent_cost - 1e-12 && clear_line(nodes[i].p, x_new)) {
        parent = i;
        parent_cost = c;
      }
    }
    nodes.push_back(Node{x_new, parent, (nodes[parent].p - x_new).norm()});
    const int new_idx = static_cast<int>(nodes.size()) - 1;

    // Rewire neighbours through the new node where that shortens them.
    for (int i : near) {
      if (i == parent || i == 0) continue;
      const double through = parent_cost + (nodes[i].p - x_new).norm();
      if (through < cost_of(i) - 1e-12 && clear_line(x_new, nodes[i].p)) {
        nodes[i].parent = new_idx;
        nodes[i].edge = (nodes[i].p - x_new).norm();
      }
    }
  }
  plan.work = static_cast<std::uint64_t>(prm.max_iters);

  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nodes.size(); ++i) {
    const double d = (nodes[i].p - goal).norm();
    if (d > prm.step) continue;
    const double c = cost_of(static_cast<int>(i)) + d;
    if (c < best_cost - 1e-12 && clear_line(nodes[i].p, goal)) {
      best_cost = c;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw PlanningError("rrt_star_plan: no goal-reaching branch");

  std::vector<Vec2> pts;
  for (int i = best; i != -1; i = nodes[i].parent) pts.push_back(nodes[i].p);
  std::reverse(pts.begin(), pts.end());
  pts.push_back(goal);

  // Split long legs so time allocation keeps the profile inside the caps.
  std::vector<Vec2> wps{pts.front()};
  for (size_t k = 1; k < pts.size(); ++k) {
    const Vec2 a = pts[k - 1], b = pts[k];
    const double L = (b - a).norm();
    if (L < 1e-9) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil(L / prm.max_leg)));
    for (int q = 1; q <= pieces; ++q) wps.push_back(a + (b - a) * (double(q) / pieces));
  }
  for (size_t k = 1; k < wps.size(); ++k) {
    PlanSegment seg{SegmentKind::free_flight, wps[k], {}, -1};
    if (k + 1 == wps.size()) seg.speed = 0.0;
    plan.segments.push_back(seg);
  }
  plan.plan_time_ms = ms_since(t0);
  return plan;
}

}  // namespace cpnav::planners
