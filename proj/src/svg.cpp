#include "cpnav/svg.hpp"

#include <cstdio>
#include <fstream>

namespace cpnav::harness {

namespace {

const char* kTraceColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void write_map_svg(const world::Map& m, const std::vector<std::vector<TraceRow>>& traces,
                   double inflation, const std::string& path) {
  const double pad = 0.3;
  const double w = m.xmax - m.xmin + 2 * pad, h = m.ymax - m.ymin + 2 * pad;
  const double scale = 800.0 / std::max(w, h);
  auto X = [&](double x) { return (x - m.xmin + pad) * scale; };
  auto Y = [&](double y) { return (m.ymax + pad - y) * scale; };  // y up

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w * scale)
      << "\" height=\"" << num(h * scale) << "\" viewBox=\"0 0 " << num(w * scale) << " "
      << num(h * scale) << "\">\n";
  out << "<rect x=\"" << num(X(m.xmin)) << "\" y=\"" << num(Y(m.ymax)) << "\" width=\""
      << num((m.xmax - m.xmin) * scale) << "\" height=\"" << num((m.ymax - m.ymin) * scale)
      << "\" fill=\"#fafafa\" stroke=\"#333\"/>\n";

  for (const auto& o : m.obstacles) {
    out << "<circle cx=\"" << num(X(o.center.x())) << "\" cy=\"" << num(Y(o.center.y()))
        << "\" r=\"" << num((o.radius + inflation) * scale)
        << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    out << "<circle cx=\"" << num(X(o.center.x())) << "\" cy=\"" << num(Y(o.center.y()))
        << "\" r=\"" << num(o.radius * scale) << "\" fill=\"#777\"/>\n";
  }
  for (const auto& wall : m.walls)
    out << "<line x1=\"" << num(X(wall.a.x())) << "\" y1=\"" << num(Y(wall.a.y()))
        << "\" x2=\"" << num(X(wall.b.x())) << "\" y2=\"" << num(Y(wall.b.y()))
        << "\" stroke=\"#333\" stroke-width=\"4\"/>\n";

  for (size_t k = 0; k < traces.size(); ++k) {
    const auto& tr = traces[k];
    if (tr.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << kTraceColors[k % 10]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& row : tr)
      out << num(X(row.r.x())) << "," << num(Y(row.r.y())) << " ";
    out << "\"/>\n";
  }

  out << "<circle cx=\"" << num(X(m.start.x())) << "\" cy=\"" << num(Y(m.start.y()))
      << "\" r=\"5\" fill=\"#2ca02c\"/>\n";
  out << "<circle cx=\"" << num(X(m.goal.x())) << "\" cy=\"" << num(Y(m.goal.y()))
      << "\" r=\"5\" fill=\"#d62728\"/>\n";
  out << "</svg>\n";
}

}  // namespace cpnav::harness
