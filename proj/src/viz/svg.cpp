#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "latentplan/viz.hpp"

namespace lp::viz {

namespace {

constexpr double kWidth = 720, kHeight = 540, kMargin = 40;
constexpr const char* kCaveat =
    "The axis arrow is the 2D projection of the advantage direction and does not show its true geometry.";

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// t in [0, 1]: 0 blue (Black favoured), 0.5 grey, 1 red (White favoured).
std::string ramp(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  const double blue[3] = {33, 102, 172}, grey[3] = {247, 247, 247}, red[3] = {178, 24, 43};
  const double* a = t < 0.5 ? blue : grey;
  const double* b = t < 0.5 ? grey : red;
  const double u = t < 0.5 ? t / 0.5 : (t - 0.5) / 0.5;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(a[0] + u * (b[0] - a[0]))),
                static_cast<int>(std::lround(a[1] + u * (b[1] - a[1]))),
                static_cast<int>(std::lround(a[2] + u * (b[2] - a[2]))));
  return buf;
}

struct Canvas {
  double x0, x1, y0, y1;

  static Canvas fit(const std::vector<std::array<double, 2>>& pts) {
    Canvas c{0, 0, 0, 0};
    bool first = true;
    for (const auto& p : pts) {
      if (first) c = {p[0], p[0], p[1], p[1]};
      first = false;
      c.x0 = std::min(c.x0, p[0]);
      c.x1 = std::max(c.x1, p[0]);
      c.y0 = std::min(c.y0, p[1]);
      c.y1 = std::max(c.y1, p[1]);
    }
    const double pad = 0.05 * std::max({c.x1 - c.x0, c.y1 - c.y0, 1e-9});
    return {c.x0 - pad, c.x1 + pad, c.y0 - pad, c.y1 + pad};
  }
  double sx(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double sy(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void header(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<title>" << escape(title) << "</title>\n"
      << "<desc>" << kCaveat << "</desc>\n"
      << "<defs>\n"
      << "<marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
         "orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555555\"/></marker>\n"
      << "<marker id=\"axis-head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"8\" "
         "markerHeight=\"8\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" "
         "fill=\"#000000\"/></marker>\n"
      << "</defs>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

// Axis arrow from the reference mean (projected origin), scaled to a third
// of the plotted extent.
std::array<double, 2> axis_tip(const Projection& projection, const plan::AdvantageAxis& axis,
                               const std::vector<std::array<double, 2>>& pts) {
  auto d = projection.project_direction(axis.a);
  double extent = 1e-9;
  for (const auto& p : pts) extent = std::max(extent, std::hypot(p[0], p[1]));
  const double len = std::hypot(d[0], d[1]);
  if (len < 1e-12) return {0, 0};
  return {d[0] / len * extent / 3, d[1] / len * extent / 3};
}

void draw_axis(std::ostream& out, const Canvas& c, const std::array<double, 2>& tip) {
  out << "<line x1=\"" << num(c.sx(0)) << "\" y1=\"" << num(c.sy(0)) << "\" x2=\"" << num(c.sx(tip[0]))
      << "\" y2=\"" << num(c.sy(tip[1])) << "\" stroke=\"#000000\" stroke-width=\"2.5\" "
      << "marker-end=\"url(#axis-head)\"/>\n"
      << "<text x=\"" << num(c.sx(tip[0]) + 6) << "\" y=\"" << num(c.sy(tip[1]) - 6)
      << "\" font-family=\"sans-serif\" font-size=\"12\">advantage axis (projected)</text>\n";
}

}  // namespace

void write_trajectory_tsv(std::ostream& out, std::span<const TrajectoryPoint> points) {
  out << "# " << kCaveat << "\n";
  out << "ply\tfen\tx\ty\tscore\tp_white\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g", p.x, p.y, p.score);
    out << p.ply << '\t' << p.fen << '\t' << buf << '\t';
    if (p.p_white) {
      std::snprintf(buf, sizeof buf, "%.6g", *p.p_white);
      out << buf;
    }
    out << '\n';
  }
}

void write_trajectory_svg(std::ostream& out, std::span<const TrajectoryPoint> points, const Projection& projection,
                          const plan::AdvantageAxis& axis, const std::string& title) {
  std::vector<std::array<double, 2>> pts;
  for (const auto& p : points) pts.push_back({p.x, p.y});
  auto tip = axis_tip(projection, axis, pts);
  auto all = pts;
  all.push_back({0, 0});
  all.push_back(tip);
  Canvas c = Canvas::fit(all);
  header(out, title);
  draw_axis(out, c, tip);
  for (std::size_t i = 1; i < points.size(); ++i)
    out << "<line x1=\"" << num(c.sx(pts[i - 1][0])) << "\" y1=\"" << num(c.sy(pts[i - 1][1])) << "\" x2=\""
        << num(c.sx(pts[i][0])) << "\" y2=\"" << num(c.sy(pts[i][1]))
        << "\" stroke=\"#555555\" stroke-width=\"1\" marker-end=\"url(#head)\"/>\n";
  for (const auto& p : points) {
    const double t = p.p_white ? *p.p_white : 0.5 * (p.score + 1);
    out << "<circle cx=\"" << num(c.sx(p.x)) << "\" cy=\"" << num(c.sy(p.y)) << "\" r=\"4\" fill=\"" << ramp(t)
        << "\" stroke=\"#333333\" stroke-width=\"0.5\"><title>ply " << p.ply << ": " << escape(p.fen)
        << "</title></circle>\n";
  }
  out << "</svg>\n";
}

void write_scatter_tsv(std::ostream& out, std::span<const ScatterPoint> points) {
  out << "# " << kCaveat << "\n";
  out << "x\ty\tp_white\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.6g\n", p.x, p.y, p.p_white);
    out << buf;
  }
}

void write_scatter_svg(std::ostream& out, std::span<const ScatterPoint> points, const Projection& projection,
                       const plan::AdvantageAxis& axis, const std::string& title) {
  std::vector<std::array<double, 2>> pts;
  for (const auto& p : points) pts.push_back({p.x, p.y});
  auto tip = axis_tip(projection, axis, pts);
  auto all = pts;
  all.push_back({0, 0});
  all.push_back(tip);
  Canvas c = Canvas::fit(all);
  header(out, title);
  for (const auto& p : points)
    out << "<circle cx=\"" << num(c.sx(p.x)) << "\" cy=\"" << num(c.sy(p.y)) << "\" r=\"2\" fill=\""
        << ramp(p.p_white) << "\" fill-opacity=\"0.7\"/>\n";
  draw_axis(out, c, tip);
  out << "</svg>\n";
}

}  // namespace lp::viz
