#include "trussred/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace trussred {

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid "-0.000".
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

}  // namespace

std::string render_svg(const GroundStructure& gs, const Vec& areas, const RenderOptions& opts) {
  if (areas.size() != gs.num_members()) throw ModelError("area vector size does not match members");
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const Node& n : gs.nodes()) {
    xmin = std::min(xmin, n.position[0]);
    xmax = std::max(xmax, n.position[0]);
    ymin = std::min(ymin, n.position[1]);
    ymax = std::max(ymax, n.position[1]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1.0});
  const double margin = 0.25 * span;
  const double scale = opts.width_px / (xmax - xmin + 2 * margin);
  const double height = (ymax - ymin + 2 * margin) * scale;
  auto px = [&](double x) { return (x - xmin + margin) * scale; };
  auto py = [&](double y) { return (ymax - y + margin) * scale; };

  const double amax = areas.size() ? areas.maxCoeff() : 0.0;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(opts.width_px) +
         "\" height=\"" + fixed(height) + "\" viewBox=\"0 0 " + fixed(opts.width_px) + " " +
         fixed(height) + "\">\n";
  out += "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" "
         "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">"
         "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"context-stroke\"/></marker></defs>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out += "<g id=\"members\" stroke=\"black\" stroke-linecap=\"round\">\n";
  for (const Member& m : gs.members()) {
    if (opts.scenario && !opts.scenario->intact.at(m.id)) continue;
    const double w = amax > 0.0 ? opts.max_stroke_px * areas[m.id] / amax : 0.0;
    if (w < opts.min_stroke_px) continue;
    const Node& a = gs.nodes()[m.end_a];
    const Node& b = gs.nodes()[m.end_b];
    out += "<line id=\"m" + std::to_string(m.id) + "\" x1=\"" + fixed(px(a.position[0])) +
           "\" y1=\"" + fixed(py(a.position[1])) + "\" x2=\"" + fixed(px(b.position[0])) +
           "\" y2=\"" + fixed(py(b.position[1])) + "\" stroke-width=\"" + fixed(w) + "\"/>\n";
  }
  out += "</g>\n";

  const double tri = 0.04 * span * scale;
  out += "<g id=\"supports\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\">\n";
  for (const Node& n : gs.nodes()) {
    if (!n.fixed_x && !n.fixed_y) continue;
    const double x = px(n.position[0]), y = py(n.position[1]);
    out += "<path d=\"M " + fixed(x) + " " + fixed(y) + " L " + fixed(x - tri) + " " +
           fixed(y + tri) + " L " + fixed(x - tri) + " " + fixed(y - tri) + " Z\"/>\n";
  }
  out += "</g>\n";

  auto arrows = [&](const std::vector<NodalLoad>& loads, const char* id, const char* color) {
    double fmax = 0.0;
    for (const NodalLoad& l : loads) fmax = std::max(fmax, std::hypot(l.fx, l.fy));
    out += std::string("<g id=\"") + id + "\" stroke=\"" + color +
           "\" stroke-width=\"2\" marker-end=\"url(#arrow)\">\n";
    for (const NodalLoad& l : loads) {
      const double f = std::hypot(l.fx, l.fy);
      if (f == 0.0 || fmax == 0.0) continue;
      const double len = 0.2 * span * scale * f / fmax;
      const Node& n = gs.nodes()[l.node];
      const double x = px(n.position[0]), y = py(n.position[1]);
      const double ux = l.fx / f, uy = -l.fy / f;
      out += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(x + len * ux) +
             "\" y2=\"" + fixed(y + len * uy) + "\"/>\n";
    }
    out += "</g>\n";
  };
  arrows(gs.dead_loads(), "dead_loads", "#666666");
  arrows(gs.reference_loads(), "reference_loads", "#c0392b");

  out += "<g id=\"nodes\" fill=\"black\">\n";
  for (const Node& n : gs.nodes()) {
    out += "<circle cx=\"" + fixed(px(n.position[0])) + "\" cy=\"" + fixed(py(n.position[1])) +
           "\" r=\"3\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace trussred
