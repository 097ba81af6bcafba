#pragma once

#include "trussred/model.hpp"

#include <optional>
#include <string>

namespace trussred {

struct RenderOptions {
  double width_px = 800.0;
  double max_stroke_px = 14.0;     // stroke of the largest member
  double min_stroke_px = 0.05;     // thinner members are not drawn
  std::optional<DamageScenario> scenario;  // damaged members are omitted
};

/// SVG drawing of a design: stroke width proportional to area, supports as
/// triangles, dead loads in grey and reference loads in red. Output depends
/// only on the inputs.
std::string render_svg(const GroundStructure& gs, const Vec& areas, const RenderOptions& opts = {});

}  // namespace trussred
