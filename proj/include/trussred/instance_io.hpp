#pragma once

#include "trussred/model.hpp"

#include <filesystem>
#include <string>

namespace trussred {

/// Malformed instance text; the message names the offending field.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Instance files are JSON:
//
//   {
//     "nodes":   [{"id": 0, "x_mm": 0, "y_mm": 0, "fixed_x": true, "fixed_y": true}, ...],
//     "members": [{"id": 0, "a": 0, "b": 1}, ...],
//     "loads":   {"dead":      [{"node": 3, "fx_N": 50000, "fy_N": 0}],
//                 "reference": [{"node": 7, "fx_N": 0, "fy_N": -10000}]},
//     "yield_stress_mpa": 200,
//     "volume_budget_mm3": 2.6429553e7,
//     "initial_areas_mm2": [1000, ...]
//   }
//
// Member ids must equal their position in the list. Designs written by the
// tools reuse the same schema, carrying the optimized areas in
// initial_areas_mm2.

Instance parse_instance(const std::string& text);
Instance load_instance(const std::filesystem::path& path);

/// Serializes with full round-trip precision (17 significant digits).
std::string dump_instance(const GroundStructure& gs, const Design& design);
void save_instance(const std::filesystem::path& path, const GroundStructure& gs,
                   const Design& design);

}  // namespace trussred
