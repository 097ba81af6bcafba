#pragma once

#include "trussred/model.hpp"

#include <random>

namespace testing {

using trussred::GroundStructure;
using trussred::Vec;

// One horizontal bar from a pinned node to a node on a roller that is free
// in x only; reference load 1 kN along the bar, no dead load.
inline GroundStructure single_bar(double ref_fx = 1000.0, double dead_fx = 0.0) {
  std::vector<trussred::Node> nodes = {{0, {0.0, 0.0}, true, true}, {1, {2000.0, 0.0}, false, true}};
  std::vector<trussred::NodalLoad> dead;
  if (dead_fx != 0.0) dead.push_back({1, dead_fx, 0.0});
  return GroundStructure(nodes, {{0, 1}}, dead, {{1, ref_fx, 0.0}}, 250.0);
}

// Node 1 at (2000, 0) hangs from a horizontal bar to a pin at the origin and
// a vertical bar to a pin at (2000, 1000). The reference load pulls along the
// horizontal bar; the dead load hangs on the vertical one.
inline GroundStructure two_bar(double ref_fx = 1000.0, double dead_fy = -4000.0) {
  std::vector<trussred::Node> nodes = {{0, {0.0, 0.0}, true, true},
                                       {1, {2000.0, 0.0}, false, false},
                                       {2, {2000.0, 1000.0}, true, true}};
  std::vector<trussred::NodalLoad> dead;
  if (dead_fy != 0.0) dead.push_back({1, 0.0, dead_fy});
  return GroundStructure(nodes, {{0, 1}, {2, 1}}, dead, {{1, ref_fx, 0.0}}, 250.0);
}

inline Vec uniform(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace testing
