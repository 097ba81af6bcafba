#include "trussred/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace trussred {

GroundStructure::GroundStructure(std::vector<Node> nodes,
                                 std::vector<std::array<int, 2>> member_ends,
                                 std::vector<NodalLoad> dead_loads,
                                 std::vector<NodalLoad> reference_loads,
                                 double yield_stress)
    : nodes_(std::move(nodes)),
      dead_list_(std::move(dead_loads)),
      reference_list_(std::move(reference_loads)),
      yield_stress_(yield_stress) {
  if (!(yield_stress_ > 0.0) || !std::isfinite(yield_stress_)) {
    throw ModelError("yield stress must be positive and finite");
  }
  const int n = static_cast<int>(nodes_.size());
  for (int i = 0; i < n; ++i) {
    if (nodes_[i].id != i) {
      throw ModelError("node ids must be dense from 0; node at position " + std::to_string(i) +
                       " has id " + std::to_string(nodes_[i].id));
    }
    if (!std::isfinite(nodes_[i].position[0]) || !std::isfinite(nodes_[i].position[1])) {
      throw ModelError("node " + std::to_string(i) + " has a non-finite position");
    }
  }

  dof_map_.assign(2 * n, -1);
  for (int i = 0; i < n; ++i) {
    if (!nodes_[i].fixed_x) dof_map_[2 * i] = num_dofs_++;
    if (!nodes_[i].fixed_y) dof_map_[2 * i + 1] = num_dofs_++;
  }

  std::set<std::pair<int, int>> seen;
  members_.reserve(member_ends.size());
  for (std::size_t k = 0; k < member_ends.size(); ++k) {
    const auto [a, b] = member_ends[k];
    const std::string tag = "member " + std::to_string(k);
    if (a < 0 || a >= n || b < 0 || b >= n) throw ModelError(tag + " references a missing node");
    if (a == b) throw ModelError(tag + " connects a node to itself");
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
      throw ModelError(tag + " duplicates an existing node pair");
    }
    const double dx = nodes_[b].position[0] - nodes_[a].position[0];
    const double dy = nodes_[b].position[1] - nodes_[a].position[1];
    const double len = std::hypot(dx, dy);
    if (!(len > 0.0)) throw ModelError(tag + " has zero length");
    members_.push_back(Member{static_cast<int>(k), a, b, len, {dx / len, dy / len}});
  }

  const int m = num_members();
  lengths_.resize(m);
  equilibrium_ = Mat::Zero(num_dofs_, m);
  for (int i = 0; i < m; ++i) {
    const Member& mem = members_[i];
    lengths_[i] = mem.length;
    for (int dir = 0; dir < 2; ++dir) {
      if (int j = dof(mem.end_a, dir); j >= 0) equilibrium_(j, i) -= mem.cosines[dir];
      if (int j = dof(mem.end_b, dir); j >= 0) equilibrium_(j, i) += mem.cosines[dir];
    }
  }

  dead_ = assemble_load(dead_list_);
  reference_ = assemble_load(reference_list_);
}

Vec GroundStructure::assemble_load(const std::vector<NodalLoad>& loads) const {
  Vec p = Vec::Zero(num_dofs_);
  for (const NodalLoad& l : loads) {
    if (l.node < 0 || l.node >= static_cast<int>(nodes_.size())) {
      throw ModelError("load references missing node " + std::to_string(l.node));
    }
    if (!std::isfinite(l.fx) || !std::isfinite(l.fy)) {
      throw ModelError("load at node " + std::to_string(l.node) + " is not finite");
    }
    const double f[2] = {l.fx, l.fy};
    for (int dir = 0; dir < 2; ++dir) {
      if (f[dir] == 0.0) continue;
      const int j = dof(l.node, dir);
      // Loads on a support are reacted directly and never enter equilibrium.
      if (j >= 0) p[j] += f[dir];
    }
  }
  return p;
}

DamageScenario DamageScenario::from_damaged(int num_members, const std::vector<int>& damaged,
                                            double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ModelError("damage degree must lie in [0, 1)");
  DamageScenario s;
  s.intact.assign(num_members, true);
  s.gamma = gamma;
  for (int i : damaged) {
    if (i < 0 || i >= num_members) throw ModelError("damaged member index out of range");
    s.intact[i] = false;
  }
  return s;
}

std::vector<int> DamageScenario::damaged() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < intact.size(); ++i)
    if (!intact[i]) out.push_back(static_cast<int>(i));
  return out;
}

int DamageScenario::num_damaged() const {
  return static_cast<int>(std::count(intact.begin(), intact.end(), false));
}

std::vector<Vec> equilibrium_columns(const GroundStructure& gs) {
  std::vector<Vec> cols;
  cols.reserve(gs.num_members());
  for (int i = 0; i < gs.num_members(); ++i) cols.emplace_back(gs.equilibrium().col(i));
  return cols;
}

Vec apply_scenario(const Vec& areas, const DamageScenario& scenario) {
  if (static_cast<Eigen::Index>(scenario.intact.size()) != areas.size()) {
    throw ModelError("scenario size does not match the number of members");
  }
  Vec out = areas;
  for (Eigen::Index i = 0; i < areas.size(); ++i)
    if (!scenario.intact[i]) out[i] = scenario.gamma * areas[i];
  return out;
}

double volume(const Vec& areas, const GroundStructure& gs) {
  if (areas.size() != gs.num_members()) throw ModelError("design size does not match members");
  return gs.lengths().dot(areas);
}

BuiltinExample parse_example_name(std::string_view name) {
  if (name == "I" || name == "1") return BuiltinExample::I;
  if (name == "II" || name == "2") return BuiltinExample::II;
  throw ModelError("unknown built-in example '" + std::string(name) + "' (expected I or II)");
}

std::string example_name(BuiltinExample which) { return which == BuiltinExample::I ? "I" : "II"; }

Instance builtin_example(BuiltinExample which) {
  constexpr double L = 1000.0;
  constexpr double kN = 1000.0;
  // Node id = row * 4 + column; row 0 is the bottom chord.
  auto id = [](int col, int row) { return row * 4 + col; };

  std::vector<Node> nodes;
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 4; ++col) {
      const bool support = col == 0;
      nodes.push_back(Node{id(col, row), {col * L, row * L}, support, support});
    }
  }

  std::vector<std::array<int, 2>> ends;
  for (int col = 0; col < 3; ++col) ends.push_back({id(col, 0), id(col + 1, 0)});
  for (int col = 0; col < 3; ++col) ends.push_back({id(col, 1), id(col + 1, 1)});
  for (int col = 1; col < 4; ++col) ends.push_back({id(col, 0), id(col, 1)});
  for (int col = 0; col < 3; ++col) {
    ends.push_back({id(col, 0), id(col + 1, 1)});
    ends.push_back({id(col, 1), id(col + 1, 0)});
  }
  for (int col = 0; col < 2; ++col) {
    ends.push_back({id(col, 0), id(col + 2, 1)});
    ends.push_back({id(col, 1), id(col + 2, 0)});
  }

  std::vector<NodalLoad> dead, reference;
  if (which == BuiltinExample::I) {
    // Dead load points toward the supports; the optimized load factors
    // single out this orientation relative to the downward reference load.
    dead = {{id(3, 0), -50 * kN, 0.0}, {id(3, 1), -50 * kN, 0.0}};
    reference = {{id(3, 1), 0.0, -10 * kN}};
  } else {
    reference = {{id(3, 0), 50 * kN, 0.0}, {id(3, 1), 50 * kN, 0.0}};
  }

  GroundStructure gs(std::move(nodes), std::move(ends), std::move(dead), std::move(reference),
                     200.0);
  Design design{Vec::Constant(gs.num_members(), 1000.0), 0.0};
  design.volume_budget = volume(design.areas, gs);
  return Instance{std::move(gs), std::move(design)};
}

}  // namespace trussred
