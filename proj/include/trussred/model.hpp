#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trussred {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown for malformed ground structures, designs and scenarios.
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Node {
  int id = 0;
  std::array<double, 2> position{0.0, 0.0};  // mm
  bool fixed_x = false;
  bool fixed_y = false;
};

struct Member {
  int id = 0;
  int end_a = 0;
  int end_b = 0;
  double length = 0.0;                   // mm
  std::array<double, 2> cosines{0, 0};   // unit direction from end_a to end_b
};

/// Point load applied at a node, in N.
struct NodalLoad {
  int node = 0;
  double fx = 0.0;
  double fy = 0.0;
};

/// Plane truss ground structure with dead and reference load cases.
///
/// Units are N, mm and MPa throughout, so that yield_stress * area is a
/// force in N and load factors are dimensionless. Loads are stored both as
/// the nodal list they were given in and as assembled vectors over the free
/// degrees of freedom.
class GroundStructure {
public:
  GroundStructure(std::vector<Node> nodes,
                  std::vector<std::array<int, 2>> member_ends,
                  std::vector<NodalLoad> dead_loads,
                  std::vector<NodalLoad> reference_loads,
                  double yield_stress);

  int num_members() const { return static_cast<int>(members_.size()); }
  int num_dofs() const { return num_dofs_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Member>& members() const { return members_; }
  const std::vector<NodalLoad>& dead_loads() const { return dead_list_; }
  const std::vector<NodalLoad>& reference_loads() const { return reference_list_; }

  double yield_stress() const { return yield_stress_; }
  const Vec& dead_load() const { return dead_; }
  const Vec& reference_load() const { return reference_; }

  /// Member lengths c (mm).
  const Vec& lengths() const { return lengths_; }

  /// Equilibrium matrix, d x m; column i is b_i.
  const Mat& equilibrium() const { return equilibrium_; }

  /// Free-DOF index of (node, direction), or -1 when that direction is fixed.
  int dof(int node, int direction) const { return dof_map_[2 * node + direction]; }

private:
  Vec assemble_load(const std::vector<NodalLoad>& loads) const;

  std::vector<Node> nodes_;
  std::vector<Member> members_;
  std::vector<NodalLoad> dead_list_;
  std::vector<NodalLoad> reference_list_;
  std::vector<int> dof_map_;
  int num_dofs_ = 0;
  double yield_stress_ = 0.0;
  Vec dead_;
  Vec reference_;
  Vec lengths_;
  Mat equilibrium_;
};

/// Member cross-sectional areas (mm^2) with the volume budget they must respect.
struct Design {
  Vec areas;
  double volume_budget = 0.0;  // mm^3
};

/// Binary soundness pattern plus a uniform residual-stiffness fraction.
///
/// intact[i] == false means member i is damaged; a damaged member keeps
/// gamma times its area (gamma == 0 removes it).
struct DamageScenario {
  std::vector<bool> intact;
  double gamma = 0.0;

  static DamageScenario from_damaged(int num_members, const std::vector<int>& damaged,
                                     double gamma = 0.0);
  std::vector<int> damaged() const;
  int num_damaged() const;
};

/// The m columns b_i of the equilibrium matrix.
std::vector<Vec> equilibrium_columns(const GroundStructure& gs);

/// Realized areas diag(t + gamma (1 - t)) x.
Vec apply_scenario(const Vec& areas, const DamageScenario& scenario);

/// c^T x in mm^3.
double volume(const Vec& areas, const GroundStructure& gs);

enum class BuiltinExample { I, II };

BuiltinExample parse_example_name(std::string_view name);
std::string example_name(BuiltinExample which);

struct Instance {
  GroundStructure structure;
  Design design;
};

/// The 19-member, 3-bay cantilever truss used by both built-in examples.
///
/// Nodes sit on a 4 x 2 grid with spacing L = 1000 mm; the two left nodes are
/// pinned. Members are ordered: bottom chords, top chords, verticals,
/// single-bay diagonals (rising then falling, per bay), two-bay diagonals,
/// each left to right. Example I carries a 50 kN dead load at both right
/// nodes, pointing toward the supports (-x), and a 10 kN downward reference
/// load at the upper right node;
/// example II carries only a 50 kN horizontal reference load at both right
/// nodes. Initial areas are 1000 mm^2 and V = c^T x0.
Instance builtin_example(BuiltinExample which);

}  // namespace trussred
