#pragma once

#include "trussred/lp.hpp"
#include "trussred/model.hpp"

#include <limits>

namespace trussred {

enum class LimitStatus { Optimal, MechanismOrOverload, Unbounded };

const char* to_string(LimitStatus s);

/// Lower-bound plastic limit analysis outcome.
///
/// MechanismOrOverload means the dead load alone cannot be equilibrated
/// within the member capacities; lambda is then -inf so it orders below any
/// finite load factor. Unbounded reports lambda = +inf.
struct LimitResult {
  LimitStatus status = LimitStatus::Optimal;
  double lambda = 0.0;
  Vec forces;  // N, valid when Optimal
  /// Optimal LP basis, a warm start for the same structure with other areas.
  lp::LpBasis basis;
};

/// Areas below this are treated as zero capacity.
inline constexpr double kVanishingArea = 1e-12;

/// max lambda  s.t.  sum_i q_i b_i = lambda p_r + p_d,  |q_i| <= sigma_y a_i.
LimitResult limit_load_factor(const GroundStructure& gs, const Vec& areas,
                              const lp::LpOptions& options = {},
                              const lp::LpBasis* warm = nullptr);

struct LimitDesign {
  Design design;
  double lambda = 0.0;
  Vec forces;
  bool statically_determinate = false;
};

/// Plastic (limit) design: maximize lambda over (lambda, q, x) subject to
/// equilibrium, |q_i| <= sigma_y x_i, c^T x <= V and x >= 0, as one LP.
/// Throws std::runtime_error when the LP is infeasible or unbounded.
LimitDesign classical_limit_design(const GroundStructure& gs, double volume_budget,
                                   const lp::LpOptions& options = {});

/// True when the equilibrium columns of the members with area above tol are
/// linearly independent: member forces follow from equilibrium alone and
/// losing any member leaves the load without an equilibrium path.
bool statically_determinate(const GroundStructure& gs, const Vec& areas,
                            double tol = kVanishingArea);

/// Number of members with area above tol.
int count_members(const Vec& areas, double tol = kVanishingArea);

}  // namespace trussred
