#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace trussred::lp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// maximize objective^T y  s.t.  A y = b,  lower <= y <= upper.
/// Bounds may be infinite; all other entries must be finite.
struct LpProblem {
  Vec objective;
  Mat A;
  Vec b;
  Vec lower;
  Vec upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

/// An optimal basis over the structural columns, usable as a warm start for
/// a problem with the same A, b and objective and different bounds.
struct LpBasis {
  std::vector<int> basic;      // column basic in each row
  std::vector<bool> at_upper;  // per column: nonbasic at its upper bound

  bool empty() const { return basic.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vec primal;
  double objective = 0.0;
  /// Equality multipliers y with objective = A^T y + reduced_costs at optimum.
  Vec duals;
  /// objective_j - A_j^T y; positive only at an upper bound, negative only at a lower one.
  Vec reduced_costs;
  int iterations = 0;
  /// Final basis when optimal and free of artificial columns, else empty.
  LpBasis basis;
};

struct LpOptions {
  double feas_tol = 1e-9;   // scaled by 1 + ||b||_inf
  double opt_tol = 1e-9;    // scaled by 1 + ||objective||_inf
  double pivot_tol = 1e-9;
  int stall_threshold = 50; // consecutive degenerate pivots before Bland's rule
  int max_iterations = 20000;
};

/// Raised on malformed input or numerical breakdown; a solve never reports a
/// wrong Optimal.
class LpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two-phase bounded-variable revised simplex on a dense basis.
///
/// Deterministic for identical input: Dantzig pricing with lowest-index
/// tie-breaking, switching to Bland's rule after stall_threshold consecutive
/// degenerate pivots until the next nondegenerate step.
///
/// With a warm basis that is dual feasible for the new bounds, the solve
/// starts with dual simplex pivots from it; a warm basis that is singular,
/// dual infeasible or slow to converge is dropped for the cold two-phase
/// start. Either way the answer is the same optimum.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {},
                    const LpBasis* warm = nullptr);

/// Plain-text dump for offline inspection:
///
///   LP <rows> <cols>
///   obj  c_1 ... c_n
///   lb   l_1 ... l_n        (-inf / inf allowed)
///   ub   u_1 ... u_n
///   row  a_i1 ... a_in = b_i   (one line per equality)
std::string dump_lp(const LpProblem& problem);

}  // namespace trussred::lp
