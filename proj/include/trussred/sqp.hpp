#pragma once

#include "trussred/model.hpp"
#include "trussred/worstcase.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trussred::sqp {

enum class BfgsDenominator {
  Paper,         // r r^T / (s^T s)
  Conventional,  // r r^T / (s^T r)
};

const char* to_string(BfgsDenominator d);

/// Derivative-free SQP parameters. Defaults are the values used for the
/// built-in examples.
struct SqpConfig {
  double radius = 100.0;         // initial stencil radius, mm^2
  double radius_min = 1e-4;      // mm^2
  double eps_direction = 5e-4;   // terminate when ||d_k|| drops below this, mm^2
  double rho = 0.75;             // radius reduction factor
  double eta = 0.01;             // Armijo constant
  double beta = 0.8;             // backtracking factor
  int tau_max = 50;
  double eps_repair = 1e-6;      // floor for repaired sample areas, mm^2
  double b0_scale = 1.0;         // B_0 = b0_scale * I
  BfgsDenominator bfgs = BfgsDenominator::Paper;
  int max_iterations = 100000;   // safety net on step-1 visits
  /// On PD loss in paper mode, reset B to B_0 and continue conventionally
  /// instead of throwing.
  bool switch_on_pd_loss = false;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double radius = 0.0;
  double f = 0.0;
  double d_norm = 0.0;  // NaN when no QP was solved on this visit
  double step = 0.0;    // accepted step length, 0 if none
  bool stencil_failure = false;
  bool line_search_failure = false;
  long lp_count = 0;    // cumulative
};

enum class Termination { RadiusBelowMin, DirectionNormBelowEps, IterationLimit };

const char* to_string(Termination t);

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  int tau = -1;
  double f_new = 0.0;
  int evaluations = 0;
};

/// Backtracking on a = beta^tau, tau = 0..tau_max, accepting the first
/// f(x + a d) <= f(x) + eta a g^T d.
LineSearchResult armijo_search(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& d,
                               const Eigen::VectorXd& g, double eta, double beta, int tau_max);

struct BfgsUpdate {
  Eigen::MatrixXd B;
  double theta = 1.0;
  bool skipped = false;
};

/// Damped BFGS update (Powell damping with the 0.2 / 0.8 constants). The
/// result is symmetrized. When s^T B s < 1e-14 the update is skipped.
BfgsUpdate damped_bfgs(const Eigen::MatrixXd& B, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& y, BfgsDenominator mode);

/// Raised when the Hessian approximation stops being positive definite.
class PositiveDefinitenessLost : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when the objective is infinite at the starting point.
class InfeasibleStart : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// min f(x) s.t. c^T x <= V, x >= 0 with c > 0.
struct Problem {
  std::function<double(const Eigen::VectorXd&)> objective;
  Eigen::VectorXd c;
  double volume_budget = 0.0;
  /// Cumulative LP count reported in the trace; optional.
  std::function<long()> lp_counter;
};

struct RunStats {
  int qp_solves = 0;
  long objective_evaluations = 0;
  int line_search_failures = 0;
  int stencil_failures = 0;
  int bfgs_skips = 0;
  int bfgs_switch_iteration = -1;  // accepted steps before the switch, -1 if none
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double final_radius = 0.0;
  int iterations = 0;  // accepted steps
  Termination termination = Termination::RadiusBelowMin;
  std::vector<IterationRecord> trace;
  RunStats stats;
};

/// Stencil-gradient SQP with implicit-filtering radius control.
///
/// Each step-1 visit samples x_k +/- r delta_i on the volume hyperplane,
/// shrinks r when no sample beats f(x_k), otherwise solves the QP
/// subproblem with the stencil gradient and backtracks along its solution.
/// A failed line search resets B to B_0 and shrinks r. The BFGS pair for an
/// accepted step uses the stencil gradient at x_{k+1}, so the update is
/// applied once that gradient exists, at the next visit.
MinimizeResult minimize(const Problem& problem, const Eigen::VectorXd& x0, const SqpConfig& cfg);

struct RunResult {
  Design design;
  WorstCaseResult worst;
  MinimizeResult run;
  long lp_count = 0;
  long worst_case_evaluations = 0;  // cache misses
  BfgsDenominator bfgs_used = BfgsDenominator::Paper;
  bool fell_back = false;  // paper mode lost PD and the run went on conventionally
};

/// Maximizes the worst-case limit load factor at damage level alpha.
/// Throws InfeasibleStart when the start design is already unstable.
RunResult run(const GroundStructure& gs, int alpha, double gamma, const Design& x0,
              const SqpConfig& cfg, const WorstCaseOptions& wc = {});

/// As run() with switch_on_pd_loss set: a paper-mode run that loses positive
/// definiteness continues from its current iterate in conventional mode.
RunResult run_with_fallback(const GroundStructure& gs, int alpha, double gamma, const Design& x0,
                            const SqpConfig& cfg, const WorstCaseOptions& wc = {});

/// CSV with header k,r,f,d_norm,step,lp_count.
std::string trace_csv(const std::vector<IterationRecord>& trace);

}  // namespace trussred::sqp
