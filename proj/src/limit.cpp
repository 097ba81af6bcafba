#include "trussred/limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace trussred {

const char* to_string(LimitStatus s) {
  switch (s) {
    case LimitStatus::Optimal: return "optimal";
    case LimitStatus::MechanismOrOverload: return "mechanism_or_overload";
    case LimitStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

// Forces are expressed in units of this scale inside the LPs so that the
// load column, right-hand side and capacities are all of order one.
double force_scale(const GroundStructure& gs) {
  const double s = std::max(gs.reference_load().lpNorm<Eigen::Infinity>(),
                            gs.dead_load().lpNorm<Eigen::Infinity>());
  return s > 0.0 ? s : 1.0;
}

}  // namespace

LimitResult limit_load_factor(const GroundStructure& gs, const Vec& areas,
                              const lp::LpOptions& options, const lp::LpBasis* warm) {
  const int m = gs.num_members();
  const int d = gs.num_dofs();
  if (areas.size() != m) throw ModelError("area vector size does not match members");
  const double scale = force_scale(gs);

  // Variables: [lambda, q_1 .. q_m].
  lp::LpProblem p;
  p.objective = Vec::Zero(m + 1);
  p.objective[0] = 1.0;
  p.A.resize(d, m + 1);
  p.A.col(0) = -gs.reference_load() / scale;
  p.A.rightCols(m) = gs.equilibrium();
  p.b = gs.dead_load() / scale;
  p.lower.resize(m + 1);
  p.upper.resize(m + 1);
  p.lower[0] = -lp::kInf;
  p.upper[0] = lp::kInf;
  for (int i = 0; i < m; ++i) {
    if (!(areas[i] >= 0.0)) throw ModelError("areas must be nonnegative");
    const double cap = areas[i] < kVanishingArea ? 0.0 : gs.yield_stress() * areas[i] / scale;
    p.lower[i + 1] = -cap;
    p.upper[i + 1] = cap;
  }

  lp::LpSolution sol = lp::solve_lp(p, options, warm);
  LimitResult r;
  switch (sol.status) {
    case lp::LpStatus::Infeasible:
      r.status = LimitStatus::MechanismOrOverload;
      r.lambda = -std::numeric_limits<double>::infinity();
      break;
    case lp::LpStatus::Unbounded:
      r.status = LimitStatus::Unbounded;
      r.lambda = std::numeric_limits<double>::infinity();
      break;
    case lp::LpStatus::Optimal:
      r.status = LimitStatus::Optimal;
      r.lambda = sol.primal[0];
      r.forces = sol.primal.tail(m) * scale;
      r.basis = std::move(sol.basis);
      break;
  }
  return r;
}

LimitDesign classical_limit_design(const GroundStructure& gs, double volume_budget,
                                   const lp::LpOptions& options) {
  if (!(volume_budget > 0.0)) throw ModelError("volume budget must be positive");
  const int m = gs.num_members();
  const int d = gs.num_dofs();
  const double fscale = force_scale(gs);
  // Areas are scaled so that the volume row reads sum (c_i / V) x_i + slack = 1.
  const double ascale = volume_budget / gs.lengths().sum();
  const double cap = gs.yield_stress() * ascale / fscale;

  // Variables: [lambda, q, x, s+, s-, volume slack]. Yield conditions become
  // cap x_i - q_i - s+_i = 0 and cap x_i + q_i - s-_i = 0 with s+, s- >= 0.
  const int nvar = 1 + 4 * m + 1;
  const int nrow = d + 2 * m + 1;
  lp::LpProblem p;
  p.objective = Vec::Zero(nvar);
  p.objective[0] = 1.0;
  p.A = Mat::Zero(nrow, nvar);
  p.b = Vec::Zero(nrow);
  p.lower = Vec::Zero(nvar);
  p.upper = Vec::Constant(nvar, lp::kInf);
  p.lower[0] = -lp::kInf;
  const int q0 = 1, x0 = 1 + m, sp0 = 1 + 2 * m, sm0 = 1 + 3 * m, vs = 1 + 4 * m;
  for (int i = 0; i < m; ++i) p.lower[q0 + i] = -lp::kInf;

  p.A.block(0, 0, d, 1) = -gs.reference_load() / fscale;
  p.A.block(0, q0, d, m) = gs.equilibrium();
  p.b.head(d) = gs.dead_load() / fscale;
  for (int i = 0; i < m; ++i) {
    const int r1 = d + 2 * i, r2 = d + 2 * i + 1;
    p.A(r1, x0 + i) = cap;
    p.A(r1, q0 + i) = -1.0;
    p.A(r1, sp0 + i) = -1.0;
    p.A(r2, x0 + i) = cap;
    p.A(r2, q0 + i) = 1.0;
    p.A(r2, sm0 + i) = -1.0;
  }
  const int rv = d + 2 * m;
  for (int i = 0; i < m; ++i) p.A(rv, x0 + i) = gs.lengths()[i] * ascale / volume_budget;
  p.A(rv, vs) = 1.0;
  p.b[rv] = 1.0;

  const lp::LpSolution sol = lp::solve_lp(p, options);
  if (sol.status != lp::LpStatus::Optimal) {
    throw std::runtime_error(std::string("limit design LP is ") + lp::to_string(sol.status));
  }
  LimitDesign out;
  out.lambda = sol.primal[0];
  out.design.volume_budget = volume_budget;
  out.design.areas = sol.primal.segment(x0, m).cwiseMax(0.0) * ascale;
  out.forces = sol.primal.segment(q0, m) * fscale;
  out.statically_determinate = statically_determinate(gs, out.design.areas);
  return out;
}

bool statically_determinate(const GroundStructure& gs, const Vec& areas, double tol) {
  std::vector<int> present;
  for (int i = 0; i < gs.num_members(); ++i) {
    if (areas[i] > tol) present.push_back(i);
  }
  if (present.empty()) return false;
  Mat bs(gs.num_dofs(), static_cast<Eigen::Index>(present.size()));
  for (std::size_t k = 0; k < present.size(); ++k) {
    bs.col(static_cast<Eigen::Index>(k)) = gs.equilibrium().col(present[k]);
  }
  Eigen::ColPivHouseholderQR<Mat> qr(bs);
  qr.setThreshold(1e-10);
  return qr.rank() == bs.cols();
}

int count_members(const Vec& areas, double tol) {
  return static_cast<int>((areas.array() > tol).count());
}

}  // namespace trussred
