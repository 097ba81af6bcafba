#include "trussred/sqp.hpp"

#include "trussred/dfo.hpp"
#include "trussred/format.hpp"
#include "trussred/qp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace trussred::sqp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(BfgsDenominator d) {
  return d == BfgsDenominator::Paper ? "paper" : "conventional";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::RadiusBelowMin: return "radius_below_min";
    case Termination::DirectionNormBelowEps: return "direction_norm_below_eps";
    case Termination::IterationLimit: return "iteration_limit";
  }
  return "?";
}

void SqpConfig::validate() const {
  auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!(radius_min > 0.0) || !(radius > radius_min)) {
    throw std::invalid_argument("stencil radii must satisfy 0 < r_min < r");
  }
  if (!in_open_unit(rho) || !in_open_unit(eta) || !in_open_unit(beta)) {
    throw std::invalid_argument("rho, eta and beta must lie in (0, 1)");
  }
  if (tau_max < 0) throw std::invalid_argument("tau_max must be nonnegative");
  if (!(eps_direction > 0.0)) throw std::invalid_argument("direction tolerance must be positive");
  if (!(eps_repair > 0.0)) throw std::invalid_argument("repair floor must be positive");
  if (!(b0_scale > 0.0)) throw std::invalid_argument("B0 scale must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
}

LineSearchResult armijo_search(const std::function<double(const VectorXd&)>& f,
                               const VectorXd& x, double fx, const VectorXd& d,
                               const VectorXd& g, double eta, double beta, int tau_max) {
  LineSearchResult out;
  const double slope = g.dot(d);
  double a = 1.0;
  for (int tau = 0; tau <= tau_max; ++tau, a *= beta) {
    VectorXd trial = x + a * d;
    // x + a d >= (1 - a) x >= 0 in exact arithmetic; strip roundoff.
    trial = trial.cwiseMax(0.0);
    const double ft = f(trial);
    ++out.evaluations;
    if (ft <= fx + eta * a * slope) {
      out.success = true;
      out.step = a;
      out.tau = tau;
      out.f_new = ft;
      return out;
    }
  }
  return out;
}

BfgsUpdate damped_bfgs(const MatrixXd& B, const VectorXd& s, const VectorXd& y,
                       BfgsDenominator mode) {
  BfgsUpdate out;
  const VectorXd Bs = B * s;
  const double sBs = s.dot(Bs);
  if (!(sBs >= 1e-14)) {
    out.B = B;
    out.skipped = true;
    return out;
  }
  const double sy = s.dot(y);
  out.theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
  const VectorXd r = out.theta * y + (1.0 - out.theta) * Bs;
  const double denom = mode == BfgsDenominator::Paper ? s.dot(s) : s.dot(r);
  MatrixXd next = B - (Bs * Bs.transpose()) / sBs + (r * r.transpose()) / denom;
  out.B = 0.5 * (next + next.transpose());
  return out;
}

namespace {

struct PendingUpdate {
  VectorXd s;
  VectorXd gradient_before;
};

}  // namespace

MinimizeResult minimize(const Problem& problem, const VectorXd& x0, const SqpConfig& cfg) {
  cfg.validate();
  const auto m = x0.size();
  const VectorXd& c = problem.c;
  if (c.size() != m) throw std::invalid_argument("length vector does not match design");
  if ((x0.array() < 0.0).any() || c.dot(x0) > problem.volume_budget * (1.0 + 1e-12)) {
    throw std::invalid_argument("starting design is infeasible");
  }

  MinimizeResult res;
  RunStats& stats = res.stats;
  std::atomic<long> evaluations{0};
  auto f = [&](const VectorXd& x) {
    ++evaluations;
    return problem.objective(x);
  };
  auto lp_count = [&]() -> long { return problem.lp_counter ? problem.lp_counter() : 0; };

  VectorXd x = x0;
  double fx = f(x);
  if (!std::isfinite(fx)) {
    throw InfeasibleStart("objective is not finite at the starting design");
  }

  const MatrixXd B0 = cfg.b0_scale * MatrixXd::Identity(m, m);
  MatrixXd B = B0;
  double r = cfg.radius;
  const dfo::StencilBasis basis = dfo::kernel_basis(c);
  std::optional<PendingUpdate> pending;
  BfgsDenominator mode = cfg.bfgs;

  int visits = 0;
  while (true) {
    if (r < cfg.radius_min) {
      res.termination = Termination::RadiusBelowMin;
      break;
    }
    if (++visits > cfg.max_iterations) {
      res.termination = Termination::IterationLimit;
      break;
    }

    IterationRecord rec;
    rec.k = res.iterations;
    rec.radius = r;
    rec.f = fx;
    rec.d_norm = std::numeric_limits<double>::quiet_NaN();

    // Repaired samples keep the center's volume, which equals V whenever
    // the budget is active.
    dfo::StencilSample sample = dfo::sample_set(x, r, basis, c, c.dot(x), cfg.eps_repair);
    sample.f_center = fx;
    dfo::evaluate(sample, f);
    const VectorXd g = dfo::stencil_gradient(sample).gradient;

    if (pending) {
      const BfgsUpdate up = damped_bfgs(B, pending->s, g - pending->gradient_before, mode);
      if (up.skipped) {
        ++stats.bfgs_skips;
      } else {
        B = up.B;
        if (Eigen::LLT<MatrixXd>(B).info() != Eigen::Success) {
          if (cfg.switch_on_pd_loss && mode == BfgsDenominator::Paper) {
            mode = BfgsDenominator::Conventional;
            stats.bfgs_switch_iteration = res.iterations;
            B = B0;
          } else {
            throw PositiveDefinitenessLost("BFGS update lost positive definiteness at k = " +
                                           std::to_string(res.iterations));
          }
        }
      }
      pending.reset();
    }

    const double best_sample = *std::min_element(sample.f_points.begin(), sample.f_points.end());
    if (best_sample >= fx) {
      rec.stencil_failure = true;
      ++stats.stencil_failures;
      r *= cfg.rho;
      rec.lp_count = lp_count();
      res.trace.push_back(rec);
      continue;
    }

    const qp::QpResult sub = qp::solve_qp(B, g, c, problem.volume_budget - c.dot(x), -x);
    ++stats.qp_solves;
    rec.d_norm = sub.direction.norm();
    if (rec.d_norm < cfg.eps_direction) {
      res.termination = Termination::DirectionNormBelowEps;
      rec.lp_count = lp_count();
      res.trace.push_back(rec);
      break;
    }

    const LineSearchResult ls =
        armijo_search(f, x, fx, sub.direction, g, cfg.eta, cfg.beta, cfg.tau_max);
    if (!ls.success) {
      rec.line_search_failure = true;
      ++stats.line_search_failures;
      B = B0;
      r *= cfg.rho;
      rec.lp_count = lp_count();
      res.trace.push_back(rec);
      continue;
    }

    const VectorXd next = (x + ls.step * sub.direction).cwiseMax(0.0);
    // With shared multipliers the mu c - zeta terms of the two Lagrangian
    // gradients cancel, leaving the change in stencil gradient.
    pending = PendingUpdate{next - x, g};
    x = next;
    fx = ls.f_new;
    ++res.iterations;
    rec.step = ls.step;
    rec.lp_count = lp_count();
    res.trace.push_back(rec);
  }

  stats.objective_evaluations = evaluations.load();
  res.x = x;
  res.f = fx;
  res.final_radius = r;
  return res;
}

RunResult run(const GroundStructure& gs, int alpha, double gamma, const Design& x0,
              const SqpConfig& cfg, const WorstCaseOptions& wc) {
  WorstCaseCache cache;
  std::atomic<long> lps{0};
  std::atomic<long> misses{0};
  Problem problem;
  problem.c = gs.lengths();
  problem.volume_budget = x0.volume_budget;
  problem.objective = [&](const VectorXd& x) {
    const WorstCaseResult w = worst_case(gs, x, alpha, gamma, wc, &cache);
    if (w.lp_solves > 0) {
      lps += w.lp_solves;
      ++misses;
    }
    return w.f_value;
  };
  problem.lp_counter = [&]() { return lps.load(); };

  RunResult out;
  out.run = minimize(problem, x0.areas, cfg);
  out.design = Design{out.run.x, x0.volume_budget};
  out.worst = worst_case(gs, out.run.x, alpha, gamma, wc, &cache);
  out.lp_count = lps.load();
  out.worst_case_evaluations = misses.load();
  out.bfgs_used = cfg.bfgs;
  if (out.run.stats.bfgs_switch_iteration >= 0) {
    out.bfgs_used = BfgsDenominator::Conventional;
    out.fell_back = true;
  }
  return out;
}

RunResult run_with_fallback(const GroundStructure& gs, int alpha, double gamma, const Design& x0,
                            const SqpConfig& cfg, const WorstCaseOptions& wc) {
  SqpConfig switching = cfg;
  switching.switch_on_pd_loss = true;
  return run(gs, alpha, gamma, x0, switching, wc);
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::ostringstream out;
  out << "k,r,f,d_norm,step,lp_count\n";
  for (const IterationRecord& rec : trace) {
    out << rec.k << ',' << format_number(rec.radius, 10) << ',' << format_number(rec.f, 10) << ','
        << format_number(rec.d_norm, 10) << ',' << format_number(rec.step, 10) << ','
        << rec.lp_count << '\n';
  }
  return out.str();
}

}  // namespace trussred::sqp
