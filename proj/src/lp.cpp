#include "trussred/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

namespace trussred::lp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

enum class State : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// Working problem in minimization form over [A | artificial columns].
class Simplex {
public:
  Simplex(const LpProblem& p, const LpOptions& opt) : opt_(opt) {
    rows_ = static_cast<int>(p.A.rows());
    n_ = static_cast<int>(p.A.cols());
    const int total = n_ + rows_;
    cols_.resize(rows_, total);
    cols_.leftCols(n_) = p.A;
    cols_.rightCols(rows_).setZero();
    b_ = p.b;
    lower_.resize(total);
    upper_.resize(total);
    lower_.head(n_) = p.lower;
    upper_.head(n_) = p.upper;
    lower_.tail(rows_).setZero();
    upper_.tail(rows_).setConstant(kInf);
    x_ = Vec::Zero(total);
    state_.assign(total, State::AtLower);

    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = State::AtLower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = State::AtUpper;
        x_[j] = upper_[j];
      } else {
        state_[j] = State::FreeZero;
        x_[j] = 0.0;
      }
    }
    const Vec residual = b_ - p.A * x_.head(n_);
    basis_.resize(rows_);
    for (int i = 0; i < rows_; ++i) {
      const int a = n_ + i;
      cols_(i, a) = residual[i] >= 0.0 ? 1.0 : -1.0;
      basis_[i] = a;
      state_[a] = State::Basic;
      x_[a] = std::abs(residual[i]);
    }
    basis_matrix_.resize(rows_, rows_);
    binv_.resize(rows_, rows_);
    rhs_.resize(rows_);
    xb_.resize(rows_);
    cb_.resize(rows_);
    pi_.resize(rows_);
    w_.resize(rows_);
    feas_tol_ = opt.feas_tol * (1.0 + (rows_ ? b_.lpNorm<Eigen::Infinity>() : 0.0));
  }

  LpSolution run(const Vec& objective) {
    LpSolution sol;
    // Phase 1: minimize the sum of artificials.
    Vec cost = Vec::Zero(n_ + rows_);
    cost.tail(rows_).setOnes();
    const double phase1_tol = opt_.opt_tol;
    if (iterate(cost, phase1_tol) != Outcome::Optimal) {
      throw LpError("phase 1 reported unbounded");  // cannot happen for a bounded-below objective
    }
    refresh();
    const double infeasibility = x_.tail(rows_).sum();
    if (infeasibility > feas_tol_) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iterations_;
      return sol;
    }

    // Fix artificials at zero and pivot basic ones out where possible.
    for (int i = 0; i < rows_; ++i) {
      upper_[n_ + i] = 0.0;
      if (state_[n_ + i] != State::Basic) {
        state_[n_ + i] = State::AtLower;
        x_[n_ + i] = 0.0;
      }
    }
    drive_out_artificials();

    return finish(objective);
  }

  // Dual simplex from a given basis; nullopt means "start cold instead".
  std::optional<LpSolution> run_warm(const Vec& objective, const LpBasis& warm) {
    if (rows_ == 0 || static_cast<int>(warm.basic.size()) != rows_ ||
        static_cast<int>(warm.at_upper.size()) != n_) {
      return std::nullopt;
    }
    std::vector<bool> seen(n_, false);
    for (int j : warm.basic) {
      if (j < 0 || j >= n_ || seen[j]) return std::nullopt;
      seen[j] = true;
    }
    for (int i = 0; i < rows_; ++i) {
      basis_[i] = warm.basic[i];
      upper_[n_ + i] = 0.0;
      state_[n_ + i] = State::AtLower;
      x_[n_ + i] = 0.0;
    }
    for (int j = 0; j < n_; ++j) {
      if (seen[j]) {
        state_[j] = State::Basic;
      } else if (warm.at_upper[j] && std::isfinite(upper_[j])) {
        state_[j] = State::AtUpper;
        x_[j] = upper_[j];
      } else if (std::isfinite(lower_[j])) {
        state_[j] = State::AtLower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = State::AtUpper;
        x_[j] = upper_[j];
      } else {
        state_[j] = State::FreeZero;
        x_[j] = 0.0;
      }
    }
    try {
      refresh();
    } catch (const LpError&) {
      return std::nullopt;
    }

    Vec cost = Vec::Zero(n_ + rows_);
    cost.head(n_) = -objective;
    const double dual_tol = opt_.opt_tol * (1.0 + objective.lpNorm<Eigen::Infinity>());
    compute_duals(cost);
    for (int j = 0; j < n_; ++j) {
      const State s = state_[j];
      if (s == State::Basic || lower_[j] == upper_[j]) continue;
      const double dj = cost[j] - pi_.dot(cols_.col(j));
      if ((s == State::AtLower && dj < -dual_tol) || (s == State::AtUpper && dj > dual_tol) ||
          (s == State::FreeZero && std::abs(dj) > dual_tol)) {
        return std::nullopt;
      }
    }

    const int limit = 4 * (n_ + rows_);
    for (int pass = 0;; ++pass) {
      if (pass > limit) return std::nullopt;
      ++iterations_;
      if (since_reinvert_ >= kReinvertInterval) refresh();

      // Leaving row: largest bound violation.
      int r = -1;
      double worst = feas_tol_;
      for (int i = 0; i < rows_; ++i) {
        const int var = basis_[i];
        const double v = std::max(lower_[var] - x_[var], x_[var] - upper_[var]);
        if (v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r < 0) break;
      const int leave = basis_[r];
      const bool below = x_[leave] < lower_[leave];

      // Entering column: dual ratio test over columns that move x_leave
      // toward its violated bound.
      compute_duals(cost);
      int enter = -1;
      double best_ratio = kInf, best_alpha = 0.0;
      for (int j = 0; j < n_; ++j) {
        const State s = state_[j];
        if (s == State::Basic || lower_[j] == upper_[j]) continue;
        const double alpha = binv_.row(r).dot(cols_.col(j));
        if (std::abs(alpha) <= opt_.pivot_tol) continue;
        // x_leave changes by -alpha per unit increase of x_j.
        const bool up_ok = below ? alpha < 0.0 : alpha > 0.0;
        const bool eligible = s == State::FreeZero || (s == State::AtLower ? up_ok : !up_ok);
        if (!eligible) continue;
        const double dj = cost[j] - pi_.dot(cols_.col(j));
        const double ratio = std::abs(dj) / std::abs(alpha);
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && std::abs(alpha) > best_alpha)) {
          best_ratio = ratio;
          best_alpha = std::abs(alpha);
          enter = j;
        }
      }
      if (enter < 0) {
        if (since_reinvert_ > 0) {
          refresh();
          continue;
        }
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        sol.iterations = iterations_;
        return sol;
      }

      w_.noalias() = binv_ * cols_.col(enter);
      const double target = below ? lower_[leave] : upper_[leave];
      const double delta = (x_[leave] - target) / w_[r];
      for (int i = 0; i < rows_; ++i) x_[basis_[i]] -= w_[i] * delta;
      x_[enter] += delta;
      x_[leave] = target;
      state_[leave] = below ? State::AtLower : State::AtUpper;
      basis_[r] = enter;
      state_[enter] = State::Basic;
      pivot(r);
    }
    return finish(objective);
  }

private:
  enum class Outcome { Optimal, Unbounded };

  // Phase 2 from a primal feasible basis with artificials fixed at zero.
  LpSolution finish(const Vec& objective) {
    LpSolution sol;
    Vec cost = Vec::Zero(n_ + rows_);
    cost.head(n_) = -objective;
    const double phase2_tol = opt_.opt_tol * (1.0 + objective.lpNorm<Eigen::Infinity>());
    const Outcome out = iterate(cost, phase2_tol);
    sol.iterations = iterations_;
    if (out == Outcome::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.primal = x_.head(n_);
    sol.objective = objective.dot(sol.primal);
    if (rows_) compute_duals(cost);
    sol.duals = rows_ ? Vec(-pi_) : Vec();
    sol.reduced_costs = objective - cols_.leftCols(n_).transpose() * sol.duals;
    certify(sol);
    if (std::all_of(basis_.begin(), basis_.end(), [&](int j) { return j < n_; })) {
      sol.basis.basic = basis_;
      sol.basis.at_upper.resize(n_);
      for (int j = 0; j < n_; ++j) sol.basis.at_upper[j] = state_[j] == State::AtUpper;
    }
    return sol;
  }

  // Rebuilds the explicit basis inverse from scratch (Gauss-Jordan with
  // partial pivoting).
  void reinvert() {
    if (rows_ == 0) return;
    for (int i = 0; i < rows_; ++i) basis_matrix_.col(i) = cols_.col(basis_[i]);
    binv_.setIdentity();
    RowMat& a = basis_matrix_;
    const double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    for (int k = 0; k < rows_; ++k) {
      int p = k;
      for (int i = k + 1; i < rows_; ++i) {
        if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
      }
      if (!(std::abs(a(p, k)) > 1e-13 * scale)) throw LpError("basis matrix became singular");
      if (p != k) {
        a.row(p).swap(a.row(k));
        binv_.row(p).swap(binv_.row(k));
      }
      const double inv = 1.0 / a(k, k);
      a.row(k) *= inv;
      binv_.row(k) *= inv;
      for (int i = 0; i < rows_; ++i) {
        const double f = a(i, k);
        if (i == k || f == 0.0) continue;
        a.row(i) -= f * a.row(k);
        binv_.row(i) -= f * binv_.row(k);
      }
    }
    since_reinvert_ = 0;
    inverse_valid_ = true;
  }

  // Recompute basic values from the nonbasic ones with a fresh inverse.
  void refresh() {
    if (rows_ == 0) return;
    reinvert();
    rhs_ = b_;
    for (int j = 0; j < n_ + rows_; ++j) {
      if (state_[j] != State::Basic && x_[j] != 0.0) rhs_.noalias() -= x_[j] * cols_.col(j);
    }
    xb_.noalias() = binv_ * rhs_;
    for (int i = 0; i < rows_; ++i) x_[basis_[i]] = xb_[i];
  }

  void compute_duals(const Vec& cost) {
    for (int i = 0; i < rows_; ++i) cb_[i] = cost[basis_[i]];
    pi_.noalias() = binv_.transpose() * cb_;
  }

  Outcome iterate(const Vec& cost, double dual_tol) {
    const int total = n_ + rows_;
    int degenerate_streak = 0;
    bool bland = false;
    if (!inverse_valid_ || since_reinvert_ > 0) refresh();
    while (true) {
      if (++iterations_ > opt_.max_iterations) throw LpError("iteration limit reached");
      if (since_reinvert_ >= kReinvertInterval) refresh();
      if (rows_) compute_duals(cost);

      // Pricing.
      int enter = -1;
      double enter_dir = 0.0;
      double best = 0.0;
      for (int j = 0; j < total; ++j) {
        const State s = state_[j];
        if (s == State::Basic || lower_[j] == upper_[j]) continue;
        const double dj = rows_ ? cost[j] - pi_.dot(cols_.col(j)) : cost[j];
        double dir = 0.0;
        if (dj < -dual_tol && (s == State::AtLower || s == State::FreeZero)) dir = 1.0;
        else if (dj > dual_tol && (s == State::AtUpper || s == State::FreeZero)) dir = -1.0;
        if (dir == 0.0) continue;
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) {
        // Confirm optimality on a fresh factorization before accepting it.
        if (since_reinvert_ > 0) {
          refresh();
          continue;
        }
        return Outcome::Optimal;
      }

      // Ratio test along x_B(t) = x_B - dir * t * w.
      if (rows_) w_.noalias() = binv_ * cols_.col(enter);
      double step = kInf;
      int leave_pos = -1;  // -1 with finite step means a bound flip
      bool leave_to_upper = false;
      if (std::isfinite(lower_[enter]) && std::isfinite(upper_[enter])) {
        step = upper_[enter] - lower_[enter];
      }
      double best_pivot = 0.0;
      for (int i = 0; i < rows_; ++i) {
        if (std::abs(w_[i]) <= opt_.pivot_tol) continue;
        const double rate = -enter_dir * w_[i];
        const int var = basis_[i];
        double limit;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lower_[var])) continue;
          limit = std::max(0.0, (x_[var] - lower_[var]) / -rate);
          to_upper = false;
        } else {
          if (!std::isfinite(upper_[var])) continue;
          limit = std::max(0.0, (upper_[var] - x_[var]) / rate);
          to_upper = true;
        }
        bool take = false;
        const double tie = std::isfinite(step) ? 1e-12 * std::max(1.0, step) : 0.0;
        if (!std::isfinite(step) || limit < step - tie) {
          take = true;
        } else if (limit <= step + tie && leave_pos >= 0) {
          take = bland ? var < basis_[leave_pos] : std::abs(w_[i]) > best_pivot;
        }
        if (take) {
          step = limit;
          leave_pos = i;
          leave_to_upper = to_upper;
          best_pivot = std::abs(w_[i]);
        }
      }
      if (!std::isfinite(step)) {
        if (since_reinvert_ > 0) {
          refresh();
          continue;
        }
        return Outcome::Unbounded;
      }

      if (step <= 1e-12) {
        if (++degenerate_streak > opt_.stall_threshold) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      // Move along the edge.
      for (int i = 0; i < rows_; ++i) x_[basis_[i]] -= enter_dir * step * w_[i];
      x_[enter] += enter_dir * step;
      if (leave_pos < 0) {
        state_[enter] = enter_dir > 0 ? State::AtUpper : State::AtLower;
        x_[enter] = enter_dir > 0 ? upper_[enter] : lower_[enter];
        continue;
      }
      const int leave = basis_[leave_pos];
      state_[leave] = leave_to_upper ? State::AtUpper : State::AtLower;
      x_[leave] = leave_to_upper ? upper_[leave] : lower_[leave];
      basis_[leave_pos] = enter;
      state_[enter] = State::Basic;
      pivot(leave_pos);
    }
  }

  // Product-form update of the explicit inverse for a pivot on w_[pos].
  void pivot(int pos) {
    const double wp = w_[pos];
    binv_.row(pos) /= wp;
    for (int i = 0; i < rows_; ++i) {
      if (i == pos || w_[i] == 0.0) continue;
      binv_.row(i) -= w_[i] * binv_.row(pos);
    }
    ++since_reinvert_;
  }

  void drive_out_artificials() {
    for (int pos = 0; pos < rows_; ++pos) {
      if (basis_[pos] < n_) continue;
      // Row pos of B^-1 A over nonbasic structural columns.
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == State::Basic) continue;
        const double a = std::abs(binv_.row(pos).dot(cols_.col(j)));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      const int art = basis_[pos];
      w_.noalias() = binv_ * cols_.col(best);
      basis_[pos] = best;
      state_[best] = State::Basic;
      state_[art] = State::AtLower;
      x_[art] = 0.0;
      pivot(pos);
    }
    refresh();
  }

  void certify(const LpSolution& sol) const {
    const Vec residual = cols_.leftCols(n_) * sol.primal - b_;
    if (rows_ && residual.lpNorm<Eigen::Infinity>() > 10 * feas_tol_) {
      throw LpError("primal residual too large at optimum");
    }
    for (int j = 0; j < n_; ++j) {
      if (sol.primal[j] < lower_[j] - 10 * feas_tol_ || sol.primal[j] > upper_[j] + 10 * feas_tol_) {
        throw LpError("bound violation at optimum");
      }
    }
  }

  LpOptions opt_;
  int rows_ = 0;
  int n_ = 0;
  Mat cols_;
  Vec b_, lower_, upper_, x_;
  std::vector<State> state_;
  std::vector<int> basis_;
  static constexpr int kReinvertInterval = 32;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat basis_matrix_, binv_;
  Vec rhs_, xb_, cb_, pi_, w_;
  int since_reinvert_ = 0;
  bool inverse_valid_ = false;
  double feas_tol_ = 0.0;
  int iterations_ = 0;
};

void validate(const LpProblem& p) {
  const auto n = p.A.cols();
  if (p.objective.size() != n || p.lower.size() != n || p.upper.size() != n ||
      p.b.size() != p.A.rows()) {
    throw LpError("LP dimension mismatch");
  }
  if (!p.A.allFinite() || !p.b.allFinite() || !p.objective.allFinite()) {
    throw LpError("LP data must be finite");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]) || p.lower[j] > p.upper[j] ||
        p.lower[j] == kInf || p.upper[j] == -kInf) {
      throw LpError("invalid bounds on variable " + std::to_string(j));
    }
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options, const LpBasis* warm) {
  validate(problem);
  if (warm && !warm->empty()) {
    Simplex simplex(problem, options);
    if (std::optional<LpSolution> sol = simplex.run_warm(problem.objective, *warm)) return *sol;
  }
  Simplex simplex(problem, options);
  return simplex.run(problem.objective);
}

std::string dump_lp(const LpProblem& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "LP " << p.A.rows() << ' ' << p.A.cols() << '\n';
  auto line = [&](const char* tag, const Vec& v) {
    out << tag;
    for (Eigen::Index j = 0; j < v.size(); ++j) out << ' ' << v[j];
    out << '\n';
  };
  line("obj", p.objective);
  line("lb", p.lower);
  line("ub", p.upper);
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    out << "row";
    for (Eigen::Index j = 0; j < p.A.cols(); ++j) out << ' ' << p.A(i, j);
    out << " = " << p.b[i] << '\n';
  }
  return out.str();
}

}  // namespace trussred::lp
