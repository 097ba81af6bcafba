#include "trussred/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace trussred::qp {

namespace {

struct EqpSolution {
  Vec step;
  double mu = 0.0;
};

// Minimizes 1/2 p^T B p + h^T p with p_i = 0 on fixed bounds and, when
// volume_active, c^T p = 0.
EqpSolution solve_eqp(const Mat& B, const Vec& h, const Vec& c, const std::vector<bool>& fixed,
                      bool volume_active) {
  const auto m = B.rows();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < m; ++i)
    if (!fixed[i]) free.push_back(i);
  EqpSolution out;
  out.step = Vec::Zero(m);
  const auto nf = static_cast<Eigen::Index>(free.size());
  if (nf == 0) return out;

  Mat Bff(nf, nf);
  Vec hf(nf), cf(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    hf[a] = h[free[a]];
    cf[a] = c[free[a]];
    for (Eigen::Index b = 0; b < nf; ++b) Bff(a, b) = B(free[a], free[b]);
  }
  Eigen::LLT<Mat> llt(Bff);
  if (llt.info() != Eigen::Success) throw QpError("reduced Hessian is not positive definite");
  const Vec Bh = llt.solve(hf);
  Vec pf = -Bh;
  if (volume_active) {
    const Vec Bc = llt.solve(cf);
    const double denom = cf.dot(Bc);
    if (!(denom > 0.0)) throw QpError("volume row is dependent on the active bounds");
    out.mu = -cf.dot(Bh) / denom;
    pf -= out.mu * Bc;
  }
  for (Eigen::Index a = 0; a < nf; ++a) out.step[free[a]] = pf[a];
  return out;
}

Vec feasible_start(const Vec& c, double rhs, const Vec& lb) {
  const auto m = c.size();
  Vec d = Vec::Zero(m);
  if ((d.array() >= lb.array()).all() && c.dot(d) <= rhs) return d;
  d = lb;
  if (c.dot(d) <= rhs) return d;
  Eigen::Index j = 0;
  const double cmin = c.minCoeff(&j);
  if (!(cmin < 0.0)) throw QpError("QP is infeasible: c^T lb exceeds rhs");
  d[j] += (c.dot(d) - rhs) / -cmin;
  return d;
}

}  // namespace

QpResult solve_qp(const Mat& B, const Vec& g, const Vec& c, double rhs, const Vec& lb) {
  const auto m = B.rows();
  if (B.cols() != m || g.size() != m || c.size() != m || lb.size() != m) {
    throw QpError("QP dimension mismatch");
  }
  const double bscale = std::max(1.0, B.lpNorm<Eigen::Infinity>());
  if ((B - B.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * bscale) {
    throw QpError("Hessian approximation is not symmetric");
  }
  if (Eigen::LLT<Mat>(B).info() != Eigen::Success) {
    throw QpError("Hessian approximation is not positive definite");
  }

  Vec d = feasible_start(c, rhs, lb);
  const double tol = 1e-12 * (1.0 + lb.lpNorm<Eigen::Infinity>() + std::abs(rhs));

  std::vector<bool> fixed(m, false);
  bool volume_active = false;
  Eigen::Index num_fixed = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (d[i] <= lb[i]) {
      d[i] = lb[i];
      fixed[i] = true;
      ++num_fixed;
    }
  }
  if (c.dot(d) >= rhs - tol) {
    double cfree = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (!fixed[i]) cfree = std::max(cfree, std::abs(c[i]));
    volume_active = cfree > 0.0;
  }

  const int max_iter = 50 * static_cast<int>(m + 1) + 100;
  QpResult result;
  bool at_minimizer = false;  // d minimizes the objective on the working set
  for (int it = 1;; ++it) {
    if (it > max_iter) throw QpError("active-set iteration limit reached");
    const Vec h = B * d + g;
    const EqpSolution eqp = solve_eqp(B, h, c, fixed, volume_active);
    const Vec& p = eqp.step;

    if (at_minimizer || p.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + d.lpNorm<Eigen::Infinity>())) {
      at_minimizer = false;
      // Stationary on the working set: check multiplier signs.
      const double mu = volume_active ? eqp.mu : 0.0;
      const Vec grad = h + mu * c;
      int drop = -1;  // 0..m-1 bound, m volume row
      double most_negative = -1e-12 * (1.0 + grad.lpNorm<Eigen::Infinity>());
      for (Eigen::Index i = 0; i < m; ++i) {
        if (fixed[i] && grad[i] < most_negative) {
          most_negative = grad[i];
          drop = static_cast<int>(i);
        }
      }
      if (volume_active && mu < most_negative) drop = static_cast<int>(m);
      if (drop < 0) {
        result.direction = d;
        result.mu = std::max(mu, 0.0);
        result.zeta = Vec::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i)
          if (fixed[i]) result.zeta[i] = std::max(grad[i], 0.0);
        result.objective = 0.5 * d.dot(B * d) + g.dot(d);
        result.iterations = it;
        return result;
      }
      if (drop == m) {
        volume_active = false;
      } else {
        fixed[drop] = false;
        --num_fixed;
      }
      continue;
    }

    // Ratio test against inactive constraints.
    double step = 1.0;
    int block = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (fixed[i] || p[i] >= 0.0) continue;
      const double t = std::max(0.0, (lb[i] - d[i]) / p[i]);
      if (t < step) {
        step = t;
        block = static_cast<int>(i);
      }
    }
    const double cp = c.dot(p);
    if (!volume_active && cp > 0.0) {
      const double t = std::max(0.0, (rhs - c.dot(d)) / cp);
      if (t < step) {
        step = t;
        block = static_cast<int>(m);
      }
    }
    d += step * p;
    if (block < 0) at_minimizer = true;
    if (block == m) {
      volume_active = true;
    } else if (block >= 0) {
      d[block] = lb[block];
      fixed[block] = true;
      ++num_fixed;
      // Keep the volume row independent of the bounds.
      if (num_fixed == m) volume_active = false;
    }
  }
}

}  // namespace trussred::qp
