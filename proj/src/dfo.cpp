#include "trussred/dfo.hpp"

#include "parallel.hpp"

#include <cmath>

namespace trussred::dfo {

StencilBasis kernel_basis(const Vec& c) {
  const auto m = c.size();
  if (m < 2) throw ConfigError("stencil basis needs at least two members");
  if ((c.array() <= 0.0).any()) throw ConfigError("member lengths must be positive");
  const Vec n = c.normalized();

  std::vector<Vec> kept;
  kept.reserve(m - 1);
  for (Eigen::Index j = 0; j < m && static_cast<Eigen::Index>(kept.size()) < m - 1; ++j) {
    Vec v = Vec::Unit(m, j);
    for (int pass = 0; pass < 2; ++pass) {
      v -= n.dot(v) * n;
      for (const Vec& u : kept) v -= u.dot(v) * u;
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    kept.push_back(v / norm);
  }
  StencilBasis basis;
  basis.directions.resize(m, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) basis.directions.col(i) = kept[i];
  return basis;
}

bool repair_point(Vec& z, const Vec& c, double volume, double eps) {
  if ((z.array() >= eps).all()) return false;
  std::vector<bool> clamped(z.size(), false);
  while (true) {
    bool changed = false;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (!clamped[i] && z[i] < eps) {
        clamped[i] = true;
        changed = true;
      }
    }
    if (!changed) return true;
    double clamped_volume = 0.0, free_volume = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (clamped[i]) {
        z[i] = eps;
        clamped_volume += c[i] * eps;
      } else {
        free_volume += c[i] * z[i];
      }
    }
    const double remaining = volume - clamped_volume;
    if (!(remaining > 0.0) || !(free_volume > 0.0)) {
      throw ConfigError("sample repair impossible: volume budget below eps * sum(c)");
    }
    const double factor = remaining / free_volume;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (!clamped[i]) z[i] *= factor;
  }
}

StencilSample sample_set(const Vec& x, double radius, const StencilBasis& basis, const Vec& c,
                         double volume, double eps) {
  if (!(radius > 0.0)) throw ConfigError("stencil radius must be positive");
  if (volume < eps * c.sum()) {
    throw ConfigError("sample repair impossible: volume budget below eps * sum(c)");
  }
  StencilSample s;
  s.center = x;
  s.radius = radius;
  for (int i = 0; i < basis.size(); ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec z = x + sign * radius * basis.directions.col(i);
      const bool fixed = repair_point(z, c, volume, eps);
      s.points.push_back(std::move(z));
      s.repaired.push_back(fixed);
    }
  }
  return s;
}

void evaluate(StencilSample& sample, const std::function<double(const Vec&)>& f) {
  sample.f_points.assign(sample.points.size(), 0.0);
  detail::parallel_for(0, static_cast<long>(sample.points.size()),
                       [&](long j) { sample.f_points[j] = f(sample.points[j]); });
}

StencilGradient stencil_gradient(const StencilSample& sample) {
  const auto m = sample.center.size();
  StencilGradient out;
  out.gradient = Vec::Zero(m);
  if (!std::isfinite(sample.f_center)) {
    out.degenerate = true;
    return out;
  }

  std::vector<Eigen::Index> rows;
  for (std::size_t j = 0; j < sample.points.size(); ++j) {
    if (std::isfinite(sample.f_points[j]) && (sample.points[j] - sample.center).any()) {
      rows.push_back(static_cast<Eigen::Index>(j));
    }
  }
  out.rows_used = static_cast<int>(rows.size());
  if (rows.empty()) {
    out.degenerate = true;
    return out;
  }

  Mat Y(static_cast<Eigen::Index>(rows.size()), m);
  Vec delta(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Y.row(k) = (sample.points[rows[k]] - sample.center).transpose();
    delta[k] = sample.f_points[rows[k]] - sample.f_center;
  }
  Eigen::JacobiSVD<Mat> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  out.gradient = svd.solve(delta);
  return out;
}

}  // namespace trussred::dfo
