#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace trussred::dfo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Orthonormal basis of the hyperplane c^T v = 0, one direction per column.
struct StencilBasis {
  Mat directions;  // m x (m - 1)

  int size() const { return static_cast<int>(directions.cols()); }
  Vec direction(int i) const { return directions.col(i); }
};

/// Deterministic basis: the coordinate axes projected onto Ker c^T are
/// orthonormalized in index order (modified Gram-Schmidt, two passes), and
/// vectors that collapse below 1e-8 are discarded. Requires c > 0, m >= 2.
StencilBasis kernel_basis(const Vec& c);

/// Sample points x +/- r delta_i around a center, with their objective values.
///
/// Points are ordered x + r delta_0, x - r delta_0, x + r delta_1, ...
struct StencilSample {
  Vec center;
  double radius = 0.0;
  std::vector<Vec> points;
  std::vector<bool> repaired;
  double f_center = 0.0;
  std::vector<double> f_points;
};

/// Moves z back onto {z >= eps, c^T z = volume}: components below eps are
/// clamped to eps and the remaining ones scaled by a common factor. Repeats
/// if scaling pushes further components below eps. Returns false (leaving z
/// untouched) when z already satisfies z >= eps.
bool repair_point(Vec& z, const Vec& c, double volume, double eps);

/// Builds the 2(m-1) stencil points around x, repairing any with a component
/// below eps. Throws ConfigError when volume < eps * sum(c), since no point
/// with all components >= eps then fits the budget.
StencilSample sample_set(const Vec& x, double radius, const StencilBasis& basis, const Vec& c,
                         double volume, double eps);

/// Evaluates f at every sample point as a parallel map.
void evaluate(StencilSample& sample, const std::function<double(const Vec&)>& f);

struct StencilGradient {
  Vec gradient;
  bool degenerate = false;
  int rows_used = 0;
};

/// Minimum-norm least-squares solution of Y g = delta with rows
/// Y_j = z_j - x and delta_j = f(z_j) - f(x). Samples with a non-finite
/// value are left out; if no usable row remains the gradient is zero and
/// flagged degenerate.
StencilGradient stencil_gradient(const StencilSample& sample);

}  // namespace trussred::dfo
