#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace trussred::qp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class QpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Minimizer of  1/2 d^T B d + g^T d  s.t.  c^T d <= rhs,  d >= lb.
///
/// The multipliers satisfy B d + g + mu c - zeta = 0 with mu, zeta >= 0 and
/// complementary slackness against the volume row and the bounds.
struct QpResult {
  Vec direction;
  double mu = 0.0;
  Vec zeta;
  double objective = 0.0;
  int iterations = 0;
};

/// Primal active-set method. Free variables are handled by a Cholesky
/// factorization of the free block of B; the single general constraint is
/// eliminated in closed form. Blocking and dropping ties go to the lowest
/// constraint index (bounds 0..m-1, then the volume row).
///
/// Throws QpError when B is not symmetric positive definite or when the
/// feasible set is empty.
QpResult solve_qp(const Mat& B, const Vec& g, const Vec& c, double rhs, const Vec& lb);

}  // namespace trussred::qp
