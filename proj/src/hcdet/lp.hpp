#pragma once

#include <Eigen/Dense>

namespace hcdet {

// min c^T x  s.t.  A x = b,  lb <= x <= ub.  Lower bounds must be finite;
// upper bounds may be +infinity.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd duals;          // equality multipliers y
  Eigen::VectorXd reduced_costs;  // c - A^T y
  int iterations = 0;
};

// Dense bounded-variable primal simplex (two phases, artificial basis).
// Dantzig pricing switches to Bland's rule after 3*(rows+cols) pivots of a
// phase. The final basis is refactorized from the original data so that x
// and the duals carry no accumulated tableau drift.
LpResult lp_solve(const LinearProgram& p);

enum class QpStatus { optimal, infeasible };

struct QpResult {
  QpStatus status = QpStatus::infeasible;
  Eigen::VectorXd x;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// argmin ||x - target||^2  s.t.  A x = b,  lb <= x <= ub, by a primal
// active-set method on the bounds started from a phase-1 LP vertex.
QpResult qp_least_distance(const Eigen::VectorXd& target, const Eigen::MatrixXd& A,
                           const Eigen::VectorXd& b, const Eigen::VectorXd& lb,
                           const Eigen::VectorXd& ub);

}  // namespace hcdet
