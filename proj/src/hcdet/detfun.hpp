#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hcdet/graph.hpp"

namespace hcdet {

// Constraint family on P(x): row-stochastic or doubly stochastic.
enum class Mode { stochastic, doubly_stochastic };

const char* mode_name(Mode m);

// P(x) as a dense n x n matrix; P[row(k), col(k)] = x[k].
Eigen::MatrixXd assemble_P(const ArcVarMap& m, int n, std::span<const double> x);

enum class SignProperty { none, column_sums, row_sums };

// Property S_c (nonnegative diagonal, nonpositive off-diagonal, A^T e = 0)
// is reported in preference to S_r (same signs, A e = 0).
SignProperty detect_property(const Eigen::MatrixXd& A, double tol = 1e-10);

// Gaussian elimination without interchanges. For S_r-only input the factors
// are those of A^T, flagged by `transposed`, so that the unit-lower factor
// keeps its [-1, 0] bound and column-sum identity in both orientations.
struct LUFactors {
  Eigen::MatrixXd L;  // unit lower triangular
  Eigen::MatrixXd U;  // upper triangular
  std::vector<int> skipped;  // zero pivots whose row and column were already zero
  bool transposed = false;

  // L*U, or (L*U)^T when transposed.
  Eigen::MatrixXd reconstruct() const;
};

LUFactors lu_nopivot(const Eigen::MatrixXd& A);

// -det of the leading (n-1)x(n-1) block of I - P(x). Requires doubly
// stochastic x (tolerance 1e-8).
double f_minor(std::span<const double> x, const ArcVarMap& m, int n);

// -det(I - P(x) + ee^T/n). Requires row-stochastic x (tolerance 1e-8).
double f_full(std::span<const double> x, const ArcVarMap& m, int n);

struct DetEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Determinant objective with exact first and second derivatives from one
// factorization of the relevant matrix: the leading minor M in doubly
// stochastic mode, B = I - P + ee^T/n in stochastic mode.
//
// With W the inverse of that matrix and arcs k=(a,b), l=(c,d) inside it:
//   df/dx_k        =  det * W(b,a)
//   d2f/dx_k dx_l  = -det * (W(b,a) W(d,c) - W(b,c) W(d,a))
// Arcs that touch the excluded last node have zero derivatives in DS mode.
//
// Holds scratch storage; one instance must not be used concurrently.
class DetObjective {
 public:
  DetObjective(const ArcVarMap& m, int n, Mode mode);

  double value(std::span<const double> x);
  void evaluate(std::span<const double> x, bool want_hess, DetEval& out);

  Mode mode() const { return mode_; }
  int nodes() const { return n_; }

 private:
  // Fills work_ with the inverse of the active matrix and returns its determinant.
  double factor(std::span<const double> x, bool want_inverse);

  const ArcVarMap* map_;
  int n_;
  Mode mode_;
  std::vector<int> active_;  // variables entering the active matrix
  Eigen::MatrixXd mat_;
  Eigen::MatrixXd inv_;
};

Eigen::VectorXd det_grad(std::span<const double> x, const ArcVarMap& m, int n, Mode mode);
Eigen::MatrixXd det_hess(std::span<const double> x, const ArcVarMap& m, int n, Mode mode);

// Max violation of the row (and, for DS, column) sums and of x >= 0.
double feasibility_violation(std::span<const double> x, const ArcVarMap& m, int n, Mode mode);

}  // namespace hcdet
