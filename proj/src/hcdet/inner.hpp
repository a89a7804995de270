#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "hcdet/detfun.hpp"
#include "hcdet/nullspace.hpp"

namespace hcdet {

// Barrier weight and family. neutral = the mu -> infinity phase, where only
// the barrier is minimized.
struct BarrierSpec {
  double mu = 0.01;
  bool neutral = false;
  bool upper_log = false;  // add -sum ln(1 - x_i)
};

struct BarrierEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd hess_diag;
};

// phi(x) = -sum ln x_i  [- sum ln(1 - x_i)]. Throws Errc::infeasible on
// boundary contact.
BarrierEval barrier_eval(std::span<const double> x, bool upper_log);

struct ModifiedCholesky {
  Eigen::MatrixXd R;  // upper triangular, R^T R = M - delta I + diag(E)
  Eigen::VectorXd E;
  bool modified = false;
  int j = -1;  // index of the largest modification
};

// Gill-Murray-Wright bounded LDL^T modification of M - delta I.
ModifiedCholesky modified_cholesky(const Eigen::MatrixXd& M, double delta);

enum class DirectionKind { none, descent, negative_curvature };

const char* direction_name(DirectionKind k);

struct Direction {
  Eigen::VectorXd d;   // full space, in range(Z)
  Eigen::VectorXd dz;  // reduced coordinates
  DirectionKind kind = DirectionKind::none;
  double curvature = 0.0;  // dz^T M dz / dz^T dz
};

// R^T R p_z = -g_red. Throws Errc::stall on a zero reduced gradient.
Direction descent_direction(const ModifiedCholesky& f, const Eigen::VectorXd& g_red,
                            const NullSpace& Z);

// R d_z = e_j, sign chosen so that d^T g <= 0.
Direction negcurv_direction(const ModifiedCholesky& f, const Eigen::MatrixXd& Mred,
                            const Eigen::VectorXd& g_red, const NullSpace& Z);

struct SweepResult {
  Eigen::VectorXd dz;  // unit length
  double curvature = 0.0;
};

// Coordinate sweeps of Rayleigh-quotient minimization of dz^T M dz / dz^T dz.
// Each coordinate update is an exact 2x2 generalized eigenproblem.
SweepResult improve_negcurv(const Eigen::MatrixXd& M, const Eigen::VectorXd& dz, int sweeps = 1);

// Largest t with x + t d strictly inside the box (infinity when unbounded).
double max_step(std::span<const double> x, std::span<const double> d, bool upper_log);

struct LinesearchResult {
  Eigen::VectorXd x;
  double step = 0.0;
  double change = 0.0;
  int halvings = 0;
};

// change(x_new) returns merit(x_new) - merit(x); it is evaluated as a
// difference so that decreases far below the merit's own rounding level are
// still resolved.
using MeritChange = std::function<double(const Eigen::VectorXd&)>;

// Tries t = min(cap, alpha t*) and halves until the merit strictly decreases.
// Throws Errc::stall after 50 halvings or for a zero direction.
LinesearchResult linesearch(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double alpha,
                            double cap, bool upper_log, const MeritChange& change);

struct InnerOptions {
  double alpha = 0.9;
  double grad_tol = 1e-6;      // scaled by 1 + |f|
  double neutral_tol = 1e-10;  // absolute, barrier-only phase
  int max_iter = 500;
  int delta_halvings = 3;
  int sweeps = 1;
};

enum class StepOutcome { moved, converged, stalled };

struct StepInfo {
  StepOutcome outcome = StepOutcome::stalled;
  DirectionKind kind = DirectionKind::none;
  double step = 0.0;
  double f = 0.0;
  double phi = 0.0;
  double merit = 0.0;
  double delta_hat = 0.0;
  double reduced_grad = 0.0;
  double grad_alignment = 0.0;  // |g^T v| / (|g| |v|) for the curvature direction
  bool modified = false;
};

enum class PhaseStatus { local_min, iteration_cap, stall };

struct PhaseResult {
  PhaseStatus status = PhaseStatus::stall;
  int iterations = 0;
};

// Barrier subproblem min f(x) + mu phi(x) on {Ax = e} in null-space form.
// Owns scratch state (the objective and delta estimate); not thread safe.
class InnerSolver {
 public:
  InnerSolver(const ArcVarMap& m, int n, Mode mode, const NullSpace& Z, InnerOptions opt = {});

  double merit(const Eigen::VectorXd& x, const BarrierSpec& spec);
  double objective(const Eigen::VectorXd& x);

  // One iteration from x (updated in place on success).
  StepInfo step(Eigen::VectorXd& x, const BarrierSpec& spec);

  // Iterates step() until a second-order point, the cap, or a stall.
  PhaseResult minimize_phase(Eigen::VectorXd& x, const BarrierSpec& spec);

  // Z^T H_f Z and Z^T diag(phi'') Z at x.
  Eigen::MatrixXd reduced_objective_hessian(const Eigen::VectorXd& x);
  Eigen::MatrixXd reduced_barrier_hessian(const Eigen::VectorXd& x, bool upper_log);

  void reset_delta() { delta_est_ = 0.0; }

 private:
  const ArcVarMap* map_;
  int n_;
  Mode mode_;
  const NullSpace* Z_;
  InnerOptions opt_;
  DetObjective obj_;
  DetEval ev_;
  double delta_est_ = 0.0;  // 0 = use default
};

}  // namespace hcdet
