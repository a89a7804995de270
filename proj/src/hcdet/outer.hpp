#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcdet/detfun.hpp"
#include "hcdet/graph.hpp"
#include "hcdet/inner.hpp"
#include "hcdet/nullspace.hpp"

namespace hcdet {

enum class RestoreMethod { lp, qp };

struct DipaParams {
  Mode mode = Mode::doubly_stochastic;
  double mu_initial = 0.01;
  double mu_shrink = 0.1;
  double alpha = 0.9;
  double deflation_threshold = 0.9;
  double deletion_threshold = 1e-5;
  RestoreMethod restore = RestoreMethod::lp;
  bool upper_log = false;
  bool drop_one_var = false;
  double mu_min = 1e-8;
  std::uint64_t seed = 0;  // recorded for provenance; the solver itself draws no random numbers
  int max_iterations = 5000;
  double time_limit = 60.0;  // seconds, <= 0 for none
  bool trace = true;
};

// Throws Errc::invalid_argument on out-of-range fields.
void validate(const DipaParams& p);

// 16 hex digits identifying all fields of p.
std::string params_hash(const DipaParams& p);

enum class SolveStatus { hc_found, no_hc_disconnected, no_hc_nonhc_local_min, gave_up };

const char* status_name(SolveStatus s);

struct TraceRow {
  int iter = 0;
  double mu = 0.0;
  double f = 0.0;
  double phi = 0.0;
  double merit = 0.0;
  double step = 0.0;
  DirectionKind kind = DirectionKind::none;
  double delta_hat = 0.0;
  double min_x = 0.0;
  int deflations = 0;
  double grad_alignment = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::gave_up;
  std::optional<CycleCertificate> cycle;  // on the original graph
  int iterations = 0;
  int deflations = 0;
  int deletions = 0;
  int mu_triggers = 0;
  int steps_after_trigger = 0;
  int negcurv_after_trigger = 0;
  double final_mu = 0.0;
  double wall_time = 0.0;
  std::string detail;
  std::vector<TraceRow> trace;
};

// Strictly interior feasible point. S: x = 1/outdeg(row). DS: max t s.t.
// Ax = e, x >= t; throws Errc::infeasible when t* <= 0.
Eigen::VectorXd initial_interior(const ArcVarMap& m, int n, Mode mode, double* t_star = nullptr);

// Variables that vanish at every DS point of the pattern (no cycle cover
// uses them).
std::vector<int> forced_zero_vars(const ArcVarMap& m, int n);

struct MuTrigger {
  double mu = 0.0;
  double lambda_min = 0.0;  // min eig of Z^T H_f Z
  double lambda_bar = 0.0;  // max eig of Z^T phi'' Z
};

// New mu that makes the reduced Hessian of f + mu phi indefinite, clamped at
// mu_min. When mu is already at the floor the result is below it.
MuTrigger mu_trigger(const Eigen::MatrixXd& red_hf, const Eigen::MatrixXd& red_phi, double mu,
                     double shrink, double mu_min);

// Rescales each row whose sum differs from one. Throws on an empty row.
Eigen::VectorXd restore_S(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n);

struct Restoration {
  enum class Kind { ok, forced_zeros, infeasible } kind = Kind::infeasible;
  Eigen::VectorXd x;
  std::vector<int> forced_zero;
  double x_min = 0.0;
  int lp_solves = 0;
};

// Restoration LP: min rho gamma + e^T(u+v) s.t. A(u - v) + gamma s = s,
// x = xbar + u - v >= x_min, with the x_min halving loop and forced-zero
// detection when it fails.
Restoration restore_DS(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n);

// Same x_min loop, then the Euclidean projection.
Restoration restore_DS_qp(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n);

// Greedy rounding of x to a permutation; returns the cycle on g when the
// permutation is a single n-cycle.
std::optional<CycleCertificate> round_to_hc(const Eigen::VectorXd& x, const Graph& g,
                                            const ArcVarMap& m, Mode mode);

SolveReport dipa_solve(const Graph& g, const DipaParams& p);

}  // namespace hcdet
