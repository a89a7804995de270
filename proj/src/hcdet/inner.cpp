#include "hcdet/inner.hpp"

#include <cmath>
#include <limits>

#include "hcdet/errors.hpp"

namespace hcdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm_rows(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

const char* direction_name(DirectionKind k) {
  switch (k) {
    case DirectionKind::descent: return "descent";
    case DirectionKind::negative_curvature: return "negcurv";
    default: return "none";
  }
}

BarrierEval barrier_eval(std::span<const double> x, bool upper_log) {
  BarrierEval b;
  const auto n = static_cast<Eigen::Index>(x.size());
  b.grad.resize(n);
  b.hess_diag.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x[i];
    if (!(v > 0.0) || (upper_log && !(v < 1.0)))
      throw Error(Errc::infeasible, "barrier evaluated on the boundary");
    b.value -= std::log(v);
    b.grad[i] = -1.0 / v;
    b.hess_diag[i] = 1.0 / (v * v);
    if (upper_log) {
      const double w = 1.0 - v;
      b.value -= std::log(w);
      b.grad[i] += 1.0 / w;
      b.hess_diag[i] += 1.0 / (w * w);
    }
  }
  return b;
}

ModifiedCholesky modified_cholesky(const Eigen::MatrixXd& Min, double delta) {
  const Eigen::Index n = Min.rows();
  ModifiedCholesky out;
  out.E = Eigen::VectorXd::Zero(n);
  out.R = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  Eigen::MatrixXd A = Min;
  A.diagonal().array() -= delta;

  const double eps = std::numeric_limits<double>::epsilon();
  double gamma = A.diagonal().cwiseAbs().maxCoeff();
  double xi = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) xi = std::max(xi, std::abs(A(i, j)));
  const double nu = std::max(1.0, std::sqrt(static_cast<double>(n * n) - 1.0));
  const double beta2 = std::max({gamma, xi / nu, eps});
  const double small = eps * std::max(gamma + xi, 1.0);

  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d(n);
  Eigen::VectorXd c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double cjj = A(j, j);
    for (Eigen::Index s = 0; s < j; ++s) cjj -= d[s] * L(j, s) * L(j, s);
    double theta = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double cij = A(i, j);
      for (Eigen::Index s = 0; s < j; ++s) cij -= d[s] * L(i, s) * L(j, s);
      c[i] = cij;
      theta = std::max(theta, std::abs(cij));
    }
    d[j] = std::max({std::abs(cjj), theta * theta / beta2, small});
    out.E[j] = d[j] - cjj;
    for (Eigen::Index i = j + 1; i < n; ++i) L(i, j) = c[i] / d[j];
  }
  out.R = d.cwiseSqrt().asDiagonal() * L.transpose();
  Eigen::Index jmax = 0;
  const double emax = out.E.maxCoeff(&jmax);
  out.modified = emax > 1e-12 * (1.0 + gamma);
  out.j = out.modified ? static_cast<int>(jmax) : -1;
  return out;
}

Direction descent_direction(const ModifiedCholesky& f, const Eigen::VectorXd& g_red,
                            const NullSpace& Z) {
  if (g_red.size() == 0 || g_red.cwiseAbs().maxCoeff() == 0.0)
    throw Error(Errc::stall, "reduced gradient is zero");
  Direction dir;
  const auto R = f.R.triangularView<Eigen::Upper>();
  dir.dz = R.solve(R.transpose().solve(-g_red));
  dir.d = Z.apply(dir.dz);
  dir.kind = DirectionKind::descent;
  return dir;
}

Direction negcurv_direction(const ModifiedCholesky& f, const Eigen::MatrixXd& Mred,
                            const Eigen::VectorXd& g_red, const NullSpace& Z) {
  if (!f.modified || f.j < 0) throw Error(Errc::invalid_argument, "factorization was not modified");
  Direction dir;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(f.R.rows());
  e[f.j] = 1.0;
  dir.dz = f.R.triangularView<Eigen::Upper>().solve(e);
  if (dir.dz.dot(g_red) > 0.0) dir.dz = -dir.dz;
  dir.d = Z.apply(dir.dz);
  dir.kind = DirectionKind::negative_curvature;
  dir.curvature = dir.dz.dot(Mred * dir.dz) / dir.dz.squaredNorm();
  return dir;
}

SweepResult improve_negcurv(const Eigen::MatrixXd& M, const Eigen::VectorXd& dz, int sweeps) {
  SweepResult out;
  const Eigen::Index n = M.rows();
  const double nrm = dz.norm();
  if (n == 0 || nrm == 0.0) {
    out.dz = dz;
    return out;
  }
  Eigen::VectorXd y = dz / nrm;
  Eigen::VectorXd u = M * y;
  double a = y.dot(u);
  for (int s = 0; s < sweeps; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      // Minimize the Rayleigh quotient over span{y, e_i}.
      const double yi = y[i], b = u[i], c = M(i, i);
      const double den = 1.0 - yi * yi;
      if (den <= 1e-14) continue;
      const double B = a + c - 2.0 * b * yi;
      const double C = a * c - b * b;
      const double disc = std::max(B * B - 4.0 * den * C, 0.0);
      const double lam = (B - std::sqrt(disc)) / (2.0 * den);
      if (!(lam < a - 1e-15 * (1.0 + std::abs(a)))) continue;
      double p = b - lam * yi, q = -(a - lam);
      const double p2 = c - lam, q2 = -(b - lam * yi);
      if (p * p + q * q < p2 * p2 + q2 * q2) {
        p = p2;
        q = q2;
      }
      const double len = std::sqrt(p * p + 2.0 * p * q * yi + q * q);
      if (!(len > 0.0)) continue;
      y *= p;
      y[i] += q;
      u = p * u + q * M.col(i);
      y /= len;
      u /= len;
      a = y.dot(u);
    }
  }
  out.dz = y;
  out.curvature = a;
  return out;
}

double max_step(std::span<const double> x, std::span<const double> d, bool upper_log) {
  double t = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d[i] < 0.0) t = std::min(t, x[i] / -d[i]);
    else if (upper_log && d[i] > 0.0) t = std::min(t, (1.0 - x[i]) / d[i]);
  }
  return t;
}

LinesearchResult linesearch(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double alpha,
                            double cap, bool upper_log, const MeritChange& change) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in (0,1)");
  if (d.size() == 0 || d.cwiseAbs().maxCoeff() == 0.0)
    throw Error(Errc::stall, "zero search direction");
  const double tstar = max_step({x.data(), static_cast<std::size_t>(x.size())},
                                {d.data(), static_cast<std::size_t>(d.size())}, upper_log);
  double t = std::min(cap, alpha * tstar);
  if (!std::isfinite(t)) t = 1.0;
  LinesearchResult r;
  for (int h = 0; h <= 50; ++h, t *= 0.5) {
    Eigen::VectorXd xn = x + t * d;
    double dm;
    try {
      dm = change(xn);
    } catch (const Error&) {
      continue;
    }
    if (dm < 0.0) {
      r.x = std::move(xn);
      r.step = t;
      r.change = dm;
      r.halvings = h;
      return r;
    }
  }
  throw Error(Errc::stall, "linesearch found no decrease after 50 halvings");
}

InnerSolver::InnerSolver(const ArcVarMap& m, int n, Mode mode, const NullSpace& Z, InnerOptions opt)
    : map_(&m), n_(n), mode_(mode), Z_(&Z), opt_(opt), obj_(m, n, mode) {}

double InnerSolver::objective(const Eigen::VectorXd& x) {
  return obj_.value({x.data(), static_cast<std::size_t>(x.size())});
}

double InnerSolver::merit(const Eigen::VectorXd& x, const BarrierSpec& spec) {
  const BarrierEval b = barrier_eval({x.data(), static_cast<std::size_t>(x.size())}, spec.upper_log);
  if (spec.neutral) return b.value;
  return objective(x) + spec.mu * b.value;
}

Eigen::MatrixXd InnerSolver::reduced_objective_hessian(const Eigen::VectorXd& x) {
  obj_.evaluate({x.data(), static_cast<std::size_t>(x.size())}, true, ev_);
  return Z_->reduced(ev_.hess);
}

Eigen::MatrixXd InnerSolver::reduced_barrier_hessian(const Eigen::VectorXd& x, bool upper_log) {
  const BarrierEval b = barrier_eval({x.data(), static_cast<std::size_t>(x.size())}, upper_log);
  return Z_->reduced_diag(b.hess_diag);
}

StepInfo InnerSolver::step(Eigen::VectorXd& x, const BarrierSpec& spec) {
  const NullSpace& Z = *Z_;
  StepInfo info;
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  const BarrierEval b = barrier_eval(xs, spec.upper_log);
  const double w = spec.neutral ? 1.0 : spec.mu;

  Eigen::VectorXd g = w * b.grad;
  Eigen::MatrixXd Mred = Z.reduced_diag(w * b.hess_diag);
  double f0;
  if (spec.neutral) {
    try {
      f0 = obj_.value(xs);
    } catch (const Error&) {
      f0 = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    obj_.evaluate(xs, true, ev_);
    f0 = ev_.value;
    g += ev_.grad;
    Mred += Z.reduced(ev_.hess);
  }
  info.f = f0;
  info.phi = b.value;
  info.merit = (spec.neutral ? 0.0 : f0) + w * b.value;
  if (Z.dim() == 0) {
    info.outcome = StepOutcome::converged;
    return info;
  }

  const Eigen::VectorXd g_red = Z.apply_transpose(g);
  info.reduced_grad = g_red.cwiseAbs().maxCoeff();

  const double delta_default = -1e-8 * (1.0 + inf_norm_rows(Mred));
  double delta = delta_est_ < 0.0 ? delta_est_ : delta_default;
  ModifiedCholesky F = modified_cholesky(Mred, delta);
  if (!F.modified && delta_est_ < 0.0) {
    // Probe for indefiniteness hidden by the previous estimate.
    for (int h = 0; h < opt_.delta_halvings && !F.modified; ++h) {
      delta *= 0.5;
      F = modified_cholesky(Mred, delta);
    }
    if (!F.modified) {
      delta = delta_default;
      delta_est_ = 0.0;
      F = modified_cholesky(Mred, delta);
    }
  }
  info.modified = F.modified;

  const double tol = spec.neutral ? opt_.neutral_tol : opt_.grad_tol * (1.0 + std::abs(f0));
  if (!F.modified && info.reduced_grad <= tol) {
    info.outcome = StepOutcome::converged;
    return info;
  }

  // Merit change evaluated as a difference: the barrier part through log1p.
  const MeritChange change = [&](const Eigen::VectorXd& xn) {
    double dphi = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double r = (xn[i] - x[i]) / x[i];
      if (!(r > -1.0)) throw Error(Errc::infeasible, "outside the box");
      dphi -= std::log1p(r);
      if (spec.upper_log) {
        const double s = -(xn[i] - x[i]) / (1.0 - x[i]);
        if (!(s > -1.0)) throw Error(Errc::infeasible, "outside the box");
        dphi -= std::log1p(s);
      }
    }
    double df = 0.0;
    if (!spec.neutral) df = obj_.value({xn.data(), static_cast<std::size_t>(xn.size())}) - f0;
    const double dm = df + w * dphi;
    if (!std::isfinite(dm)) throw Error(Errc::infeasible, "non-finite merit");
    return dm;
  };

  Direction dir;
  if (F.modified) {
    Direction nc = negcurv_direction(F, Mred, g_red, Z);
    const SweepResult sw = improve_negcurv(Mred, nc.dz, opt_.sweeps);
    const double gn = g_red.norm();
    if (sw.curvature <= delta) {
      dir.dz = sw.dz;
      if (dir.dz.dot(g_red) > 0.0) dir.dz = -dir.dz;
      dir.d = Z.apply(dir.dz);
      dir.kind = DirectionKind::negative_curvature;
      dir.curvature = sw.curvature;
      delta_est_ = sw.curvature;
      info.delta_hat = sw.curvature;
      info.grad_alignment = gn > 0.0 ? std::abs(g_red.dot(sw.dz)) / gn : 0.0;
    } else {
      delta_est_ = 0.0;
      if (info.reduced_grad <= tol) {
        info.outcome = StepOutcome::converged;
        return info;
      }
      dir = descent_direction(F, g_red, Z);
    }
  } else {
    delta_est_ = 0.0;
    dir = descent_direction(F, g_red, Z);
  }

  const double cap = dir.kind == DirectionKind::descent ? 1.0 : kInf;
  LinesearchResult ls;
  try {
    ls = linesearch(x, dir.d, opt_.alpha, cap, spec.upper_log, change);
  } catch (const Error& e) {
    if (e.code() != Errc::stall) throw;
    if (dir.kind != DirectionKind::negative_curvature || info.reduced_grad == 0.0) {
      info.outcome = StepOutcome::stalled;
      return info;
    }
    dir = descent_direction(F, g_red, Z);
    try {
      ls = linesearch(x, dir.d, opt_.alpha, 1.0, spec.upper_log, change);
    } catch (const Error& e2) {
      if (e2.code() != Errc::stall) throw;
      info.outcome = StepOutcome::stalled;
      return info;
    }
  }
  x = std::move(ls.x);
  info.kind = dir.kind;
  info.step = ls.step;
  info.merit += ls.change;
  // Report the accepted point.
  try {
    info.f = obj_.value({x.data(), static_cast<std::size_t>(x.size())});
  } catch (const Error&) {
    info.f = std::numeric_limits<double>::quiet_NaN();
  }
  info.phi = barrier_eval({x.data(), static_cast<std::size_t>(x.size())}, spec.upper_log).value;
  info.outcome = StepOutcome::moved;
  return info;
}

PhaseResult InnerSolver::minimize_phase(Eigen::VectorXd& x, const BarrierSpec& spec) {
  PhaseResult r;
  for (int it = 0; it < opt_.max_iter; ++it) {
    const StepInfo s = step(x, spec);
    if (s.outcome == StepOutcome::converged) {
      r.status = PhaseStatus::local_min;
      return r;
    }
    if (s.outcome == StepOutcome::stalled) {
      r.status = PhaseStatus::stall;
      return r;
    }
    ++r.iterations;
  }
  r.status = PhaseStatus::iteration_cap;
  return r;
}

}  // namespace hcdet
