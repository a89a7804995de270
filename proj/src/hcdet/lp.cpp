#include "hcdet/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hcdet/errors.hpp"

namespace hcdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : char { basic, lower, upper };

// Dense tableau over the structural columns followed by one artificial per row.
class Simplex {
 public:
  explicit Simplex(const LinearProgram& p) : p_(p) {
    m_ = static_cast<int>(p.A.rows());
    n_ = static_cast<int>(p.A.cols());
    N_ = n_ + m_;
    lb_.resize(N_);
    ub_.resize(N_);
    lb_.head(n_) = p.lb;
    ub_.head(n_) = p.ub;
    lb_.tail(m_).setZero();
    ub_.tail(m_).setConstant(kInf);

    value_.resize(N_);
    state_.assign(N_, VarState::lower);
    value_.head(n_) = p.lb;
    Eigen::VectorXd r = p.b - p.A * p.lb;
    sign_.resize(m_);
    T_.resize(m_, N_);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      sign_[i] = r[i] >= 0 ? 1.0 : -1.0;
      T_.row(i).head(n_) = sign_[i] * p.A.row(i);
      basis_[i] = n_ + i;
      state_[n_ + i] = VarState::basic;
      value_[n_ + i] = std::abs(r[i]);
    }
    T_.rightCols(m_).setIdentity();
    scale_ = std::max(1.0, p.A.cwiseAbs().maxCoeff());
  }

  // Runs one phase; false when unbounded.
  bool run(const Eigen::VectorXd& cost) {
    const int bland_after = 3 * (m_ + N_);
    const int cap = 50 * (m_ + N_) + 1000;
    const double ctol = 1e-11 * std::max(1.0, cost.cwiseAbs().maxCoeff());
    int pivots = 0;
    for (;;) {
      if (pivots > cap) throw Error(Errc::internal, "simplex iteration cap reached (cycling?)");
      const bool bland = pivots >= bland_after;
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Eigen::VectorXd d = cost.transpose() - cb.transpose() * T_;

      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < N_; ++j) {
        if (state_[j] == VarState::basic || ub_[j] - lb_[j] <= 0.0) continue;
        double viol = 0.0;
        if (state_[j] == VarState::lower && d[j] < -ctol) viol = -d[j];
        if (state_[j] == VarState::upper && d[j] > ctol) viol = d[j];
        if (viol <= 0.0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (viol > best) {
          best = viol;
          enter = j;
        }
      }
      if (enter < 0) return true;

      const double dir = state_[enter] == VarState::lower ? 1.0 : -1.0;
      double theta = ub_[enter] - lb_[enter];
      int leave = -1;
      bool leave_to_upper = false;
      const double ptol = 1e-9 * scale_;
      for (int i = 0; i < m_; ++i) {
        const double a = dir * T_(i, enter);
        const int bv = basis_[i];
        double lim = kInf;
        bool to_upper = false;
        if (a > ptol) {
          lim = std::max(0.0, value_[bv] - lb_[bv]) / a;
        } else if (a < -ptol && ub_[bv] < kInf) {
          lim = std::max(0.0, ub_[bv] - value_[bv]) / -a;
          to_upper = true;
        } else {
          continue;
        }
        const bool better =
            lim < theta - 1e-14 ||
            (lim <= theta + 1e-14 && leave >= 0 &&
             (bland ? bv < basis_[leave] : std::abs(a) > std::abs(dir * T_(leave, enter))));
        if (better || (leave < 0 && lim <= theta)) {
          theta = lim;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (theta == kInf) return false;

      for (int i = 0; i < m_; ++i) value_[basis_[i]] -= dir * theta * T_(i, enter);
      value_[enter] += dir * theta;
      ++pivots;
      ++iterations_;
      if (leave < 0) {
        state_[enter] = state_[enter] == VarState::lower ? VarState::upper : VarState::lower;
        value_[enter] = state_[enter] == VarState::lower ? lb_[enter] : ub_[enter];
        continue;
      }
      const int out = basis_[leave];
      state_[out] = leave_to_upper ? VarState::upper : VarState::lower;
      value_[out] = leave_to_upper ? ub_[out] : lb_[out];
      pivot(leave, enter);
    }
  }

  void pivot(int r, int c) {
    const double pv = T_(r, c);
    T_.row(r) /= pv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    basis_[r] = c;
    state_[c] = VarState::basic;
  }

  double artificial_sum() const {
    double s = 0.0;
    for (int j = n_; j < N_; ++j) s += value_[j];
    return s;
  }

  void fix_artificials() {
    for (int j = n_; j < N_; ++j) ub_[j] = 0.0;
  }

  // Recomputes basic values and duals from the original columns.
  void refactor(const Eigen::VectorXd& cost, LpResult& out) const {
    Eigen::MatrixXd Bm(m_, m_);
    Eigen::VectorXd rhs = p_.b;
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == VarState::basic) continue;
      const double v = state_[j] == VarState::lower ? lb_[j] : ub_[j];
      if (v != 0.0) rhs -= v * column(j);
    }
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) {
      Bm.col(i) = column(basis_[i]);
      cb[i] = cost[basis_[i]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Bm);
    Eigen::VectorXd full = value_;
    const Eigen::VectorXd xb = lu.solve(rhs);
    bool sane = xb.allFinite();
    for (int i = 0; i < m_ && sane; ++i)
      if (std::abs(xb[i] - value_[basis_[i]]) > 1e-6 * (1.0 + std::abs(value_[basis_[i]]))) sane = false;
    if (sane)
      for (int i = 0; i < m_; ++i) full[basis_[i]] = xb[i];
    out.x = full.head(n_);
    for (int j = 0; j < n_; ++j) out.x[j] = std::min(std::max(out.x[j], p_.lb[j]), p_.ub[j]);
    Eigen::VectorXd y = lu.transpose().solve(cb);
    if (!sane || !y.allFinite()) y.setZero();
    out.duals = y;
    out.reduced_costs = p_.c - p_.A.transpose() * y;
  }

  int iterations() const { return iterations_; }
  int n() const { return n_; }
  int N() const { return N_; }

 private:
  Eigen::VectorXd column(int j) const {
    if (j < n_) return p_.A.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    e[j - n_] = sign_[j - n_];
    return e;
  }

  const LinearProgram& p_;
  int m_ = 0, n_ = 0, N_ = 0;
  Eigen::MatrixXd T_;
  Eigen::VectorXd lb_, ub_, value_, sign_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  double scale_ = 1.0;
  int iterations_ = 0;
};

void validate(const LinearProgram& p) {
  const auto n = p.A.cols();
  if (p.c.size() != n || p.lb.size() != n || p.ub.size() != n || p.b.size() != p.A.rows())
    throw Error(Errc::invalid_argument, "linear program dimensions are inconsistent");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(p.lb[j])) throw Error(Errc::invalid_argument, "lower bounds must be finite");
    if (p.lb[j] > p.ub[j]) throw Error(Errc::invalid_argument, "lower bound exceeds upper bound");
  }
}

}  // namespace

LpResult lp_solve(const LinearProgram& p) {
  validate(p);
  LpResult out;
  if (p.A.rows() == 0) {
    // Bounds only: each variable sits at its cheaper bound.
    const Eigen::Index n = p.c.size();
    out.x.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (p.c[j] >= 0.0) out.x[j] = p.lb[j];
      else if (std::isfinite(p.ub[j])) out.x[j] = p.ub[j];
      else {
        out.status = LpStatus::unbounded;
        return out;
      }
    }
    out.duals.resize(0);
    out.reduced_costs = p.c;
    out.objective = p.c.dot(out.x);
    out.status = LpStatus::optimal;
    return out;
  }
  Simplex s(p);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(s.N());
  phase1.tail(s.N() - s.n()).setOnes();
  s.run(phase1);
  const double feas_tol = 1e-9 * (1.0 + p.b.cwiseAbs().sum());
  if (s.artificial_sum() > feas_tol) {
    out.status = LpStatus::infeasible;
    out.iterations = s.iterations();
    return out;
  }
  s.fix_artificials();

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(s.N());
  cost.head(s.n()) = p.c;
  const bool bounded = s.run(cost);
  out.iterations = s.iterations();
  if (!bounded) {
    out.status = LpStatus::unbounded;
    return out;
  }
  s.refactor(cost, out);
  out.status = LpStatus::optimal;
  out.objective = p.c.dot(out.x);
  return out;
}

QpResult qp_least_distance(const Eigen::VectorXd& target, const Eigen::MatrixXd& A,
                           const Eigen::VectorXd& b, const Eigen::VectorXd& lb,
                           const Eigen::VectorXd& ub) {
  const int n = static_cast<int>(target.size());
  QpResult out;
  LinearProgram feas{Eigen::VectorXd::Zero(n), A, b, lb, ub};
  const LpResult start = lp_solve(feas);
  if (start.status != LpStatus::optimal) return out;

  Eigen::VectorXd x = start.x;
  const double btol = 1e-12 * (1.0 + x.cwiseAbs().maxCoeff());
  // +1 active at lower, -1 active at upper, 0 free.
  std::vector<int> active(n, 0);
  for (int j = 0; j < n; ++j) {
    if (x[j] - lb[j] <= btol) active[j] = 1;
    else if (ub[j] - x[j] <= btol) active[j] = -1;
  }

  const int cap = 20 * (n + static_cast<int>(A.rows())) + 100;
  for (int it = 0; it < cap; ++it) {
    out.iterations = it + 1;
    std::vector<int> fr;
    for (int j = 0; j < n; ++j)
      if (active[j] == 0) fr.push_back(j);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (!fr.empty()) {
      Eigen::MatrixXd AF(A.rows(), fr.size());
      Eigen::VectorXd rF(fr.size());
      for (std::size_t q = 0; q < fr.size(); ++q) {
        AF.col(q) = A.col(fr[q]);
        rF[q] = target[fr[q]] - x[fr[q]];
      }
      // Projection of rF onto null(AF).
      Eigen::VectorXd pF = rF;
      if (A.rows() > 0) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(AF.transpose());
        pF -= AF.transpose() * cod.solve(rF);
      }
      for (std::size_t q = 0; q < fr.size(); ++q) p[fr[q]] = pF[q];
    }

    if (p.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + x.cwiseAbs().maxCoeff())) {
      // Multipliers from g = A^T y + sum_W s_j mu_j e_j.
      const Eigen::VectorXd g = x - target;
      std::vector<int> W;
      for (int j = 0; j < n; ++j)
        if (active[j] != 0) W.push_back(j);
      Eigen::MatrixXd K(n, A.rows() + W.size());
      K.leftCols(A.rows()) = A.transpose();
      for (std::size_t q = 0; q < W.size(); ++q) {
        K.col(A.rows() + q).setZero();
        K(W[q], A.rows() + q) = active[W[q]];
      }
      Eigen::VectorXd mult = Eigen::VectorXd::Zero(K.cols());
      if (K.cols() > 0) mult = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(K).solve(g);
      out.kkt_residual = (K * mult - g).cwiseAbs().maxCoeff();
      int drop = -1;
      double worst = -1e-10 * (1.0 + g.cwiseAbs().maxCoeff());
      for (std::size_t q = 0; q < W.size(); ++q) {
        const double mu = mult[A.rows() + q];
        if (mu < worst) {
          worst = mu;
          drop = W[q];
        }
      }
      if (drop < 0) {
        out.status = QpStatus::optimal;
        out.x = x;
        return out;
      }
      active[drop] = 0;
      continue;
    }

    double step = 1.0;
    int block = -1, block_side = 0;
    for (int j = 0; j < n; ++j) {
      if (active[j] != 0) continue;
      if (p[j] < 0.0) {
        const double lim = (lb[j] - x[j]) / p[j];
        if (lim < step) {
          step = std::max(lim, 0.0);
          block = j;
          block_side = 1;
        }
      } else if (p[j] > 0.0 && std::isfinite(ub[j])) {
        const double lim = (ub[j] - x[j]) / p[j];
        if (lim < step) {
          step = std::max(lim, 0.0);
          block = j;
          block_side = -1;
        }
      }
    }
    x += step * p;
    if (block >= 0) {
      active[block] = block_side;
      x[block] = block_side > 0 ? lb[block] : ub[block];
    }
  }
  throw Error(Errc::internal, "active-set QP iteration cap reached");
}

}  // namespace hcdet
