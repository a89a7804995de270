#include "hcdet/detfun.hpp"

#include <cmath>

#include "hcdet/errors.hpp"

namespace hcdet {

const char* mode_name(Mode m) { return m == Mode::stochastic ? "s" : "ds"; }

Eigen::MatrixXd assemble_P(const ArcVarMap& m, int n, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.size())
    throw Error(Errc::invalid_argument, "variable vector length does not match arc count");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < m.size(); ++k) P(m.row[k], m.col[k]) = x[k];
  return P;
}

SignProperty detect_property(const Eigen::MatrixXd& A, double tol) {
  if (A.rows() != A.cols()) return SignProperty::none;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double t = tol * scale;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (i == j ? A(i, j) < -t : A(i, j) > t) return SignProperty::none;
    }
  if ((A.colwise().sum().cwiseAbs().array() <= t).all()) return SignProperty::column_sums;
  if ((A.rowwise().sum().cwiseAbs().array() <= t).all()) return SignProperty::row_sums;
  return SignProperty::none;
}

Eigen::MatrixXd LUFactors::reconstruct() const {
  Eigen::MatrixXd P = L * U;
  if (transposed) return P.transpose();
  return P;
}

LUFactors lu_nopivot(const Eigen::MatrixXd& A) {
  const SignProperty prop = detect_property(A);
  if (prop == SignProperty::none)
    throw Error(Errc::property_violation, "matrix has neither property S_c nor S_r");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd W = (prop == SignProperty::row_sums) ? Eigen::MatrixXd(A.transpose()) : A;
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  const double skip_tol = 1e-12 * scale;
  const double zero_tol = 1e-9 * scale;

  LUFactors f;
  f.transposed = (prop == SignProperty::row_sums);
  f.L = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double piv = W(k, k);
    if (std::abs(piv) <= skip_tol) {
      const Eigen::Index rest = n - k - 1;
      if (rest > 0 && (W.col(k).tail(rest).cwiseAbs().maxCoeff() > zero_tol ||
                       W.row(k).tail(rest).cwiseAbs().maxCoeff() > zero_tol))
        throw Error(Errc::property_violation, "zero pivot with nonzero row/column: interchange required");
      f.skipped.push_back(static_cast<int>(k));
      continue;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double l = W(i, k) / piv;
      if (l == 0.0) continue;
      f.L(i, k) = l;
      W(i, k) = 0.0;
      W.row(i).tail(n - k - 1) -= l * W.row(k).tail(n - k - 1);
    }
  }
  f.U = W.triangularView<Eigen::Upper>();
  return f;
}

double feasibility_violation(std::span<const double> x, const ArcVarMap& m, int n, Mode mode) {
  std::vector<double> rows(n, 0.0), cols(n, 0.0);
  double worst = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    rows[m.row[k]] += x[k];
    cols[m.col[k]] += x[k];
    worst = std::max(worst, -x[k]);
  }
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(rows[i] - 1.0));
    if (mode == Mode::doubly_stochastic) worst = std::max(worst, std::abs(cols[i] - 1.0));
  }
  return worst;
}

double f_minor(std::span<const double> x, const ArcVarMap& m, int n) {
  if (feasibility_violation(x, m, n, Mode::doubly_stochastic) > 1e-8)
    throw Error(Errc::infeasible, "x is not doubly stochastic");
  if (n == 1) return -1.0;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - assemble_P(m, n, x);
  const LUFactors f = lu_nopivot(A);
  double det = 1.0;
  for (int k = 0; k + 1 < n; ++k) det *= f.U(k, k);
  return -det;
}

double f_full(std::span<const double> x, const ArcVarMap& m, int n) {
  if (feasibility_violation(x, m, n, Mode::stochastic) > 1e-8)
    throw Error(Errc::infeasible, "x is not row stochastic");
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - assemble_P(m, n, x);
  B.array() += 1.0 / n;
  return -B.partialPivLu().determinant();
}

DetObjective::DetObjective(const ArcVarMap& m, int n, Mode mode) : map_(&m), n_(n), mode_(mode) {
  for (int k = 0; k < m.size(); ++k) {
    if (mode == Mode::stochastic || (m.row[k] < n - 1 && m.col[k] < n - 1)) active_.push_back(k);
  }
}

double DetObjective::factor(std::span<const double> x, bool want_inverse) {
  const ArcVarMap& m = *map_;
  if (static_cast<int>(x.size()) != m.size())
    throw Error(Errc::invalid_argument, "variable vector length does not match arc count");
  const int dim = (mode_ == Mode::stochastic) ? n_ : n_ - 1;
  if (dim == 0) {
    inv_.resize(0, 0);
    return 1.0;
  }

  double det = 0.0;
  if (mode_ == Mode::doubly_stochastic) {
    // Pivot-free route through the full I - P when its column sums vanish.
    mat_ = Eigen::MatrixXd::Identity(n_, n_);
    for (int k = 0; k < m.size(); ++k) mat_(m.row[k], m.col[k]) -= x[k];
    if (detect_property(mat_, 1e-10) == SignProperty::column_sums) {
      const LUFactors f = lu_nopivot(mat_);
      det = 1.0;
      for (int k = 0; k < dim; ++k) det *= f.U(k, k);
      if (det == 0.0 || !std::isfinite(det)) throw Error(Errc::singular, "leading minor is singular");
      if (want_inverse) {
        const Eigen::MatrixXd Linv = f.L.topLeftCorner(dim, dim)
                                         .triangularView<Eigen::UnitLower>()
                                         .solve(Eigen::MatrixXd::Identity(dim, dim));
        inv_ = f.U.topLeftCorner(dim, dim).triangularView<Eigen::Upper>().solve(Linv);
      }
      return det;
    }
    mat_.conservativeResize(dim, dim);
  } else {
    mat_ = Eigen::MatrixXd::Identity(n_, n_);
    mat_.array() += 1.0 / n_;
    for (int k = 0; k < m.size(); ++k) mat_(m.row[k], m.col[k]) -= x[k];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat_);
  det = lu.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw Error(Errc::singular, "objective matrix is singular");
  if (want_inverse) inv_ = lu.inverse();
  return det;
}

double DetObjective::value(std::span<const double> x) { return -factor(x, false); }

void DetObjective::evaluate(std::span<const double> x, bool want_hess, DetEval& out) {
  const ArcVarMap& m = *map_;
  const double det = factor(x, true);
  out.value = -det;
  out.grad = Eigen::VectorXd::Zero(m.size());
  for (int k : active_) out.grad[k] = det * inv_(m.col[k], m.row[k]);
  if (!want_hess) return;
  out.hess = Eigen::MatrixXd::Zero(m.size(), m.size());
  const Eigen::MatrixXd& W = inv_;
  for (std::size_t p = 0; p < active_.size(); ++p) {
    const int k = active_[p];
    const int a = m.row[k], b = m.col[k];
    const double wba = W(b, a);
    for (std::size_t q = p + 1; q < active_.size(); ++q) {
      const int l = active_[q];
      const int c = m.row[l], d = m.col[l];
      const double h = -det * (wba * W(d, c) - W(b, c) * W(d, a));
      out.hess(k, l) = h;
      out.hess(l, k) = h;
    }
  }
}

Eigen::VectorXd det_grad(std::span<const double> x, const ArcVarMap& m, int n, Mode mode) {
  DetObjective obj(m, n, mode);
  DetEval e;
  obj.evaluate(x, false, e);
  return e.grad;
}

Eigen::MatrixXd det_hess(std::span<const double> x, const ArcVarMap& m, int n, Mode mode) {
  DetObjective obj(m, n, mode);
  DetEval e;
  obj.evaluate(x, true, e);
  return e.hess;
}

}  // namespace hcdet
