#include "hcdet/nullspace.hpp"

#include <algorithm>
#include <numeric>

#include "hcdet/errors.hpp"

namespace hcdet {

Eigen::MatrixXd ConstraintMatrix::dense() const { return dense_int().cast<double>(); }

Eigen::MatrixXi ConstraintMatrix::dense_int() const {
  Eigen::MatrixXi D = Eigen::MatrixXi::Zero(rows, cols);
  for (int k = 0; k < cols; ++k)
    for (int r : col_rows[k])
      if (r >= 0) D(r, k) = 1;
  return D;
}

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) v = parent[v] = parent[parent[v]];
  return v;
}

}  // namespace

ConstraintMatrix build_A(const ArcVarMap& m, int n, Mode mode) {
  ConstraintMatrix A;
  A.mode = mode;
  A.cols = m.size();
  A.rows = (mode == Mode::stochastic) ? n : 2 * n;
  A.col_rows.resize(A.cols);
  for (int k = 0; k < A.cols; ++k) {
    A.col_rows[k] = {m.row[k], mode == Mode::stochastic ? -1 : n + m.col[k]};
  }

  std::vector<char> nonzero(A.rows, 0);
  for (const auto& cr : A.col_rows)
    for (int r : cr)
      if (r >= 0) nonzero[r] = 1;

  if (mode == Mode::stochastic) {
    for (int r = 0; r < A.rows; ++r)
      if (nonzero[r]) A.retained.push_back(r);
    return A;
  }

  std::vector<int> parent(A.rows);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& cr : A.col_rows) parent[find_root(parent, cr[0])] = find_root(parent, cr[1]);
  // Highest column-constraint row of each component is dropped.
  std::vector<int> drop_of(A.rows, -1);
  for (int r = n; r < A.rows; ++r)
    if (nonzero[r]) drop_of[find_root(parent, r)] = r;
  std::vector<char> drop(A.rows, 0);
  for (int r : drop_of)
    if (r >= 0) drop[r] = 1;
  for (int r = 0; r < A.rows; ++r)
    if (nonzero[r] && !drop[r]) A.retained.push_back(r);
  return A;
}

Reordering reorder_ds(const ConstraintMatrix& A) {
  Reordering out;
  out.rank = A.rank();
  const int rows = out.rank;
  std::vector<int> pos_of_row(A.rows, -1);  // final B row position, set on elimination
  std::vector<char> active(A.rows, 0);
  for (int r : A.retained) active[r] = 1;

  std::vector<char> selected(A.cols, 0);
  std::vector<int> order;  // columns in selection order
  int remaining = rows;
  while (remaining > 0) {
    std::vector<int> claimed;
    std::vector<char> claimed_flag(A.rows, 0);
    for (int c = 0; c < A.cols; ++c) {
      if (selected[c]) continue;
      int hits = 0, row = -1;
      for (int r : A.col_rows[c])
        if (r >= 0 && active[r]) {
          ++hits;
          row = r;
        }
      if (hits != 1 || claimed_flag[row]) continue;
      claimed_flag[row] = 1;
      claimed.push_back(row);
      selected[c] = 1;
      pos_of_row[row] = rows - 1 - static_cast<int>(order.size());
      order.push_back(c);
    }
    if (claimed.empty())
      throw Error(Errc::disconnected, "constraint reordering stalled: no qualifying column");
    for (int r : claimed) active[r] = 0;
    remaining -= static_cast<int>(claimed.size());
  }

  // Reverse the selection order so that B becomes lower triangular.
  out.perm.assign(order.rbegin(), order.rend());
  for (int c = 0; c < A.cols; ++c)
    if (!selected[c]) out.perm.push_back(c);
  out.row_order.assign(rows, -1);
  for (int r = 0; r < A.rows; ++r)
    if (pos_of_row[r] >= 0) out.row_order[pos_of_row[r]] = r;

  std::vector<Eigen::Triplet<int>> tb, ts;
  for (int p = 0; p < A.cols; ++p) {
    const int c = out.perm[p];
    for (int r : A.col_rows[c]) {
      if (r < 0 || pos_of_row[r] < 0) continue;
      if (p < rows)
        tb.emplace_back(pos_of_row[r], p, 1);
      else
        ts.emplace_back(pos_of_row[r], p - rows, 1);
    }
  }
  out.B.resize(rows, rows);
  out.B.setFromTriplets(tb.begin(), tb.end());
  out.S.resize(rows, A.cols - rows);
  out.S.setFromTriplets(ts.begin(), ts.end());
  return out;
}

NullSpace build_Z(const ArcVarMap& m, int n, Mode mode) {
  NullSpace Z;
  Z.A_ = build_A(m, n, mode);
  const ConstraintMatrix& A = Z.A_;
  auto push = [&Z](int var, int coef) { Z.entries_.push_back({var, coef}); };

  if (mode == Mode::stochastic) {
    std::vector<int> lead(n, -1);
    for (int k = 0; k < m.size(); ++k)
      if (lead[m.row[k]] < 0) lead[m.row[k]] = k;
    for (int i = 0; i < n; ++i)
      if (lead[i] >= 0) Z.basic_.push_back(lead[i]);
    for (int k = 0; k < m.size(); ++k) {
      if (lead[m.row[k]] == k) continue;
      Z.free_.push_back(k);
      push(lead[m.row[k]], -1);
      push(k, +1);
      Z.start_.push_back(static_cast<int>(Z.entries_.size()));
    }
  } else {
    const Reordering R = reorder_ds(A);
    const int rows = R.rank;
    Z.basic_.assign(R.perm.begin(), R.perm.begin() + rows);
    // B column p has its unit pivot at row p and at most one more 1 below it.
    std::vector<int> below(rows, -1);
    for (int p = 0; p < rows; ++p)
      for (Eigen::SparseMatrix<int>::InnerIterator it(R.B, p); it; ++it)
        if (it.row() != p) below[p] = static_cast<int>(it.row());

    std::vector<int> y(rows);
    for (int t = 0; t < R.S.cols(); ++t) {
      std::fill(y.begin(), y.end(), 0);
      for (Eigen::SparseMatrix<int>::InnerIterator it(R.S, t); it; ++it) y[it.row()] += it.value();
      // Forward substitution B y = s in exact integers.
      for (int p = 0; p < rows; ++p)
        if (y[p] != 0 && below[p] >= 0) y[below[p]] -= y[p];
      const int k = R.perm[rows + t];
      Z.free_.push_back(k);
      for (int p = 0; p < rows; ++p) {
        if (y[p] == 0) continue;
        if (y[p] < -1 || y[p] > 1) throw Error(Errc::internal, "null-space entry outside {-1,0,1}");
        push(R.perm[p], -y[p]);
      }
      push(k, +1);
      Z.start_.push_back(static_cast<int>(Z.entries_.size()));
    }
  }

  Z.by_var_.assign(m.size(), {});
  for (int t = 0; t < Z.dim(); ++t)
    for (const auto& e : Z.column(t)) Z.by_var_[e.var].emplace_back(t, e.coef);
  return Z;
}

void NullSpace::apply(std::span<const double> v, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (int t = 0; t < dim(); ++t) {
    const double vt = v[t];
    if (vt == 0.0) continue;
    for (const auto& e : column(t)) out[e.var] += e.coef > 0 ? vt : -vt;
  }
}

void NullSpace::apply_transpose(std::span<const double> w, std::span<double> out) const {
  for (int t = 0; t < dim(); ++t) {
    double s = 0.0;
    for (const auto& e : column(t)) s += e.coef > 0 ? w[e.var] : -w[e.var];
    out[t] = s;
  }
}

Eigen::VectorXd NullSpace::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(vars());
  apply(std::span<const double>(v.data(), v.size()), std::span<double>(out.data(), out.size()));
  return out;
}

Eigen::VectorXd NullSpace::apply_transpose(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out(dim());
  apply_transpose(std::span<const double>(w.data(), w.size()), std::span<double>(out.data(), out.size()));
  return out;
}

Eigen::MatrixXd NullSpace::reduced(const Eigen::MatrixXd& H) const {
  const int r = dim();
  Eigen::MatrixXd HZ = Eigen::MatrixXd::Zero(vars(), r);
  for (int t = 0; t < r; ++t)
    for (const auto& e : column(t)) {
      if (e.coef > 0)
        HZ.col(t) += H.col(e.var);
      else
        HZ.col(t) -= H.col(e.var);
    }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
  for (int s = 0; s < r; ++s)
    for (const auto& e : column(s)) {
      if (e.coef > 0)
        out.row(s) += HZ.row(e.var);
      else
        out.row(s) -= HZ.row(e.var);
    }
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd NullSpace::reduced_diag(const Eigen::VectorXd& d) const {
  const int r = dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
  for (int v = 0; v < vars(); ++v) {
    const auto& list = by_var_[v];
    for (const auto& [s, cs] : list)
      for (const auto& [t, ct] : list) out(s, t) += cs * ct * d[v];
  }
  return out;
}

Eigen::MatrixXi NullSpace::materialize() const {
  Eigen::MatrixXi D = Eigen::MatrixXi::Zero(vars(), dim());
  for (int t = 0; t < dim(); ++t)
    for (const auto& e : column(t)) D(e.var, t) = e.coef;
  return D;
}

}  // namespace hcdet
