#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <span>
#include <vector>

#include "hcdet/detfun.hpp"
#include "hcdet/graph.hpp"

namespace hcdet {

// 0/1 equality constraints A x = e. Rows 0..n-1 are row-sum constraints;
// in DS mode rows n..2n-1 are column-sum constraints.
struct ConstraintMatrix {
  Mode mode = Mode::stochastic;
  int rows = 0;
  int cols = 0;
  std::vector<std::array<int, 2>> col_rows;  // rows holding a 1 in each column (-1 = none)
  std::vector<int> retained;                 // full-rank row subset, ascending

  int rank() const { return static_cast<int>(retained.size()); }
  Eigen::MatrixXd dense() const;
  Eigen::MatrixXi dense_int() const;
};

// DS rank trimming drops one column-constraint row (the highest-numbered) per
// connected component of the row/column incidence graph. For connected
// non-bipartite graphs that is exactly one row; bipartite graphs lose two.
ConstraintMatrix build_A(const ArcVarMap& m, int n, Mode mode);

// Column order I with A(retained, I) = [B S], B unit lower triangular with
// 0/1 entries. Produced by repeated selection of columns with a single 1 in
// the still-active rows, then reversal of the selected order.
struct Reordering {
  int rank = 0;
  std::vector<int> perm;       // position -> variable; first `rank` positions form B
  std::vector<int> row_order;  // B row position -> constraint row
  Eigen::SparseMatrix<int> B;
  Eigen::SparseMatrix<int> S;
};

Reordering reorder_ds(const ConstraintMatrix& A);

// Implicit basis Z of null(A). Each column is a short signed selector with
// entries in {-1, +1}; products with Z and Z^T are additions only.
class NullSpace {
 public:
  struct Entry {
    int var;
    int coef;
  };

  Mode mode() const { return A_.mode; }
  int vars() const { return A_.cols; }
  int dim() const { return static_cast<int>(start_.size()) - 1; }
  const ConstraintMatrix& constraints() const { return A_; }
  // Basic variables (leading arc per row in S mode, B columns in DS mode).
  std::span<const int> basic() const { return basic_; }
  // Nonbasic variable owning reduced coordinate t.
  int free_var(int t) const { return free_[t]; }
  std::span<const Entry> column(int t) const {
    return {entries_.data() + start_[t], entries_.data() + start_[t + 1]};
  }
  std::size_t nonzeros() const { return entries_.size(); }

  void apply(std::span<const double> v, std::span<double> out) const;
  void apply_transpose(std::span<const double> w, std::span<double> out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& w) const;

  // Z^T H Z, formed densely.
  Eigen::MatrixXd reduced(const Eigen::MatrixXd& H) const;
  // Z^T diag(d) Z.
  Eigen::MatrixXd reduced_diag(const Eigen::VectorXd& d) const;

  // Dense Z; test support only.
  Eigen::MatrixXi materialize() const;

  friend NullSpace build_Z(const ArcVarMap& m, int n, Mode mode);

 private:
  ConstraintMatrix A_;
  std::vector<int> basic_;
  std::vector<int> free_;
  std::vector<int> start_{0};
  std::vector<Entry> entries_;
  // Per variable: (reduced coordinate, coefficient) pairs, for Z^T products.
  std::vector<std::vector<std::pair<int, int>>> by_var_;
};

NullSpace build_Z(const ArcVarMap& m, int n, Mode mode);

}  // namespace hcdet
