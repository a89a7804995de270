#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "helpers.hpp"
#include "hcdet/nullspace.hpp"

using namespace hcdet;
using namespace testing_util;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

namespace {

int oracle_rank(const MatrixXd& M) {
  Eigen::FullPivLU<MatrixXd> lu(M);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

void check_nullspace(const Graph& g, Mode mode) {
  const int n = g.size();
  const ArcVarMap m = build_arc_map(g);
  const NullSpace Z = build_Z(m, n, mode);
  const ConstraintMatrix& A = Z.constraints();
  const MatrixXi Ai = A.dense_int();
  const MatrixXi Zi = Z.materialize();
  CHECK((Ai * Zi).cwiseAbs().maxCoeff() == 0);
  CHECK(Zi.minCoeff() >= -1);
  CHECK(Zi.maxCoeff() <= 1);

  const int r = oracle_rank(A.dense());
  CHECK(A.rank() == r);
  CHECK(Z.dim() == m.size() - r);
  if (mode == Mode::stochastic) CHECK(Z.dim() == m.size() - n);
  else if (!bipartite(g)) CHECK(Z.dim() == m.size() - 2 * n + 1);
  else CHECK(Z.dim() == m.size() - 2 * n + 2);

  MatrixXd AZ(m.size(), m.size());
  MatrixXd Ar(A.rank(), m.size());
  for (int i = 0; i < A.rank(); ++i) Ar.row(i) = A.dense().row(A.retained[i]);
  AZ << Ar.transpose(), Zi.cast<double>();
  CHECK(oracle_rank(AZ) == m.size());

  if (mode == Mode::stochastic) {
    std::vector<double> want;
    for (int v = 0; v < n; ++v) {
      const int d = g.out_degree(v);
      for (int k = 0; k + 2 <= d; ++k) want.push_back(1.0);
      if (d >= 2) want.back() = d;
    }
    std::sort(want.begin(), want.end());
    const MatrixXd ZtZ = Zi.cast<double>().transpose() * Zi.cast<double>();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ZtZ);
    REQUIRE(es.eigenvalues().size() == static_cast<int>(want.size()));
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(es.eigenvalues()[i] - want[i]) <= 1e-8);
  }
}

}  // namespace

TEST_CASE("constraint matrices") {
  const ArcVarMap m = build_arc_map(k3());
  const ConstraintMatrix S = build_A(m, 3, Mode::stochastic);
  MatrixXd want(3, 6);
  want << 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1;
  CHECK(S.dense() == want);
  CHECK(S.dense() * S.dense().transpose() == 2.0 * MatrixXd::Identity(3, 3));

  const ConstraintMatrix D = build_A(m, 3, Mode::doubly_stochastic);
  CHECK(D.rows == 6);
  CHECK(D.rank() == 5);
  CHECK(oracle_rank(D.dense()) == 5);
  CHECK((D.dense_int().colwise().sum().array() == 2).all());

  // Bipartite pattern: two dependent rows, not one.
  const ConstraintMatrix C = build_A(build_arc_map(c4()), 4, Mode::doubly_stochastic);
  CHECK(oracle_rank(C.dense()) == 6);
  CHECK(C.rank() == 6);
}

TEST_CASE("DS reordering") {
  for (const Graph& g : {k3(), c4(), cube(), gen_random_graph({15, 3, 5, 2, true})}) {
    const ArcVarMap m = build_arc_map(g);
    const ConstraintMatrix A = build_A(m, g.size(), Mode::doubly_stochastic);
    const Reordering R = reorder_ds(A);
    CHECK(R.rank == A.rank());
    std::vector<int> p = R.perm;
    std::sort(p.begin(), p.end());
    for (int k = 0; k < m.size(); ++k) CHECK(p[k] == k);
    const MatrixXi B(R.B);
    CHECK(B.rows() == R.rank);
    CHECK(B.cols() == R.rank);
    for (int i = 0; i < R.rank; ++i) {
      CHECK(B(i, i) == 1);
      for (int j = i + 1; j < R.rank; ++j) CHECK(B(i, j) == 0);
    }
    CHECK(B.minCoeff() >= 0);
    CHECK(B.maxCoeff() <= 1);
    // B and S are A(retained rows in row_order, perm).
    const MatrixXi Ai = A.dense_int();
    for (int i = 0; i < R.rank; ++i)
      for (int j = 0; j < R.rank; ++j) CHECK(B(i, j) == Ai(R.row_order[i], R.perm[j]));
  }
}

TEST_CASE("null-space bases") {
  SUBCASE("K3 stochastic") {
    const ArcVarMap m = build_arc_map(k3());
    const NullSpace Z = build_Z(m, 3, Mode::stochastic);
    CHECK(Z.dim() == 3);
    const MatrixXi Zi = Z.materialize();
    // The column owned by variable 1: -1 at variable 0, +1 at variable 1.
    int t = -1;
    for (int c = 0; c < Z.dim(); ++c)
      if (Z.free_var(c) == 1) t = c;
    REQUIRE(t >= 0);
    MatrixXi want = MatrixXi::Zero(6, 1);
    want(0) = -1;
    want(1) = 1;
    CHECK(Zi.col(t) == want);

    VectorXd e = VectorXd::Zero(3);
    e[t] = 1;
    CHECK(Z.apply(e) == want.cast<double>());
    CHECK(Z.apply(VectorXd::Zero(3)).isZero(0));
  }
  SUBCASE("K3 doubly stochastic") {
    const NullSpace Z = build_Z(build_arc_map(k3()), 3, Mode::doubly_stochastic);
    CHECK(Z.dim() == 1);
  }
  SUBCASE("small fixed graphs") {
    for (Mode mode : {Mode::stochastic, Mode::doubly_stochastic}) {
      check_nullspace(k3(), mode);
      check_nullspace(c4(), mode);
      check_nullspace(cube(), mode);
      check_nullspace(petersen(), mode);
    }
  }
  SUBCASE("generated graphs") {
    for (int n : {20, 35, 50})
      for (std::uint64_t s = 0; s < 3; ++s)
        for (Mode mode : {Mode::stochastic, Mode::doubly_stochastic})
          check_nullspace(gen_random_graph({n, 3, 6, 500u + s, true}), mode);
  }
}

TEST_CASE("implicit products match the dense basis") {
  const Graph g = gen_random_graph({25, 3, 6, 9, true});
  const ArcVarMap m = build_arc_map(g);
  Rng rng(3);
  for (Mode mode : {Mode::stochastic, Mode::doubly_stochastic}) {
    const NullSpace Z = build_Z(m, 25, mode);
    const MatrixXd Zd = Z.materialize().cast<double>();
    VectorXd v(Z.dim()), w(m.size());
    for (auto& a : v) a = rng.uniform() - 0.5;
    for (auto& a : w) a = rng.uniform() - 0.5;
    CHECK((Z.apply(v) - Zd * v).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((Z.apply_transpose(w) - Zd.transpose() * w).cwiseAbs().maxCoeff() < 1e-13);
    const VectorXd d = VectorXd::Constant(m.size(), 1.0) + w.cwiseAbs();
    CHECK((Z.reduced_diag(d) - Zd.transpose() * d.asDiagonal() * Zd).cwiseAbs().maxCoeff() < 1e-12);
    MatrixXd H = MatrixXd::Random(m.size(), m.size());
    H = (H + H.transpose()).eval();
    CHECK((Z.reduced(H) - Zd.transpose() * H * Zd).cwiseAbs().maxCoeff() < 1e-11);
    if (mode == Mode::doubly_stochastic) {
      const ConstraintMatrix A = build_A(m, 25, mode);
      MESSAGE("nnz(Z)=" << Z.nonzeros() << " nnz(A)=" << 2 * m.size());
      CHECK(Z.nonzeros() <= 10 * 2 * static_cast<std::size_t>(m.size()));
    }
  }
}
