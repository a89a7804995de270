#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "hcdet/errors.hpp"
#include "hcdet/inner.hpp"

using namespace hcdet;
using namespace testing_util;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::span<const double> sp(const VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

MatrixXd random_symmetric(Rng& rng, int n) {
  MatrixXd M(n, n);
  for (auto& a : M.reshaped()) a = 2 * rng.uniform() - 1;
  return (M + M.transpose()) / 2;
}

double rayleigh(const MatrixXd& M, const VectorXd& v) { return v.dot(M * v) / v.squaredNorm(); }

// Directed 3-node pattern with out-degrees 2, 2, 1: two reduced coordinates in S mode.
Graph two_dim_pattern() {
  return Graph::from_arcs({0, 1, 2}, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}});
}

}  // namespace

TEST_CASE("barrier") {
  const VectorXd third = VectorXd::Constant(12, 1.0 / 3);
  const BarrierEval b = barrier_eval(sp(third), false);
  CHECK(b.value == doctest::Approx(12 * std::log(3.0)));
  for (int k = 0; k < 12; ++k) {
    CHECK(b.grad[k] == doctest::Approx(-3.0));
    CHECK(b.hess_diag[k] == doctest::Approx(9.0));
  }
  const BarrierEval h = barrier_eval(sp(VectorXd::Constant(4, 0.5)), true);
  CHECK(h.grad.cwiseAbs().maxCoeff() < 1e-15);

  Rng rng(1);
  VectorXd x(15);
  for (auto& v : x) v = 0.05 + 0.9 * rng.uniform();
  for (bool upper : {false, true}) {
    const BarrierEval e = barrier_eval(sp(x), upper);
    for (int k = 0; k < x.size(); ++k) {
      const double h0 = 1e-6;
      VectorXd xp = x, xm = x;
      xp[k] += h0;
      xm[k] -= h0;
      const BarrierEval ep = barrier_eval(sp(xp), upper), em = barrier_eval(sp(xm), upper);
      CHECK(std::abs((ep.value - em.value) / (2 * h0) - e.grad[k]) <= 1e-7);
      CHECK(std::abs((ep.grad[k] - em.grad[k]) / (2 * h0) - e.hess_diag[k]) <= 1e-7 * (1 + e.hess_diag[k]));
    }
  }
  VectorXd edge = x;
  edge[3] = 0.0;
  CHECK_THROWS_AS(barrier_eval(sp(edge), false), Error);
  edge[3] = 1.0;
  CHECK_NOTHROW(barrier_eval(sp(edge), false));
  CHECK_THROWS_AS(barrier_eval(sp(edge), true), Error);
}

TEST_CASE("modified Cholesky") {
  SUBCASE("positive definite") {
    const ModifiedCholesky f = modified_cholesky(MatrixXd::Identity(4, 4), -1e-8);
    CHECK(!f.modified);
    CHECK((f.R - std::sqrt(1 + 1e-8) * MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("single negative diagonal") {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = 1;
    M(1, 1) = -2;
    const ModifiedCholesky f = modified_cholesky(M, 0.0);
    CHECK(f.modified);
    CHECK(f.j == 1);
  }
  SUBCASE("random indefinite reconstruction") {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
      const MatrixXd M = random_symmetric(rng, 10);
      const double delta = -1e-8;
      const ModifiedCholesky f = modified_cholesky(M, delta);
      CHECK(f.E.minCoeff() >= 0.0);
      const MatrixXd rebuilt = f.R.transpose() * f.R;
      const MatrixXd want = M - delta * MatrixXd::Identity(10, 10) + MatrixXd(f.E.asDiagonal());
      CHECK((rebuilt - want).cwiseAbs().maxCoeff() <= 1e-10 * (1 + want.cwiseAbs().maxCoeff()));
      CHECK(f.modified == (Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues()[0] < 0 || f.E.maxCoeff() > 0));
    }
  }
}

TEST_CASE("directions") {
  Rng rng(3);
  SUBCASE("identity model gives steepest descent") {
    const Graph g = cube();
    const ArcVarMap m = build_arc_map(g);
    const NullSpace Z = build_Z(m, 8, Mode::stochastic);
    const ModifiedCholesky f = modified_cholesky(MatrixXd::Identity(Z.dim(), Z.dim()), 0.0);
    VectorXd gfull(m.size());
    for (auto& v : gfull) v = rng.uniform() - 0.5;
    const VectorXd gr = Z.apply_transpose(gfull);
    const Direction d = descent_direction(f, gr, Z);
    CHECK(d.kind == DirectionKind::descent);
    CHECK((d.dz + gr).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((Z.constraints().dense() * d.d).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(descent_direction(f, VectorXd::Zero(Z.dim()), Z), Error);
  }
  SUBCASE("model decrease bound") {
    const NullSpace Z = build_Z(build_arc_map(cube()), 8, Mode::doubly_stochastic);
    for (int t = 0; t < 10; ++t) {
      MatrixXd B(Z.dim(), Z.dim());
      for (auto& a : B.reshaped()) a = rng.uniform() - 0.5;
      const MatrixXd M = B * B.transpose() + 0.1 * MatrixXd::Identity(Z.dim(), Z.dim());
      VectorXd gr(Z.dim());
      for (auto& v : gr) v = rng.uniform() - 0.5;
      const Direction d = descent_direction(modified_cholesky(M, -1e-8), gr, Z);
      const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues().maxCoeff();
      CHECK(gr.dot(d.dz) <= -gr.squaredNorm() / lmax + 1e-12);
      CHECK((Z.constraints().dense() * d.d).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("negative curvature") {
    const Graph g = two_dim_pattern();
    const ArcVarMap m = build_arc_map(g);
    const NullSpace Z = build_Z(m, 3, Mode::stochastic);
    REQUIRE(Z.dim() == 2);
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = 1;
    M(1, 1) = -2;
    for (double s : {1.0, -1.0}) {
      const VectorXd gr = (VectorXd(2) << 0.3, s * 0.7).finished();
      const Direction d = negcurv_direction(modified_cholesky(M, 0.0), M, gr, Z);
      CHECK(d.kind == DirectionKind::negative_curvature);
      CHECK(d.dz.dot(M * d.dz) < 0.0);
      CHECK(d.dz.dot(gr) <= 0.0);
      CHECK((Z.constraints().dense() * d.d).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("random indefinite") {
    const NullSpace Z = build_Z(build_arc_map(petersen()), 10, Mode::doubly_stochastic);
    for (int t = 0; t < 20; ++t) {
      const MatrixXd M = random_symmetric(rng, Z.dim());
      VectorXd gr(Z.dim());
      for (auto& v : gr) v = rng.uniform() - 0.5;
      const ModifiedCholesky f = modified_cholesky(M, -1e-8);
      REQUIRE(f.modified);
      const Direction d = negcurv_direction(f, M, gr, Z);
      CHECK(d.dz.dot(M * d.dz) < 0.0);
      CHECK(d.dz.dot(gr) <= 0.0);
    }
  }
}

TEST_CASE("curvature sweeps") {
  Rng rng(4);
  SUBCASE("eigenvector is a fixed point") {
    const MatrixXd M = random_symmetric(rng, 8);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    const VectorXd v = es.eigenvectors().col(0);
    const SweepResult r = improve_negcurv(M, v, 1);
    const double sgn = r.dz.dot(v) >= 0 ? 1.0 : -1.0;
    CHECK((sgn * r.dz - v).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.curvature == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-12));
  }
  SUBCASE("monotone decrease") {
    for (int t = 0; t < 20; ++t) {
      const MatrixXd M = random_symmetric(rng, 10);
      VectorXd v(10);
      for (auto& a : v) a = rng.uniform() - 0.5;
      const SweepResult one = improve_negcurv(M, v, 1);
      const SweepResult two = improve_negcurv(M, v, 2);
      CHECK(one.curvature < rayleigh(M, v));
      CHECK(two.curvature <= one.curvature + 1e-15);
      CHECK(one.dz.norm() == doctest::Approx(1.0));
      CHECK(one.curvature == doctest::Approx(rayleigh(M, one.dz)).epsilon(1e-12));
      CHECK(two.curvature >= Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues()[0] - 1e-12);
    }
  }
}

TEST_CASE("linesearch") {
  const VectorXd x = VectorXd::Constant(1, 0.5);
  const VectorXd d = VectorXd::Constant(1, -1.0);
  CHECK(max_step(sp(x), sp(d), false) == doctest::Approx(0.5));
  CHECK(max_step(sp(x), sp(VectorXd::Constant(1, 1.0)), false) == std::numeric_limits<double>::infinity());
  CHECK(max_step(sp(x), sp(VectorXd::Constant(1, 1.0)), true) == doctest::Approx(0.5));

  // q(x) = (x - 0.3)^2: minimizer at t = 0.2; alpha t* = 0.45 overshoots.
  const auto q = [](double v) { return (v - 0.3) * (v - 0.3); };
  const MeritChange change = [&](const VectorXd& y) { return q(y[0]) - q(0.5); };
  const LinesearchResult r = linesearch(x, d, 0.9, std::numeric_limits<double>::infinity(), false, change);
  CHECK(r.halvings == 1);
  CHECK(r.step == doctest::Approx(0.225));
  CHECK(r.x[0] == doctest::Approx(0.275));
  CHECK(r.change < 0.0);

  // A near step is accepted without halving.
  const auto q2 = [](double v) { return (v - 0.1) * (v - 0.1); };
  const MeritChange c2 = [&](const VectorXd& y) { return q2(y[0]) - q2(0.5); };
  const LinesearchResult r2 = linesearch(x, d, 0.9, std::numeric_limits<double>::infinity(), false, c2);
  CHECK(r2.halvings == 0);
  CHECK(r2.x[0] > 0.0);

  CHECK_THROWS_AS(linesearch(x, VectorXd::Zero(1), 0.9, 1.0, false, change), Error);
  const MeritChange never = [](const VectorXd&) { return 1.0; };
  CHECK_THROWS_AS(linesearch(x, d, 0.9, 1.0, false, never), Error);
}

TEST_CASE("neutral phase") {
  SUBCASE("triangle, doubly stochastic") {
    const ArcVarMap m = build_arc_map(k3());
    const NullSpace Z = build_Z(m, 3, Mode::doubly_stochastic);
    InnerSolver s(m, 3, Mode::doubly_stochastic, Z);
    // 0.8 of one orientation, 0.2 of the other.
    VectorXd x(6);
    x << 0.8, 0.2, 0.2, 0.8, 0.8, 0.2;
    BarrierSpec spec;
    spec.neutral = true;
    const PhaseResult r = s.minimize_phase(x, spec);
    CHECK(r.status == PhaseStatus::local_min);
    CHECK((x.array() - 0.5).abs().maxCoeff() <= 1e-8);
  }
  SUBCASE("cubic graphs") {
    for (const Graph& g : {cube(), petersen(), gen_random_graph({20, 3, 3, 1, true})}) {
      const ArcVarMap m = build_arc_map(g);
      for (Mode mode : {Mode::doubly_stochastic, Mode::stochastic}) {
        const NullSpace Z = build_Z(m, g.size(), mode);
        InnerSolver s(m, g.size(), mode, Z);
        Rng rng(5);
        VectorXd x = mode == Mode::stochastic ? random_s_point(m, g.size(), rng) : random_ds_point(m, g.size(), rng);
        BarrierSpec spec;
        spec.neutral = true;
        const PhaseResult r = s.minimize_phase(x, spec);
        CHECK(r.status == PhaseStatus::local_min);
        CHECK((x.array() - 1.0 / 3).abs().maxCoeff() <= 1e-8);
        for (int k = 0; k < m.size(); ++k) CHECK(std::abs(x[k] - x[m.twin[k]]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("iterates stay interior and feasible") {
  const Graph g = gen_random_graph({20, 3, 6, 21, true});
  const ArcVarMap m = build_arc_map(g);
  for (Mode mode : {Mode::doubly_stochastic, Mode::stochastic}) {
    for (bool upper : {false, true}) {
      const NullSpace Z = build_Z(m, 20, mode);
      const MatrixXd A = Z.constraints().dense();
      const VectorXd e = VectorXd::Ones(A.rows());
      InnerSolver s(m, 20, mode, Z);
      Rng rng(6);
      VectorXd x = mode == Mode::stochastic ? random_s_point(m, 20, rng) : random_ds_point(m, 20, rng);
      BarrierSpec spec;
      spec.mu = 0.01;
      spec.upper_log = upper;
      double merit = s.merit(x, spec);
      int moved = 0;
      for (int it = 0; it < 60; ++it) {
        const StepInfo info = s.step(x, spec);
        if (info.outcome != StepOutcome::moved) break;
        ++moved;
        CHECK(x.minCoeff() > 0.0);
        if (upper) CHECK(x.maxCoeff() < 1.0);
        CHECK((A * x - e).cwiseAbs().maxCoeff() <= 1e-10);
        const double now = s.merit(x, spec);
        CHECK(now < merit);
        CHECK(info.merit == doctest::Approx(now).epsilon(1e-12));
        merit = now;
      }
      CHECK(moved > 0);
    }
  }
}
