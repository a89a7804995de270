#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <utility>
#include <vector>

#include "hcdet/graph.hpp"
#include "hcdet/rng.hpp"

namespace testing_util {

using hcdet::Graph;

// 1-based edge lists, as written in the papers and the examples.
inline Graph graph1(int n, std::vector<std::pair<int, int>> e) {
  for (auto& [a, b] : e) {
    --a;
    --b;
  }
  return Graph::from_edges(n, e);
}

inline Graph k3() { return graph1(3, {{1, 2}, {1, 3}, {2, 3}}); }
inline Graph c4() { return graph1(4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}}); }

inline Graph petersen() {
  return graph1(10, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}, {1, 6}, {2, 7}, {3, 8}, {4, 9}, {5, 10},
                     {6, 8}, {8, 10}, {10, 7}, {7, 9}, {9, 6}});
}

// Cube graph Q3: cubic, Hamiltonian.
inline Graph cube() {
  return graph1(8, {{1, 2}, {2, 3}, {3, 4}, {4, 1}, {5, 6}, {6, 7}, {7, 8}, {8, 5},
                    {1, 5}, {2, 6}, {3, 7}, {4, 8}});
}

// Indicator vector of a cycle on the arc map.
inline Eigen::VectorXd cycle_vector(const hcdet::ArcVarMap& m, const std::vector<int>& c) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.size());
  for (std::size_t i = 0; i < c.size(); ++i) x[m.index({c[i], c[(i + 1) % c.size()]})] = 1.0;
  return x;
}

// Dense determinant by permutation expansion (small n only).
inline double leibniz_det(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  double total = 0.0;
  do {
    int inv = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inv += p[i] > p[j];
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= A(i, p[i]);
    total += (inv % 2 ? -1.0 : 1.0) * prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline bool bipartite(const Graph& g) {
  std::vector<int> side(g.size(), -1);
  for (int s = 0; s < g.size(); ++s) {
    if (side[s] >= 0) continue;
    side[s] = 0;
    std::vector<int> st{s};
    while (!st.empty()) {
      const int u = st.back();
      st.pop_back();
      for (const auto& a : g.arcs()) {
        if (g.position(a.from) != u) continue;
        const int v = g.position(a.to);
        if (side[v] < 0) {
          side[v] = 1 - side[u];
          st.push_back(v);
        } else if (side[v] == side[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace testing_util

namespace testing_util {

// Doubly stochastic point supported on the arc pattern (Sinkhorn scaling of
// random positive weights). Requires a pattern with total support.
inline Eigen::VectorXd random_ds_point(const hcdet::ArcVarMap& m, int n, hcdet::Rng& rng) {
  Eigen::VectorXd x(m.size());
  for (int k = 0; k < m.size(); ++k) x[k] = 0.2 + rng.uniform();
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n), c = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < m.size(); ++k) r[m.row[k]] += x[k];
    for (int k = 0; k < m.size(); ++k) x[k] /= r[m.row[k]];
    for (int k = 0; k < m.size(); ++k) c[m.col[k]] += x[k];
    for (int k = 0; k < m.size(); ++k) x[k] /= c[m.col[k]];
    if ((c.array() - 1.0).abs().maxCoeff() < 1e-15 && (r.array() - 1.0).abs().maxCoeff() < 1e-15) break;
  }
  // Final row pass so rows are exact to rounding; columns stay within 1e-13.
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < m.size(); ++k) r[m.row[k]] += x[k];
  for (int k = 0; k < m.size(); ++k) x[k] /= r[m.row[k]];
  return x;
}

inline Eigen::VectorXd random_s_point(const hcdet::ArcVarMap& m, int n, hcdet::Rng& rng) {
  Eigen::VectorXd x(m.size());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < m.size(); ++k) r[m.row[k]] += (x[k] = 0.2 + rng.uniform());
  for (int k = 0; k < m.size(); ++k) x[k] /= r[m.row[k]];
  return x;
}

// Random n x n column-stochastic matrix, zero diagonal, roughly `density` fill,
// irreducible (contains a random cyclic permutation).
inline Eigen::MatrixXd random_column_stochastic(int n, double density, hcdet::Rng& rng) {
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  rng.shuffle(p);
  for (int i = 0; i < n; ++i) Q(p[(i + 1) % n], p[i]) = 0.1 + rng.uniform();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform() < density) Q(i, j) = 0.1 + rng.uniform();
  for (int j = 0; j < n; ++j) Q.col(j) /= Q.col(j).sum();
  return Q;
}

}  // namespace testing_util
