#include "hcdet/outer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "hcdet/errors.hpp"
#include "hcdet/lp.hpp"

namespace hcdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd remap_values(const Eigen::VectorXd& x, const std::vector<int>& vm, int new_size) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(new_size);
  for (std::size_t k = 0; k < vm.size(); ++k)
    if (vm[k] >= 0) y[vm[k]] = x[static_cast<Eigen::Index>(k)];
  return y;
}

Eigen::MatrixXd full_A(const ArcVarMap& m, int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, m.size());
  for (int k = 0; k < m.size(); ++k) {
    A(m.row[k], k) = 1.0;
    A(n + m.col[k], k) = 1.0;
  }
  return A;
}

// Kuhn matching of rows to columns over the arc pattern.
bool try_augment(int r, const std::vector<std::vector<int>>& adj, std::vector<int>& match_col,
                 std::vector<char>& seen) {
  for (int c : adj[r]) {
    if (seen[c]) continue;
    seen[c] = 1;
    if (match_col[c] < 0 || try_augment(match_col[c], adj, match_col, seen)) {
      match_col[c] = r;
      return true;
    }
  }
  return false;
}

// Kosaraju components of a small digraph.
std::vector<int> scc(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<int>> radj(n);
  for (int u = 0; u < n; ++u)
    for (int v : adj[u]) radj[v].push_back(u);
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, std::size_t>> st{{s, 0}};
    seen[s] = 1;
    while (!st.empty()) {
      auto& [u, i] = st.back();
      if (i < adj[u].size()) {
        const int v = adj[u][i++];
        if (!seen[v]) {
          seen[v] = 1;
          st.push_back({v, 0});
        }
      } else {
        order.push_back(u);
        st.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  int c = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> st{*it};
    comp[*it] = c;
    while (!st.empty()) {
      const int u = st.back();
      st.pop_back();
      for (int v : radj[u])
        if (comp[v] < 0) {
          comp[v] = c;
          st.push_back(v);
        }
    }
    ++c;
  }
  return comp;
}

// Least-squares correction of A x = e (A has full column structure of a DS pattern).
Eigen::VectorXd polish(const Eigen::VectorXd& x, const Eigen::MatrixXd& A) {
  const Eigen::VectorXd r = A * x - Eigen::VectorXd::Ones(A.rows());
  if (r.cwiseAbs().maxCoeff() <= 1e-15) return x;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  return x - cod.solve(r);
}

struct CoverInfo {
  bool has_cover = false;
  std::vector<int> forced;
};

CoverInfo cover_info(const ArcVarMap& m, int n) {
  CoverInfo out;
  std::vector<std::vector<int>> adj(n);
  for (int k = 0; k < m.size(); ++k) adj[m.row[k]].push_back(m.col[k]);
  std::vector<int> match_col(n, -1);
  for (int r = 0; r < n; ++r) {
    std::vector<char> seen(n, 0);
    if (!try_augment(r, adj, match_col, seen)) return out;
  }
  out.has_cover = true;
  std::vector<int> match_row(n, -1);
  for (int c = 0; c < n; ++c) match_row[match_col[c]] = c;
  // Rows 0..n-1, columns n..2n-1. Matched arcs point column -> row.
  std::vector<std::vector<int>> dg(2 * n);
  for (int k = 0; k < m.size(); ++k) {
    const int r = m.row[k], c = m.col[k];
    if (match_row[r] == c) dg[n + c].push_back(r);
    else dg[r].push_back(n + c);
  }
  const std::vector<int> comp = scc(dg);
  for (int k = 0; k < m.size(); ++k) {
    const int r = m.row[k], c = m.col[k];
    if (match_row[r] != c && comp[r] != comp[n + c]) out.forced.push_back(k);
  }
  return out;
}

double max_t_lp(const ArcVarMap& m, int n, Eigen::VectorXd* x) {
  const int nv = m.size();
  const Eigen::MatrixXd A = full_A(m, n);
  LinearProgram lp;
  lp.A.resize(2 * n, nv + 1);
  lp.A.leftCols(nv) = A;
  lp.A.col(nv) = A.rowwise().sum();
  lp.b = Eigen::VectorXd::Ones(2 * n);
  lp.c = Eigen::VectorXd::Zero(nv + 1);
  lp.c[nv] = -1.0;
  lp.lb = Eigen::VectorXd::Zero(nv + 1);
  lp.ub = Eigen::VectorXd::Ones(nv + 1);
  const LpResult r = lp_solve(lp);
  if (r.status != LpStatus::optimal) return 0.0;
  const double t = r.x[nv];
  if (x) *x = polish(r.x.head(nv).array() + t, A);
  return t;
}

// One restoration LP at a fixed x_min. Returns gamma.
double restoration_lp(const Eigen::VectorXd& xbar, const Eigen::MatrixXd& A, double x_min,
                      Eigen::VectorXd& x) {
  const int nv = static_cast<int>(xbar.size());
  const int rows = static_cast<int>(A.rows());
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(rows) - A * xbar;
  LinearProgram lp;
  lp.A.resize(rows, 2 * nv + 1);
  lp.A.leftCols(nv) = A;
  lp.A.middleCols(nv, nv) = -A;
  lp.A.col(2 * nv) = s;
  lp.b = s;
  lp.c = Eigen::VectorXd::Ones(2 * nv + 1);
  lp.c[2 * nv] = 1e3 * (1.0 + s.cwiseAbs().sum());
  lp.lb = Eigen::VectorXd::Zero(2 * nv + 1);
  lp.ub.resize(2 * nv + 1);
  for (int k = 0; k < nv; ++k) {
    lp.ub[k] = std::max(0.0, 1.0 - xbar[k]);
    lp.ub[nv + k] = std::max(0.0, xbar[k] - x_min);
  }
  lp.ub[2 * nv] = 1.0;
  const LpResult r = lp_solve(lp);
  if (r.status != LpStatus::optimal) throw Error(Errc::internal, "restoration LP not solved to optimality");
  x = xbar + r.x.head(nv) - r.x.segment(nv, nv);
  return r.x[2 * nv];
}

Restoration restore_impl(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n, bool qp) {
  Restoration out;
  const Eigen::MatrixXd A = full_A(m, n);
  if (xbar.size() == 0) {
    out.kind = n == 0 ? Restoration::Kind::ok : Restoration::Kind::infeasible;
    return out;
  }
  double x_min = std::max(xbar.minCoeff(), 1e-10);
  Eigen::VectorXd x;
  bool ok = false;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    ++out.lp_solves;
    const double gamma = restoration_lp(xbar, A, x_min, x);
    if (gamma <= 1e-9) {
      ok = true;
      break;
    }
    if (x_min <= 1e-10) break;
    x_min = std::max(0.5 * x_min, 1e-10);
  }
  if (!ok) {
    const CoverInfo ci = cover_info(m, n);
    if (!ci.has_cover) return out;
    if (!ci.forced.empty()) {
      out.kind = Restoration::Kind::forced_zeros;
      out.forced_zero = ci.forced;
      return out;
    }
    const double t = max_t_lp(m, n, nullptr);
    if (!(t > 1e-12)) return out;
    x_min = std::min(x_min, 0.5 * t);
    ++out.lp_solves;
    if (restoration_lp(xbar, A, x_min, x) > 1e-9) return out;
  }
  if (qp) {
    const QpResult q = qp_least_distance(xbar, A, Eigen::VectorXd::Ones(A.rows()),
                                         Eigen::VectorXd::Constant(xbar.size(), x_min),
                                         Eigen::VectorXd::Ones(xbar.size()));
    if (q.status == QpStatus::optimal) x = q.x;
  }
  const Eigen::VectorXd xp = polish(x, A);
  if (xp.minCoeff() >= 0.5 * x_min) x = xp;
  out.kind = Restoration::Kind::ok;
  out.x = x;
  out.x_min = x_min;
  return out;
}

void fnv(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
}

}  // namespace

void validate(const DipaParams& p) {
  auto bad = [](const char* what) { throw Error(Errc::invalid_argument, what); };
  if (!(p.mu_initial > 0.0)) bad("mu_initial must be positive");
  if (!(p.mu_shrink > 0.0 && p.mu_shrink < 1.0)) bad("mu_shrink must lie in (0,1)");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) bad("alpha must lie in (0,1)");
  if (!(p.deflation_threshold > 0.5 && p.deflation_threshold <= 1.0))
    bad("deflation threshold must lie in (0.5, 1]");
  if (!(p.deletion_threshold >= 0.0 && p.deletion_threshold < 0.01))
    bad("deletion threshold must lie in [0, 0.01)");
  if (!(p.mu_min > 0.0)) bad("mu_min must be positive");
  if (p.max_iterations < 1) bad("max_iterations must be positive");
}

std::string params_hash(const DipaParams& p) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s|%.17g|%.17g|%.17g|%.17g|%.17g|%s|%d|%d|%.17g|%llu|%d|%.17g",
                mode_name(p.mode), p.mu_initial, p.mu_shrink, p.alpha, p.deflation_threshold,
                p.deletion_threshold, p.restore == RestoreMethod::lp ? "lp" : "qp", p.upper_log,
                p.drop_one_var, p.mu_min, static_cast<unsigned long long>(p.seed), p.max_iterations,
                p.time_limit);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  fnv(h, buf);
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::hc_found: return "HC-found";
    case SolveStatus::no_hc_disconnected: return "no-HC-disconnected";
    case SolveStatus::no_hc_nonhc_local_min: return "no-HC-nonHC-local-min";
    default: return "gave-up";
  }
}

Eigen::VectorXd initial_interior(const ArcVarMap& m, int n, Mode mode, double* t_star) {
  Eigen::VectorXd x(m.size());
  if (mode == Mode::stochastic) {
    std::vector<int> deg(n, 0);
    for (int k = 0; k < m.size(); ++k) ++deg[m.row[k]];
    for (int k = 0; k < m.size(); ++k) x[k] = 1.0 / deg[m.row[k]];
    if (t_star) *t_star = x.size() ? x.minCoeff() : 0.0;
    return x;
  }
  const double t = max_t_lp(m, n, &x);
  if (t_star) *t_star = t;
  if (!(t > 1e-12)) throw Error(Errc::infeasible, "graph admits no strictly interior doubly stochastic point");
  return x;
}

std::vector<int> forced_zero_vars(const ArcVarMap& m, int n) {
  CoverInfo ci = cover_info(m, n);
  if (!ci.has_cover) throw Error(Errc::infeasible, "pattern has no cycle cover");
  return ci.forced;
}

MuTrigger mu_trigger(const Eigen::MatrixXd& red_hf, const Eigen::MatrixXd& red_phi, double mu,
                     double shrink, double mu_min) {
  MuTrigger t;
  // Already at the floor: no further reduction possible.
  if (mu <= mu_min) {
    t.mu = shrink * mu;
    if (red_hf.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(red_hf, Eigen::EigenvaluesOnly);
      t.lambda_min = eh.eigenvalues()[0];
    }
    return t;
  }
  t.mu = std::max(shrink * mu, mu_min);
  if (red_hf.rows() == 0) return t;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(red_hf, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(red_phi, Eigen::EigenvaluesOnly);
  t.lambda_min = eh.eigenvalues()[0];
  t.lambda_bar = ep.eigenvalues()[ep.eigenvalues().size() - 1];
  if (t.lambda_min < 0.0 && t.lambda_bar > 0.0) {
    t.mu = std::max(std::min(shrink * mu, 0.5 * std::abs(t.lambda_min) / t.lambda_bar), mu_min);
    while (t.mu / 10.0 >= mu_min) {
      Eigen::LLT<Eigen::MatrixXd> llt(red_hf + t.mu * red_phi);
      if (llt.info() != Eigen::Success) break;
      t.mu /= 10.0;
    }
  }
  return t;
}

Eigen::VectorXd restore_S(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n) {
  std::vector<double> sum(n, 0.0);
  std::vector<int> cnt(n, 0);
  for (int k = 0; k < m.size(); ++k) {
    sum[m.row[k]] += xbar[k];
    ++cnt[m.row[k]];
  }
  Eigen::VectorXd x = xbar;
  for (int k = 0; k < m.size(); ++k) {
    const int r = m.row[k];
    if (sum[r] == 1.0) continue;
    if (!(sum[r] > 0.0)) throw Error(Errc::infeasible, "row has no remaining mass");
    x[k] = xbar[k] / sum[r];
  }
  for (int r = 0; r < n; ++r)
    if (cnt[r] == 0) throw Error(Errc::infeasible, "row has no remaining variables");
  return x;
}

Restoration restore_DS(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n) {
  return restore_impl(xbar, m, n, false);
}

Restoration restore_DS_qp(const Eigen::VectorXd& xbar, const ArcVarMap& m, int n) {
  return restore_impl(xbar, m, n, true);
}

std::optional<CycleCertificate> round_to_hc(const Eigen::VectorXd& x, const Graph& g,
                                            const ArcVarMap& m, Mode mode) {
  const int n = g.size();
  if (n == 0) return std::nullopt;
  std::vector<double> val(x.data(), x.data() + x.size());
  std::vector<char> dead(m.size(), 0), row_done(n, 0), col_used(n, 0);
  std::vector<std::vector<int>> by_row(n);
  for (int k = 0; k < m.size(); ++k) by_row[m.row[k]].push_back(k);

  // Static row order for DS: decreasing row maximum, ties by variable index.
  std::vector<std::pair<double, int>> order;  // (-max, first argmax var) -> row via m.row
  if (mode == Mode::doubly_stochastic) {
    for (int r = 0; r < n; ++r) {
      int best = -1;
      for (int k : by_row[r])
        if (best < 0 || val[k] > val[best]) best = k;
      if (best < 0) return std::nullopt;
      order.push_back({-val[best], best});
    }
    std::sort(order.begin(), order.end());
  }

  std::vector<int> succ(n, -1);
  for (int step = 0; step < n; ++step) {
    int r;
    if (mode == Mode::doubly_stochastic) {
      r = m.row[order[step].second];
    } else {
      int best = -1;
      for (int k = 0; k < m.size(); ++k) {
        if (row_done[m.row[k]] || dead[k]) continue;
        if (best < 0 || val[k] > val[best]) best = k;
      }
      if (best < 0) return std::nullopt;
      r = m.row[best];
    }
    int pick = -1;
    for (int k : by_row[r]) {
      if (dead[k] || col_used[m.col[k]] || !(val[k] > 0.0)) continue;
      if (pick < 0 || val[k] > val[pick]) pick = k;
    }
    if (pick < 0) return std::nullopt;
    const int c = m.col[pick];
    row_done[r] = 1;
    col_used[c] = 1;
    succ[r] = c;
    for (int k = 0; k < m.size(); ++k) {
      if (k == pick) continue;
      if (m.row[k] == r || m.col[k] == c || (n > 2 && k == m.twin[pick])) {
        dead[k] = 1;
        val[k] = 0.0;
      }
    }
    val[pick] = 1.0;
    if (mode == Mode::stochastic) {
      // Rebalance the open rows.
      for (int q = 0; q < n; ++q) {
        if (row_done[q]) continue;
        double s = 0.0;
        for (int k : by_row[q]) s += val[k];
        if (s > 0.0)
          for (int k : by_row[q]) val[k] /= s;
      }
    }
  }

  // Single n-cycle check.
  std::vector<int> seq;
  int p = 0;
  for (int t = 0; t < n; ++t) {
    seq.push_back(g.nodes()[p]);
    p = succ[p];
    if (p < 0) return std::nullopt;
    if (p == 0 && t + 1 < n) return std::nullopt;
  }
  if (p != 0) return std::nullopt;
  CycleCertificate c{seq};
  if (!verify_cycle(g, c)) return std::nullopt;
  return c;
}

namespace {

// Graph plus the structures the inner solver points into.
struct Stage {
  Stage(Graph graph, Mode mode, const InnerOptions& opt)
      : g(std::move(graph)),
        m(build_arc_map(g)),
        Z(build_Z(m, g.size(), mode)),
        inner(m, g.size(), mode, Z, opt) {}
  Stage(const Stage&) = delete;
  Stage& operator=(const Stage&) = delete;

  Graph g;
  ArcVarMap m;
  NullSpace Z;
  InnerSolver inner;
};

class Dipa {
 public:
  Dipa(const Graph& g0, const DipaParams& p) : g0_(g0), p_(p) {
    opt_.alpha = p.alpha;
  }

  SolveReport run() {
    start_ = std::chrono::steady_clock::now();
    try {
      solve();
    } catch (const Error& e) {
      finish(e.code() == Errc::disconnected || e.code() == Errc::infeasible
                 ? SolveStatus::no_hc_disconnected
                 : SolveStatus::gave_up,
             e.what());
    }
    rep_.final_mu = mu_;
    rep_.wall_time = elapsed();
    return std::move(rep_);
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void finish(SolveStatus s, std::string detail) {
    if (done_) return;
    done_ = true;
    rep_.status = s;
    rep_.detail = std::move(detail);
  }

  // Accepts a cycle of the current reduced graph after checking its expansion.
  bool accept(const CycleCertificate& reduced) {
    CycleCertificate full;
    try {
      full = expand_cycle(records_, reduced);
    } catch (const Error&) {
      return false;
    }
    if (!verify_cycle(g0_, full)) return false;
    rep_.cycle = std::move(full);
    finish(SolveStatus::hc_found, "");
    return true;
  }

  // Two or fewer nodes left: the remaining arcs already close the cycle.
  bool settle_small(const Graph& g) {
    if (g.size() > 2) return false;
    CycleCertificate c;
    c.nodes.assign(g.nodes().begin(), g.nodes().end());
    if (!verify_cycle(g, c) || !accept(c)) finish(SolveStatus::gave_up, "reduced graph did not expand to a cycle");
    return true;
  }

  void rebuild(Graph g) {
    stage_.reset();
    stage_ = std::make_unique<Stage>(std::move(g), p_.mode, opt_);
  }

  void delete_vars(Graph& g, std::vector<int> vars, const ArcVarMap& m, Eigen::VectorXd& x) {
    std::sort(vars.begin(), vars.end());
    std::vector<Arc> arcs;
    for (int k : vars) arcs.push_back(m.arcs[k]);
    std::vector<int> vm(m.size());
    for (int k = 0; k < m.size(); ++k) vm[k] = k;
    for (const Arc& a : arcs) {
      DeletionResult d = delete_arc(g, a);
      for (int& v : vm)
        if (v >= 0) v = d.var_map[v];
      g = std::move(d.graph);
    }
    rep_.deletions += static_cast<int>(arcs.size());
    x = remap_values(x, vm, static_cast<int>(g.arcs().size()));
  }

  // Restores feasibility on the current stage, deleting forced zeros as needed.
  // Returns false when the solve has ended.
  bool restore(Eigen::VectorXd xbar) {
    for (;;) {
      if (settle_small(stage_->g)) return false;
      if (!is_connected(stage_->g)) {
        finish(SolveStatus::no_hc_disconnected, "graph disconnected after surgery");
        return false;
      }
      const int n = stage_->g.size();
      if (p_.mode == Mode::stochastic) {
        x_ = restore_S(xbar, stage_->m, n);
        return true;
      }
      const Restoration r = p_.restore == RestoreMethod::lp ? restore_DS(xbar, stage_->m, n)
                                                            : restore_DS_qp(xbar, stage_->m, n);
      if (r.kind == Restoration::Kind::ok) {
        x_ = r.x;
        return true;
      }
      if (r.kind == Restoration::Kind::infeasible) {
        finish(SolveStatus::no_hc_disconnected, "no doubly stochastic point after surgery");
        return false;
      }
      Graph g = stage_->g;
      delete_vars(g, r.forced_zero, stage_->m, xbar);
      rebuild(std::move(g));
    }
  }

  // Threshold-driven deflation/deletion. Returns false when the solve ended.
  bool surgery() {
    for (;;) {
      const ArcVarMap& m = stage_->m;
      int defl = -1;
      for (int k = 0; k < m.size(); ++k)
        if (x_[k] >= p_.deflation_threshold) {
          defl = k;
          break;
        }
      Graph g;
      Eigen::VectorXd xbar;
      if (defl >= 0) {
        DeflationResult d = deflate(stage_->g, m.arcs[defl]);
        xbar = remap_values(x_, d.var_map, d.map.size());
        records_.push_back(std::move(d.record));
        ++rep_.deflations;
        g = std::move(d.graph);
      } else {
        std::vector<int> del;
        for (int k = 0; k < m.size(); ++k)
          if (x_[k] <= p_.deletion_threshold) del.push_back(k);
        if (del.empty()) return true;
        g = stage_->g;
        xbar = x_;
        delete_vars(g, del, m, xbar);
      }
      if (settle_small(g)) return false;
      if (!is_connected(g)) {
        finish(SolveStatus::no_hc_disconnected, "graph disconnected after surgery");
        return false;
      }
      rebuild(std::move(g));
      if (!restore(std::move(xbar))) return false;
    }
  }

  void solve() {
    validate(p_);
    if (g0_.size() == 0) throw Error(Errc::invalid_argument, "empty graph");
    if (!is_connected(g0_)) {
      finish(SolveStatus::no_hc_disconnected, "input graph is disconnected");
      return;
    }
    Graph g = g0_;
    if (g.size() <= 2) {
      settle_small(g);
      return;
    }
    if (p_.drop_one_var && !g.arcs().empty()) {
      g = delete_arc(g, g.arcs()[0]).graph;
      ++rep_.deletions;
    }
    if (p_.mode == Mode::doubly_stochastic) {
      const ArcVarMap m = build_arc_map(g);
      const std::vector<int> fz = forced_zero_vars(m, g.size());
      if (!fz.empty()) {
        Eigen::VectorXd dummy = Eigen::VectorXd::Zero(m.size());
        delete_vars(g, fz, m, dummy);
        if (!is_connected(g)) {
          finish(SolveStatus::no_hc_disconnected, "graph disconnected after removing unusable arcs");
          return;
        }
      }
    }
    rebuild(std::move(g));
    x_ = initial_interior(stage_->m, stage_->g.size(), p_.mode);

    BarrierSpec spec;
    spec.upper_log = p_.upper_log;
    spec.neutral = true;
    stage_->inner.minimize_phase(x_, spec);
    stage_->inner.reset_delta();

    spec.neutral = false;
    mu_ = p_.mu_initial;
    bool triggered = false;
    for (;;) {
      if (rep_.iterations >= p_.max_iterations) {
        finish(SolveStatus::gave_up, "iteration cap");
        return;
      }
      if (p_.time_limit > 0.0 && elapsed() > p_.time_limit) {
        finish(SolveStatus::gave_up, "time limit");
        return;
      }
      spec.mu = mu_;
      const StepInfo info = stage_->inner.step(x_, spec);
      if (info.outcome != StepOutcome::moved) {
        const Eigen::MatrixXd hf = stage_->inner.reduced_objective_hessian(x_);
        const Eigen::MatrixXd hp = stage_->inner.reduced_barrier_hessian(x_, p_.upper_log);
        const MuTrigger t = mu_trigger(hf, hp, mu_, p_.mu_shrink, p_.mu_min);
        if (t.mu < p_.mu_min) {
          const double scale = 1.0 + (hf.size() ? hf.cwiseAbs().maxCoeff() : 0.0);
          if (t.lambda_min >= -1e-8 * scale)
            finish(SolveStatus::no_hc_nonhc_local_min, "converged to a non-Hamiltonian local minimizer");
          else
            finish(SolveStatus::gave_up, "mu below floor");
          return;
        }
        mu_ = t.mu;
        ++rep_.mu_triggers;
        triggered = true;
        stage_->inner.reset_delta();
        continue;
      }

      ++rep_.iterations;
      if (triggered) {
        ++rep_.steps_after_trigger;
        if (info.kind == DirectionKind::negative_curvature) ++rep_.negcurv_after_trigger;
      }
      if (p_.trace) {
        TraceRow row;
        row.iter = rep_.iterations;
        row.mu = mu_;
        row.f = info.f;
        row.phi = info.phi;
        row.merit = info.merit;
        row.step = info.step;
        row.kind = info.kind;
        row.delta_hat = info.delta_hat;
        row.min_x = x_.size() ? x_.minCoeff() : 0.0;
        row.deflations = rep_.deflations;
        row.grad_alignment = info.grad_alignment;
        rep_.trace.push_back(row);
      }

      if (auto c = round_to_hc(x_, stage_->g, stage_->m, p_.mode); c && accept(*c)) return;
      if (!surgery()) return;
    }
  }

  const Graph& g0_;
  DipaParams p_;
  InnerOptions opt_;
  SolveReport rep_;
  std::unique_ptr<Stage> stage_;
  std::vector<DeflationRecord> records_;
  Eigen::VectorXd x_;
  double mu_ = 0.0;
  bool done_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolveReport dipa_solve(const Graph& g, const DipaParams& p) { return Dipa(g, p).run(); }

}  // namespace hcdet
