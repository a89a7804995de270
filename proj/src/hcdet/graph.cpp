#include "hcdet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "hcdet/errors.hpp"
#include "hcdet/rng.hpp"

namespace hcdet {

Graph Graph::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  if (n < 1) throw Error(Errc::invalid_argument, "graph needs at least one node");
  std::vector<Arc> arcs;
  arcs.reserve(2 * edges.size());
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw Error(Errc::invalid_argument, "edge endpoint out of range");
    if (i == j) throw Error(Errc::invalid_argument, "self-loop");
    arcs.push_back({i, j});
    arcs.push_back({j, i});
  }
  std::sort(arcs.begin(), arcs.end());
  if (std::adjacent_find(arcs.begin(), arcs.end()) != arcs.end())
    throw Error(Errc::invalid_argument, "duplicate edge");
  Graph g;
  g.nodes_.resize(n);
  std::iota(g.nodes_.begin(), g.nodes_.end(), 0);
  g.arcs_ = std::move(arcs);
  return g;
}

Graph Graph::from_arcs(std::vector<int> labels, std::vector<Arc> arcs) {
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw Error(Errc::invalid_argument, "duplicate node label");
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  Graph g;
  g.nodes_ = std::move(labels);
  g.arcs_ = std::move(arcs);
  for (const Arc& a : g.arcs_) {
    if (a.from == a.to) throw Error(Errc::invalid_argument, "self-loop");
    if (!g.has_node(a.from) || !g.has_node(a.to))
      throw Error(Errc::invalid_argument, "arc references unknown node");
  }
  return g;
}

int Graph::position(int label) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), label);
  if (it == nodes_.end() || *it != label) return -1;
  return static_cast<int>(it - nodes_.begin());
}

bool Graph::has_arc(Arc a) const { return std::binary_search(arcs_.begin(), arcs_.end(), a); }

int Graph::out_degree(int label) const {
  auto lo = std::lower_bound(arcs_.begin(), arcs_.end(), Arc{label, std::numeric_limits<int>::min()});
  auto hi = std::lower_bound(arcs_.begin(), arcs_.end(), Arc{label + 1, std::numeric_limits<int>::min()});
  return static_cast<int>(hi - lo);
}

int Graph::in_degree(int label) const {
  return static_cast<int>(
      std::count_if(arcs_.begin(), arcs_.end(), [label](const Arc& a) { return a.to == label; }));
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::set<std::pair<int, int>> e;
  for (const Arc& a : arcs_) e.insert({std::min(a.from, a.to), std::max(a.from, a.to)});
  return {e.begin(), e.end()};
}

bool Graph::symmetric() const {
  return std::all_of(arcs_.begin(), arcs_.end(),
                     [this](const Arc& a) { return has_arc({a.to, a.from}); });
}

int ArcVarMap::index(Arc a) const {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), a);
  if (it == arcs.end() || *it != a) return -1;
  return static_cast<int>(it - arcs.begin());
}

ArcVarMap build_arc_map(const Graph& g) {
  ArcVarMap m;
  m.arcs.assign(g.arcs().begin(), g.arcs().end());
  const int k = m.size();
  m.row.resize(k);
  m.col.resize(k);
  m.twin.resize(k);
  for (int v = 0; v < k; ++v) {
    m.row[v] = g.position(m.arcs[v].from);
    m.col[v] = g.position(m.arcs[v].to);
  }
  for (int v = 0; v < k; ++v) m.twin[v] = m.index({m.arcs[v].to, m.arcs[v].from});
  return m;
}

bool verify_cycle(const Graph& g, const CycleCertificate& c) {
  const auto& v = c.nodes;
  if (static_cast<int>(v.size()) != g.size() || v.empty()) return false;
  std::vector<int> sorted(v);
  std::sort(sorted.begin(), sorted.end());
  if (!std::equal(sorted.begin(), sorted.end(), g.nodes().begin(), g.nodes().end())) return false;
  if (v.size() == 1) return true;
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (!g.has_arc({v[t], v[(t + 1) % v.size()]})) return false;
  }
  return true;
}

namespace {

// One attempt of the planted-cycle + capped random-edge construction.
bool try_generate(const GenOptions& opt, std::uint64_t seed, std::vector<std::pair<int, int>>& out) {
  const int n = opt.n;
  Rng rng(seed);
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::vector<int> deg(n, 0);
  std::vector<std::pair<int, int>> edges;
  auto add = [&](int u, int v) {
    adj[u][v] = adj[v][u] = 1;
    ++deg[u];
    ++deg[v];
    edges.emplace_back(std::min(u, v), std::max(u, v));
  };

  if (opt.plant) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int t = 0; t < n; ++t) {
      int u = perm[t], v = perm[(t + 1) % n];
      if (!adj[u][v]) add(u, v);
    }
  }

  std::vector<int> target(n);
  for (int v = 0; v < n; ++v) {
    target[v] = opt.dmin + static_cast<int>(rng.below(opt.dmax - opt.dmin + 1));
    target[v] = std::max(target[v], deg[v]);
  }

  // Random pairing among nodes still below their target degree.
  for (int tries = 0; tries < 50 * n; ++tries) {
    std::vector<int> needy;
    for (int v = 0; v < n; ++v)
      if (deg[v] < target[v]) needy.push_back(v);
    if (needy.size() < 2) break;
    int u = needy[rng.below(needy.size())];
    int v = needy[rng.below(needy.size())];
    if (u != v && !adj[u][v]) add(u, v);
  }
  // Nodes short of dmin may connect to anything below dmax.
  for (int v = 0; v < n; ++v) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int u : order) {
      if (deg[v] >= opt.dmin) break;
      if (u != v && !adj[u][v] && deg[u] < opt.dmax) add(u, v);
    }
  }

  for (int v = 0; v < n; ++v)
    if (deg[v] < opt.dmin || deg[v] > opt.dmax) return false;
  std::sort(edges.begin(), edges.end());
  Graph g = Graph::from_edges(n, edges);
  if (!is_connected(g)) return false;
  out = std::move(edges);
  return true;
}

}  // namespace

Graph gen_random_graph(const GenOptions& opt) {
  if (opt.dmin < 2 || opt.dmin > opt.dmax || opt.dmax >= opt.n)
    throw Error(Errc::invalid_argument, "degree bounds must satisfy 2 <= dmin <= dmax < n");
  std::vector<std::pair<int, int>> edges;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    if (try_generate(opt, mix_seed(opt.seed, attempt), edges)) return Graph::from_edges(opt.n, edges);
  }
  throw Error(Errc::invalid_argument, "no graph with the requested degree bounds found");
}

std::vector<CycleCertificate> enumerate_hc(const Graph& g, std::size_t cap, int node_limit) {
  const int n = g.size();
  if (n > node_limit) throw Error(Errc::invalid_argument, "graph too large for enumeration");
  std::vector<CycleCertificate> found;
  if (n == 0) return found;
  if (n == 1) {
    found.push_back({{g.nodes()[0]}});
    return found;
  }
  std::vector<std::vector<int>> succ(n);
  for (const Arc& a : g.arcs()) succ[g.position(a.from)].push_back(g.position(a.to));

  std::vector<int> path{0};
  std::vector<char> used(n, 0);
  used[0] = 1;
  // Explicit stack of next-successor cursors keeps deep graphs off the call stack.
  std::vector<std::size_t> cursor{0};
  while (!path.empty()) {
    int u = path.back();
    std::size_t& c = cursor.back();
    if (static_cast<int>(path.size()) == n) {
      if (std::find(succ[u].begin(), succ[u].end(), 0) != succ[u].end()) {
        if (found.size() >= cap) throw Error(Errc::cap_exceeded, "Hamiltonian cycle cap exceeded");
        CycleCertificate cc;
        for (int p : path) cc.nodes.push_back(g.nodes()[p]);
        found.push_back(std::move(cc));
      }
      used[u] = 0;
      path.pop_back();
      cursor.pop_back();
      continue;
    }
    if (c >= succ[u].size()) {
      used[u] = 0;
      path.pop_back();
      cursor.pop_back();
      continue;
    }
    int v = succ[u][c++];
    if (used[v]) continue;
    used[v] = 1;
    path.push_back(v);
    cursor.push_back(0);
  }
  return found;
}

bool is_connected(const Graph& g) {
  const int n = g.size();
  if (n <= 1) return true;
  std::vector<std::vector<int>> nb(n);
  for (const Arc& a : g.arcs()) {
    int u = g.position(a.from), v = g.position(a.to);
    nb[u].push_back(v);
    nb[v].push_back(u);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : nb[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

namespace {

void check_degrees(const Graph& g) {
  if (g.size() <= 1) return;
  std::vector<int> out(g.size(), 0), in(g.size(), 0);
  for (const Arc& a : g.arcs()) {
    ++out[g.position(a.from)];
    ++in[g.position(a.to)];
  }
  for (int p = 0; p < g.size(); ++p) {
    if (out[p] == 0 || in[p] == 0)
      throw Error(Errc::disconnected,
                  "node starved: node " + std::to_string(g.nodes()[p] + 1) + " lost all " +
                      (out[p] == 0 ? "out" : "in") + "-arcs");
  }
}

std::vector<int> remap(const ArcVarMap& before, const ArcVarMap& after,
                       const std::vector<Arc>& image) {
  std::vector<int> vm(before.size(), -1);
  for (int k = 0; k < before.size(); ++k)
    if (image[k].from >= 0) vm[k] = after.index(image[k]);
  return vm;
}

}  // namespace

DeflationResult deflate(const Graph& g, Arc arc) {
  if (!g.has_arc(arc)) throw Error(Errc::invalid_argument, "deflation arc not in graph");
  const int i = arc.from, j = arc.to;
  DeflationRecord rec;
  rec.fixed_arc = arc;
  rec.removed_node = i;

  const ArcVarMap before = build_arc_map(g);
  std::vector<Arc> image(before.size(), Arc{-1, -1});
  std::vector<Arc> kept;
  for (int k = 0; k < before.size(); ++k) {
    const Arc a = before.arcs[k];
    if (a == arc) continue;
    const bool zero = (a.from == i) || (a.to == j) || (a.from == j && a.to == i);
    if (zero) {
      rec.zeroed_arcs.push_back(a);
      if (a.from == j && a.to == i) rec.dropped_selfloops.push_back(a);
      continue;
    }
    Arc b = a;
    if (a.to == i) {
      b = {a.from, j};
      rec.redirected.emplace_back(a, b);
    }
    image[k] = b;
    kept.push_back(b);
  }
  std::vector<int> labels;
  for (int v : g.nodes())
    if (v != i) labels.push_back(v);

  DeflationResult out;
  out.graph = Graph::from_arcs(std::move(labels), std::move(kept));
  check_degrees(out.graph);
  out.map = build_arc_map(out.graph);
  out.var_map = remap(before, out.map, image);
  out.record = std::move(rec);
  return out;
}

DeletionResult delete_arc(const Graph& g, Arc arc) {
  if (!g.has_arc(arc)) throw Error(Errc::invalid_argument, "deleted arc not in graph");
  const ArcVarMap before = build_arc_map(g);
  std::vector<Arc> image(before.arcs);
  std::vector<Arc> kept;
  for (int k = 0; k < before.size(); ++k) {
    if (before.arcs[k] == arc) {
      image[k] = {-1, -1};
      continue;
    }
    kept.push_back(before.arcs[k]);
  }
  std::vector<int> labels(g.nodes().begin(), g.nodes().end());
  DeletionResult out;
  out.graph = Graph::from_arcs(std::move(labels), std::move(kept));
  check_degrees(out.graph);
  out.map = build_arc_map(out.graph);
  out.var_map = remap(before, out.map, image);
  return out;
}

CycleCertificate expand_cycle(std::span<const DeflationRecord> records, const CycleCertificate& c) {
  std::vector<int> cyc = c.nodes;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const int i = it->fixed_arc.from, j = it->fixed_arc.to;
    auto pos = std::find(cyc.begin(), cyc.end(), j);
    if (pos == cyc.end()) throw Error(Errc::internal, "deflation record: merged node missing from cycle");
    if (cyc.size() > 1) {
      const int k = (pos == cyc.begin()) ? cyc.back() : *(pos - 1);
      const std::pair<Arc, Arc> want{Arc{k, i}, Arc{k, j}};
      if (std::find(it->redirected.begin(), it->redirected.end(), want) == it->redirected.end())
        throw Error(Errc::internal, "deflation record: splice produces a non-edge");
    }
    cyc.insert(pos, i);
  }
  std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
  return {std::move(cyc)};
}

Graph read_graph(std::istream& in) {
  std::vector<long long> nums;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        nums.push_back(v);
      } catch (const std::exception&) {
        throw Error(Errc::parse, "line " + std::to_string(lineno) + ": not an integer: " + tok);
      }
    }
  }
  if (nums.size() < 2) throw Error(Errc::parse, "missing header \"N M\"");
  const long long n = nums[0], m = nums[1];
  if (n < 1 || m < 0) throw Error(Errc::parse, "bad header");
  if (static_cast<long long>(nums.size()) != 2 + 2 * m)
    throw Error(Errc::parse, "edge count does not match header");
  std::vector<std::pair<int, int>> edges;
  for (long long e = 0; e < m; ++e) {
    long long a = nums[2 + 2 * e], b = nums[3 + 2 * e];
    if (a < 1 || b < 1 || a > n || b > n) throw Error(Errc::parse, "edge endpoint out of range");
    edges.emplace_back(static_cast<int>(std::min(a, b) - 1), static_cast<int>(std::max(a, b) - 1));
  }
  try {
    return Graph::from_edges(static_cast<int>(n), edges);
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
}

Graph read_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io, "cannot open " + path);
  return read_graph(f);
}

void write_graph(std::ostream& out, const Graph& g) {
  auto e = g.edges();
  out << g.size() << ' ' << e.size() << '\n';
  for (auto [a, b] : e) out << a + 1 << ' ' << b + 1 << '\n';
}

void write_graph_file(const std::string& path, const Graph& g) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::io, "cannot write " + path);
  write_graph(f, g);
}

}  // namespace hcdet
