#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hcdet {

// Directed arc between node labels. Labels are the 0-based node numbers of the
// original input graph; reduced graphs keep the labels of surviving nodes.
struct Arc {
  int from = 0;
  int to = 0;
  auto operator<=>(const Arc&) const = default;
};

// Simple graph stored as a sorted set of directed arcs. Undirected input
// graphs carry both directions of every edge; deflation and per-direction
// deletion produce graphs where that symmetry no longer holds.
class Graph {
 public:
  Graph() = default;

  // Undirected graph on nodes 0..n-1. Throws on self-loops, duplicates or
  // out-of-range endpoints.
  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges);
  // Directed graph on the given labels. Arcs must reference listed labels.
  static Graph from_arcs(std::vector<int> labels, std::vector<Arc> arcs);

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const int> nodes() const { return nodes_; }
  std::span<const Arc> arcs() const { return arcs_; }

  // Position of a label in nodes(), or -1.
  int position(int label) const;
  bool has_node(int label) const { return position(label) >= 0; }
  bool has_arc(Arc a) const;
  int out_degree(int label) const;
  int in_degree(int label) const;

  // Unordered pairs {i,j}, i<j, with at least one direction present.
  std::vector<std::pair<int, int>> edges() const;
  // True when every arc has its reverse.
  bool symmetric() const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<int> nodes_;  // sorted labels
  std::vector<Arc> arcs_;   // sorted by (from, to)
};

// Row-major bijection between directed arcs and variable indices: all arcs
// leaving the first node (by target), then the second node, and so on.
struct ArcVarMap {
  std::vector<Arc> arcs;
  std::vector<int> row;   // position of arcs[k].from
  std::vector<int> col;   // position of arcs[k].to
  std::vector<int> twin;  // index of the reverse arc, -1 when absent

  int size() const { return static_cast<int>(arcs.size()); }
  // Variable index of an arc, -1 when absent.
  int index(Arc a) const;
};

ArcVarMap build_arc_map(const Graph& g);

// Node sequence v1..vN of a Hamiltonian cycle (v_{N+1} = v1 implied).
struct CycleCertificate {
  std::vector<int> nodes;
  bool operator==(const CycleCertificate&) const = default;
};

// Checks distinct nodes, full coverage and that every consecutive pair
// (including the closing pair) is an arc of g.
bool verify_cycle(const Graph& g, const CycleCertificate& c);

struct GenOptions {
  int n = 20;
  int dmin = 3;
  int dmax = 6;
  std::uint64_t seed = 0;
  bool plant = true;
};

Graph gen_random_graph(const GenOptions& opt);

// All directed Hamiltonian cycles starting at the first node. Throws
// Errc::cap_exceeded when more than cap cycles exist, Errc::invalid_argument
// when the graph exceeds node_limit.
std::vector<CycleCertificate> enumerate_hc(const Graph& g, std::size_t cap,
                                           int node_limit = 40);

bool is_connected(const Graph& g);

struct DeflationRecord {
  Arc fixed_arc;
  int removed_node = 0;
  std::vector<std::pair<Arc, Arc>> redirected;
  std::vector<Arc> zeroed_arcs;
  std::vector<Arc> dropped_selfloops;
};

struct DeflationResult {
  Graph graph;
  ArcVarMap map;
  DeflationRecord record;
  std::vector<int> var_map;  // old variable -> new variable, -1 if fixed
};

// Fix arc (i,j) to one: node i is removed, arcs (k,i) become (k,j), and arcs
// (i,k), (k,j), (j,i) are fixed to zero. Throws Errc::disconnected when a
// node of the reduced graph is left without an in- or out-arc.
DeflationResult deflate(const Graph& g, Arc arc);

struct DeletionResult {
  Graph graph;
  ArcVarMap map;
  std::vector<int> var_map;
};

// Remove one directed arc. Throws Errc::disconnected ("node starved") when a
// node loses its last out-arc or in-arc.
DeletionResult delete_arc(const Graph& g, Arc arc);

// Replays deflation records in reverse, splicing removed nodes back in.
CycleCertificate expand_cycle(std::span<const DeflationRecord> records,
                              const CycleCertificate& c);

// Text format: "N M" then M lines "i j" (1-based). '#' starts a comment.
Graph read_graph(std::istream& in);
Graph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const Graph& g);
void write_graph_file(const std::string& path, const Graph& g);

}  // namespace hcdet
