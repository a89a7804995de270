#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hcdet/graph.hpp"
#include "hcdet/outer.hpp"

namespace hcdet {

struct Setting {
  std::string name;
  DipaParams params;
};

// Named union of settings; a graph counts when any member solves it.
struct Combo {
  std::string name;
  std::vector<int> members;
};

struct Grid {
  std::string name;
  std::vector<Setting> settings;
  std::vector<Combo> combos;
};

// "paper-def"   : {LP,QP} x deflation {0.9,0.95}, DS mode.
// "paper-nodef" : upper_log x drop_one_var with deflation/deletion suppressed.
// "paper-modes" : S vs DS with deflation/deletion suppressed.
Grid make_grid(const std::string& name, double time_limit = 60.0);

struct BenchConfig {
  std::vector<int> sizes{8};
  int count = 5;
  int dmin = 3;
  int dmax = 6;
  bool plant = true;
  std::string grid = "paper-def";
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: do not write files
  int threads = 0;      // 0: hardware concurrency
  double time_limit = 60.0;
};

struct BenchSolve {
  std::string graph_id;
  int n = 0;
  int index = 0;
  int setting = 0;
  std::string params_hash;
  SolveReport report;
};

struct BenchResult {
  Grid grid;
  std::vector<int> sizes;
  int count = 0;
  std::vector<Graph> graphs;        // size-major, then instance index
  std::vector<std::string> graph_ids;
  std::vector<BenchSolve> solves;   // graph-major, then setting
  // solved[size][setting] and combo_solved[size][combo]
  std::vector<std::vector<int>> solved;
  std::vector<std::vector<int>> combo_solved;
};

// Instance seed for (size, index) under a base seed.
std::uint64_t instance_seed(std::uint64_t base, int size, int index);

BenchResult run_bench(const BenchConfig& cfg);

// settings.csv, combos.csv, solves.csv, certificates.csv, timings.csv and
// graphs/<id>.txt. Everything except timings.csv is a pure function of the
// config.
void write_bench(const BenchResult& r, const std::string& out_dir);

struct PathPoint {
  int hc = 0;
  double t = 0.0;
  double f = 0.0;
};

// f_minor along x(t) = (1-t) x0 + t x_hc, x0 the neutral DS point, for every
// Hamiltonian cycle of g; t on a uniform grid over [0, 1 - eps].
std::vector<PathPoint> trace_paths(const Graph& g, int samples = 101, std::size_t cap = 10000,
                                   double eps = 1e-3);

// Neutral DS point of g (barrier-only minimizer).
Eigen::VectorXd neutral_point(const Graph& g, Mode mode);

void write_paths_csv(std::ostream& out, const std::vector<PathPoint>& pts);
void write_trace_csv(std::ostream& out, const SolveReport& r);

// 17 significant digits.
std::string fmt_double(double v);

}  // namespace hcdet
