// Command line front end over the C interface.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hcdet/hcdet.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoHc = 2;
constexpr int kExitInput = 3;

int fail(const char* what) {
  std::cerr << "error: " << what << ": " << hcdet_last_error() << "\n";
  return kExitInput;
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

void cat_file(const std::string& path) {
  std::ifstream f(path);
  std::cout << f.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian cycles by determinant minimization"};
  app.require_subcommand(1);

  hcdet_params params;
  hcdet_params_default(&params);
  std::string graph_path, trace_path, mode = "ds", restore = "lp";
  bool upper_log = false, drop_var = false;
  auto* solve = app.add_subcommand("solve", "solve one graph");
  solve->add_option("--graph", graph_path, "graph file")->required();
  solve->add_option("--mode", mode, "s or ds")->check(CLI::IsMember({"s", "ds"}));
  solve->add_option("--mu0", params.mu_initial, "initial barrier weight");
  solve->add_option("--mu-shrink", params.mu_shrink, "barrier reduction factor");
  solve->add_option("--alpha", params.alpha, "fraction of the largest feasible step");
  solve->add_option("--deflate", params.deflation_threshold, "deflation threshold");
  solve->add_option("--delete", params.deletion_threshold, "deletion threshold");
  solve->add_option("--restore", restore, "lp or qp")->check(CLI::IsMember({"lp", "qp"}));
  solve->add_flag("--upper-log", upper_log, "barrier on x <= 1 as well");
  solve->add_flag("--drop-var", drop_var, "remove the first arc variable");
  solve->add_option("--seed", params.seed, "seed");
  solve->add_option("--time-limit", params.time_limit, "seconds per solve");
  solve->add_option("--trace", trace_path, "write the iteration trace CSV");

  std::string sizes = "20", grid = "paper-def", out_dir;
  int count = 50, dmin = 3, dmax = 6, threads = 0;
  std::uint64_t seed = 1;
  double time_limit = 60.0;
  auto* bench = app.add_subcommand("bench", "run an experiment grid");
  bench->add_option("--sizes", sizes, "comma separated node counts");
  bench->add_option("--count", count, "instances per size");
  bench->add_option("--dmin", dmin, "minimum degree");
  bench->add_option("--dmax", dmax, "maximum degree");
  bench->add_option("--grid", grid, "parameter grid")
      ->check(CLI::IsMember({"paper-def", "paper-nodef", "paper-modes"}));
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--out", out_dir, "output directory")->required();
  bench->add_option("--threads", threads, "worker threads (0 = all cores)");
  bench->add_option("--time-limit", time_limit, "seconds per solve");

  std::string paths_out;
  std::size_t cap = 10000;
  int samples = 101;
  auto* paths = app.add_subcommand("paths", "objective along segments to every cycle");
  paths->add_option("--graph", graph_path, "graph file")->required();
  paths->add_option("--out", paths_out, "output CSV")->required();
  paths->add_option("--cap", cap, "maximum number of cycles");
  paths->add_option("--samples", samples, "points per segment");

  int n = 20;
  bool plant = false;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a random graph");
  gen->add_option("--n", n, "node count")->required();
  gen->add_option("--dmin", dmin, "minimum degree");
  gen->add_option("--dmax", dmax, "maximum degree");
  gen->add_option("--seed", seed, "seed");
  gen->add_flag("--plant", plant, "embed a Hamiltonian cycle");
  gen->add_option("--out", gen_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  if (*solve) {
    params.mode = mode == "s" ? HCDET_MODE_S : HCDET_MODE_DS;
    params.restore = restore == "qp" ? HCDET_RESTORE_QP : HCDET_RESTORE_LP;
    params.upper_log = upper_log;
    params.drop_one_var = drop_var;
    hcdet_graph* g = nullptr;
    if (hcdet_graph_load(graph_path.c_str(), &g) != HCDET_OK) return fail("loading graph");
    hcdet_report* r = nullptr;
    if (hcdet_solve(g, &params, &r) != HCDET_OK) {
      hcdet_graph_free(g);
      return fail("solve");
    }
    const hcdet_outcome o = hcdet_report_outcome(r);
    std::printf("status: %s\niterations: %d\ndeflations: %d\ndeletions: %d\nwall-time: %.3f\n",
                hcdet_outcome_name(o), hcdet_report_iterations(r), hcdet_report_deflations(r),
                hcdet_report_deletions(r), hcdet_report_wall_time(r));
    std::vector<int> cyc(hcdet_graph_nodes(g));
    const std::size_t len = hcdet_report_cycle(r, cyc.data(), cyc.size());
    if (len) {
      std::printf("cycle:");
      for (std::size_t i = 0; i < len; ++i) std::printf(" %d", cyc[i]);
      std::printf("\n");
    }
    int rc = o == HCDET_HC_FOUND ? kExitOk : kExitNoHc;
    if (!trace_path.empty() && hcdet_report_write_trace(r, trace_path.c_str()) != HCDET_OK)
      rc = fail("writing trace");
    hcdet_report_free(r);
    hcdet_graph_free(g);
    return rc;
  }

  if (*bench) {
    std::vector<int> sz;
    try {
      sz = parse_sizes(sizes);
    } catch (const std::exception&) {
      std::cerr << "error: --sizes must be a comma separated list of integers\n";
      return kExitInput;
    }
    hcdet_bench_config c{};
    c.sizes = sz.data();
    c.num_sizes = sz.size();
    c.count = count;
    c.dmin = dmin;
    c.dmax = dmax;
    c.plant = 1;
    c.grid = grid.c_str();
    c.seed = seed;
    c.out_dir = out_dir.c_str();
    c.threads = threads;
    c.time_limit = time_limit;
    if (hcdet_bench(&c) != HCDET_OK) return fail("bench");
    cat_file(out_dir + "/settings.csv");
    cat_file(out_dir + "/combos.csv");
    return kExitOk;
  }

  if (*paths) {
    hcdet_graph* g = nullptr;
    if (hcdet_graph_load(graph_path.c_str(), &g) != HCDET_OK) return fail("loading graph");
    const hcdet_status s = hcdet_paths(g, samples, cap, paths_out.c_str());
    hcdet_graph_free(g);
    if (s != HCDET_OK) return fail("paths");
    return kExitOk;
  }

  hcdet_graph* g = nullptr;
  if (hcdet_graph_generate(n, dmin, dmax, seed, plant, &g) != HCDET_OK) return fail("generate");
  const hcdet_status s = hcdet_graph_save(g, gen_out.c_str());
  hcdet_graph_free(g);
  if (s != HCDET_OK) return fail("writing graph");
  return kExitOk;
}
