#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "hcdet/bench.hpp"

using namespace hcdet;
using namespace testing_util;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hcdet_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("grids") {
  const Grid d = make_grid("paper-def");
  REQUIRE(d.settings.size() == 4);
  CHECK(d.settings[0].name == "lp-def0.90");
  for (const Setting& s : d.settings) {
    CHECK(s.params.mode == Mode::doubly_stochastic);
    CHECK(s.params.mu_initial == 0.01);
    CHECK(s.params.mu_shrink == 0.1);
    CHECK(s.params.alpha == 0.9);
    CHECK(s.params.deletion_threshold == 1e-5);
  }
  CHECK(d.combos.back().members.size() == 4);
  const Grid nd = make_grid("paper-nodef");
  CHECK(nd.settings.size() == 4);
  for (const Setting& s : nd.settings) CHECK(s.params.deletion_threshold == 0.0);
  const Grid md = make_grid("paper-modes");
  REQUIRE(md.settings.size() == 2);
  CHECK(md.settings[0].params.mode != md.settings[1].params.mode);
  CHECK_THROWS(make_grid("nonsense"));
}

TEST_CASE("smoke configuration solves every instance") {
  BenchConfig cfg;
  cfg.sizes = {8};
  cfg.count = 5;
  const BenchResult r = run_bench(cfg);
  REQUIRE(r.graphs.size() == 5);
  CHECK(r.graph_ids[0] == "n008-i000");
  for (int v : r.solved[0]) CHECK(v == 5);
  for (int v : r.combo_solved[0]) CHECK(v == 5);
  for (const BenchSolve& s : r.solves)
    if (s.report.cycle) CHECK(verify_cycle(r.graphs[s.index], *s.report.cycle));
}

TEST_CASE("bench files are reproducible and certificates re-verify") {
  BenchConfig cfg;
  cfg.sizes = {10, 14};
  cfg.count = 3;
  cfg.seed = 5;
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  cfg.threads = 4;
  write_bench(run_bench(cfg), a.string());
  cfg.threads = 1;
  write_bench(run_bench(cfg), b.string());

  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "timings.csv") continue;
    const fs::path rel = fs::relative(e.path(), a);
    CHECK(slurp(e.path()) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared == 4 + 6);

  std::map<std::string, Graph> graphs;
  for (const auto& e : fs::directory_iterator(a / "graphs"))
    graphs[e.path().stem().string()] = read_graph_file(e.path().string());
  const auto cert = csv_rows(slurp(a / "certificates.csv"));
  REQUIRE(cert.size() > 1);
  CHECK(cert[0] == std::vector<std::string>{"graph-id", "setting", "cycle"});
  for (std::size_t i = 1; i < cert.size(); ++i) {
    CycleCertificate c;
    std::istringstream in(cert[i][2]);
    for (int v; in >> v;) c.nodes.push_back(v - 1);
    CHECK(verify_cycle(graphs.at(cert[i][0]), c));
  }
  const auto solves = csv_rows(slurp(a / "solves.csv"));
  int found = 0;
  for (std::size_t i = 1; i < solves.size(); ++i) found += solves[i][5] == "HC-found";
  CHECK(found == static_cast<int>(cert.size()) - 1);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("objective profiles toward each cycle") {
  const auto pts = trace_paths(k3(), 101);
  REQUIRE(pts.size() == 2 * 101);
  for (int i = 0; i < 101; ++i) {
    CHECK(pts[i].hc == 0);
    CHECK(pts[101 + i].hc == 1);
    CHECK(pts[i].f == doctest::Approx(pts[101 + i].f).epsilon(1e-12));
    if (i > 0) CHECK(pts[i].f < pts[i - 1].f);
  }
  CHECK(pts[0].f == doctest::Approx(-0.75));
  CHECK(pts[100].f <= -1.0 + 1e-2);
  CHECK(pts[100].f >= -1.0 - 1e-9);

  const Graph g = gen_random_graph({8, 3, 4, 2, true});
  const auto many = trace_paths(g, 21);
  const std::size_t cycles = enumerate_hc(g, 10000).size();
  CHECK(many.size() == 21 * cycles);
  for (const PathPoint& p : many)
    if (p.t > 0.99) CHECK(p.f <= -0.9);

  std::ostringstream out;
  write_paths_csv(out, pts);
  CHECK(out.str().rfind("hc-id,t,f\n", 0) == 0);
}

TEST_CASE("solver traces") {
  SUBCASE("solved instance") {
    const Graph g = gen_random_graph({20, 3, 6, 3, true});
    const SolveReport r = dipa_solve(g, DipaParams{});
    REQUIRE(r.status == SolveStatus::hc_found);
    std::ostringstream out;
    write_trace_csv(out, r);
    const auto rows = csv_rows(out.str());
    REQUIRE(rows.size() == static_cast<std::size_t>(r.iterations) + 1);
    CHECK(rows[0].back() == "status");
    CHECK(rows.back().back() == "HC-found");
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) CHECK(rows[i].back() == "running");
    const double f = std::stod(rows.back()[2]);
    CHECK(f >= -1.0 - 1e-6);
    CHECK(f < 0.0);
  }
  SUBCASE("Petersen") {
    const SolveReport r = dipa_solve(petersen(), DipaParams{});
    std::ostringstream out;
    write_trace_csv(out, r);
    const auto rows = csv_rows(out.str());
    REQUIRE(rows.size() == static_cast<std::size_t>(r.iterations) + 1);
    REQUIRE(rows.size() > 1);
    CHECK(rows.back().back() != "HC-found");
    CHECK(rows.back().back() == status_name(r.status));
  }
}

TEST_CASE("neutral point") {
  const Eigen::VectorXd x = neutral_point(cube(), Mode::doubly_stochastic);
  CHECK((x.array() - 1.0 / 3).abs().maxCoeff() <= 1e-8);
  CHECK(fmt_double(0.1) == "0.10000000000000001");
}
