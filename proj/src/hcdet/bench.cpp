#include "hcdet/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "hcdet/errors.hpp"
#include "hcdet/rng.hpp"

namespace hcdet {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Grid make_grid(const std::string& name, double time_limit) {
  Grid g;
  g.name = name;
  DipaParams base;
  base.time_limit = time_limit;
  base.trace = false;
  auto suppressed = [&] {
    DipaParams p = base;
    p.deflation_threshold = 1.0 - 1e-12;
    p.deletion_threshold = 0.0;
    return p;
  };
  if (name == "paper-def") {
    for (RestoreMethod r : {RestoreMethod::lp, RestoreMethod::qp})
      for (double d : {0.9, 0.95}) {
        DipaParams p = base;
        p.restore = r;
        p.deflation_threshold = d;
        g.settings.push_back({std::string(r == RestoreMethod::lp ? "lp" : "qp") +
                                  (d == 0.9 ? "-def0.90" : "-def0.95"),
                              p});
      }
    // lp-0.90, lp-0.95, qp-0.90, qp-0.95
    g.combos = {{"lp-both", {0, 1}},
                {"qp-both", {2, 3}},
                {"def0.90-both", {0, 2}},
                {"def0.95-both", {1, 3}},
                {"all-four", {0, 1, 2, 3}}};
  } else if (name == "paper-nodef") {
    for (bool ul : {false, true})
      for (bool dv : {false, true}) {
        DipaParams p = suppressed();
        p.upper_log = ul;
        p.drop_one_var = dv;
        g.settings.push_back({std::string(ul ? "upperlog" : "noupperlog") + (dv ? "-dropvar" : "-keepvar"), p});
      }
    // noul-keep, noul-drop, ul-keep, ul-drop
    g.combos = {{"upperlog-both", {2, 3}},
                {"dropvar-both", {1, 3}},
                {"noupperlog-both", {0, 1}},
                {"keepvar-both", {0, 2}},
                {"all-four", {0, 1, 2, 3}}};
  } else if (name == "paper-modes") {
    DipaParams s = suppressed();
    s.mode = Mode::stochastic;
    DipaParams d = suppressed();
    d.mode = Mode::doubly_stochastic;
    g.settings = {{"s", s}, {"ds", d}};
    g.combos = {{"both", {0, 1}}};
  } else {
    throw Error(Errc::invalid_argument, "unknown grid '" + name + "'");
  }
  return g;
}

std::uint64_t instance_seed(std::uint64_t base, int size, int index) {
  return mix_seed(mix_seed(base, static_cast<std::uint64_t>(size)), static_cast<std::uint64_t>(index));
}

namespace {

std::string graph_id(int n, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "n%03d-i%03d", n, index);
  return buf;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, hw);
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
}

std::string cycle_text(const CycleCertificate& c) {
  std::string s;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(c.nodes[i] + 1);
  }
  return s;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw Error(Errc::invalid_argument, "bench needs at least one size");
  if (cfg.count < 1) throw Error(Errc::invalid_argument, "bench needs at least one instance per size");
  BenchResult r;
  r.grid = make_grid(cfg.grid, cfg.time_limit);
  r.sizes = cfg.sizes;
  r.count = cfg.count;

  for (int n : cfg.sizes)
    for (int i = 0; i < cfg.count; ++i) {
      GenOptions go;
      go.n = n;
      go.dmin = cfg.dmin;
      go.dmax = std::min(cfg.dmax, n - 1);
      go.plant = cfg.plant;
      go.seed = instance_seed(cfg.seed, n, i);
      r.graphs.push_back(gen_random_graph(go));
      r.graph_ids.push_back(graph_id(n, i));
    }

  const std::size_t ns = r.grid.settings.size();
  r.solves.resize(r.graphs.size() * ns);
  parallel_for(r.solves.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t gi = job / ns;
    const int si = static_cast<int>(job % ns);
    BenchSolve& s = r.solves[job];
    s.graph_id = r.graph_ids[gi];
    s.n = r.graphs[gi].size();
    s.index = static_cast<int>(gi % cfg.count);
    s.setting = si;
    DipaParams p = r.grid.settings[si].params;
    s.params_hash = params_hash(p);
    p.seed = instance_seed(cfg.seed, s.n, s.index);
    s.report = dipa_solve(r.graphs[gi], p);
    // A solved entry must carry a certificate valid on the input graph.
    if (s.report.status == SolveStatus::hc_found &&
        (!s.report.cycle || !verify_cycle(r.graphs[gi], *s.report.cycle)))
      s.report.status = SolveStatus::gave_up;
  });

  r.solved.assign(cfg.sizes.size(), std::vector<int>(ns, 0));
  r.combo_solved.assign(cfg.sizes.size(), std::vector<int>(r.grid.combos.size(), 0));
  for (std::size_t zi = 0; zi < cfg.sizes.size(); ++zi)
    for (int i = 0; i < cfg.count; ++i) {
      const std::size_t gi = zi * cfg.count + i;
      std::vector<char> ok(ns);
      for (std::size_t si = 0; si < ns; ++si) {
        ok[si] = r.solves[gi * ns + si].report.status == SolveStatus::hc_found;
        r.solved[zi][si] += ok[si];
      }
      for (std::size_t ci = 0; ci < r.grid.combos.size(); ++ci) {
        bool any = false;
        for (int m : r.grid.combos[ci].members) any = any || ok[m];
        r.combo_solved[zi][ci] += any;
      }
    }
  return r;
}

void write_bench(const BenchResult& r, const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "graphs");
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw Error(Errc::io, std::string("cannot write ") + name);
    return f;
  };
  const auto& st = r.grid.settings;
  {
    auto f = open("settings.csv");
    f << "grid,n,setting,mode,params-hash,solved,count\n";
    for (std::size_t zi = 0; zi < r.sizes.size(); ++zi)
      for (std::size_t si = 0; si < st.size(); ++si)
        f << r.grid.name << ',' << r.sizes[zi] << ',' << st[si].name << ','
          << mode_name(st[si].params.mode) << ',' << params_hash(st[si].params) << ','
          << r.solved[zi][si] << ',' << r.count << '\n';
  }
  {
    auto f = open("combos.csv");
    f << "grid,n,combo,members,solved,count\n";
    for (std::size_t zi = 0; zi < r.sizes.size(); ++zi)
      for (std::size_t ci = 0; ci < r.grid.combos.size(); ++ci) {
        std::string members;
        for (int m : r.grid.combos[ci].members) members += (members.empty() ? "" : "+") + st[m].name;
        f << r.grid.name << ',' << r.sizes[zi] << ',' << r.grid.combos[ci].name << ',' << members << ','
          << r.combo_solved[zi][ci] << ',' << r.count << '\n';
      }
  }
  {
    auto f = open("solves.csv");
    f << "graph-id,n,mode,setting,params-hash,status,iterations,deflations,deletions,mu-triggers,"
         "steps-after-trigger,negcurv-after-trigger\n";
    for (const BenchSolve& s : r.solves) {
      const SolveReport& rep = s.report;
      f << s.graph_id << ',' << s.n << ',' << mode_name(st[s.setting].params.mode) << ','
        << st[s.setting].name << ',' << s.params_hash << ',' << status_name(rep.status) << ','
        << rep.iterations << ',' << rep.deflations << ',' << rep.deletions << ',' << rep.mu_triggers
        << ',' << rep.steps_after_trigger << ',' << rep.negcurv_after_trigger << '\n';
    }
  }
  {
    auto f = open("certificates.csv");
    f << "graph-id,setting,cycle\n";
    for (const BenchSolve& s : r.solves)
      if (s.report.cycle) f << s.graph_id << ',' << st[s.setting].name << ',' << cycle_text(*s.report.cycle) << '\n';
  }
  {
    auto f = open("timings.csv");
    f << "graph-id,setting,wall-time\n";
    for (const BenchSolve& s : r.solves)
      f << s.graph_id << ',' << st[s.setting].name << ',' << fmt_double(s.report.wall_time) << '\n';
  }
  for (std::size_t gi = 0; gi < r.graphs.size(); ++gi)
    write_graph_file((fs::path(out_dir) / "graphs" / (r.graph_ids[gi] + ".txt")).string(), r.graphs[gi]);
}

Eigen::VectorXd neutral_point(const Graph& g, Mode mode) {
  const ArcVarMap m = build_arc_map(g);
  const NullSpace Z = build_Z(m, g.size(), mode);
  InnerSolver inner(m, g.size(), mode, Z);
  Eigen::VectorXd x = initial_interior(m, g.size(), mode);
  BarrierSpec spec;
  spec.neutral = true;
  inner.minimize_phase(x, spec);
  return x;
}

std::vector<PathPoint> trace_paths(const Graph& g, int samples, std::size_t cap, double eps) {
  if (samples < 2) throw Error(Errc::invalid_argument, "need at least two samples");
  const std::vector<CycleCertificate> cycles = enumerate_hc(g, cap);
  const ArcVarMap m = build_arc_map(g);
  const Eigen::VectorXd x0 = neutral_point(g, Mode::doubly_stochastic);
  DetObjective obj(m, g.size(), Mode::doubly_stochastic);
  std::vector<PathPoint> out;
  for (std::size_t h = 0; h < cycles.size(); ++h) {
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(m.size());
    const auto& c = cycles[h].nodes;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const int k = m.index({c[i], c[(i + 1) % c.size()]});
      if (k < 0) throw Error(Errc::internal, "enumerated cycle uses a non-arc");
      xs[k] = 1.0;
    }
    for (int s = 0; s < samples; ++s) {
      const double t = (1.0 - eps) * s / (samples - 1);
      const Eigen::VectorXd x = (1.0 - t) * x0 + t * xs;
      out.push_back({static_cast<int>(h), t, obj.value({x.data(), static_cast<std::size_t>(x.size())})});
    }
  }
  return out;
}

void write_paths_csv(std::ostream& out, const std::vector<PathPoint>& pts) {
  out << "hc-id,t,f\n";
  for (const PathPoint& p : pts) out << p.hc << ',' << fmt_double(p.t) << ',' << fmt_double(p.f) << '\n';
}

void write_trace_csv(std::ostream& out, const SolveReport& r) {
  out << "iter,mu,f,phi,merit,step,kind,delta_hat,min_x,deflations,status\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const TraceRow& t = r.trace[i];
    out << t.iter << ',' << fmt_double(t.mu) << ',' << fmt_double(t.f) << ',' << fmt_double(t.phi) << ','
        << fmt_double(t.merit) << ',' << fmt_double(t.step) << ',' << direction_name(t.kind) << ','
        << fmt_double(t.delta_hat) << ',' << fmt_double(t.min_x) << ',' << t.deflations << ','
        << (i + 1 == r.trace.size() ? status_name(r.status) : "running") << '\n';
  }
}

}  // namespace hcdet
