#include "hcdet/hcdet.h"

#include <fstream>
#include <new>
#include <string>

#include "hcdet/bench.hpp"
#include "hcdet/errors.hpp"
#include "hcdet/outer.hpp"

struct hcdet_graph {
  hcdet::Graph g;
};

struct hcdet_report {
  hcdet::SolveReport r;
};

namespace {

thread_local std::string g_last_error;

hcdet_status map_code(hcdet::Errc c) {
  using hcdet::Errc;
  switch (c) {
    case Errc::invalid_argument: return HCDET_E_INVALID;
    case Errc::parse: return HCDET_E_PARSE;
    case Errc::io: return HCDET_E_IO;
    case Errc::infeasible:
    case Errc::disconnected: return HCDET_E_INFEASIBLE;
    case Errc::cap_exceeded: return HCDET_E_CAP;
    default: return HCDET_E_INTERNAL;
  }
}

template <class F>
hcdet_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HCDET_OK;
  } catch (const hcdet::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HCDET_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HCDET_E_INTERNAL;
  }
}

hcdet_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return HCDET_E_INVALID;
}

hcdet::DipaParams to_params(const hcdet_params& p) {
  hcdet::DipaParams d;
  d.mode = p.mode == HCDET_MODE_S ? hcdet::Mode::stochastic : hcdet::Mode::doubly_stochastic;
  d.mu_initial = p.mu_initial;
  d.mu_shrink = p.mu_shrink;
  d.alpha = p.alpha;
  d.deflation_threshold = p.deflation_threshold;
  d.deletion_threshold = p.deletion_threshold;
  d.restore = p.restore == HCDET_RESTORE_QP ? hcdet::RestoreMethod::qp : hcdet::RestoreMethod::lp;
  d.upper_log = p.upper_log != 0;
  d.drop_one_var = p.drop_one_var != 0;
  d.mu_min = p.mu_min;
  d.seed = p.seed;
  d.max_iterations = p.max_iterations;
  d.time_limit = p.time_limit;
  return d;
}

}  // namespace

extern "C" {

const char* hcdet_last_error(void) { return g_last_error.c_str(); }

void hcdet_params_default(hcdet_params* p) {
  if (!p) return;
  const hcdet::DipaParams d;
  p->mode = d.mode == hcdet::Mode::stochastic ? HCDET_MODE_S : HCDET_MODE_DS;
  p->mu_initial = d.mu_initial;
  p->mu_shrink = d.mu_shrink;
  p->alpha = d.alpha;
  p->deflation_threshold = d.deflation_threshold;
  p->deletion_threshold = d.deletion_threshold;
  p->restore = HCDET_RESTORE_LP;
  p->upper_log = d.upper_log;
  p->drop_one_var = d.drop_one_var;
  p->mu_min = d.mu_min;
  p->seed = d.seed;
  p->max_iterations = d.max_iterations;
  p->time_limit = d.time_limit;
}

hcdet_status hcdet_graph_load(const char* path, hcdet_graph** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guard([&] { *out = new hcdet_graph{hcdet::read_graph_file(path)}; });
}

hcdet_status hcdet_graph_from_edges(int n, const int* edges, size_t num_edges, hcdet_graph** out) {
  if (!out) return null_arg("out");
  if (!edges && num_edges) return null_arg("edges");
  return guard([&] {
    std::vector<std::pair<int, int>> e(num_edges);
    for (size_t i = 0; i < num_edges; ++i) e[i] = {edges[2 * i], edges[2 * i + 1]};
    *out = new hcdet_graph{hcdet::Graph::from_edges(n, e)};
  });
}

hcdet_status hcdet_graph_generate(int n, int dmin, int dmax, uint64_t seed, int plant, hcdet_graph** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    hcdet::GenOptions o;
    o.n = n;
    o.dmin = dmin;
    o.dmax = dmax;
    o.seed = seed;
    o.plant = plant != 0;
    *out = new hcdet_graph{hcdet::gen_random_graph(o)};
  });
}

hcdet_status hcdet_graph_save(const hcdet_graph* g, const char* path) {
  if (!g) return null_arg("graph");
  if (!path) return null_arg("path");
  return guard([&] { hcdet::write_graph_file(path, g->g); });
}

int hcdet_graph_nodes(const hcdet_graph* g) { return g ? g->g.size() : 0; }

size_t hcdet_graph_edges(const hcdet_graph* g) { return g ? g->g.edges().size() : 0; }

hcdet_status hcdet_graph_count_hc(const hcdet_graph* g, size_t cap, size_t* count) {
  if (!g) return null_arg("graph");
  if (!count) return null_arg("count");
  return guard([&] { *count = hcdet::enumerate_hc(g->g, cap).size(); });
}

void hcdet_graph_free(hcdet_graph* g) { delete g; }

hcdet_status hcdet_solve(const hcdet_graph* g, const hcdet_params* p, hcdet_report** out) {
  if (!g) return null_arg("graph");
  if (!out) return null_arg("out");
  return guard([&] {
    hcdet_params def;
    hcdet_params_default(&def);
    const hcdet::DipaParams d = to_params(p ? *p : def);
    hcdet::validate(d);
    *out = new hcdet_report{hcdet::dipa_solve(g->g, d)};
  });
}

hcdet_outcome hcdet_report_outcome(const hcdet_report* r) {
  if (!r) return HCDET_GAVE_UP;
  switch (r->r.status) {
    case hcdet::SolveStatus::hc_found: return HCDET_HC_FOUND;
    case hcdet::SolveStatus::no_hc_disconnected: return HCDET_NO_HC_DISCONNECTED;
    case hcdet::SolveStatus::no_hc_nonhc_local_min: return HCDET_NO_HC_LOCAL_MIN;
    default: return HCDET_GAVE_UP;
  }
}

const char* hcdet_outcome_name(hcdet_outcome o) {
  switch (o) {
    case HCDET_HC_FOUND: return hcdet::status_name(hcdet::SolveStatus::hc_found);
    case HCDET_NO_HC_DISCONNECTED: return hcdet::status_name(hcdet::SolveStatus::no_hc_disconnected);
    case HCDET_NO_HC_LOCAL_MIN: return hcdet::status_name(hcdet::SolveStatus::no_hc_nonhc_local_min);
    default: return hcdet::status_name(hcdet::SolveStatus::gave_up);
  }
}

int hcdet_report_iterations(const hcdet_report* r) { return r ? r->r.iterations : 0; }
int hcdet_report_deflations(const hcdet_report* r) { return r ? r->r.deflations : 0; }
int hcdet_report_deletions(const hcdet_report* r) { return r ? r->r.deletions : 0; }
double hcdet_report_wall_time(const hcdet_report* r) { return r ? r->r.wall_time : 0.0; }

size_t hcdet_report_cycle(const hcdet_report* r, int* nodes, size_t cap) {
  if (!r || !r->r.cycle) return 0;
  const auto& c = r->r.cycle->nodes;
  for (size_t i = 0; i < c.size() && i < cap && nodes; ++i) nodes[i] = c[i] + 1;
  return c.size();
}

hcdet_status hcdet_report_write_trace(const hcdet_report* r, const char* path) {
  if (!r) return null_arg("report");
  if (!path) return null_arg("path");
  return guard([&] {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw hcdet::Error(hcdet::Errc::io, std::string("cannot write ") + path);
    hcdet::write_trace_csv(f, r->r);
  });
}

void hcdet_report_free(hcdet_report* r) { delete r; }

hcdet_status hcdet_paths(const hcdet_graph* g, int samples, size_t cap, const char* path) {
  if (!g) return null_arg("graph");
  if (!path) return null_arg("path");
  return guard([&] {
    const auto pts = hcdet::trace_paths(g->g, samples, cap);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw hcdet::Error(hcdet::Errc::io, std::string("cannot write ") + path);
    hcdet::write_paths_csv(f, pts);
  });
}

hcdet_status hcdet_bench(const hcdet_bench_config* cfg) {
  if (!cfg) return null_arg("config");
  if (!cfg->sizes && cfg->num_sizes) return null_arg("sizes");
  if (!cfg->out_dir) return null_arg("out_dir");
  return guard([&] {
    hcdet::BenchConfig c;
    c.sizes.assign(cfg->sizes, cfg->sizes + cfg->num_sizes);
    c.count = cfg->count;
    c.dmin = cfg->dmin;
    c.dmax = cfg->dmax;
    c.plant = cfg->plant != 0;
    c.grid = cfg->grid ? cfg->grid : "paper-def";
    c.seed = cfg->seed;
    c.out_dir = cfg->out_dir;
    c.threads = cfg->threads;
    c.time_limit = cfg->time_limit;
    hcdet::write_bench(hcdet::run_bench(c), c.out_dir);
  });
}

}  // extern "C"
