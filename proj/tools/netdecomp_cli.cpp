// Command-line front end: generate or load a graph, run one algorithm,
// optionally verify the result, and sweep benchmark grids. Every command is
// deterministic for fixed arguments; wall time never lands in output files.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "netdecomp/apps.hpp"
#include "netdecomp/decompose.hpp"
#include "netdecomp/verify.hpp"

using nlohmann::ordered_json;
using namespace netdecomp;

namespace {

struct RunOpts {
  std::string graph, algo, mode = "logical", scheme = "sequential", out, trace;
  long long bandwidth = kUnbounded;
  int id_bits = 0; // 0: minimal width for n
  uint64_t seed = 0;
  bool check = false;
};

struct BenchOpts {
  std::string algo = "fast", out;
  int nmin = 64, nmax = 8192;
};

struct VerifyOpts {
  std::string graph, result;
};

std::vector<int> all_nodes(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

ModelConfig config_of(const RunOpts& o) {
  ModelConfig cfg;
  if (o.mode == "faithful")
    cfg.faithful = true;
  else if (o.mode != "logical")
    throw std::invalid_argument("mode must be logical or faithful");
  cfg.bandwidth = o.bandwidth;
  return cfg;
}

IdScheme scheme_of(const std::string& s) {
  if (s == "sequential") return IdScheme::sequential;
  if (s == "shuffled") return IdScheme::shuffled;
  if (s == "padded") return IdScheme::padded;
  throw std::invalid_argument("id scheme must be sequential, shuffled or padded");
}

// survival and separation of a finished carve, independent of the engine
void check_carve_result(const Graph& g, const CarveResult& cr, int living, CheckReport& rep) {
  rep.note("carve.survival");
  long long kept = static_cast<long long>(cr.surviving.size());
  if (2 * kept < living)
    rep.fail("carve.survival", std::to_string(kept) + " of " + std::to_string(living) + " survive");
  rep.note("carve.separation");
  for (const auto& e : g.edges) {
    int cu = cr.final_cluster[static_cast<size_t>(e.first)];
    int cv = cr.final_cluster[static_cast<size_t>(e.second)];
    if (cu >= 0 && cv >= 0 && cu != cv) {
      rep.fail("carve.separation", "edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                                       " joins clusters " + std::to_string(cu) + " and " + std::to_string(cv));
      break;
    }
  }
  rep.measure("surviving", kept);
  rep.measure("killed", cr.killed);
}

void check_mis_result(const Graph& g, const std::vector<int>& selected, CheckReport& rep) {
  std::vector<char> in(static_cast<size_t>(g.n), 0);
  rep.note("app.independent");
  rep.note("app.maximal");
  for (int v : selected) {
    if (v < 0 || v >= g.n) {
      rep.fail("app.independent", "node " + std::to_string(v) + " out of range");
      return;
    }
    in[static_cast<size_t>(v)] = 1;
  }
  for (const auto& e : g.edges)
    if (in[static_cast<size_t>(e.first)] && in[static_cast<size_t>(e.second)]) {
      rep.fail("app.independent", "edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                                      " inside the set");
      break;
    }
  for (int v = 0; v < g.n; ++v) {
    if (in[static_cast<size_t>(v)]) continue;
    bool blocked = false;
    for (int u : g.adj[static_cast<size_t>(v)])
      if (in[static_cast<size_t>(u)]) blocked = true;
    if (!blocked) {
      rep.fail("app.maximal", "node " + std::to_string(v) + " could join");
      break;
    }
  }
  rep.measure("selected", static_cast<long long>(selected.size()));
}

void check_coloring_result(const Graph& g, const std::vector<int>& color, int delta, CheckReport& rep) {
  rep.note("app.palette");
  rep.note("app.proper");
  for (int v = 0; v < g.n; ++v) {
    int c = v < static_cast<int>(color.size()) ? color[static_cast<size_t>(v)] : 0;
    if (c < 1 || c > delta + 1) {
      rep.fail("app.palette", "node " + std::to_string(v) + " has color " + std::to_string(c));
      break;
    }
  }
  for (const auto& e : g.edges)
    if (color[static_cast<size_t>(e.first)] == color[static_cast<size_t>(e.second)]) {
      rep.fail("app.proper", "edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                                 " is monochromatic");
      break;
    }
  std::set<int> used(color.begin(), color.end());
  rep.measure("colors_used", static_cast<long long>(used.size()));
}

std::string rb_text(const RBColoring& rbc) {
  std::ostringstream out;
  for (const auto& kv : rbc.color)
    out << "rb " << kv.first << " "
        << (kv.second == RB::red ? "r" : kv.second == RB::blue ? "b" : "u") << "\n";
  return out.str();
}

int cmd_run(const RunOpts& o) {
  GraphSpec spec = parse_graph_spec(o.graph);
  bool random_family = spec.family == "gnp" || spec.family == "tree";
  if (spec.seed == 0) spec.seed = o.seed;
  if (random_family && spec.seed == 0)
    throw std::invalid_argument("family '" + spec.family + "' needs a seed (seed= or --seed)");
  Graph g = realize(spec);
  ModelConfig cfg = config_of(o);
  IdAssignment ids = assign_ids(g.n, scheme_of(o.scheme), o.id_bits, o.seed);
  RoundMetrics metrics;
  CheckReport rep;
  auto t0 = std::chrono::steady_clock::now();

  ordered_json rec;
  rec["cmd"] = "run";
  rec["graph"] = o.graph;
  rec["seed"] = o.seed;
  rec["algo"] = o.algo;
  rec["mode"] = o.mode;
  rec["bandwidth"] = o.bandwidth;
  rec["id_bits"] = ids.bits;
  rec["id_scheme"] = o.scheme;
  rec["n"] = g.n;
  rec["m"] = g.m();

  if (o.algo == "fast" || o.algo == "fast-id") {
    if (!o.trace.empty()) throw std::invalid_argument("--trace needs a single-carve algorithm (rg, slow-id)");
    Decomposition d = o.algo == "fast" ? decompose_fast(g, ids, cfg, metrics)
                                       : decompose_fast_id_independent(g, ids, cfg, metrics);
    d.seed = o.seed;
    if (!o.out.empty()) write_file(o.out, to_text(d));
    if (o.check) rep = check_decomposition(g, d);
    rec["variant"] = d.variant;
    rec["b"] = d.b;
    rec["L"] = d.L;
    rec["colors"] = d.stats.colors;
    rec["max_weak_diameter"] = d.stats.max_weak_diameter;
    rec["max_overlap"] = d.stats.max_overlap;
    rec["killed"] = d.stats.killed;
  } else if (o.algo == "rg" || o.algo == "slow-id") {
    CarveResult cr = o.algo == "rg" ? carve_rg_baseline(g, ids, all_nodes(g.n), cfg, metrics)
                                    : carve_id_independent_slow(g, ids, all_nodes(g.n), cfg, metrics);
    if (!o.out.empty()) write_file(o.out, cr.trace);
    if (!o.trace.empty()) write_file(o.trace, cr.trace);
    if (o.check) check_carve_result(g, cr, g.n, rep);
    rec["surviving"] = cr.surviving.size();
    rec["killed"] = cr.killed;
  } else if (o.algo == "mis" || o.algo == "coloring") {
    if (!o.trace.empty()) throw std::invalid_argument("--trace needs a single-carve algorithm (rg, slow-id)");
    Decomposition d = decompose_fast(g, ids, cfg, metrics);
    rec["colors"] = d.stats.colors;
    if (o.algo == "mis") {
      MisResult r = mis_via_decomposition(g, d, cfg, metrics);
      if (!o.out.empty()) write_file(o.out, to_text(r));
      if (o.check) check_mis_result(g, r.selected, rep);
      rec["selected"] = r.selected.size();
    } else {
      int delta = 0;
      for (int v = 0; v < g.n; ++v) delta = std::max(delta, g.degree(v));
      ColoringResult r = coloring_via_decomposition(g, d, delta, cfg, metrics);
      if (!o.out.empty()) write_file(o.out, to_text(r));
      if (o.check) check_coloring_result(g, r.color, delta, rep);
      rec["delta"] = delta;
    }
  } else if (o.algo == "balanced-color") {
    if (!o.trace.empty()) throw std::invalid_argument("--trace needs a single-carve algorithm (rg, slow-id)");
    RBColoring rbc = balanced_color_nodes(g, ids, cfg, metrics);
    if (!o.out.empty()) write_file(o.out, rb_text(rbc));
    if (o.check) {
      rep = check_balance(g.adj, rbc.color, all_nodes(g.n));
      rep.note("balance.colored");
      for (int v = 0; v < g.n; ++v) {
        auto it = rbc.color.find(v);
        if (it == rbc.color.end() || it->second == RB::uncolored) {
          rep.fail("balance.colored", "node " + std::to_string(v) + " is uncolored");
          break;
        }
      }
    }
  } else {
    throw std::invalid_argument("unknown algo '" + o.algo + "'");
  }

  auto t1 = std::chrono::steady_clock::now();
  rec["rounds"] = metrics.rounds_total;
  rec["messages"] = metrics.messages_sent;
  rec["bits"] = metrics.bits_sent;
  if (o.check) {
    rec["check_ok"] = rep.ok();
    if (!rep.ok()) std::cerr << rep.to_text();
  }
  rec["wall_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  std::cout << rec.dump() << "\n";
  return o.check && !rep.ok() ? 1 : 0;
}

struct BenchRow {
  std::string algo, family;
  int n = 0;
  double p = 0.0;
  uint64_t seed = 0;
  int id_bits = 0, b = 0, L = 0, colors = 0, maxdiam = 0;
  long long overlap = 0, killed = 0, rounds = 0, messages = 0;
};

std::string csv_of(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "algo,family,n,p,seed,id_bits,b,L,colors,max_weak_diameter,max_overlap,killed,rounds,messages\n";
  for (const BenchRow& r : rows) {
    std::ostringstream pcol;
    pcol << r.p;
    out << r.algo << "," << r.family << "," << r.n << "," << pcol.str() << "," << r.seed << ","
        << r.id_bits << "," << r.b << "," << r.L << "," << r.colors << "," << r.maxdiam << ","
        << r.overlap << "," << r.killed << "," << r.rounds << "," << r.messages << "\n";
  }
  return out.str();
}

BenchRow bench_one(const std::string& algo, int n, double p, uint64_t seed, int id_bits) {
  Graph g = gen_gnp(n, p, seed);
  IdAssignment ids = assign_ids(n, IdScheme::shuffled, id_bits, seed);
  ModelConfig cfg;
  RoundMetrics metrics;
  Decomposition d = algo == "fast" ? decompose_fast(g, ids, cfg, metrics)
                                   : decompose_fast_id_independent(g, ids, cfg, metrics);
  BenchRow r;
  r.algo = algo;
  r.family = "gnp";
  r.n = n;
  r.p = p;
  r.seed = seed;
  r.id_bits = ids.bits;
  r.b = d.b;
  r.L = d.L;
  r.colors = d.stats.colors;
  r.maxdiam = d.stats.max_weak_diameter;
  r.overlap = d.stats.max_overlap;
  r.killed = d.stats.killed;
  r.rounds = metrics.rounds_total;
  r.messages = metrics.messages_sent;
  return r;
}

// least-squares slope of log(mean rounds) against log(ln n)
double fitted_exponent(const std::vector<BenchRow>& rows) {
  std::map<int, std::pair<double, int>> by_n;
  for (const BenchRow& r : rows) {
    by_n[r.n].first += static_cast<double>(r.rounds);
    by_n[r.n].second += 1;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& kv : by_n)
    pts.push_back({std::log(std::log(static_cast<double>(kv.first))),
                   std::log(kv.second.first / kv.second.second)});
  if (pts.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& q : pts) {
    sx += q.first;
    sy += q.second;
    sxx += q.first * q.first;
    sxy += q.first * q.second;
  }
  double k = static_cast<double>(pts.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int cmd_bench(const BenchOpts& o) {
  std::vector<BenchRow> rows;
  std::string tail;
  if (o.algo == "fast") {
    for (int n = o.nmin; n <= o.nmax; n *= 2) {
      double p = std::min(0.5, 8.0 / n);
      // three seeds while runs are cheap, one at the large end
      std::vector<uint64_t> seeds = n <= 2048 ? std::vector<uint64_t>{1, 2, 3} : std::vector<uint64_t>{1};
      for (uint64_t s : seeds) rows.push_back(bench_one("fast", n, p, s, 0));
    }
    if (rows.size() >= 2) {
      std::ostringstream e;
      e.setf(std::ios::fixed);
      e.precision(3);
      e << fitted_exponent(rows);
      tail = "# fitted_exponent " + e.str() + "\n";
    }
  } else if (o.algo == "fast-id") {
    for (int n : {64, 256})
      for (int b : {16, 32, 64}) rows.push_back(bench_one("fast-id", n, std::min(0.5, 8.0 / n), 1, b));
  } else {
    throw std::invalid_argument("bench supports algo fast or fast-id");
  }
  std::string csv = csv_of(rows) + tail;
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
    ordered_json rec;
    rec["cmd"] = "bench";
    rec["algo"] = o.algo;
    rec["rows"] = rows.size();
    if (!tail.empty()) rec["fitted_exponent"] = fitted_exponent(rows);
    std::cout << rec.dump() << "\n";
  }
  return 0;
}

int cmd_verify(const VerifyOpts& o) {
  Graph g = realize(parse_graph_spec(o.graph));
  std::string text = read_file(o.result);
  std::istringstream in(text);
  std::string tag;
  in >> tag;
  CheckReport rep;
  if (tag == "D1") {
    rep = check_decomposition(g, parse_decomposition(text));
  } else if (tag == "h") {
    if (text.find("src=id") == std::string::npos && text.find("src=col") == std::string::npos)
      throw std::invalid_argument("no trace checker for this carving engine");
    rep = check_carve_trace(g, text);
  } else if (tag == "m") {
    std::vector<int> selected;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream ls(line);
      std::string t;
      int v;
      if (ls >> t >> v && t == "m") selected.push_back(v);
    }
    check_mis_result(g, selected, rep);
  } else if (tag == "col") {
    std::vector<int> color(static_cast<size_t>(g.n), 0);
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream ls(line);
      std::string t;
      int v, c;
      if (ls >> t >> v >> c && t == "col" && v >= 0 && v < g.n) color[static_cast<size_t>(v)] = c;
    }
    int delta = 0;
    for (int v = 0; v < g.n; ++v) delta = std::max(delta, g.degree(v));
    check_coloring_result(g, color, delta, rep);
  } else if (tag == "rb") {
    std::map<int, RB> color;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream ls(line);
      std::string t, c;
      int v;
      if (ls >> t >> v >> c && t == "rb")
        color[v] = c == "r" ? RB::red : c == "b" ? RB::blue : RB::uncolored;
    }
    rep = check_balance(g.adj, color, all_nodes(g.n));
  } else {
    throw std::invalid_argument("unrecognized result format in " + o.result);
  }
  std::cout << rep.to_text();
  return rep.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic network decomposition toolkit"};
  app.require_subcommand(1);

  RunOpts ro;
  CLI::App* run = app.add_subcommand("run", "run one algorithm on one graph");
  run->add_option("--graph", ro.graph, "gen:family:k=v,... or an edge-list file")->required();
  run->add_option("--seed", ro.seed, "seed for random families and id shuffling");
  run->add_option("--algo", ro.algo, "fast | rg | slow-id | fast-id | mis | coloring | balanced-color")
      ->required();
  run->add_option("--mode", ro.mode, "logical | faithful");
  run->add_option("--bandwidth", ro.bandwidth, "bits per edge per round, -1 unbounded");
  run->add_option("--id-bits", ro.id_bits, "identifier width, 0 for minimal");
  run->add_option("--id-scheme", ro.scheme, "sequential | shuffled | padded");
  run->add_flag("--check", ro.check, "verify the result; nonzero exit on failure");
  run->add_option("--out", ro.out, "write the result text here");
  run->add_option("--trace", ro.trace, "write the carving trace here (rg, slow-id)");

  BenchOpts bo;
  CLI::App* bench = app.add_subcommand("bench", "sweep a benchmark grid, emit CSV");
  bench->add_option("--algo", bo.algo, "fast | fast-id");
  bench->add_option("--nmin", bo.nmin, "smallest n, doubled up to nmax");
  bench->add_option("--nmax", bo.nmax, "largest n");
  bench->add_option("--out", bo.out, "write CSV here instead of stdout");

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand("verify", "check a serialized result against its graph");
  verify->add_option("--graph", vo.graph, "gen:family:k=v,... or an edge-list file")->required();
  verify->add_option("result", vo.result, "result file: decomposition, trace, mis, coloring or red/blue")
      ->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(ro);
    if (bench->parsed()) return cmd_bench(bo);
    if (verify->parsed()) return cmd_verify(vo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
