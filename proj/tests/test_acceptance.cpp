// Acceptance gate: one test case and one printed PASS/FAIL line per release
// criterion. Module tests cover the details; this binary re-checks the
// headline guarantees end to end on a fixed cross-family graph suite.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netdecomp/aggregate.hpp"
#include "netdecomp/apps.hpp"
#include "netdecomp/decompose.hpp"
#include "netdecomp/verify.hpp"

using namespace netdecomp;

namespace {

void report(int num, const std::string& slug, bool ok, const std::string& note) {
  std::string line = "criterion " + std::to_string(num) + " " + slug + ": " + (ok ? "PASS" : "FAIL");
  if (!ok && !note.empty()) line += "  [" + note + "]";
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
}

struct Tally {
  bool ok = true;
  std::string note;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

std::vector<int> all_nodes(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) return "";
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

// fifty graphs across every generator family
const std::vector<std::pair<std::string, Graph>>& suite() {
  static std::vector<std::pair<std::string, Graph>> s = [] {
    std::vector<std::pair<std::string, Graph>> v;
    for (int n : {128, 512, 2048})
      for (double p : {0.01, 0.05})
        for (uint64_t seed = 1; seed <= 5; ++seed)
          v.push_back({"gnp n=" + std::to_string(n) + " p=" + std::to_string(p) + " s=" +
                           std::to_string(seed),
                       gen_gnp(n, p, seed)});
    for (int n : {64, 256, 1024}) v.push_back({"path n=" + std::to_string(n), gen_path(n)});
    v.push_back({"grid 8x8", gen_grid(8, 8)});
    v.push_back({"grid 16x16", gen_grid(16, 16)});
    v.push_back({"grid 32x32", gen_grid(32, 32)});
    v.push_back({"grid 64x16", gen_grid(64, 16)});
    for (int n : {128, 512, 2048})
      for (uint64_t seed = 1; seed <= 3; ++seed)
        v.push_back({"tree n=" + std::to_string(n) + " s=" + std::to_string(seed), gen_tree(n, seed)});
    for (int n : {63, 255, 1023}) v.push_back({"cycle n=" + std::to_string(n), gen_cycle(n)});
    v.push_back({"complete n=64", gen_complete(64)});
    return v;
  }();
  return s;
}

struct SuiteCarve {
  const std::string* name;
  const Graph* g;
  CarveResult cr;
};

const std::vector<SuiteCarve>& suite_carves() {
  static std::vector<SuiteCarve> runs = [] {
    std::vector<SuiteCarve> v;
    uint64_t i = 0;
    for (const auto& sg : suite()) {
      const Graph& g = sg.second;
      int bits = std::max(1, ceil_log2(static_cast<uint64_t>(g.n)));
      IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, bits, 1000 + i);
      ModelConfig cfg;
      RoundMetrics metrics;
      SuiteCarve run;
      run.name = &sg.first;
      run.g = &g;
      run.cr = carve(g, ids, all_nodes(g.n), make_carve_params(g.n, bits), cfg, metrics);
      v.push_back(std::move(run));
      ++i;
    }
    return v;
  }();
  return runs;
}

struct SuiteDecomp {
  const std::string* name;
  const Graph* g;
  Decomposition d;
};

const std::vector<SuiteDecomp>& suite_decomps() {
  static std::vector<SuiteDecomp> runs = [] {
    std::vector<SuiteDecomp> v;
    uint64_t i = 0;
    for (const auto& sg : suite()) {
      const Graph& g = sg.second;
      int bits = std::max(1, ceil_log2(static_cast<uint64_t>(g.n)));
      IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, bits, 77 + i);
      ModelConfig cfg;
      RoundMetrics metrics;
      SuiteDecomp run;
      run.name = &sg.first;
      run.g = &g;
      run.d = decompose_fast(g, ids, cfg, metrics);
      v.push_back(std::move(run));
      ++i;
    }
    return v;
  }();
  return runs;
}

} // namespace

TEST_CASE("criterion 1: carving keeps half and separates") {
  Tally t;
  for (const SuiteCarve& run : suite_carves()) {
    long long kept = static_cast<long long>(run.cr.surviving.size());
    t.expect(2 * kept >= run.g->n, *run.name + ": " + std::to_string(kept) + " of " +
                                       std::to_string(run.g->n) + " survive");
    for (const auto& e : run.g->edges) {
      int cu = run.cr.final_cluster[static_cast<size_t>(e.first)];
      int cv = run.cr.final_cluster[static_cast<size_t>(e.second)];
      if (cu >= 0 && cv >= 0)
        t.expect(cu == cv, *run.name + ": surviving clusters adjacent at edge " +
                               std::to_string(e.first) + "-" + std::to_string(e.second));
    }
  }
  t.expect(suite_carves().size() == 50, "suite size");
  report(1, "carving half survival and separation", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 2: decomposition quality bounds") {
  Tally t;
  for (const SuiteDecomp& run : suite_decomps()) {
    CheckReport rep = check_decomposition(*run.g, run.d);
    if (!rep.ok()) {
      for (const auto& item : rep.items)
        if (!item.pass) {
          t.expect(false, *run.name + ": " + item.name + ": " + item.witness);
          break;
        }
    }
  }
  report(2, "decomposition colors, diameter, overlap", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 3: trace replay and injected faults") {
  Tally t;
  for (const SuiteCarve& run : suite_carves()) {
    CheckReport rep = check_carve_trace(*run.g, run.cr.trace);
    if (!rep.ok())
      for (const auto& item : rep.items)
        if (!item.pass) {
          t.expect(false, *run.name + ": " + item.name + ": " + item.witness);
          break;
        }
  }

  // colored decision bits replay too
  {
    Graph g = gen_path(2);
    IdAssignment ids = assign_ids(2, IdScheme::sequential, 1, 0);
    ModelConfig cfg;
    RoundMetrics metrics;
    ColorHook hook = [](CarveView& view) {
      for (auto& c : view.clusters) c.color_bit = c.cid == 1 ? 1 : 0;
    };
    CarveResult cr = carve(g, ids, all_nodes(2), make_carve_params(2, 1, BitSource::assigned_color),
                           cfg, metrics, hook);
    t.expect(check_carve_trace(g, cr.trace).ok(), "colored trace replay");
  }

  // three doctored traces, each tripping its named check
  Graph k2 = gen_complete(2);
  std::string base;
  {
    IdAssignment ids = assign_ids(2, IdScheme::sequential, 1, 0);
    ModelConfig cfg;
    RoundMetrics metrics;
    base = carve(k2, ids, all_nodes(2), make_carve_params(2, 1), cfg, metrics).trace;
  }
  auto swap_once = [&t](std::string s, const std::string& from, const std::string& to) {
    size_t pos = s.find(from);
    t.expect(pos != std::string::npos, "missing '" + from + "' in the baseline trace");
    if (pos != std::string::npos) s.replace(pos, from.size(), to);
    return s;
  };
  auto tripped = [](const CheckReport& rep, const std::string& name) {
    const CheckItem* it = rep.find(name);
    const CheckItem* parse = rep.find("trace.parse");
    return it && !it->pass && parse && parse->pass;
  };
  CheckReport fa = check_carve_trace(k2, swap_once(base, "C 1 1 0 1 4 1", "C 1 1 0 0 4 1"));
  t.expect(tripped(fa, "trace.tokens"), "fault A missed the token floor");
  std::string fb = swap_once(base, "P 0 0 1 1", "P 1 1 0 0");
  fb = swap_once(fb, "D 0 k 0 1", "D 0 a 1 2");
  fb = swap_once(fb, "D 1 a 1 2", "D 1 k 0 1");
  fb = swap_once(fb, "X 0", "X 1");
  t.expect(tripped(check_carve_trace(k2, fb), "trace.potential_step"),
           "fault B missed the potential step");
  CheckReport fc = check_carve_trace(k2, swap_once(base, "T 2 0", "T 0 2"));
  t.expect(tripped(fc, "trace.kills"), "fault C missed the kill budget");

  report(3, "trace invariants and fault injection", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 4: aggregation matches central computation") {
  Tally t;

  auto spanning_tree = [](const Graph& g, int root, int id) {
    Tree tr;
    tr.id = id;
    tr.root = root;
    std::vector<int> seen(static_cast<size_t>(g.n), 0);
    std::vector<int> q = {root};
    seen[static_cast<size_t>(root)] = 1;
    for (size_t h = 0; h < q.size(); ++h)
      for (int w : g.adj[static_cast<size_t>(q[h])])
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          tr.edges.push_back({w, q[h]});
          q.push_back(w);
        }
    return tr;
  };
  auto bits_of = [](const BitString& s) {
    std::string out;
    for (int i = 0; i < s.size_bits(); ++i) out += static_cast<char>('0' + s.bit(i));
    return out;
  };

  int instances = 0;
  const int m_bits = 6, K = 4;
  const long long bandwidth = 32;
  for (uint64_t seed = 0; seed < 200 && t.ok; ++seed) {
    int n = 20 + static_cast<int>((seed * 7) % 180);
    Graph g = gen_gnp(n, 0.2, seed);
    int ntrees = 2 + static_cast<int>(seed % 15); // up to 16 trees through one edge
    std::vector<Tree> trees;
    for (int k = 0; k < ntrees; ++k) trees.push_back(spanning_tree(g, (k * 5) % n, k));
    ChannelPlan plan = plan_channels(g, trees, bandwidth);
    t.expect(plan.max_trees_per_edge <= 16, "instance overlap above 16");

    TreeNodeValues vals;
    std::map<int, uint64_t> want_sum, want_min;
    std::map<std::pair<int, int>, BitString> specials;
    std::map<int, std::vector<std::string>> want_cc;
    for (const Tree& tr : trees) {
      TreeView tv = view_of(g, tr);
      int at = 0;
      for (int node : tv.nodes) {
        uint64_t x = rand_key(seed, static_cast<uint64_t>(tr.id), static_cast<uint64_t>(node)) &
                     ((1ull << m_bits) - 1);
        vals[{tr.id, node}] = x;
        want_sum[tr.id] += x;
        auto it = want_min.find(tr.id);
        want_min[tr.id] = it == want_min.end() ? x : std::min(it->second, x);
        if (at++ % 3 == 0) {
          BitString msg;
          msg.append_uint(x, m_bits);
          specials[{tr.id, node}] = msg;
          want_cc[tr.id].push_back(bits_of(msg));
        }
      }
      std::sort(want_cc[tr.id].begin(), want_cc[tr.id].end());
      if (static_cast<int>(want_cc[tr.id].size()) > K) want_cc[tr.id].resize(K);
    }

    for (bool faithful : {false, true}) {
      ModelConfig cfg;
      cfg.bandwidth = bandwidth;
      cfg.faithful = faithful;
      RoundMetrics ms, mm, mb, mc;
      AggOutcome s = pipelined_sum(g, trees, plan, vals, m_bits, cfg, ms);
      AggOutcome mn = pipelined_min(g, trees, plan, vals, m_bits, cfg, mm);
      std::map<int, uint64_t> roots;
      for (const Tree& tr : trees) roots[tr.id] = want_min.at(tr.id);
      BroadcastOutcome bo = pipelined_broadcast(g, trees, plan, roots, m_bits, cfg, mb);
      ConvergecastOutcome co = pipelined_convergecast(g, trees, plan, specials, m_bits, K, cfg, mc);
      for (const Tree& tr : trees) {
        t.expect(s.per_root.at(tr.id) == want_sum.at(tr.id), "sum mismatch");
        t.expect(mn.per_root.at(tr.id) == want_min.at(tr.id), "min mismatch");
        std::vector<std::string> got;
        for (const BitString& msg : co.per_root.at(tr.id)) got.push_back(bits_of(msg));
        t.expect(got == want_cc.at(tr.id), "convergecast mismatch");
      }
      for (const auto& kv : bo.received)
        t.expect(kv.second == roots.at(kv.first.first), "broadcast mismatch");
      t.expect(s.rounds <= sum_round_bound(plan, m_bits), "sum rounds above bound");
      t.expect(mn.rounds <= min_round_bound(plan, m_bits), "min rounds above bound");
      t.expect(bo.rounds <= broadcast_round_bound(plan, m_bits), "broadcast rounds above bound");
      t.expect(co.rounds <= convergecast_round_bound(plan, m_bits, K), "convergecast rounds above bound");
    }
    ++instances;
  }
  t.expect(!t.ok || instances == 200, "instance count");
  report(4, "aggregation oracle equivalence", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 5: balanced coloring within three quarters") {
  Tally t;

  auto min_degree_graph = [](int n, uint64_t seed) {
    Graph base = gen_gnp(n, std::min(0.5, 2.5 / n), seed);
    std::set<std::pair<int, int>> es(base.edges.begin(), base.edges.end());
    for (int v = 0; v < n; ++v)
      if (base.adj[static_cast<size_t>(v)].empty()) {
        int u = (v + 1) % n;
        es.insert({std::min(u, v), std::max(u, v)});
      }
    return make_graph(n, std::vector<std::pair<int, int>>(es.begin(), es.end()));
  };

  int runs = 0;
  for (int n : {16, 64, 256, 1024, 2048}) {
    for (uint64_t seed = 1; seed <= 40 && t.ok; ++seed) {
      Graph g = min_degree_graph(n, seed * 131 + static_cast<uint64_t>(n));
      IdAssignment ids = assign_ids(n, IdScheme::shuffled, 16, seed);
      ModelConfig cfg;
      RoundMetrics metrics;
      RBColoring rbc = balanced_color_nodes(g, ids, cfg, metrics);
      long long red = 0, blue = 0;
      for (int v = 0; v < n; ++v) {
        auto it = rbc.color.find(v);
        if (it != rbc.color.end() && it->second == RB::red) ++red;
        if (it != rbc.color.end() && it->second == RB::blue) ++blue;
      }
      t.expect(red + blue == n, "node left uncolored");
      t.expect(std::max(red, blue) <= 3LL * n / 4,
               "n=" + std::to_string(n) + " s=" + std::to_string(seed) + ": " +
                   std::to_string(std::max(red, blue)) + " of " + std::to_string(n));
      CheckReport rep = check_balance(g.adj, rbc.color, all_nodes(n));
      t.expect(rep.ok(), "component balance");
      ++runs;
    }
  }
  t.expect(!t.ok || runs == 200, "run count");

  // identifier width moves rounds only through the log-star term
  long long allowance =
      kLogStarSlope * (log_star(64.0) - log_star(16.0));
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Graph g = min_degree_graph(256, seed);
    ModelConfig cfg;
    IdAssignment a16 = assign_ids(256, IdScheme::shuffled, 16, seed);
    IdAssignment a64 = assign_ids(256, IdScheme::padded, 64, seed);
    for (int v = 0; v < 256; ++v) a64.id[static_cast<size_t>(v)] = a16.id[static_cast<size_t>(v)];
    RoundMetrics m16, m64;
    RBColoring r16 = balanced_color_nodes(g, a16, cfg, m16);
    RBColoring r64 = balanced_color_nodes(g, a64, cfg, m64);
    long long diff = r64.rounds - r16.rounds;
    if (diff < 0) diff = -diff;
    t.expect(diff <= allowance, "round gap " + std::to_string(diff) + " above " +
                                    std::to_string(allowance));
  }
  report(5, "balanced coloring size and log-star rounds", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 6: identifier width independence") {
  Tally t;
  std::vector<std::pair<std::string, Graph>> fixed;
  fixed.push_back({"gnp", gen_gnp(128, 0.05, 1)});
  fixed.push_back({"grid", gen_grid(12, 12)});
  fixed.push_back({"tree", gen_tree(200, 3)});
  fixed.push_back({"path", gen_path(100)});
  for (const auto& fg : fixed) {
    const Graph& g = fg.second;
    ModelConfig cfg;
    IdAssignment a16 = assign_ids(g.n, IdScheme::padded, 16, 0);
    IdAssignment a64 = assign_ids(g.n, IdScheme::padded, 64, 0);
    RoundMetrics m16, m64;
    Decomposition d16 = decompose_fast_id_independent(g, a16, cfg, m16);
    Decomposition d64 = decompose_fast_id_independent(g, a64, cfg, m64);
    t.expect(d16.stats.colors == d64.stats.colors, fg.first + ": color counts differ");
    t.expect(d16.stats.max_weak_diameter == d64.stats.max_weak_diameter,
             fg.first + ": diameters differ");
    t.expect(d16.stats.killed == d64.stats.killed, fg.first + ": kill counts differ");
    t.expect(to_text(d16) == to_text(d64), fg.first + ": serialized outputs differ");
    t.expect(d16.b == 1 + ceil_log_43(g.n), fg.first + ": internal width not n-derived");
    t.expect(check_decomposition(g, d16).ok(), fg.first + ": quality check failed");
  }
  report(6, "identifier width independence", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 7: logical and faithful traces agree") {
  Tally t;
  std::vector<std::pair<std::string, Graph>> fixed;
  fixed.push_back({"gnp64", gen_gnp(64, 0.1, 1)});
  fixed.push_back({"gnp256", gen_gnp(256, 0.02, 2)});
  fixed.push_back({"path", gen_path(100)});
  fixed.push_back({"grid", gen_grid(10, 10)});
  fixed.push_back({"tree", gen_tree(200, 3)});
  fixed.push_back({"complete", gen_complete(32)});
  for (const auto& fg : fixed) {
    const Graph& g = fg.second;
    int bits = std::max(1, ceil_log2(static_cast<uint64_t>(g.n)));
    IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, bits, 11);
    CarveParams params = make_carve_params(g.n, bits);
    ModelConfig logical, faithful, narrow;
    faithful.faithful = true;
    narrow.faithful = true;
    narrow.bandwidth = 32;
    RoundMetrics ml, mf, mn;
    CarveResult rl = carve(g, ids, all_nodes(g.n), params, logical, ml);
    CarveResult rf = carve(g, ids, all_nodes(g.n), params, faithful, mf);
    CarveResult rn = carve(g, ids, all_nodes(g.n), params, narrow, mn);
    t.expect(rl.trace == rf.trace, fg.first + ": faithful trace diverges");
    t.expect(rl.trace == rn.trace, fg.first + ": bounded-bandwidth trace diverges");
  }
  {
    Graph g = gen_gnp(128, 0.05, 1);
    IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, 7, 11);
    ModelConfig logical, faithful;
    faithful.faithful = true;
    RoundMetrics ml, mf;
    Decomposition dl = decompose_fast(g, ids, logical, ml);
    Decomposition df = decompose_fast(g, ids, faithful, mf);
    // round totals are the one legitimate difference between the modes
    dl.stats.rounds = df.stats.rounds = 0;
    t.expect(to_text(dl) == to_text(df), "decomposition outputs diverge across modes");
  }
  report(7, "mode equivalence of traces", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 8: applications on the suite and brute force") {
  Tally t;
  for (const SuiteDecomp& run : suite_decomps()) {
    const Graph& g = *run.g;
    ModelConfig cfg;
    RoundMetrics m1, m2;
    MisResult mis = mis_via_decomposition(g, run.d, cfg, m1);
    std::vector<char> in(static_cast<size_t>(g.n), 0);
    for (int v : mis.selected) in[static_cast<size_t>(v)] = 1;
    for (const auto& e : g.edges)
      t.expect(!(in[static_cast<size_t>(e.first)] && in[static_cast<size_t>(e.second)]),
               *run.name + ": selected nodes adjacent");
    for (int v = 0; v < g.n; ++v) {
      if (in[static_cast<size_t>(v)]) continue;
      bool blocked = false;
      for (int u : g.adj[static_cast<size_t>(v)])
        if (in[static_cast<size_t>(u)]) blocked = true;
      t.expect(blocked, *run.name + ": node " + std::to_string(v) + " could join the set");
      if (!t.ok) break;
    }
    if (!t.ok) break;

    int delta = 0;
    for (int v = 0; v < g.n; ++v) delta = std::max(delta, g.degree(v));
    ColoringResult col = coloring_via_decomposition(g, run.d, delta, cfg, m2);
    for (int v = 0; v < g.n; ++v)
      t.expect(col.color[static_cast<size_t>(v)] >= 1 && col.color[static_cast<size_t>(v)] <= delta + 1,
               *run.name + ": color out of palette");
    for (const auto& e : g.edges)
      t.expect(col.color[static_cast<size_t>(e.first)] != col.color[static_cast<size_t>(e.second)],
               *run.name + ": improper edge");
    if (!t.ok) break;
  }

  // exhaustive family comparison for n <= 10
  std::vector<Graph> small;
  small.push_back(gen_path(6));
  small.push_back(gen_cycle(7));
  small.push_back(gen_complete(5));
  small.push_back(gen_star(9));
  for (uint64_t s = 1; s <= 3; ++s) small.push_back(gen_gnp(8, 0.3, s));
  for (const Graph& g : small) {
    std::set<std::vector<int>> family;
    for (unsigned mask = 0; mask < (1u << g.n); ++mask) {
      std::vector<char> in(static_cast<size_t>(g.n), 0);
      std::vector<int> nodes;
      for (int v = 0; v < g.n; ++v)
        if ((mask >> v) & 1u) {
          in[static_cast<size_t>(v)] = 1;
          nodes.push_back(v);
        }
      bool indep = true;
      for (const auto& e : g.edges)
        if (in[static_cast<size_t>(e.first)] && in[static_cast<size_t>(e.second)]) indep = false;
      bool maxi = true;
      for (int v = 0; v < g.n && indep; ++v) {
        if (in[static_cast<size_t>(v)]) continue;
        bool blocked = false;
        for (int u : g.adj[static_cast<size_t>(v)])
          if (in[static_cast<size_t>(u)]) blocked = true;
        if (!blocked) maxi = false;
      }
      if (indep && maxi) family.insert(nodes);
    }
    int bits = std::max(1, ceil_log2(static_cast<uint64_t>(g.n)));
    IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, bits, 21);
    ModelConfig cfg;
    RoundMetrics md, mm;
    Decomposition d = decompose_fast(g, ids, cfg, md);
    MisResult mis = mis_via_decomposition(g, d, cfg, mm);
    t.expect(family.count(mis.selected) == 1, "small-graph set outside the brute-force family");
  }
  report(8, "independent sets and colorings", t.ok, t.note);
  CHECK(t.ok);
}

TEST_CASE("criterion 9: round growth is polylogarithmic") {
  Tally t;
  std::string csv_path = "acceptance_bench.csv";
  std::string cmd = std::string(ACCEPT_BIN) + " bench --out " + csv_path + " > acceptance_bench.json";
  int rc = std::system(cmd.c_str());
  t.expect(rc == 0, "bench command failed");
  std::string csv = read_file(csv_path);
  t.expect(!csv.empty(), "bench wrote no CSV");
  std::string marker = "# fitted_exponent ";
  size_t pos = csv.rfind(marker);
  t.expect(pos != std::string::npos, "no fitted exponent in the CSV");
  if (pos != std::string::npos) {
    double e = std::stod(csv.substr(pos + marker.size()));
    t.expect(e <= 6.0, "fitted exponent " + std::to_string(e));
    t.expect(e > 0.0, "fitted exponent not positive");
  }
  std::string golden = read_file(ACCEPT_GOLDEN);
  t.expect(!golden.empty(), "missing golden CSV");
  t.expect(csv == golden, "bench CSV diverges from the golden copy");
  report(9, "bench sweep exponent and golden curve", t.ok, t.note);
  CHECK(t.ok);
}
