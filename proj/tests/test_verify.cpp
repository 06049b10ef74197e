#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netdecomp/verify.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "netdecomp/decompose.hpp"

using namespace netdecomp;

namespace {

std::vector<int> all_nodes(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

bool passes(const CheckReport& r, const std::string& name) {
  const CheckItem* it = r.find(name);
  REQUIRE(it != nullptr);
  return it->pass;
}

std::string witness(const CheckReport& r, const std::string& name) {
  const CheckItem* it = r.find(name);
  REQUIRE(it != nullptr);
  return it->witness;
}

long long measured(const CheckReport& r, const std::string& key) {
  for (const auto& kv : r.measured)
    if (kv.first == key) return kv.second;
  REQUIRE(false);
  return -1;
}

// single-occurrence surgery on a trace
std::string replaced(std::string s, const std::string& from, const std::string& to) {
  size_t pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  REQUIRE(s.find(from, pos + 1) == std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

Decomposition decomp_of(const Graph& g, uint64_t seed) {
  IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, ceil_log2(static_cast<uint64_t>(g.n)), seed);
  ModelConfig cfg;
  RoundMetrics metrics;
  return decompose_fast(g, ids, cfg, metrics);
}

} // namespace

TEST_CASE("report plumbing") {
  CheckReport r;
  r.note("alpha");
  r.fail("beta", "first");
  r.fail("beta", "second"); // first witness sticks
  r.measure("count", 7);
  CHECK(!r.ok());
  CHECK(r.find("alpha") != nullptr);
  CHECK(r.find("alpha")->pass);
  CHECK(r.find("beta") != nullptr);
  CHECK(!r.find("beta")->pass);
  CHECK(r.find("beta")->witness == "first");
  CHECK(r.find("gamma") == nullptr);
  std::string text = r.to_text();
  CHECK(text.find("check.alpha=pass") != std::string::npos);
  CHECK(text.find("check.beta=fail") != std::string::npos);
  CHECK(text.find("witness.beta=first") != std::string::npos);
  CHECK(text.find("measured.count=7") != std::string::npos);
  CHECK(text.find("ok=0") != std::string::npos);

  CheckReport good;
  good.note("alpha");
  CHECK(good.ok());
  CHECK(good.to_text().find("ok=1") != std::string::npos);
}

TEST_CASE("valid decomposition passes every check") {
  Graph g = gen_complete(2);
  Decomposition d = decomp_of(g, 3);
  CheckReport r = check_decomposition(g, d);
  CHECK(r.ok());
  CHECK(measured(r, "colors") == d.stats.colors);
  CHECK(measured(r, "max_weak_diameter") == d.stats.max_weak_diameter);
  CHECK(measured(r, "max_overlap") == d.stats.max_overlap);
}

TEST_CASE("adjacent same-color clusters are caught") {
  Graph g = gen_path(2);
  Decomposition d;
  d.variant = "fast";
  d.n = 2;
  d.b = 1;
  d.L = 1 + ceil_log2(2);
  d.color = {1, 1};
  d.cluster_of = {0, 1};
  for (int v = 0; v < 2; ++v) {
    DecompCluster c;
    c.color = 1;
    c.cid = static_cast<uint64_t>(v);
    c.seed = v;
    c.members = {v};
    d.clusters.push_back(c);
  }
  d.stats.colors = 1;
  d.stats.max_weak_diameter = 0;
  d.stats.max_overlap = 1;
  CheckReport r = check_decomposition(g, d);
  CHECK(!r.ok());
  CHECK(!passes(r, "decomp.adjacency"));
  CHECK(witness(r, "decomp.adjacency").find("0-1") != std::string::npos);
  CHECK(passes(r, "decomp.structure"));
  CHECK(passes(r, "decomp.colors"));
  CHECK(passes(r, "decomp.diameter"));
  CHECK(passes(r, "decomp.trees"));
  CHECK(passes(r, "decomp.overlap"));
}

TEST_CASE("weak diameter past the bound is caught") {
  // one cluster holding both path endpoints, middles as singletons
  Graph g = gen_path(10);
  Decomposition d;
  d.variant = "fast";
  d.n = 10;
  d.b = 1;
  d.L = 1 + ceil_log2(10);
  d.color.assign(10, 0);
  d.cluster_of.assign(10, -1);
  DecompCluster ends;
  ends.color = 1;
  ends.cid = 0;
  ends.seed = 0;
  ends.members = {0, 9};
  for (int v = 1; v <= 9; ++v) ends.tree_edges.push_back({v, v - 1});
  d.clusters.push_back(ends);
  d.color[0] = d.color[9] = 1;
  d.cluster_of[0] = d.cluster_of[9] = 0;
  for (int v = 1; v <= 8; ++v) {
    DecompCluster c;
    c.color = 1 + v;
    c.cid = static_cast<uint64_t>(v);
    c.seed = v;
    c.members = {v};
    d.color[static_cast<size_t>(v)] = c.color;
    d.cluster_of[static_cast<size_t>(v)] = static_cast<int>(d.clusters.size());
    d.clusters.push_back(c);
  }
  d.stats.colors = 9;
  d.stats.max_weak_diameter = 9;
  d.stats.max_overlap = 1;
  DecompBounds bounds;
  bounds.max_colors = 10;
  bounds.max_diameter = 8;
  CheckReport r = check_decomposition(g, d, bounds);
  CHECK(!r.ok());
  CHECK(!passes(r, "decomp.diameter"));
  CHECK(witness(r, "decomp.diameter").find("further apart") != std::string::npos);
  CHECK(passes(r, "decomp.structure"));
  CHECK(passes(r, "decomp.adjacency"));
  CHECK(passes(r, "decomp.colors"));
  CHECK(passes(r, "decomp.trees"));
}

TEST_CASE("decomposition checks against brute force on small graphs") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    Graph g = gen_gnp(9, 0.3, seed);
    Decomposition d = decomp_of(g, seed);
    CheckReport r = check_decomposition(g, d);
    CHECK(r.ok());

    // all-pairs distances the slow way
    std::vector<std::vector<int>> dist(static_cast<size_t>(g.n),
                                       std::vector<int>(static_cast<size_t>(g.n), -1));
    for (int s = 0; s < g.n; ++s) {
      std::queue<int> q;
      q.push(s);
      dist[static_cast<size_t>(s)][static_cast<size_t>(s)] = 0;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : g.adj[static_cast<size_t>(v)])
          if (dist[static_cast<size_t>(s)][static_cast<size_t>(u)] < 0) {
            dist[static_cast<size_t>(s)][static_cast<size_t>(u)] =
                dist[static_cast<size_t>(s)][static_cast<size_t>(v)] + 1;
            q.push(u);
          }
      }
    }
    int maxdiam = 0;
    for (const DecompCluster& c : d.clusters)
      for (int a : c.members)
        for (int b : c.members) {
          REQUIRE(dist[static_cast<size_t>(a)][static_cast<size_t>(b)] >= 0);
          maxdiam = std::max(maxdiam, dist[static_cast<size_t>(a)][static_cast<size_t>(b)]);
        }
    CHECK(measured(r, "max_weak_diameter") == maxdiam);

    for (const auto& e : g.edges) {
      int ci = d.cluster_of[static_cast<size_t>(e.first)];
      int cj = d.cluster_of[static_cast<size_t>(e.second)];
      if (ci != cj)
        CHECK(d.clusters[static_cast<size_t>(ci)].color != d.clusters[static_cast<size_t>(cj)].color);
    }
  }
}

namespace {

std::string carve_trace_k2() {
  Graph g = gen_complete(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 1, 0);
  CarveParams params = make_carve_params(2, 1);
  ModelConfig cfg;
  RoundMetrics metrics;
  CarveResult cr = carve(g, ids, all_nodes(2), params, cfg, metrics);
  return cr.trace;
}

} // namespace

TEST_CASE("genuine trace replays clean") {
  Graph g = gen_complete(2);
  std::string trace = carve_trace_k2();
  // the run is deterministic; the checker tests below edit this exact text
  CHECK(trace == "h n=2 b=1 L=2 src=id S=2\n"
                 "s 0 0\n"
                 "s 1 1\n"
                 "C 1 0 0 1 3 0\n"
                 "C 1 1 0 1 4 1\n"
                 "A 1 1\n"
                 "P 0 0 1 1\n"
                 "D 0 k 0 1\n"
                 "D 1 a 1 2\n"
                 "X 0\n"
                 "I 1 2\n"
                 "E 1\n"
                 "L 1 1 3\n"
                 "F 1\n"
                 "C 2 1 1 2 4 0\n"
                 "E 2\n"
                 "C 3 1 1 2 7 0\n"
                 "E 3\n"
                 "C 4 1 1 2 10 0\n"
                 "E 4\n"
                 "T 2 0\n");
  CheckReport r = check_carve_trace(g, trace);
  CHECK(r.ok());
  CHECK(measured(r, "surviving") == 2);
  CHECK(measured(r, "kills") == 0);
}

TEST_CASE("forged token balance is caught") {
  Graph g = gen_complete(2);
  std::string trace = replaced(carve_trace_k2(), "C 1 1 0 1 4 1", "C 1 1 0 0 4 1");
  CheckReport r = check_carve_trace(g, trace);
  CHECK(!r.ok());
  CHECK(passes(r, "trace.parse"));
  CHECK(!passes(r, "trace.tokens"));
  CHECK(witness(r, "trace.tokens").find("phase 1") != std::string::npos);
}

TEST_CASE("forged move against the potential is caught") {
  Graph g = gen_complete(2);
  std::string trace = carve_trace_k2();
  trace = replaced(trace, "P 0 0 1 1", "P 1 1 0 0");
  trace = replaced(trace, "D 0 k 0 1", "D 0 a 1 2");
  trace = replaced(trace, "D 1 a 1 2", "D 1 k 0 1");
  trace = replaced(trace, "X 0", "X 1");
  CheckReport r = check_carve_trace(g, trace);
  CHECK(!r.ok());
  CHECK(passes(r, "trace.parse"));
  CHECK(!passes(r, "trace.potential_step"));
}

TEST_CASE("forged kill total is caught") {
  Graph g = gen_complete(2);
  std::string trace = replaced(carve_trace_k2(), "T 2 0", "T 0 2");
  CheckReport r = check_carve_trace(g, trace);
  CHECK(!r.ok());
  CHECK(passes(r, "trace.parse"));
  CHECK(!passes(r, "trace.kills"));
}

TEST_CASE("id-bit carve trace on a random graph replays clean") {
  Graph g = gen_gnp(32, 0.1, 1);
  IdAssignment ids = assign_ids(32, IdScheme::shuffled, 5, 7);
  CarveParams params = make_carve_params(32, 5);
  ModelConfig cfg;
  RoundMetrics metrics;
  CarveResult cr = carve(g, ids, all_nodes(32), params, cfg, metrics);
  CheckReport r = check_carve_trace(g, cr.trace);
  CHECK(r.ok());
  CHECK(measured(r, "kills") == cr.killed);
  CHECK(measured(r, "surviving") == static_cast<long long>(cr.surviving.size()));
}

TEST_CASE("colored carve trace replays clean") {
  Graph g = gen_path(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 1, 0);
  CarveParams params = make_carve_params(2, 1, BitSource::assigned_color);
  ModelConfig cfg;
  RoundMetrics metrics;
  ColorHook hook = [](CarveView& view) {
    for (auto& c : view.clusters) c.color_bit = c.cid == 1 ? 1 : 0;
  };
  CarveResult cr = carve(g, ids, all_nodes(2), params, cfg, metrics, hook);
  CheckReport r = check_carve_trace(g, cr.trace);
  CHECK(r.ok());
}

TEST_CASE("balance checker accepts and rejects per the bound") {
  std::vector<std::vector<int>> adj = {{1}, {0, 2}, {1, 3}, {2}};

  std::map<int, RB> even;
  even[0] = RB::red;
  even[1] = RB::blue;
  CheckReport r1 = check_balance(adj, even, {0, 1});
  CHECK(r1.ok());

  std::map<int, RB> allblue;
  for (int v = 0; v < 4; ++v) allblue[v] = RB::blue;
  CheckReport r2 = check_balance(adj, allblue, {0, 1, 2, 3});
  CHECK(!r2.ok());
  CHECK(!passes(r2, "balance.global"));

  std::map<int, RB> skew;
  skew[0] = RB::blue;
  skew[1] = RB::blue;
  skew[2] = RB::blue;
  skew[3] = RB::red;
  CheckReport r3 = check_balance(adj, skew, {0, 1, 2, 3});
  CHECK(r3.ok()); // 3 of 4 is exactly floor(3k/4)
  CHECK(measured(r3, "red") == 1);
  CHECK(measured(r3, "blue") == 3);
  CHECK(measured(r3, "uncolored") == 0);

  // two components of two entities each; one is 2 blue 0 red
  std::vector<std::vector<int>> two = {{1}, {0}, {3}, {2}};
  std::map<int, RB> lop;
  lop[0] = RB::red;
  lop[1] = RB::blue;
  lop[2] = RB::blue;
  lop[3] = RB::blue;
  CheckReport r4 = check_balance(two, lop, {0, 1, 2, 3});
  CHECK(!r4.ok());
  CHECK(!passes(r4, "balance.component"));
  CHECK(measured(r4, "components") == 2);

  CheckReport r5 = check_balance(adj, even, {0, 0});
  CHECK(!passes(r5, "balance.scope"));
}

TEST_CASE("node coloring satisfies the balance checker") {
  Graph g = gen_cycle(8);
  IdAssignment ids = assign_ids(8, IdScheme::shuffled, 4, 5);
  ModelConfig cfg;
  RoundMetrics metrics;
  RBColoring rbc = balanced_color_nodes(g, ids, cfg, metrics);
  CheckReport r = check_balance(g.adj, rbc.color, all_nodes(8));
  CHECK(r.ok());
}
