#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netdecomp/carve.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <vector>

using namespace netdecomp;

namespace {

CarveResult run_carve(const Graph& g, const IdAssignment& ids, const ModelConfig& cfg,
                      RoundMetrics& metrics) {
  std::vector<int> living(static_cast<size_t>(g.n));
  for (int v = 0; v < g.n; ++v) living[static_cast<size_t>(v)] = v;
  CarveParams prm = make_carve_params(g.n, ids.bits);
  return carve(g, ids, living, prm, cfg, metrics);
}

std::vector<int> bfs_dist(const Graph& g, int src) {
  std::vector<int> d(static_cast<size_t>(g.n), -1);
  std::queue<int> q;
  d[static_cast<size_t>(src)] = 0;
  q.push(src);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : g.adj[static_cast<size_t>(u)])
      if (d[static_cast<size_t>(w)] < 0) {
        d[static_cast<size_t>(w)] = d[static_cast<size_t>(u)] + 1;
        q.push(w);
      }
  }
  return d;
}

// checks everything the carve contract promises about a finished run
void check_contract(const Graph& g, const CarveResult& r, int S0, const CarveParams& prm) {
  CHECK(2 * static_cast<int>(r.surviving.size()) >= S0);
  CHECK(static_cast<long long>(r.surviving.size()) + r.killed == S0);

  std::vector<char> alive(static_cast<size_t>(g.n), 0);
  for (int v : r.surviving) {
    CHECK(r.final_cluster[static_cast<size_t>(v)] >= 0);
    alive[static_cast<size_t>(v)] = 1;
  }
  for (const auto& e : g.edges)
    if (alive[static_cast<size_t>(e.first)] && alive[static_cast<size_t>(e.second)])
      CHECK(r.final_cluster[static_cast<size_t>(e.first)] == r.final_cluster[static_cast<size_t>(e.second)]);

  // member counts agree with the final assignment; survivors' clusters finished
  std::map<int, int> count;
  for (int v : r.surviving) ++count[r.final_cluster[static_cast<size_t>(v)]];
  for (const auto& kv : count) {
    const ClusterState& c = r.clusters[static_cast<size_t>(kv.first)];
    CHECK(c.members == kv.second);
    CHECK(!c.dissolved);
    CHECK(c.finished);
    CHECK(c.level == prm.b);
  }

  // weak diameter within a cluster, measured in the host graph
  long long dia_bound = 112LL * prm.L * prm.L;
  std::map<int, std::vector<int>> members;
  for (int v : r.surviving) members[r.final_cluster[static_cast<size_t>(v)]].push_back(v);
  for (const auto& kv : members) {
    for (int src : kv.second) {
      std::vector<int> d = bfs_dist(g, src);
      for (int w : kv.second) {
        REQUIRE(d[static_cast<size_t>(w)] >= 0);
        CHECK(d[static_cast<size_t>(w)] <= dia_bound);
      }
    }
  }

  // per-node membership churn and Steiner overlap
  for (int v = 0; v < g.n; ++v) {
    CHECK(r.changes[static_cast<size_t>(v)] <= 6 * prm.L + 1);
    int trees = 0;
    for (const auto& c : r.clusters)
      if (c.tree_depth.count(v)) ++trees;
    CHECK(trees <= 6 * prm.L + 2);
  }
  CHECK(r.tokens_created <= 7LL * S0 * prm.L);
}

} // namespace

TEST_CASE("single node carve trace, frozen") {
  Graph g = make_graph(1, {});
  IdAssignment ids = assign_ids(1, IdScheme::sequential, 0, 0);
  REQUIRE(ids.bits == 1);
  ModelConfig cfg;
  RoundMetrics m;
  CarveResult r = run_carve(g, ids, cfg, m);
  CHECK(r.surviving == std::vector<int>{0});
  CHECK(r.killed == 0);
  std::string expect =
      "h n=1 b=1 L=1 src=id S=1\n"
      "s 0 0\n"
      "C 1 0 0 1 3 0\n"
      "I 1 1\n"
      "E 1\n"
      "L 0 1 2\n"
      "F 0\n"
      "C 2 0 1 1 4 0\n"
      "E 2\n"
      "T 1 0\n";
  CHECK(r.trace == expect);
}

TEST_CASE("two node carve trace, frozen") {
  Graph g = gen_path(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 0, 0);
  REQUIRE(ids.bits == 1);
  ModelConfig cfg;
  RoundMetrics m;
  CarveResult r = run_carve(g, ids, cfg, m);
  CHECK(r.surviving == std::vector<int>{0, 1});
  CHECK(r.killed == 0);
  std::string expect =
      "h n=2 b=1 L=2 src=id S=2\n"
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
      "T 2 0\n";
  CHECK(r.trace == expect);
  // one cluster remains and both nodes are its members
  int c0 = r.final_cluster[0], c1 = r.final_cluster[1];
  CHECK(c0 == c1);
  CHECK(r.clusters[static_cast<size_t>(c0)].cid == 1);
  CHECK(r.clusters[static_cast<size_t>(c0)].tree_depth.at(0) == 1);
}

TEST_CASE("carve keeps half on random graphs and meets its bounds") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    Graph g = gen_gnp(48, 0.12, seed);
    IdAssignment ids = assign_ids(48, IdScheme::shuffled, 0, seed + 10);
    ModelConfig cfg;
    RoundMetrics m;
    CarveResult r = run_carve(g, ids, cfg, m);
    check_contract(g, r, 48, make_carve_params(48, ids.bits));
    CHECK(m.rounds_total > 0);
    CHECK(m.rounds_total == m.ledger_sum());
  }
}

TEST_CASE("carve on structured graphs") {
  std::vector<Graph> graphs;
  graphs.push_back(gen_path(33));
  graphs.push_back(gen_grid(6, 6));
  graphs.push_back(gen_tree(40, 2));
  graphs.push_back(gen_star(17));
  graphs.push_back(gen_complete(12));
  for (const auto& g : graphs) {
    IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, 0, 77);
    ModelConfig cfg;
    RoundMetrics m;
    CarveResult r = run_carve(g, ids, cfg, m);
    check_contract(g, r, g.n, make_carve_params(g.n, ids.bits));
  }
}

TEST_CASE("carve on a sub-universe living set") {
  Graph g = gen_grid(5, 5);
  IdAssignment ids = assign_ids(25, IdScheme::shuffled, 0, 3);
  std::vector<int> living;
  for (int v = 0; v < 25; v += 2) living.push_back(v); // 13 nodes, no grid edges between them
  CarveParams prm = make_carve_params(25, ids.bits);
  ModelConfig cfg;
  RoundMetrics m;
  CarveResult r = carve(g, ids, living, prm, cfg, m);
  // the even cells of a 5x5 grid are pairwise nonadjacent: nobody can propose
  CHECK(r.surviving == living);
  CHECK(r.killed == 0);
}

TEST_CASE("faithful mode reproduces the logical trace byte for byte") {
  for (long long bandwidth : {2LL, 8LL, kUnbounded}) {
    Graph g = gen_gnp(24, 0.15, 7);
    IdAssignment ids = assign_ids(24, IdScheme::shuffled, 0, 21);
    ModelConfig logical, faithful;
    logical.bandwidth = faithful.bandwidth = bandwidth;
    faithful.faithful = true;
    RoundMetrics ml, mf;
    CarveResult a = run_carve(g, ids, logical, ml);
    CarveResult b = run_carve(g, ids, faithful, mf);
    CHECK(a.trace == b.trace);
    CHECK(a.surviving == b.surviving);
    CHECK(mf.rounds_total <= ml.rounds_total); // measured within the charged bound
    if (bandwidth != kUnbounded) CHECK(mf.max_edge_bits <= bandwidth);
  }
}

TEST_CASE("carve input validation") {
  Graph g = gen_path(4);
  IdAssignment ids = assign_ids(4, IdScheme::sequential, 0, 0);
  CarveParams prm = make_carve_params(4, ids.bits);
  ModelConfig cfg;
  RoundMetrics m;
  CHECK_THROWS_AS(carve(g, ids, {}, prm, cfg, m), std::invalid_argument);
  CHECK_THROWS_AS(carve(g, ids, {2, 1}, prm, cfg, m), std::invalid_argument);
  CHECK_THROWS_AS(carve(g, ids, {0, 9}, prm, cfg, m), std::invalid_argument);
  CarveParams wrong = make_carve_params(4, 5);
  CHECK_THROWS_AS(carve(g, ids, {0, 1}, wrong, cfg, m), std::invalid_argument);
  ModelConfig bad;
  bad.bandwidth = 0;
  CHECK_THROWS_AS(carve(g, ids, {0, 1}, prm, bad, m), std::invalid_argument);
  CHECK_THROWS_AS(make_carve_params(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_carve_params(4, 0), std::invalid_argument);
}

TEST_CASE("potential formula") {
  CHECK(carve_potential(1, 0, 1) == 4);
  CHECK(carve_potential(2, 1, 0) == 4);
  CHECK(carve_potential(1, 0, 0) == 3);
  CHECK(cluster_bit(5, 1, 3) == 1);
  CHECK(cluster_bit(5, 2, 3) == 0);
  CHECK(cluster_bit(5, 3, 3) == 1);
  CHECK(cluster_bit(5, 4, 3) == 0); // beyond the width
  CHECK(cluster_bit(~0ull, 64, 64) == 1);
  CHECK(cluster_bit(~0ull, 65, 64) == 0);
}

TEST_CASE("red green baseline on k2, frozen") {
  Graph g = gen_path(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 0, 0);
  ModelConfig cfg;
  RoundMetrics m;
  CarveResult r = carve_rg_baseline(g, ids, {0, 1}, cfg, m);
  CHECK(r.surviving == std::vector<int>{0, 1});
  CHECK(r.killed == 0);
  std::string expect =
      "h n=2 b=1 L=0 src=rg S=2\n"
      "s 0 0\n"
      "s 1 1\n"
      "C 1 0 r 1\n"
      "C 1 1 b 1\n"
      "A 1 1\n"
      "P 0 0 1 1\n"
      "D 1 a 1 2\n"
      "X 0\n"
      "I 1 2\n"
      "E 1\n"
      "T 2 0\n";
  CHECK(r.trace == expect);
}

TEST_CASE("red green baseline separates and spares half") {
  std::vector<Graph> graphs;
  graphs.push_back(gen_path(16));
  graphs.push_back(gen_gnp(40, 0.1, 1));
  graphs.push_back(gen_grid(5, 8));
  for (const auto& g : graphs) {
    IdAssignment ids = assign_ids(g.n, IdScheme::shuffled, 0, 5);
    std::vector<int> living(static_cast<size_t>(g.n));
    for (int v = 0; v < g.n; ++v) living[static_cast<size_t>(v)] = v;
    ModelConfig cfg;
    RoundMetrics m;
    CarveResult r = carve_rg_baseline(g, ids, living, cfg, m);
    CHECK(2 * static_cast<int>(r.surviving.size()) >= g.n);
    std::vector<char> alive(static_cast<size_t>(g.n), 0);
    for (int v : r.surviving) alive[static_cast<size_t>(v)] = 1;
    for (const auto& e : g.edges)
      if (alive[static_cast<size_t>(e.first)] && alive[static_cast<size_t>(e.second)])
        CHECK(r.final_cluster[static_cast<size_t>(e.first)] == r.final_cluster[static_cast<size_t>(e.second)]);
  }
}

TEST_CASE("phase carving with an explicit coloring hook") {
  // two adjacent singletons, colored red and blue by hand: one phase separates
  Graph g = gen_path(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 0, 0);
  ColorHook hook = [](CarveView& view) {
    for (auto& c : view.clusters)
      if (!c.dissolved) c.color_bit = c.cid == 0 ? 0 : 1;
  };
  ModelConfig cfg;
  RoundMetrics m;
  CarveResult r = carve_rb(g, ids, {0, 1}, 1, cfg, m, hook, false);
  CHECK(r.surviving.size() == 2);
  CHECK(r.final_cluster[0] == r.final_cluster[1]);
}

TEST_CASE("phase carving rejects faithful mode") {
  Graph g = gen_path(2);
  IdAssignment ids = assign_ids(2, IdScheme::sequential, 0, 0);
  ModelConfig cfg;
  cfg.faithful = true;
  RoundMetrics m;
  CHECK_THROWS_AS(carve_rg_baseline(g, ids, {0, 1}, cfg, m), std::invalid_argument);
}
