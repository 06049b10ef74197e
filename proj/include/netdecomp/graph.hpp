#pragma once

// Undirected simple graphs with deterministic generators, plus the separation
// between a node's index (0..n-1) and its b-bit identifier.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netdecomp {

// Counter-based PRNG: stateless, keyed by (seed, i, j). Identical results
// regardless of query order.
uint64_t mix64(uint64_t x);
uint64_t rand_key(uint64_t seed, uint64_t i, uint64_t j);
// Uniform double in [0, 1).
double rand_unit(uint64_t seed, uint64_t i, uint64_t j);

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;           // sorted neighbor lists
  std::vector<std::pair<int, int>> edges;      // u < v, sorted

  int m() const { return static_cast<int>(edges.size()); }
  int degree(int v) const { return static_cast<int>(adj[static_cast<size_t>(v)].size()); }
  bool has_edge(int u, int v) const;
};

Graph make_graph(int n, std::vector<std::pair<int, int>> edges);

Graph gen_path(int n);
Graph gen_cycle(int n);
Graph gen_star(int n);        // node 0 is the center
Graph gen_complete(int n);
Graph gen_grid(int rows, int cols);
Graph gen_tree(int n, uint64_t seed);   // random attachment tree
Graph gen_gnp(int n, double p, uint64_t seed);

// ---------------------------------------------------------------------------
// Identifiers

enum class IdScheme { sequential, shuffled, padded };

struct IdAssignment {
  int bits = 0;                 // b
  std::vector<uint64_t> id;     // id[v] < 2^b, pairwise distinct

  uint64_t bit_of(uint64_t v_id, int i) const;  // i-th least significant bit, 1-based; 0 beyond b
};

// sequential: ids 0..n-1, bits = ceil(log2 n) unless a wider `bits` is given.
// shuffled:   a seeded permutation of 0..n-1 in the same width.
// padded:     same values, recorded width `bits` (must be >= ceil(log2 n)).
IdAssignment assign_ids(int n, IdScheme scheme, int bits, uint64_t seed);

int ceil_log2(uint64_t n);      // smallest k with 2^k >= n; ceil_log2(1) = 0

// ---------------------------------------------------------------------------
// Parsing and serialization
//
// Edge list: '#' comments, "p <n> <m>" header, "e <u> <v>" with 0 <= u < v < n.
// Identifier sidecar: "b <bits>" then "i <node> <id>".

Graph parse_edge_list(const std::string& text);
std::string format_edge_list(const Graph& g);
IdAssignment parse_id_sidecar(const std::string& text, int n);
std::string format_id_sidecar(const IdAssignment& ids);

Graph load_graph_file(const std::string& path);
void save_graph_file(const std::string& path, const Graph& g);

// Generator spec strings: "gen:family:key=value,key=value" (e.g.
// "gen:gnp:n=256,p=0.03"), or a plain path to an edge-list file.
struct GraphSpec {
  std::string family;                       // "file" for paths
  std::string path;                         // when family == "file"
  int n = 0, rows = 0, cols = 0;
  double p = 0.0;
  uint64_t seed = 0;
};

GraphSpec parse_graph_spec(const std::string& text);
Graph realize(const GraphSpec& spec);

}  // namespace netdecomp
