#pragma once

#include "netdecomp/balanced.hpp"
#include "netdecomp/carve.hpp"
#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netdecomp {

// Full network decompositions assembled from repeated ball carving: every
// carve clusters at least half of the remaining nodes into pairwise
// non-adjacent clusters, which become one color class, so at most
// ceil(log2 n) + 1 classes are ever needed.

struct DecompCluster {
  int color = 0;    // 1-based color class
  uint64_t cid = 0; // seed identifier value
  int seed = -1;
  std::vector<int> members;                    // sorted
  std::vector<std::pair<int, int>> tree_edges; // Steiner (node, parent), join order
};

struct DecompStats {
  int colors = 0;
  int max_weak_diameter = 0; // max over clusters of member distance in g
  long long max_overlap = 0; // max per color of Steiner trees through one node
  long long rounds = 0;
  long long killed = 0; // kills summed over the carve iterations
};

struct Decomposition {
  std::string variant; // "fast" or "fast-id"
  int n = 0;
  int b = 0;         // carve width parameter
  int L = 0;         // b + ceil(log2 n)
  uint64_t seed = 0; // echo field for run records, not used internally
  std::vector<int> color;      // node -> 1..colors
  std::vector<int> cluster_of; // node -> index into clusters
  std::vector<DecompCluster> clusters;
  DecompStats stats;
};

// smallest k with (4/3)^k >= n
int ceil_log_43(int n);

// Fast carving keyed to id bits, repeated until everything is colored.
// Weak diameter <= 112 L^2 and per color every node lies in at most 6L+2
// Steiner trees.
Decomposition decompose_fast(const Graph& g, const IdAssignment& ids, const ModelConfig& cfg,
                             RoundMetrics& metrics);

// Phase carving where each phase's red/blue split comes from the balanced
// cluster coloring; isolated clusters sit the phase out. 1 + ceil(log_{4/3} n)
// phases; every multi-cluster component of the cluster graph loses at least a
// quarter of its clusters per phase (asserted), so the end state is fully
// separated.
CarveResult carve_id_independent_slow(const Graph& g, const IdAssignment& ids,
                                      const std::vector<int>& living, const ModelConfig& cfg,
                                      RoundMetrics& metrics);

// Fast carving with b = 1 + ceil(log_{4/3} n) and decision bits from the
// per-level partial coloring: at each phase start the clusters that just
// arrived at their level are colored once and keep the color while the level
// lasts. Everything downstream depends on the identifier values only, so
// padding ids to a wider width changes neither the clustering nor any
// quality metric.
Decomposition decompose_fast_id_independent(const Graph& g, const IdAssignment& ids,
                                            const ModelConfig& cfg, RoundMetrics& metrics);

// Versioned text form: one header line, c <node> <color> <cluster> per node,
// a T <cluster> <color> <seed> <cid> line plus e <node> <parent> edge lines
// per cluster, and a final S stats line.
std::string to_text(const Decomposition& d);
Decomposition parse_decomposition(const std::string& text);

} // namespace netdecomp
