#pragma once

#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace netdecomp {

// Token-driven ball carving. Clusters eat or kill boundary nodes over 2L
// phases of 28L steps each, L = b + ceil(log2 n). A cluster that rejects a
// batch of proposals stalls for the rest of the phase and climbs one level at
// the phase end; level b means finished. The decision bit that splits clusters
// of equal level into proposers and targets comes either from the id bit at
// position level+1 or from an externally assigned red/blue color.

enum class BitSource { id_bits, assigned_color };

struct CarveParams {
  int b = 0;               // levels to climb before a cluster finishes
  int L = 0;               // b + ceil(log2 n)
  int phases = 0;          // 2L
  int steps_per_phase = 0; // 28L, also the accept denominator
  long long kill_cost = 0; // 14L tokens per killed proposer
  BitSource bit_source = BitSource::id_bits;
};

CarveParams make_carve_params(int n, int b, BitSource src = BitSource::id_bits);

struct ClusterState {
  uint64_t cid = 0; // seed's identifier value
  int seed = -1;
  long long tokens = 1;
  int level = 0;
  bool stalling = false;
  bool finished = false;
  bool dissolved = false;
  int color_bit = -1;    // assigned_color runs: -1 uncolored, 0 red, 1 blue
  int arrival_phase = 1; // phase whose start first saw the current level
  std::vector<int> branches; // transcript path, one entry per level climbed
  std::vector<std::pair<int, int>> tree_edges; // Steiner (node, parent), join order
  std::map<int, int> tree_depth;               // Steiner node -> depth, seed = 0
  int tree_height = 0;
  int members = 0;
};

struct CarveResult {
  std::vector<int> surviving;         // sorted node list
  std::vector<ClusterState> clusters; // every cluster ever created
  std::vector<int> final_cluster;     // node -> cluster index, -1 if killed / outside
  std::vector<int> changes;           // node -> number of cluster changes
  std::string trace;
  long long killed = 0;
  long long tokens_created = 0;
};

// Mutable view handed to the color hook at each phase start. The hook may set
// color_bit on clusters (and should charge its rounds to metrics); everything
// else is read-only by convention.
struct CarveView {
  const Graph& g;
  const IdAssignment& ids;
  std::vector<ClusterState>& clusters;
  const std::vector<int>& cluster_of; // node -> cluster index, -1 when not living
  int phase = 0;
  int levels = 0; // max level = params.b
  const ModelConfig* cfg = nullptr;
  RoundMetrics* metrics = nullptr;
};
using ColorHook = std::function<void(CarveView&)>;

// Core carve. living must be a nonempty sorted subset of the nodes. For
// bit_source id_bits, params.b must equal ids.bits. For assigned_color a hook
// is required and is invoked at every phase start after level-ups.
CarveResult carve(const Graph& g, const IdAssignment& ids, const std::vector<int>& living,
                  const CarveParams& params, const ModelConfig& cfg, RoundMetrics& metrics,
                  const ColorHook& hook = {});

// Red/blue phase carving: per phase every cluster is colored, red boundary
// nodes propose to their smallest-cid blue neighbor cluster, a blue cluster
// eats the batch when p * 2 * phases >= |cluster| and otherwise kills it and
// sits out the phase. color_phase assigns color_bit at each phase start
// (uncolored clusters sit the phase out). When lsb_agreement is true, the end
// of phase i asserts that adjacent clusters agree on the i lowest id bits.
CarveResult carve_rb(const Graph& g, const IdAssignment& ids, const std::vector<int>& living,
                     int phases, const ModelConfig& cfg, RoundMetrics& metrics,
                     const ColorHook& color_phase, bool lsb_agreement);

// Baseline: phase i keys red/blue off bit i of the cluster id, phases = ids.bits.
CarveResult carve_rg_baseline(const Graph& g, const IdAssignment& ids,
                              const std::vector<int>& living, const ModelConfig& cfg,
                              RoundMetrics& metrics);

// Decision-bit helper: 1-based bit k of a cluster id, zero beyond width b.
inline int cluster_bit(uint64_t cid, int k, int b) {
  if (k < 1 || k > b || k > 64) return 0;
  return static_cast<int>((cid >> (k - 1)) & 1u);
}

// Potential 3i - 2 lev + bit; the balanced variant uses blue=1, red/uncolored=0.
long long carve_potential(int phase, int level, int bit);

} // namespace netdecomp
