#pragma once

#include "netdecomp/carve.hpp"
#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"

#include <map>
#include <vector>

namespace netdecomp {

// Red/blue balanced coloring. Each entity (node or cluster) picks one
// outgoing edge; entities with in-degree >= 10 are heavy, the rest light.
// Heavy centers split their star of otherwise-isolated light in-neighbors,
// the remaining light entities group around an MIS of the two-hop chosen-edge
// graph and each group is split half/half. Every colored component ends up
// with at most 3/4 of its entities in either color.

enum class RB { uncolored = 0, red = 1, blue = 2 };

struct RBColoring {
  std::map<int, RB> color; // node index or cluster index -> color
  long long rounds = 0;
};

inline constexpr int kHeavyInDegree = 10;

// Degree cap of the two-hop graphs the MIS subroutine runs on: chosen-edge
// degree <= 11, so the square stays under 11 + 11*10.
inline constexpr int kVirtualDegreeCap = 121;

// One virtual round on a two-hop graph costs two relay rounds underneath.
inline constexpr long long kSquareRelay = 2;

// Declared round-bound constants for the MIS subroutine: schedule length is
// at most kLogStarSlope * log_star(b) + kLinialOffset. The offset swallows
// the degree-dependent tail (final palette 251^2, one round per dropped
// color); only the reduction step count varies with the identifier width.
inline constexpr long long kLogStarSlope = 8;
inline constexpr long long kLinialOffset = 70000;

// Fixed per-call round charges of the node-level coloring: id swap, out-edge
// announce, heavy bit, star enrolment, star colors; then center waves,
// member collection and color distribution for the MIS groups.
inline constexpr long long kNodeSetupRounds = 5;
inline constexpr long long kNodeUnitRounds = 8;

// Cluster-level coloring charges per pipelined tree operation ("unit"):
// proposal convergecast, winner broadcast, endpoint note, in-edge cap
// convergecast, heavy bit broadcast, star enrolment, final delivery; plus
// group collection, split, distribution at the end.
inline constexpr long long kClusterSetupUnits = 7;
inline constexpr long long kClusterFinishUnits = 5;

// Iterated log2: number of applications until the value drops to <= 1.
int log_star(double x);

// Oblivious palette-reduction schedule for b-bit starting colors under the
// fixed degree cap. Every node runs the same schedule, so the round count
// depends on b alone.
int linial_reduce_steps(int b);
long long linial_schedule_rounds(int b);
long long linial_round_bound(int b); // kLogStarSlope * log_star(b) + kLinialOffset

struct LinialResult {
  std::vector<int> selected;  // ascending node indices of the MIS
  long long rounds = 0;       // virtual rounds on the input graph
  long long reduce_steps = 0; // palette reduction iterations
};

// Maximal independent set by color reduction: identifiers seed the palette,
// polynomial set systems shrink it toward 251^2, one class per round drops to
// the degree cap + 1, then a greedy sweep picks the set color by color.
// Throws if the graph's max degree exceeds kVirtualDegreeCap.
LinialResult linial_mis(const Graph& gsq, const IdAssignment& ids,
                        const ModelConfig& cfg, RoundMetrics& metrics);

// Colors every vertex red or blue with max(#red, #blue) <= floor(3n/4).
// Requires min degree >= 1.
RBColoring balanced_color_nodes(const Graph& g, const IdAssignment& ids,
                                const ModelConfig& cfg, RoundMetrics& metrics);

// Colors the scoped clusters red or blue; per connected component of the
// scope's cluster graph both color classes stay within floor(3k/4). Heavy
// stars are split by token pairing on the Steiner tree (pairs emit one blue
// one red, the odd token walks up, a root leftover turns blue). member_of
// maps node -> index into clusters (-1 outside); scope lists the cluster
// indices to color, none of which may be isolated among the scoped ones.
RBColoring balanced_color_clusters(const Graph& g, const std::vector<ClusterState>& clusters,
                                   const std::vector<int>& scope, const std::vector<int>& member_of,
                                   const ModelConfig& cfg, RoundMetrics& metrics);

// Per-level partial coloring. For each cluster level i (levels start at 1),
// regions grow by BFS from all level-i members through nodes of level >= i
// clusters, to depth h * ceil(log2 n)^2, ties to the smaller cluster id then
// the smaller sender. Touching regions of equal level make their base
// clusters adjacent; each level's non-isolated clusters are then colored via
// balanced_color_clusters on the region-extended clusters, the rest stay
// uncolored. Faithful runs need one bandwidth bit per distinct level.
RBColoring partial_color_levels(const Graph& g, const std::vector<ClusterState>& clusters,
                                const std::vector<int>& scope, const std::vector<int>& member_of,
                                long long h, const ModelConfig& cfg, RoundMetrics& metrics);

} // namespace netdecomp
