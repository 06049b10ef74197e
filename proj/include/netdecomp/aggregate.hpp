#pragma once

// Pipelined aggregation over (possibly overlapping) rooted trees. All four
// operations share one schedule depth r = plan.depth and a per-tree bit
// budget b' from the channel plan; chunk counts are plan.chunks(width).
//
// Wire schedules (faithful mode), with W = chunk count and 1-based rounds:
//   sum        a depth-d node sends chunk j of its running value in round
//              (r-d)+j, LSB-first; child chunks arrive exactly one round
//              ahead of the parent's matching send. Values are widened to
//              M = m + ceil(log2 n) + 1 bits so the root's result is the
//              exact sum whenever it fits, and the sum mod 2^M always.
//   min        MSB-first with survivor sets: a node keeps the candidate set
//              (itself + children) that still matches the minimum prefix and
//              streams that prefix upward on the same stagger as sum.
//   broadcast  the root streams chunks down; depth-d nodes relay with one
//              round of latency per hop.
//   convergecast  K rank lanes: lane s of a depth-d node occupies rounds
//              (r-d)+(s-1)W+1..(r-d)+sW and streams the s-th smallest
//              message of the node's subtree, selected cut-through on
//              prefixes (messages carry a leading present/absent bit, so
//              absent lanes stream as maximal sentinels).
//
// Logical mode computes the same values centrally and charges the declared
// round envelopes below.

#include <cstdint>
#include <map>
#include <vector>

#include "netdecomp/bits.hpp"
#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"
#include "netdecomp/trees.hpp"

namespace netdecomp {

// Declared round-bound constants: rounds <= r + c_s * chunks(m) + c_0 for
// sum/min/broadcast, and rounds <= r + K * chunks(m) + c_0 for convergecast.
// The sum slack absorbs the widening from m to M bits (tests run n <= 2^12).
constexpr int kSumSlackMul = 1, kSumSlackAdd = 16;
constexpr int kMinSlackMul = 1, kMinSlackAdd = 2;
constexpr int kBroadcastSlackMul = 1, kBroadcastSlackAdd = 2;
constexpr int kConvergecastSlackAdd = 16;  // covers the per-lane presence bit for K <= 16

// M for the widened sum; throws if it would not fit in 63 bits.
int sum_width(int m, int n);

using TreeNodeValues = std::map<std::pair<int, int>, uint64_t>;  // (tree id, node) -> value

struct AggOutcome {
  std::map<int, uint64_t> per_root;  // tree id -> result
  long long rounds = 0;
};

// `value` must provide an entry for every node of every tree; m-bit values.
AggOutcome pipelined_sum(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                         const TreeNodeValues& value, int m, const ModelConfig& cfg, RoundMetrics& metrics);

AggOutcome pipelined_min(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                         const TreeNodeValues& value, int m, const ModelConfig& cfg, RoundMetrics& metrics);

struct BroadcastOutcome {
  TreeNodeValues received;  // every tree node ends up with its root's value
  long long rounds = 0;
};

BroadcastOutcome pipelined_broadcast(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                                     const std::map<int, uint64_t>& root_value, int m, const ModelConfig& cfg,
                                     RoundMetrics& metrics);

struct ConvergecastOutcome {
  std::map<int, std::vector<BitString>> per_root;  // sorted ascending, at most K entries
  long long rounds = 0;
};

// `special` holds m-bit messages for the special nodes of each tree; the root
// receives the min(K, #specials) smallest by lexicographic bit order.
ConvergecastOutcome pipelined_convergecast(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                                           const std::map<std::pair<int, int>, BitString>& special, int m, int K,
                                           const ModelConfig& cfg, RoundMetrics& metrics);

// Round envelopes used for logical charging and asserted against faithful
// runs by the tests.
long long sum_round_bound(const ChannelPlan& plan, int m);
long long min_round_bound(const ChannelPlan& plan, int m);
long long broadcast_round_bound(const ChannelPlan& plan, int m);
long long convergecast_round_bound(const ChannelPlan& plan, int m, int K);

}  // namespace netdecomp
