#pragma once

// Rooted trees embedded in a host graph, and the per-edge channel plan that
// lets many trees share bandwidth.

#include <cstdint>
#include <map>
#include <vector>

#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"

namespace netdecomp {

struct Tree {
  int id = 0;
  int root = -1;
  std::vector<std::pair<int, int>> edges;  // (child, parent)
};

// Validated, indexable form of a Tree.
struct TreeView {
  int id = 0;
  int root = -1;
  std::vector<int> nodes;                   // sorted
  std::map<int, int> parent;                // node -> parent, root -> -1
  std::map<int, std::vector<int>> children; // sorted child lists
  std::map<int, int> depth;                 // root -> 0
  int height = 0;
};

// Checks that the edges lie in g, form a tree, and reach the root; throws on
// violation.
TreeView view_of(const Graph& g, const Tree& t);

struct ChannelPlan {
  long long bandwidth = kUnbounded;
  int bit_budget = 0;            // b' per tree per round; <= 0 means unchunked
  int max_trees_per_edge = 0;    // P
  int depth = 0;                 // r: max tree height, shared schedule depth
  std::map<std::pair<int, int>, std::vector<int>> edge_trees;  // (min,max) -> tree ids

  // chunks needed to ship `m` bits at the plan's budget
  int chunks(int m) const {
    if (m <= 0) return 0;
    if (bit_budget <= 0) return 1;
    return (m + bit_budget - 1) / bit_budget;
  }
};

// P = max trees sharing one edge; b' = floor(B/P). Throws if P > B (the plan
// would starve some tree).
ChannelPlan plan_channels(const Graph& g, const std::vector<Tree>& trees, long long bandwidth);

}  // namespace netdecomp
