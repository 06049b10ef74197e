#pragma once

// Decomposition-driven applications. Both walk the color classes in order;
// within a class every cluster is solved independently (same-color clusters
// never touch): the members' flags and induced edges are gathered to the
// cluster root over its Steiner tree, the root solves greedily in ascending
// node order, and the verdicts stream back down. Faithful runs move real
// messages through the pipelined tree operations and the costs land in the
// metrics ledger; logical runs charge the declared envelopes.

#include <string>
#include <vector>

#include "netdecomp/decompose.hpp"
#include "netdecomp/graph.hpp"
#include "netdecomp/sim.hpp"

namespace netdecomp {

struct MisResult {
  std::vector<int> selected; // ascending node indices
  long long rounds = 0;
};

struct ColoringResult {
  std::vector<int> color; // node -> 1..delta+1
  long long rounds = 0;
};

// Maximal independent set. The decomposition is re-checked first; a failing
// check throws invalid_argument naming it.
MisResult mis_via_decomposition(const Graph& g, const Decomposition& d, const ModelConfig& cfg,
                                RoundMetrics& metrics);

// Greedy (delta+1) list coloring; delta must dominate the real max degree.
ColoringResult coloring_via_decomposition(const Graph& g, const Decomposition& d, int delta,
                                          const ModelConfig& cfg, RoundMetrics& metrics);

// m <node> per selected node
std::string to_text(const MisResult& r);
// col <node> <color> per node
std::string to_text(const ColoringResult& r);

} // namespace netdecomp
