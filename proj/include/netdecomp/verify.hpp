#pragma once

// Independent checkers for the guarantees the library claims: decomposition
// validity, carving trace replay, red/blue balance. Checkers consume only
// serialized results (or their parsed structs), never algorithm internals, so
// they can validate foreign outputs too. Failures land in the report, not in
// exceptions; a failing check always carries a concrete witness.

#include <map>
#include <string>
#include <vector>

#include "netdecomp/balanced.hpp"
#include "netdecomp/decompose.hpp"
#include "netdecomp/graph.hpp"

namespace netdecomp {

struct CheckItem {
  std::string name;
  bool pass = true;
  std::string witness; // first violation seen; empty while passing
};

struct CheckReport {
  std::vector<CheckItem> items;
  std::vector<std::pair<std::string, long long>> measured;

  bool ok() const;
  const CheckItem* find(const std::string& name) const;

  // Registers the check as run (passing) if new.
  void note(const std::string& name);
  // Marks the check failed; the first witness sticks.
  void fail(const std::string& name, const std::string& witness);
  void measure(const std::string& key, long long v);

  // key=value lines: check.<name>=pass|fail, witness.<name>=..., measured.<k>=<v>, ok=0|1
  std::string to_text() const;
};

struct DecompBounds {
  long long max_diameter = -1;    // -1: 112 L^2 with the decomposition's L
  long long max_overlap = -1;     // -1: 6L + 2
  int max_colors = -1;            // -1: ceil(log2 n) + 1
  long long max_tree_radius = -1; // -1: measured only, not enforced
};

// Structure, coverage, same-color non-adjacency, weak diameter per cluster
// (BFS from each member in the full graph, abandoned past the bound), Steiner
// tree shape and spanning, per-color node overlap, color count.
CheckReport check_decomposition(const Graph& g, const Decomposition& d,
                                const DecompBounds& bounds = {});

// Replays a carving trace against g and checks: token floors at phase starts,
// strict potential gain per move and non-decrease across phases, per-node
// change counts, token creation and kill totals, transcript ancestry on every
// live inter-cluster edge, tree joins through valid contacts, and that every
// surviving cluster finishes by the last phase. Bookkeeping that the trace
// must get right to be a real run (verdict arithmetic, decision coverage,
// step numbering) lands in trace.accounting.
CheckReport check_carve_trace(const Graph& g, const std::string& trace);

// Global and per-component color class sizes over the scoped entities, each
// bounded by ceil(factor * k). adj is the entity adjacency, color may leave
// entities uncolored (reported, not failed), components are induced on scope.
CheckReport check_balance(const std::vector<std::vector<int>>& adj,
                          const std::map<int, RB>& color, const std::vector<int>& scope,
                          double factor = 0.75);

} // namespace netdecomp
