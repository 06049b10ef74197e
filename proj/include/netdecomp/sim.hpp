#pragma once

// Synchronous message-passing round engine. Nodes run the same program in
// lockstep; each round every node reads the messages its neighbors sent in
// the previous round and emits at most one message per incident edge.
//
// Bandwidth is a per-edge, per-direction, per-round bit ceiling. In faithful
// runs the engine enforces it; logical callers bypass the engine entirely and
// charge rounds through RoundMetrics::charge.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "netdecomp/bits.hpp"
#include "netdecomp/graph.hpp"

namespace netdecomp {

constexpr long long kUnbounded = -1;  // LOCAL: no bandwidth ceiling

struct ModelConfig {
  long long bandwidth = kUnbounded;   // bits per edge per direction per round
  bool faithful = false;              // false: central execution, charged rounds
};

struct RoundMetrics {
  long long rounds_total = 0;
  long long messages_sent = 0;        // nonempty messages
  long long bits_sent = 0;
  int max_edge_bits = 0;              // largest single-round single-edge message
  std::vector<std::pair<std::string, long long>> ledger;  // label -> rounds

  void charge(const std::string& label, long long rounds);
  long long ledger_sum() const;
};

// A node program. The engine calls init once, then round() every round until
// every node has halted. inbox[i] / outbox[i] correspond to adj[node][i];
// inbox entries are the messages sent by those neighbors in the previous
// round (all empty in round 1). A halted node neither sends nor receives.
class NodeProgram {
public:
  virtual ~NodeProgram() = default;
  virtual void init(int node, const Graph& g) = 0;
  virtual void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) = 0;
  virtual bool halted(int node) const = 0;
  virtual std::string output(int) const { return {}; }
};

// Runs the program until all nodes halt (or round_limit is hit, which is an
// error). Returns per-node outputs. Deterministic: nodes advance in index
// order with no hidden state.
std::vector<std::string> run_protocol(const Graph& g, const ModelConfig& cfg, NodeProgram& program,
                                      RoundMetrics& metrics, long long round_limit = 1'000'000,
                                      const std::string& label = "protocol");

}  // namespace netdecomp
