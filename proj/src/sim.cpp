#include "netdecomp/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace netdecomp {

void RoundMetrics::charge(const std::string& label, long long rounds) {
  if (rounds < 0) throw std::invalid_argument("RoundMetrics::charge: negative rounds");
  rounds_total += rounds;
  ledger.push_back({label, rounds});
}

long long RoundMetrics::ledger_sum() const {
  long long s = 0;
  for (auto& [label, r] : ledger) s += r;
  return s;
}

std::vector<std::string> run_protocol(const Graph& g, const ModelConfig& cfg, NodeProgram& program,
                                      RoundMetrics& metrics, long long round_limit, const std::string& label) {
  const size_t n = static_cast<size_t>(g.n);
  for (int v = 0; v < g.n; ++v) program.init(v, g);

  // mailbox[v][i] = message from adj[v][i] sent in the previous round
  std::vector<std::vector<BitString>> mailbox(n), next(n);
  for (size_t v = 0; v < n; ++v) {
    mailbox[v].resize(g.adj[v].size());
    next[v].resize(g.adj[v].size());
  }
  // slot_at[v][i] = index of v in adj[u] for u = adj[v][i]
  std::vector<std::vector<int>> slot_at(n);
  for (size_t v = 0; v < n; ++v) {
    slot_at[v].resize(g.adj[v].size());
    for (size_t i = 0; i < g.adj[v].size(); ++i) {
      const auto& back = g.adj[static_cast<size_t>(g.adj[v][i])];
      slot_at[v][i] = static_cast<int>(std::lower_bound(back.begin(), back.end(), static_cast<int>(v)) - back.begin());
    }
  }

  long long executed = 0;
  std::vector<BitString> outbox;
  while (true) {
    bool all_halted = true;
    for (int v = 0; v < g.n; ++v)
      if (!program.halted(v)) { all_halted = false; break; }
    if (all_halted) break;
    if (executed >= round_limit)
      throw std::runtime_error("run_protocol: round limit " + std::to_string(round_limit) + " exceeded");

    for (size_t v = 0; v < n; ++v)
      for (auto& m : next[v]) m = BitString();
    for (int v = 0; v < g.n; ++v) {
      if (program.halted(v)) continue;
      const size_t sv = static_cast<size_t>(v);
      outbox.assign(g.adj[sv].size(), BitString());
      program.round(v, mailbox[sv], outbox);
      for (size_t i = 0; i < outbox.size(); ++i) {
        const BitString& msg = outbox[i];
        if (msg.empty()) continue;
        if (cfg.bandwidth != kUnbounded && msg.size_bits() > cfg.bandwidth)
          throw std::runtime_error("run_protocol: bandwidth violation on edge (" + std::to_string(v) + "," +
                                   std::to_string(g.adj[sv][i]) + "): " + std::to_string(msg.size_bits()) + " bits > " +
                                   std::to_string(cfg.bandwidth));
        metrics.messages_sent += 1;
        metrics.bits_sent += msg.size_bits();
        if (msg.size_bits() > metrics.max_edge_bits) metrics.max_edge_bits = msg.size_bits();
        next[static_cast<size_t>(g.adj[sv][i])][static_cast<size_t>(slot_at[sv][i])] = msg;
      }
    }
    mailbox.swap(next);
    ++executed;
  }

  metrics.rounds_total += executed;
  metrics.ledger.push_back({label, executed});
  std::vector<std::string> out(n);
  for (int v = 0; v < g.n; ++v) out[static_cast<size_t>(v)] = program.output(v);
  return out;
}

}  // namespace netdecomp
