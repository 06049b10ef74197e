#include "netdecomp/aggregate.hpp"

#include <algorithm>
#include <cassert>
#include <tuple>
#include <sstream>
#include <stdexcept>

namespace netdecomp {

int sum_width(int m, int n) {
  if (m <= 0) throw std::invalid_argument("pipelined_sum: m must be positive");
  int M = m + ceil_log2(static_cast<uint64_t>(std::max(1, n))) + 1;
  if (M > 63) throw std::invalid_argument("pipelined_sum: widened width " + std::to_string(M) + " exceeds 63 bits");
  return M;
}

long long sum_round_bound(const ChannelPlan& plan, int m) {
  return plan.depth + static_cast<long long>(kSumSlackMul) * plan.chunks(m) + kSumSlackAdd;
}
long long min_round_bound(const ChannelPlan& plan, int m) {
  return plan.depth + static_cast<long long>(kMinSlackMul) * plan.chunks(m) + kMinSlackAdd;
}
long long broadcast_round_bound(const ChannelPlan& plan, int m) {
  return plan.depth + static_cast<long long>(kBroadcastSlackMul) * plan.chunks(m) + kBroadcastSlackAdd;
}
long long convergecast_round_bound(const ChannelPlan& plan, int m, int K) {
  return plan.depth + static_cast<long long>(K) * plan.chunks(m) + kConvergecastSlackAdd;
}

namespace {

int adj_slot(const Graph& g, int v, int u) {
  const auto& a = g.adj[static_cast<size_t>(v)];
  auto it = std::lower_bound(a.begin(), a.end(), u);
  assert(it != a.end() && *it == u);
  return static_cast<int>(it - a.begin());
}

// Per-node participation in one tree.
struct Part {
  int tree = 0;
  int depth = 0;
  int parent = -1;        // node id, -1 at root
  int parent_slot = -1;   // adj slot toward parent
};

// Shared scaffolding: tree views, per-node participation, per-edge tree lists
// annotated with the deeper endpoint's depth.
struct Fabric {
  const Graph& g;
  std::vector<TreeView> views;
  std::map<int, const TreeView*> view_by_id;
  std::vector<std::vector<Part>> parts;                       // per node, ascending tree id
  int chunk_size = 0;                                         // effective b''
  int depth = 0;                                              // schedule r

  Fabric(const Graph& graph, const std::vector<Tree>& trees, const ChannelPlan& plan, int full_width)
      : g(graph) {
    depth = plan.depth;
    chunk_size = plan.bit_budget <= 0 ? full_width : plan.bit_budget;
    parts.resize(static_cast<size_t>(g.n));
    views.reserve(trees.size());
    for (const auto& t : trees) views.push_back(view_of(g, t));
    for (const auto& v : views) view_by_id[v.id] = &v;
    for (const auto& tv : views)
      for (int node : tv.nodes) {
        Part p;
        p.tree = tv.id;
        p.depth = tv.depth.at(node);
        p.parent = tv.parent.at(node);
        if (p.parent >= 0) p.parent_slot = adj_slot(g, node, p.parent);
        parts[static_cast<size_t>(node)].push_back(p);
      }
    for (auto& pv : parts)
      std::sort(pv.begin(), pv.end(), [](const Part& a, const Part& b) { return a.tree < b.tree; });
  }

  int chunks_for(int width) const { return width <= 0 ? 0 : (width + chunk_size - 1) / chunk_size; }
  int chunk_width(int width, int j) const { return std::min(chunk_size, width - (j - 1) * chunk_size); }
};

// ---------------------------------------------------------------------------
// Summation: LSB-first staggered streams, values widened to M bits.

class SumProgram : public NodeProgram {
public:
  SumProgram(const Fabric& f, const TreeNodeValues& value, int M) : f_(f), M_(M), W_(f.chunks_for(M)) {
    for (const auto& tv : f_.views)
      for (int node : tv.nodes) {
        auto it = value.find({tv.id, node});
        if (it == value.end())
          throw std::invalid_argument("pipelined_sum: missing value for tree " + std::to_string(tv.id) + " node " +
                                      std::to_string(node));
        x_[{tv.id, node}] = it->second;
      }
  }

  void init(int node, const Graph&) override {
    rnd_[node] = 0;
    int end = 0;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) end = std::max(end, f_.depth - p.depth + W_);
    end_[node] = f_.parts[static_cast<size_t>(node)].empty() ? 0 : end;
  }

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[node];
    // receive child chunks
    for (size_t i = 0; i < inbox.size(); ++i) {
      const BitString& msg = inbox[i];
      if (msg.empty()) continue;
      int u = f_.g.adj[static_cast<size_t>(node)][i];
      int pos = 0;
      for (const auto& p : f_.parts[static_cast<size_t>(u)]) {
        if (p.parent != node) continue;
        int j = (t - 1) - (f_.depth - p.depth);
        if (j < 1 || j > W_) continue;
        int w = f_.chunk_width(M_, j);
        uint64_t chunk = msg.read_uint(pos, w);
        pos += w;
        x_[{p.tree, node}] += chunk << ((j - 1) * f_.chunk_size);
      }
      assert(pos == msg.size_bits());
    }
    // send own chunks
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (p.parent < 0) continue;
      int j = t - (f_.depth - p.depth);
      if (j < 1 || j > W_) continue;
      int w = f_.chunk_width(M_, j);
      uint64_t& x = x_[{p.tree, node}];
      uint64_t chunk = (x >> ((j - 1) * f_.chunk_size)) & ((w == 64 ? ~0ull : ((1ull << w) - 1)));
      outbox[static_cast<size_t>(p.parent_slot)].append_uint(chunk, w);
      x -= chunk << ((j - 1) * f_.chunk_size);
      // stream invariant: everything below the sent chunk is already cleared
      assert((x & ((j * f_.chunk_size >= 64) ? ~0ull : ((1ull << (j * f_.chunk_size)) - 1))) == 0);
    }
  }

  bool halted(int node) const override { return rnd_.at(node) >= end_.at(node); }

  std::string output(int node) const override {
    std::ostringstream out;
    bool first = true;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (p.parent >= 0) continue;
      if (!first) out << ";";
      first = false;
      out << "t" << p.tree << "=" << (x_.at({p.tree, node}) & mask_);
    }
    return out.str();
  }

  uint64_t root_value(int tree, int root) const { return x_.at({tree, root}) & mask_; }
  void set_mask(uint64_t mask) { mask_ = mask; }

private:
  const Fabric& f_;
  int M_, W_;
  uint64_t mask_ = ~0ull;
  std::map<std::pair<int, int>, uint64_t> x_;
  std::map<int, int> rnd_, end_;
};

// ---------------------------------------------------------------------------
// Minimum: MSB-first prefixes with survivor filtering.

class MinProgram : public NodeProgram {
public:
  MinProgram(const Fabric& f, const TreeNodeValues& value, int m) : f_(f), m_(m), W_(f.chunks_for(m)) {
    for (const auto& tv : f_.views)
      for (int node : tv.nodes) {
        auto it = value.find({tv.id, node});
        if (it == value.end())
          throw std::invalid_argument("pipelined_min: missing value for tree " + std::to_string(tv.id) + " node " +
                                      std::to_string(node));
        own_[{tv.id, node}] = it->second;
      }
  }

  void init(int node, const Graph&) override {
    rnd_[node] = 0;
    int end = 0;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) end = std::max(end, f_.depth - p.depth + W_);
    end_[node] = f_.parts[static_cast<size_t>(node)].empty() ? 0 : end;
  }

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[node];
    for (size_t i = 0; i < inbox.size(); ++i) {
      const BitString& msg = inbox[i];
      if (msg.empty()) continue;
      int u = f_.g.adj[static_cast<size_t>(node)][i];
      int pos = 0;
      for (const auto& p : f_.parts[static_cast<size_t>(u)]) {
        if (p.parent != node) continue;
        int j = (t - 1) - (f_.depth - p.depth);
        if (j < 1 || j > W_) continue;
        int w = f_.chunk_width(m_, j);
        uint64_t chunk = msg.read_uint(pos, w);
        pos += w;
        // chunks arrive MSB-first; extend the stored prefix
        auto& pr = pref_[{p.tree, node, u}];
        pr = (pr << w) | chunk;
        plen_[{p.tree, node, u}] += w;
      }
      assert(pos == msg.size_bits());
    }
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      int j = t - (f_.depth - p.depth);
      if (j < 1 || j > W_) continue;
      int w = f_.chunk_width(m_, j);
      int len = (j - 1) * f_.chunk_size + w;
      uint64_t best = min_prefix(p.tree, node, len);
      if (p.parent >= 0) outbox[static_cast<size_t>(p.parent_slot)].append_uint(best & ((w == 64 ? ~0ull : ((1ull << w) - 1))), w);
      survivors_[{p.tree, node}].push_back(survivor_count(p.tree, node, len, best));
    }
  }

  bool halted(int node) const override { return rnd_.at(node) >= end_.at(node); }

  std::string output(int node) const override {
    std::ostringstream out;
    bool first = true;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (!first) out << ";";
      first = false;
      out << "t" << p.tree << ":S=";
      auto it = survivors_.find({p.tree, node});
      if (it != survivors_.end())
        for (size_t k = 0; k < it->second.size(); ++k) out << (k ? "," : "") << it->second[k];
      if (p.parent < 0) out << ":min=" << min_prefix(p.tree, node, m_);
    }
    return out.str();
  }

  uint64_t root_value(int tree, int root) const { return min_prefix(tree, root, m_); }

private:
  // candidates: own value plus each child's streamed prefix, all trimmed to len bits
  uint64_t min_prefix(int tree, int node, int len) const {
    uint64_t best = own_.at({tree, node}) >> (m_ - len);
    const TreeView* tv = f_.view_by_id.at(tree);
    auto it = tv->children.find(node);
    if (it != tv->children.end())
      for (int c : it->second) {
        auto lit = plen_.find({tree, node, c});
        int have = lit == plen_.end() ? 0 : lit->second;
        assert(have >= len);
        uint64_t pc = pref_.at({tree, node, c}) >> (have - len);
        best = std::min(best, pc);
      }
    return best;
  }

  int survivor_count(int tree, int node, int len, uint64_t best) const {
    int cnt = (own_.at({tree, node}) >> (m_ - len)) == best ? 1 : 0;
    const TreeView* tv = f_.view_by_id.at(tree);
    auto it = tv->children.find(node);
    if (it != tv->children.end())
      for (int c : it->second) {
        int have = plen_.at({tree, node, c});
        if ((pref_.at({tree, node, c}) >> (have - len)) == best) ++cnt;
      }
    return cnt;
  }

  const Fabric& f_;
  int m_, W_;
  std::map<std::pair<int, int>, uint64_t> own_;
  std::map<std::tuple<int, int, int>, uint64_t> pref_;  // (tree, node, child) -> prefix bits
  std::map<std::tuple<int, int, int>, int> plen_;
  std::map<std::pair<int, int>, std::vector<int>> survivors_;
  std::map<int, int> rnd_, end_;
};

// ---------------------------------------------------------------------------
// Broadcast: chunks stream down with one round of latency per hop.

class BroadcastProgram : public NodeProgram {
public:
  BroadcastProgram(const Fabric& f, const std::map<int, uint64_t>& root_value, int m)
      : f_(f), m_(m), W_(f.chunks_for(m)) {
    for (const auto& tv : f_.views) {
      auto it = root_value.find(tv.id);
      if (it == root_value.end())
        throw std::invalid_argument("pipelined_broadcast: missing root value for tree " + std::to_string(tv.id));
      got_[{tv.id, tv.root}] = it->second;
    }
  }

  void init(int node, const Graph&) override {
    rnd_[node] = 0;
    int end = 0;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) end = std::max(end, p.depth + W_);
    end_[node] = f_.parts[static_cast<size_t>(node)].empty() ? 0 : end;
  }

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[node];
    for (size_t i = 0; i < inbox.size(); ++i) {
      const BitString& msg = inbox[i];
      if (msg.empty()) continue;
      int u = f_.g.adj[static_cast<size_t>(node)][i];
      int pos = 0;
      for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
        if (p.parent != u) continue;
        int j = t - p.depth;
        if (j < 1 || j > W_) continue;
        int w = f_.chunk_width(m_, j);
        got_[{p.tree, node}] |= msg.read_uint(pos, w) << ((j - 1) * f_.chunk_size);
        pos += w;
      }
      assert(pos == msg.size_bits());
    }
    // relay: the chunk received this round goes to the children in the same
    // round; the root originates chunk j in round j
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      int j = t - p.depth;
      if (j < 1 || j > W_) continue;
      const TreeView* tv = f_.view_by_id.at(p.tree);
      auto cit = tv->children.find(node);
      if (cit == tv->children.end()) continue;
      int w = f_.chunk_width(m_, j);
      uint64_t chunk = (got_[{p.tree, node}] >> ((j - 1) * f_.chunk_size)) & ((w == 64 ? ~0ull : ((1ull << w) - 1)));
      for (int c : cit->second) outbox[static_cast<size_t>(adj_slot(f_.g, node, c))].append_uint(chunk, w);
    }
  }

  bool halted(int node) const override { return rnd_.at(node) >= end_.at(node); }

  std::string output(int node) const override {
    std::ostringstream out;
    bool first = true;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (!first) out << ";";
      first = false;
      out << "t" << p.tree << "=" << got_.at({p.tree, node});
    }
    return out.str();
  }

  uint64_t value_at(int tree, int node) const { return got_.at({tree, node}); }

private:
  const Fabric& f_;
  int m_, W_;
  std::map<std::pair<int, int>, uint64_t> got_;
  std::map<int, int> rnd_, end_;
};

// ---------------------------------------------------------------------------
// Convergecast: K rank lanes, cut-through selection on prefixes. Streams are
// (present bit, message bits) with absent = all ones, so stream order puts
// real messages first and prefix order agrees with value order.

class ConvergecastProgram : public NodeProgram {
public:
  ConvergecastProgram(const Fabric& f, const std::map<std::pair<int, int>, BitString>& special, int m, int K)
      : f_(f), m_(m), K_(K), SL_(m + 1), W_(f.chunks_for(m + 1)) {
    for (const auto& [key, msg] : special) {
      if (msg.size_bits() != m)
        throw std::invalid_argument("pipelined_convergecast: message width mismatch");
      BitString s;
      s.append_bit(0);
      s.append(msg);
      own_[key] = s;
    }
  }

  void init(int node, const Graph&) override {
    rnd_[node] = 0;
    int end = 0;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) end = std::max(end, f_.depth - p.depth + K_ * W_);
    end_[node] = f_.parts[static_cast<size_t>(node)].empty() ? 0 : end;
  }

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[node];
    for (size_t i = 0; i < inbox.size(); ++i) {
      const BitString& msg = inbox[i];
      if (msg.empty()) continue;
      int u = f_.g.adj[static_cast<size_t>(node)][i];
      int pos = 0;
      for (const auto& p : f_.parts[static_cast<size_t>(u)]) {
        if (p.parent != node) continue;
        int k = (t - 1) - (f_.depth - p.depth);  // position within u's K*W send window
        if (k < 1 || k > K_ * W_) continue;
        int s = (k - 1) / W_ + 1, j = (k - 1) % W_ + 1;
        int w = f_.chunk_width(SL_, j);
        auto& lane = lane_[{p.tree, node, u, s}];
        for (int b = 0; b < w; ++b) lane.append_bit(msg.bit(pos + b));
        pos += w;
      }
      assert(pos == msg.size_bits());
    }
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (p.parent < 0) continue;
      int k = t - (f_.depth - p.depth);
      if (k < 1 || k > K_ * W_) continue;
      int s = (k - 1) / W_ + 1, j = (k - 1) % W_ + 1;
      int w = f_.chunk_width(SL_, j);
      int len = (j - 1) * f_.chunk_size + w;
      BitString sel = rank_prefix(p.tree, node, s, len);
      for (int b = len - w; b < len; ++b) outbox[static_cast<size_t>(p.parent_slot)].append_bit(sel.bit(b));
    }
  }

  bool halted(int node) const override { return rnd_.at(node) >= end_.at(node); }

  std::vector<BitString> root_messages(int tree, int root) const {
    std::vector<BitString> all;
    collect_candidates(tree, root, K_, SL_, all);
    std::sort(all.begin(), all.end(), lex_less);
    std::vector<BitString> out;
    for (const auto& s : all) {
      if (static_cast<int>(out.size()) >= K_) break;
      if (s.bit(0) != 0) break;  // absent sentinel: no further real messages
      BitString msg;
      for (int b = 1; b < s.size_bits(); ++b) msg.append_bit(s.bit(b));
      out.push_back(msg);
    }
    return out;
  }

  std::string output(int node) const override {
    std::ostringstream out;
    bool first = true;
    for (const auto& p : f_.parts[static_cast<size_t>(node)]) {
      if (p.parent >= 0) continue;
      for (const auto& msg : root_messages(p.tree, node)) {
        if (!first) out << ";";
        first = false;
        out << "t" << p.tree << "=" << msg.to_string();
      }
    }
    return out.str();
  }

private:
  static bool lex_less(const BitString& a, const BitString& b) {
    int n = std::min(a.size_bits(), b.size_bits());
    for (int i = 0; i < n; ++i)
      if (a.bit(i) != b.bit(i)) return a.bit(i) < b.bit(i);
    return a.size_bits() < b.size_bits();
  }

  static BitString trim(const BitString& s, int len) {
    BitString t;
    for (int i = 0; i < len && i < s.size_bits(); ++i) t.append_bit(s.bit(i));
    while (t.size_bits() < len) t.append_bit(1);  // not-yet-present tail of own absent stream
    return t;
  }

  // candidates at rank depth `s`: own stream plus lanes 1..s of each child,
  // trimmed to len bits
  void collect_candidates(int tree, int node, int s, int len, std::vector<BitString>& out) const {
    auto oit = own_.find({tree, node});
    BitString absent;
    for (int i = 0; i < SL_; ++i) absent.append_bit(1);
    out.push_back(trim(oit != own_.end() ? oit->second : absent, len));
    const TreeView* tv = f_.view_by_id.at(tree);
    auto cit = tv->children.find(node);
    if (cit == tv->children.end()) return;
    for (int c : cit->second)
      for (int lane = 1; lane <= s; ++lane) {
        auto lit = lane_.find({tree, node, c, lane});
        out.push_back(trim(lit != lane_.end() ? lit->second : absent, len));
      }
  }

  BitString rank_prefix(int tree, int node, int s, int len) const {
    std::vector<BitString> cands;
    collect_candidates(tree, node, s, len, cands);
    if (s > static_cast<int>(cands.size())) {
      BitString absent;
      for (int i = 0; i < len; ++i) absent.append_bit(1);
      return absent;
    }
    std::sort(cands.begin(), cands.end(), lex_less);
    return cands[static_cast<size_t>(s - 1)];
  }

  const Fabric& f_;
  int m_, K_, SL_, W_;
  std::map<std::pair<int, int>, BitString> own_;
  std::map<std::tuple<int, int, int, int>, BitString> lane_;  // (tree, node, child, lane)
  std::map<int, int> rnd_, end_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Entry points

AggOutcome pipelined_sum(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                         const TreeNodeValues& value, int m, const ModelConfig& cfg, RoundMetrics& metrics) {
  int M = sum_width(m, g.n);
  uint64_t mask = M == 64 ? ~0ull : ((1ull << M) - 1);
  AggOutcome out;
  for (const auto& kv : value)
    if (m < 64 && (kv.second >> m) != 0) throw std::invalid_argument("pipelined_sum: value wider than m bits");

  if (!cfg.faithful) {
    for (const auto& t : trees) {
      TreeView tv = view_of(g, t);
      uint64_t s = 0;
      for (int node : tv.nodes) {
        auto it = value.find({t.id, node});
        if (it == value.end())
          throw std::invalid_argument("pipelined_sum: missing value for tree " + std::to_string(t.id) +
                                      " node " + std::to_string(node));
        s = (s + it->second) & mask;
      }
      out.per_root[t.id] = s;
    }
    out.rounds = sum_round_bound(plan, m);
    metrics.charge("agg.sum", out.rounds);
    return out;
  }

  Fabric f(g, trees, plan, M);
  SumProgram prog(f, value, M);
  prog.set_mask(mask);
  RoundMetrics local;
  run_protocol(g, cfg, prog, local, 4ll * (plan.depth + plan.chunks(M) + 4) + 16, "agg.sum");
  metrics.rounds_total += local.rounds_total;
  metrics.messages_sent += local.messages_sent;
  metrics.bits_sent += local.bits_sent;
  metrics.max_edge_bits = std::max(metrics.max_edge_bits, local.max_edge_bits);
  metrics.ledger.push_back({"agg.sum", local.rounds_total});
  for (const auto& t : trees) out.per_root[t.id] = prog.root_value(t.id, t.root);
  out.rounds = local.rounds_total;
  return out;
}

AggOutcome pipelined_min(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                         const TreeNodeValues& value, int m, const ModelConfig& cfg, RoundMetrics& metrics) {
  if (m <= 0 || m > 63) throw std::invalid_argument("pipelined_min: m out of range");
  for (const auto& kv : value)
    if ((kv.second >> m) != 0) throw std::invalid_argument("pipelined_min: value wider than m bits");
  AggOutcome out;

  if (!cfg.faithful) {
    for (const auto& t : trees) {
      TreeView tv = view_of(g, t);
      uint64_t best = ~0ull;
      for (int node : tv.nodes) {
        auto it = value.find({t.id, node});
        if (it == value.end())
          throw std::invalid_argument("pipelined_min: missing value for tree " + std::to_string(t.id) +
                                      " node " + std::to_string(node));
        best = std::min(best, it->second);
      }
      out.per_root[t.id] = best;
    }
    out.rounds = min_round_bound(plan, m);
    metrics.charge("agg.min", out.rounds);
    return out;
  }

  Fabric f(g, trees, plan, m);
  MinProgram prog(f, value, m);
  RoundMetrics local;
  run_protocol(g, cfg, prog, local, 4ll * (plan.depth + plan.chunks(m) + 4) + 16, "agg.min");
  metrics.rounds_total += local.rounds_total;
  metrics.messages_sent += local.messages_sent;
  metrics.bits_sent += local.bits_sent;
  metrics.max_edge_bits = std::max(metrics.max_edge_bits, local.max_edge_bits);
  metrics.ledger.push_back({"agg.min", local.rounds_total});
  for (const auto& t : trees) out.per_root[t.id] = prog.root_value(t.id, t.root);
  out.rounds = local.rounds_total;
  return out;
}

BroadcastOutcome pipelined_broadcast(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                                     const std::map<int, uint64_t>& root_value, int m, const ModelConfig& cfg,
                                     RoundMetrics& metrics) {
  if (m <= 0 || m > 63) throw std::invalid_argument("pipelined_broadcast: m out of range");
  BroadcastOutcome out;

  if (!cfg.faithful) {
    for (const auto& t : trees) {
      TreeView tv = view_of(g, t);
      uint64_t v = root_value.at(t.id);
      if ((v >> m) != 0) throw std::invalid_argument("pipelined_broadcast: value wider than m bits");
      for (int node : tv.nodes) out.received[{t.id, node}] = v;
    }
    out.rounds = broadcast_round_bound(plan, m);
    metrics.charge("agg.broadcast", out.rounds);
    return out;
  }

  Fabric f(g, trees, plan, m);
  BroadcastProgram prog(f, root_value, m);
  RoundMetrics local;
  run_protocol(g, cfg, prog, local, 4ll * (plan.depth + plan.chunks(m) + 4) + 16, "agg.broadcast");
  metrics.rounds_total += local.rounds_total;
  metrics.messages_sent += local.messages_sent;
  metrics.bits_sent += local.bits_sent;
  metrics.max_edge_bits = std::max(metrics.max_edge_bits, local.max_edge_bits);
  metrics.ledger.push_back({"agg.broadcast", local.rounds_total});
  for (const auto& t : trees) {
    TreeView tv = view_of(g, t);
    for (int node : tv.nodes) out.received[{t.id, node}] = prog.value_at(t.id, node);
  }
  out.rounds = local.rounds_total;
  return out;
}

ConvergecastOutcome pipelined_convergecast(const Graph& g, const std::vector<Tree>& trees, const ChannelPlan& plan,
                                           const std::map<std::pair<int, int>, BitString>& special, int m, int K,
                                           const ModelConfig& cfg, RoundMetrics& metrics) {
  if (m <= 0) throw std::invalid_argument("pipelined_convergecast: m must be positive");
  if (K <= 0) throw std::invalid_argument("pipelined_convergecast: K must be positive");
  ConvergecastOutcome out;

  if (!cfg.faithful) {
    for (const auto& t : trees) {
      TreeView tv = view_of(g, t);
      std::vector<BitString> msgs;
      for (int node : tv.nodes) {
        auto it = special.find({t.id, node});
        if (it != special.end()) {
          if (it->second.size_bits() != m)
            throw std::invalid_argument("pipelined_convergecast: message width mismatch");
          msgs.push_back(it->second);
        }
      }
      std::sort(msgs.begin(), msgs.end(), [](const BitString& a, const BitString& b) {
        for (int i = 0; i < a.size_bits(); ++i)
          if (a.bit(i) != b.bit(i)) return a.bit(i) < b.bit(i);
        return false;
      });
      if (static_cast<int>(msgs.size()) > K) msgs.resize(static_cast<size_t>(K));
      out.per_root[t.id] = std::move(msgs);
    }
    out.rounds = convergecast_round_bound(plan, m, K);
    metrics.charge("agg.convergecast", out.rounds);
    return out;
  }

  Fabric f(g, trees, plan, m + 1);
  ConvergecastProgram prog(f, special, m, K);
  RoundMetrics local;
  run_protocol(g, cfg, prog, local, 4ll * (plan.depth + static_cast<long long>(K) * (plan.chunks(m + 1) + 1) + 4) + 16,
               "agg.convergecast");
  metrics.rounds_total += local.rounds_total;
  metrics.messages_sent += local.messages_sent;
  metrics.bits_sent += local.bits_sent;
  metrics.max_edge_bits = std::max(metrics.max_edge_bits, local.max_edge_bits);
  metrics.ledger.push_back({"agg.convergecast", local.rounds_total});
  for (const auto& t : trees) out.per_root[t.id] = prog.root_messages(t.id, t.root);
  out.rounds = local.rounds_total;
  return out;
}

}  // namespace netdecomp
