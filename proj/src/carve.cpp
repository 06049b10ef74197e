#include "netdecomp/carve.hpp"

#include "netdecomp/aggregate.hpp"
#include "netdecomp/bits.hpp"
#include "netdecomp/trees.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace netdecomp {

CarveParams make_carve_params(int n, int b, BitSource src) {
  if (n < 1) throw std::invalid_argument("make_carve_params: n must be positive");
  if (b < 1) throw std::invalid_argument("make_carve_params: b must be positive");
  CarveParams p;
  p.b = b;
  p.L = b + ceil_log2(n);
  p.phases = 2 * p.L;
  p.steps_per_phase = 28 * p.L;
  p.kill_cost = 14LL * p.L;
  p.bit_source = src;
  return p;
}

long long carve_potential(int phase, int level, int bit) {
  return 3LL * phase - 2LL * level + bit;
}

namespace {

std::string u2s(uint64_t v) { return std::to_string(v); }

long long agg_chunks(long long budget, int m) {
  if (budget <= 0) return 1;
  return (static_cast<long long>(m) + budget - 1) / budget;
}

// One group of Steiner trees that an aggregation pass can serve together
// without exceeding the per-edge bandwidth.
struct AggBatch {
  std::vector<int> idx;
  int depth = 0;
  long long budget = 0; // bits per tree per round, 0 = unchunked
  int maxload = 1;
};

std::vector<AggBatch> pack_batches(const std::vector<ClusterState>& cl, const std::vector<int>& use,
                                   long long bandwidth) {
  std::vector<AggBatch> out;
  if (use.empty()) return out;
  if (bandwidth == kUnbounded) {
    AggBatch b;
    b.idx = use;
    for (int ci : use) b.depth = std::max(b.depth, cl[static_cast<size_t>(ci)].tree_height);
    out.push_back(std::move(b));
    return out;
  }
  std::map<std::pair<int, int>, int> load;
  AggBatch cur;
  int curmax = 0;
  auto flush = [&] {
    if (cur.idx.empty()) return;
    cur.maxload = std::max(1, curmax);
    cur.budget = std::max<long long>(1, bandwidth / cur.maxload);
    out.push_back(cur);
    cur = AggBatch{};
    curmax = 0;
    load.clear();
  };
  for (int ci : use) {
    const auto& edges = cl[static_cast<size_t>(ci)].tree_edges;
    bool fits = true;
    for (const auto& e : edges) {
      auto key = std::minmax(e.first, e.second);
      auto it = load.find(key);
      if ((it == load.end() ? 0 : it->second) + 1 > bandwidth) {
        fits = false;
        break;
      }
    }
    if (!fits) flush();
    cur.idx.push_back(ci);
    cur.depth = std::max(cur.depth, cl[static_cast<size_t>(ci)].tree_height);
    for (const auto& e : edges) {
      auto key = std::minmax(e.first, e.second);
      int& c = load[key];
      ++c;
      curmax = std::max(curmax, c);
    }
  }
  flush();
  return out;
}

// Declared per-step bound for resolving proposals: one pipelined sum of the
// proposal counts plus one one-bit verdict broadcast per batch.
long long agg_step_bound(const std::vector<AggBatch>& bs, int m_payload) {
  long long r = 0;
  for (const auto& b : bs) {
    r += b.depth + agg_chunks(b.budget, m_payload) * kSumSlackMul + kSumSlackAdd;
    r += b.depth + agg_chunks(b.budget, 1) * kBroadcastSlackMul + kBroadcastSlackAdd;
  }
  return r;
}

long long bcast_bound(const std::vector<AggBatch>& bs, int m_payload) {
  long long r = 0;
  for (const auto& b : bs)
    r += b.depth + agg_chunks(b.budget, m_payload) * kBroadcastSlackMul + kBroadcastSlackAdd;
  return r;
}

std::vector<Tree> materialize_trees(const std::vector<ClusterState>& cl, const std::vector<int>& use) {
  std::vector<Tree> ts;
  ts.reserve(use.size());
  for (int ci : use) {
    Tree t;
    t.id = ci;
    t.root = cl[static_cast<size_t>(ci)].seed;
    t.edges = cl[static_cast<size_t>(ci)].tree_edges;
    ts.push_back(std::move(t));
  }
  return ts;
}

// Chunked flood of each living node's packed cluster state to all neighbors.
class StateExchange : public NodeProgram {
public:
  StateExchange(const Graph& g, int ebits, long long bandwidth, std::vector<BitString> state,
                const std::vector<char>& live)
      : g_(g), E_(ebits), live_(live), state_(std::move(state)) {
    chunk_ = bandwidth == kUnbounded ? E_ : static_cast<int>(std::min<long long>(bandwidth, E_));
    F_ = (E_ + chunk_ - 1) / chunk_;
    rnd_.assign(static_cast<size_t>(g.n), 0);
    recv_.resize(static_cast<size_t>(g.n));
    for (int v = 0; v < g.n; ++v) recv_[static_cast<size_t>(v)].assign(g_.adj[static_cast<size_t>(v)].size(), BitString());
  }

  void init(int, const Graph&) override {}

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[static_cast<size_t>(node)];
    for (size_t i = 0; i < inbox.size(); ++i)
      if (!inbox[i].empty()) recv_[static_cast<size_t>(node)][i].append(inbox[i]);
    if (t <= F_ && live_[static_cast<size_t>(node)]) {
      int lo = (t - 1) * chunk_, hi = std::min(E_, lo + chunk_);
      BitString part;
      for (int k = lo; k < hi; ++k) part.append_bit(state_[static_cast<size_t>(node)].bit(k));
      for (auto& o : outbox) o = part;
    }
  }

  bool halted(int node) const override { return rnd_[static_cast<size_t>(node)] > F_; }
  std::string output(int) const override { return {}; }

  const BitString& view(int node, size_t slot) const { return recv_[static_cast<size_t>(node)][slot]; }
  int rounds_needed() const { return F_ + 1; }

private:
  const Graph& g_;
  int E_, chunk_, F_;
  const std::vector<char>& live_;
  std::vector<BitString> state_;
  std::vector<int> rnd_;
  std::vector<std::vector<BitString>> recv_;
};

// Each proposer sends one bit to its contact; contacts count arrivals.
class DeliverProposals : public NodeProgram {
public:
  DeliverProposals(const Graph& g, std::vector<std::vector<size_t>> send_slots)
      : send_(std::move(send_slots)) {
    rnd_.assign(static_cast<size_t>(g.n), 0);
    count_.assign(static_cast<size_t>(g.n), 0);
  }

  void init(int, const Graph&) override {}

  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd_[static_cast<size_t>(node)];
    for (const auto& m : inbox)
      if (!m.empty()) {
        if (m.size_bits() != 1 || m.bit(0) != 1) throw std::logic_error("carve: malformed proposal bit");
        ++count_[static_cast<size_t>(node)];
      }
    if (t == 1)
      for (size_t s : send_[static_cast<size_t>(node)]) {
        BitString one;
        one.append_bit(1);
        outbox[s] = one;
      }
  }

  bool halted(int node) const override { return rnd_[static_cast<size_t>(node)] > 1; }
  std::string output(int) const override { return {}; }
  int count(int node) const { return count_[static_cast<size_t>(node)]; }

private:
  std::vector<std::vector<size_t>> send_;
  std::vector<int> rnd_;
  std::vector<int> count_;
};

struct Prop {
  int v = -1, from = -1, to = -1, contact = -1;
};

// ---------------------------------------------------------------------------
// fast carve engine

struct FastEngine {
  const Graph& g;
  const IdAssignment& ids;
  CarveParams prm;
  const ModelConfig& cfg;
  RoundMetrics& metrics;
  const ColorHook& hook;

  int n = 0, S0 = 0, m_p = 1, ebits = 0, frag = 1;
  std::vector<ClusterState> cl;
  std::vector<int> cluster_of; // node -> cluster index or -1
  std::vector<char> alive;
  std::vector<int> changes;
  std::vector<int> order; // cluster indices ascending cid
  std::vector<long long> prev_phi, phase_tok;
  std::vector<std::vector<int>> pids; // per cluster: transcript prefix ids, depth 0..level
  std::map<std::pair<int, int>, int> pid_intern;
  int next_pid = 1;
  std::string tr;
  long long kills = 0, created = 0;
  long long r_exchange = 0, r_aggregate = 0, r_idle = 0, r_phase = 0;

  FastEngine(const Graph& g_, const IdAssignment& ids_, const CarveParams& p_,
             const ModelConfig& cfg_, RoundMetrics& met_, const ColorHook& hook_)
      : g(g_), ids(ids_), prm(p_), cfg(cfg_), metrics(met_), hook(hook_) {}

  int bit_of(const ClusterState& c) const {
    if (prm.bit_source == BitSource::id_bits) return cluster_bit(c.cid, c.level + 1, prm.b);
    return c.color_bit == 1 ? 1 : 0;
  }

  long long phi_of(int phase, const ClusterState& c) const {
    return carve_potential(phase, c.level, bit_of(c));
  }

  void init(const std::vector<int>& living) {
    n = g.n;
    if (living.empty()) throw std::invalid_argument("carve: empty living set");
    if (prm.bit_source == BitSource::id_bits && prm.b != ids.bits)
      throw std::invalid_argument("carve: id bit source requires params.b == ids.bits");
    if (prm.bit_source == BitSource::assigned_color && !hook)
      throw std::invalid_argument("carve: assigned_color requires a color hook");
    if (cfg.bandwidth != kUnbounded && cfg.bandwidth < 1)
      throw std::invalid_argument("carve: bandwidth must be positive or unbounded");
    S0 = static_cast<int>(living.size());
    m_p = std::max(1, ceil_log2(std::max(2, n)));
    ebits = prm.b + std::max(1, ceil_log2(prm.b + 1)) + 4;
    frag = cfg.bandwidth == kUnbounded
               ? 1
               : static_cast<int>((ebits + cfg.bandwidth - 1) / cfg.bandwidth);
    alive.assign(static_cast<size_t>(n), 0);
    cluster_of.assign(static_cast<size_t>(n), -1);
    changes.assign(static_cast<size_t>(n), 0);
    for (size_t k = 0; k < living.size(); ++k) {
      int v = living[k];
      if (v < 0 || v >= n) throw std::invalid_argument("carve: living node out of range");
      if (k > 0 && living[k - 1] >= v) throw std::invalid_argument("carve: living set must be sorted");
      alive[static_cast<size_t>(v)] = 1;
    }
    cl.reserve(living.size());
    for (int v : living) {
      ClusterState c;
      c.cid = ids.id[static_cast<size_t>(v)];
      c.seed = v;
      c.tree_depth[v] = 0;
      c.members = 1;
      cluster_of[static_cast<size_t>(v)] = static_cast<int>(cl.size());
      cl.push_back(std::move(c));
    }
    created = S0;
    order.resize(cl.size());
    for (size_t i = 0; i < cl.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cl[static_cast<size_t>(a)].cid < cl[static_cast<size_t>(b)].cid; });
    for (size_t i = 1; i < order.size(); ++i)
      if (cl[static_cast<size_t>(order[i - 1])].cid == cl[static_cast<size_t>(order[i])].cid)
        throw std::invalid_argument("carve: duplicate identifiers in living set");
    prev_phi.assign(cl.size(), LLONG_MIN);
    phase_tok.assign(cl.size(), 1);
    pids.assign(cl.size(), std::vector<int>{0});
    tr = "h n=" + std::to_string(n) + " b=" + std::to_string(prm.b) + " L=" + std::to_string(prm.L) +
         " src=" + (prm.bit_source == BitSource::id_bits ? "id" : "col") +
         " S=" + std::to_string(S0) + "\n";
    for (int v : living)
      tr += "s " + std::to_string(v) + " " + u2s(ids.id[static_cast<size_t>(v)]) + "\n";
  }

  char bit_char(const ClusterState& c) const {
    if (prm.bit_source == BitSource::id_bits) return static_cast<char>('0' + bit_of(c));
    return c.color_bit < 0 ? 'u' : (c.color_bit == 0 ? 'r' : 'b');
  }

  // transcript comparability of two clusters; positions are prefix ids
  bool comparable(int a, int b) const {
    const auto& pa = pids[static_cast<size_t>(a)];
    const auto& pb = pids[static_cast<size_t>(b)];
    size_t d = std::min(pa.size(), pb.size()) - 1;
    return pa[d] == pb[d];
  }

  void check_edges(int phase) const {
    for (const auto& e : g.edges) {
      int u = e.first, v = e.second;
      if (!alive[static_cast<size_t>(u)] || !alive[static_cast<size_t>(v)]) continue;
      int cu = cluster_of[static_cast<size_t>(u)], cv = cluster_of[static_cast<size_t>(v)];
      if (cu == cv) continue;
      const auto& a = cl[static_cast<size_t>(cu)];
      const auto& b = cl[static_cast<size_t>(cv)];
      if (!comparable(cu, cv))
        throw std::logic_error("carve: transcript ancestry violated at phase " + std::to_string(phase));
      if (a.level == b.level) {
        assert(pids[static_cast<size_t>(cu)].back() == pids[static_cast<size_t>(cv)].back());
        assert(a.arrival_phase == b.arrival_phase);
        if (prm.bit_source == BitSource::id_bits) {
          uint64_t mask = a.level >= 64 ? ~0ull : ((1ull << a.level) - 1);
          assert(((a.cid ^ b.cid) & mask) == 0);
        } else if (a.level < prm.b) {
          assert(a.color_bit >= 0 && b.color_bit >= 0);
        }
      }
    }
  }

  std::vector<Prop> propose_all() const {
    std::vector<Prop> props;
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<size_t>(v)]) continue;
      auto p = choose_target(v, [&](int w) -> const ClusterState& {
        return cl[static_cast<size_t>(cluster_of[static_cast<size_t>(w)])];
      });
      if (p) props.push_back(*p);
    }
    return props;
  }

  // target selection from per-neighbor cluster descriptors; lookup(w) must
  // return the state of w's cluster as v can observe it
  template <class Lookup>
  std::optional<Prop> choose_target(int v, Lookup&& lookup) const {
    int cv = cluster_of[static_cast<size_t>(v)];
    const ClusterState& own = cl[static_cast<size_t>(cv)];
    bool own_red = prm.bit_source == BitSource::id_bits ? bit_of(own) == 0 : own.color_bit == 0;
    int best = -1;
    std::tuple<int, int, uint64_t> best_key{0, 0, 0};
    for (int w : g.adj[static_cast<size_t>(v)]) {
      if (!alive[static_cast<size_t>(w)]) continue;
      int cw = cluster_of[static_cast<size_t>(w)];
      if (cw == cv) continue;
      const ClusterState& t = lookup(w);
      bool eligible = false;
      if (t.level < own.level) {
        eligible = true;
      } else if (t.level == own.level) {
        eligible = bit_of(t) == 1 && own_red;
      }
      if (t.stalling || t.finished) {
        assert(!(t.finished && eligible)); // finished clusters are never valid targets
        continue;
      }
      if (!eligible) continue;
      std::tuple<int, int, uint64_t> key{t.level, 1 - bit_of(t), t.cid};
      if (best < 0 || key < best_key) {
        best = cw;
        best_key = key;
      }
    }
    if (best < 0) return std::nullopt;
    Prop p;
    p.v = v;
    p.from = cv;
    p.to = best;
    uint64_t cmin = 0;
    for (int w : g.adj[static_cast<size_t>(v)]) {
      if (!alive[static_cast<size_t>(w)] || cluster_of[static_cast<size_t>(w)] != best) continue;
      if (p.contact < 0 || ids.id[static_cast<size_t>(w)] < cmin) {
        p.contact = w;
        cmin = ids.id[static_cast<size_t>(w)];
      }
    }
    return p;
  }

  std::vector<int> evaluating() const {
    std::vector<int> ev;
    for (int ci : order) {
      const auto& c = cl[static_cast<size_t>(ci)];
      if (!c.dissolved && !c.stalling && !c.finished) ev.push_back(ci);
    }
    return ev;
  }

  // faithful re-derivation of the proposals from exchanged messages
  std::vector<Prop> faithful_propose(const std::vector<int>& ev_clusters) {
    (void)ev_clusters;
    std::vector<BitString> state(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<size_t>(v)]) continue;
      const auto& c = cl[static_cast<size_t>(cluster_of[static_cast<size_t>(v)])];
      BitString s;
      s.append_uint(c.cid, prm.b);
      s.append_uint(static_cast<uint64_t>(c.level), std::max(1, ceil_log2(prm.b + 1)));
      s.append_bit(c.stalling ? 1 : 0);
      s.append_bit(c.finished ? 1 : 0);
      s.append_uint(c.color_bit < 0 ? 3u : static_cast<uint64_t>(c.color_bit), 2);
      assert(s.size_bits() == ebits);
      state[static_cast<size_t>(v)] = std::move(s);
    }
    StateExchange prog(g, ebits, cfg.bandwidth, std::move(state), alive);
    run_protocol(g, cfg, prog, metrics, prog.rounds_needed() + 2, "carve.exchange");

    int wlev = std::max(1, ceil_log2(prm.b + 1));
    std::vector<Prop> props;
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<size_t>(v)]) continue;
      // parse neighbor states into shadow cluster descriptors
      std::map<int, ClusterState> shadow;
      const auto& adj = g.adj[static_cast<size_t>(v)];
      for (size_t si = 0; si < adj.size(); ++si) {
        int w = adj[si];
        const BitString& m = prog.view(v, si);
        if (!alive[static_cast<size_t>(w)]) {
          if (!m.empty()) throw std::logic_error("carve: message from a deleted node");
          continue;
        }
        if (m.size_bits() != ebits) throw std::logic_error("carve: truncated state message");
        ClusterState s;
        s.cid = m.read_uint(0, prm.b);
        s.level = static_cast<int>(m.read_uint(prm.b, wlev));
        s.stalling = m.bit(prm.b + wlev) != 0;
        s.finished = m.bit(prm.b + wlev + 1) != 0;
        uint64_t col = m.read_uint(prm.b + wlev + 2, 2);
        s.color_bit = col == 3 ? -1 : static_cast<int>(col);
        shadow[w] = std::move(s);
      }
      auto p = choose_target(v, [&](int w) -> const ClusterState& { return shadow.at(w); });
      if (p) props.push_back(*p);
    }
    return props;
  }

  // resolves one executed step; returns false when the step saw no proposals
  bool do_step(int phase, int step) {
    std::vector<int> ev = evaluating();
    if (ev.empty()) return false; // caller bulk-charges the rest
    std::vector<Prop> props = propose_all();
    std::vector<AggBatch> batches = pack_batches(cl, ev, cfg.bandwidth);
    long long step_bound = 2LL * frag + 2 + agg_step_bound(batches, m_p);

    std::vector<int> pcount(cl.size(), 0);
    for (const auto& p : props) ++pcount[static_cast<size_t>(p.to)];

    if (props.empty()) {
      tr += "I " + std::to_string(phase) + " " + std::to_string(step) + "\n";
    } else {
      tr += "A " + std::to_string(phase) + " " + std::to_string(step) + "\n";
      for (const auto& p : props)
        tr += "P " + std::to_string(p.v) + " " + u2s(cl[static_cast<size_t>(p.from)].cid) + " " +
              u2s(cl[static_cast<size_t>(p.to)].cid) + " " + std::to_string(p.contact) + "\n";
    }

    if (cfg.faithful) {
      long long before = metrics.rounds_total;
      std::vector<Prop> fp = faithful_propose(ev);
      if (fp.size() != props.size()) throw std::logic_error("carve: faithful proposal mismatch");
      for (size_t i = 0; i < fp.size(); ++i)
        if (fp[i].v != props[i].v || fp[i].to != props[i].to || fp[i].contact != props[i].contact)
          throw std::logic_error("carve: faithful proposal mismatch");

      std::vector<std::vector<size_t>> slots(static_cast<size_t>(n));
      for (const auto& p : props) {
        const auto& adj = g.adj[static_cast<size_t>(p.v)];
        size_t si = static_cast<size_t>(
            std::find(adj.begin(), adj.end(), p.contact) - adj.begin());
        slots[static_cast<size_t>(p.v)].push_back(si);
      }
      DeliverProposals dp(g, std::move(slots));
      run_protocol(g, cfg, dp, metrics, 4, "carve.deliver");

      std::map<int, int> central_contact; // node -> proposals aimed at it
      for (const auto& p : props) ++central_contact[p.contact];
      for (int v = 0; v < n; ++v) {
        auto it = central_contact.find(v);
        if (dp.count(v) != (it == central_contact.end() ? 0 : it->second))
          throw std::logic_error("carve: delivered proposal counts diverge");
      }

      for (const auto& b : batches) {
        std::vector<Tree> trees = materialize_trees(cl, b.idx);
        ChannelPlan plan = plan_channels(g, trees, cfg.bandwidth);
        TreeNodeValues vals;
        for (int ci : b.idx)
          for (const auto& kv : cl[static_cast<size_t>(ci)].tree_depth) {
            int node = kv.first;
            uint64_t x = 0;
            if (alive[static_cast<size_t>(node)] && cluster_of[static_cast<size_t>(node)] == ci)
              x = static_cast<uint64_t>(dp.count(node));
            vals[{ci, node}] = x;
          }
        AggOutcome sum = pipelined_sum(g, trees, plan, vals, m_p, cfg, metrics);
        std::map<int, uint64_t> verdicts;
        for (int ci : b.idx) {
          uint64_t p_agg = sum.per_root.at(ci);
          if (p_agg != static_cast<uint64_t>(pcount[static_cast<size_t>(ci)]))
            throw std::logic_error("carve: aggregated proposal count diverges");
          bool acc = static_cast<long long>(p_agg) * prm.steps_per_phase >=
                     cl[static_cast<size_t>(ci)].tokens;
          verdicts[ci] = acc ? 1 : 0;
        }
        BroadcastOutcome bo = pipelined_broadcast(g, trees, plan, verdicts, 1, cfg, metrics);
        for (const auto& kv : bo.received)
          if (kv.second != verdicts.at(kv.first.first))
            throw std::logic_error("carve: verdict broadcast diverges");
      }
      metrics.charge("carve.relay", 1);
      if (metrics.rounds_total - before > step_bound)
        throw std::logic_error("carve: faithful step exceeded its declared bound");
    } else {
      r_exchange += 2LL * frag + 2;
      r_aggregate += agg_step_bound(batches, m_p);
      metrics.rounds_total += step_bound;
    }

    // decisions, ascending cid over evaluating clusters
    std::vector<char> accepted(cl.size(), 0);
    for (int ci : ev) {
      ClusterState& c = cl[static_cast<size_t>(ci)];
      int p = pcount[static_cast<size_t>(ci)];
      bool acc = static_cast<long long>(p) * prm.steps_per_phase >= c.tokens;
      long long after;
      if (acc) {
        after = c.tokens + p;
        accepted[static_cast<size_t>(ci)] = 1;
        created += p;
        assert(created <= 7LL * S0 * prm.L);
      } else {
        after = c.tokens - static_cast<long long>(p) * prm.kill_cost;
        assert(after > 0);
        assert(2 * after >= phase_tok[static_cast<size_t>(ci)]);
        c.stalling = true;
        kills += p;
      }
      if (!props.empty())
        tr += "D " + u2s(c.cid) + (acc ? " a " : " k ") + std::to_string(p) + " " +
              std::to_string(after) + "\n";
      c.tokens = after;
    }

    // apply moves and deletions
    std::vector<char> touched(cl.size(), 0);
    for (const auto& p : props) {
      ClusterState& from = cl[static_cast<size_t>(p.from)];
      touched[static_cast<size_t>(p.from)] = 1;
      if (accepted[static_cast<size_t>(p.to)]) {
        ClusterState& to = cl[static_cast<size_t>(p.to)];
        assert(phi_of(phase, to) > phi_of(phase, from));
        cluster_of[static_cast<size_t>(p.v)] = p.to;
        --from.members;
        ++to.members;
        ++changes[static_cast<size_t>(p.v)];
        assert(changes[static_cast<size_t>(p.v)] <= 6 * prm.L + 1);
        if (!to.tree_depth.count(p.v)) {
          int d = to.tree_depth.at(p.contact) + 1;
          to.tree_depth[p.v] = d;
          to.tree_edges.emplace_back(p.v, p.contact);
          to.tree_height = std::max(to.tree_height, d);
        }
      } else {
        alive[static_cast<size_t>(p.v)] = 0;
        cluster_of[static_cast<size_t>(p.v)] = -1;
        --from.members;
      }
    }
    assert(2 * kills <= S0);
    for (int ci : order) {
      if (!touched[static_cast<size_t>(ci)]) continue;
      ClusterState& c = cl[static_cast<size_t>(ci)];
      assert(c.members >= 0);
      if (c.members == 0 && !c.dissolved) {
        c.dissolved = true;
        tr += "X " + u2s(c.cid) + "\n";
      }
    }
    check_edges(phase);
    return !props.empty();
  }

  void phase_start(int phase) {
    if (prm.bit_source == BitSource::assigned_color) {
      CarveView view{g, ids, cl, cluster_of, phase, prm.b, &cfg, &metrics};
      hook(view);
    }
    for (int ci : order) {
      ClusterState& c = cl[static_cast<size_t>(ci)];
      if (c.dissolved) continue;
      if (!c.finished) {
        int e = phase - 2 * c.level - 1;
        if (e >= 0) {
          assert(e < 62);
          assert(c.tokens >= (1LL << e));
        }
      }
      long long phi = phi_of(phase, c);
      assert(phi >= prev_phi[static_cast<size_t>(ci)]);
      prev_phi[static_cast<size_t>(ci)] = phi;
      phase_tok[static_cast<size_t>(ci)] = c.tokens;
      tr += "C " + std::to_string(phase) + " " + u2s(c.cid) + " " + std::to_string(c.level) + " " +
            std::to_string(c.tokens) + " " + std::to_string(phi) + " " + bit_char(c) + "\n";
    }
    check_edges(phase);
  }

  void phase_end(int phase) {
    // members learn whether their cluster climbs; one bit down every live tree
    std::vector<int> live;
    for (int ci : order)
      if (!cl[static_cast<size_t>(ci)].dissolved) live.push_back(ci);
    std::vector<AggBatch> batches = pack_batches(cl, live, cfg.bandwidth);
    long long bound = bcast_bound(batches, 1);
    if (cfg.faithful) {
      long long before = metrics.rounds_total;
      for (const auto& b : batches) {
        std::vector<Tree> trees = materialize_trees(cl, b.idx);
        ChannelPlan plan = plan_channels(g, trees, cfg.bandwidth);
        std::map<int, uint64_t> vals;
        for (int ci : b.idx) vals[ci] = cl[static_cast<size_t>(ci)].stalling ? 1 : 0;
        BroadcastOutcome bo = pipelined_broadcast(g, trees, plan, vals, 1, cfg, metrics);
        for (const auto& kv : bo.received)
          if (kv.second != vals.at(kv.first.first))
            throw std::logic_error("carve: level broadcast diverges");
      }
      if (metrics.rounds_total - before > bound)
        throw std::logic_error("carve: phase-end broadcast exceeded its bound");
    } else {
      r_phase += bound;
      metrics.rounds_total += bound;
    }

    tr += "E " + std::to_string(phase) + "\n";
    for (int ci : order) {
      ClusterState& c = cl[static_cast<size_t>(ci)];
      if (c.dissolved || !c.stalling) continue;
      int branch;
      if (prm.bit_source == BitSource::id_bits) {
        branch = 2 * phase + cluster_bit(c.cid, c.level + 1, prm.b);
      } else {
        branch = 3 * phase + (c.color_bit < 0 ? 0 : c.color_bit == 0 ? 1 : 2);
      }
      c.level += 1;
      c.branches.push_back(branch);
      auto& chain = pids[static_cast<size_t>(ci)];
      auto key = std::make_pair(chain.back(), branch);
      auto it = pid_intern.find(key);
      int pid = it == pid_intern.end() ? (pid_intern[key] = next_pid++) : it->second;
      chain.push_back(pid);
      c.arrival_phase = phase + 1;
      c.stalling = false;
      if (prm.bit_source == BitSource::assigned_color) c.color_bit = -1;
      tr += "L " + u2s(c.cid) + " " + std::to_string(c.level) + " " + std::to_string(branch) + "\n";
      if (c.level == prm.b) {
        c.finished = true;
        tr += "F " + u2s(c.cid) + "\n";
      }
    }
  }

  CarveResult run() {
    for (int phase = 1; phase <= prm.phases; ++phase) {
      phase_start(phase);
      int step = 1;
      while (step <= prm.steps_per_phase) {
        std::vector<int> ev = evaluating();
        if (ev.empty()) break;
        bool acted = do_step(phase, step);
        ++step;
        if (!acted) break; // everyone evaluating just stalled
      }
      if (step <= prm.steps_per_phase) {
        long long remaining = prm.steps_per_phase - step + 1;
        long long idle_cost = remaining * (2LL * frag + 2);
        r_idle += idle_cost;
        metrics.rounds_total += idle_cost;
      }
      phase_end(phase);
    }

    for (int ci : order) {
      const ClusterState& c = cl[static_cast<size_t>(ci)];
      if (!c.dissolved && !(c.finished && c.level == prm.b))
        throw std::logic_error("carve: cluster not finished after the last phase");
    }
    for (const auto& e : g.edges)
      if (alive[static_cast<size_t>(e.first)] && alive[static_cast<size_t>(e.second)] &&
          cluster_of[static_cast<size_t>(e.first)] != cluster_of[static_cast<size_t>(e.second)])
        throw std::logic_error("carve: surviving clusters are adjacent");

    CarveResult res;
    for (int v = 0; v < n; ++v)
      if (alive[static_cast<size_t>(v)]) res.surviving.push_back(v);
    assert(2 * static_cast<long long>(res.surviving.size()) >= S0);
    assert(static_cast<long long>(res.surviving.size()) + kills == S0);
    tr += "T " + std::to_string(res.surviving.size()) + " " + std::to_string(kills) + "\n";
    if (!cfg.faithful) {
      metrics.ledger.emplace_back("carve.exchange", r_exchange);
      metrics.ledger.emplace_back("carve.aggregate", r_aggregate);
      metrics.ledger.emplace_back("carve.idle", r_idle);
      metrics.ledger.emplace_back("carve.phase_end", r_phase);
    }
    res.clusters = std::move(cl);
    res.final_cluster = std::move(cluster_of);
    res.changes = std::move(changes);
    res.trace = std::move(tr);
    res.killed = kills;
    res.tokens_created = created;
    return res;
  }
};

// ---------------------------------------------------------------------------
// red/blue phase engine (baseline and coloring-driven)

struct RbEngine {
  const Graph& g;
  const IdAssignment& ids;
  int phases;
  const ModelConfig& cfg;
  RoundMetrics& metrics;
  const ColorHook& color_phase;
  bool lsb_agreement;

  int n = 0, S0 = 0, m_p = 1, ebits = 0, frag = 1, steps = 0;
  std::vector<ClusterState> cl;
  std::vector<int> cluster_of;
  std::vector<char> alive;
  std::vector<int> changes;
  std::vector<int> order;
  std::string tr;
  long long kills = 0;
  long long r_exchange = 0, r_aggregate = 0, r_idle = 0, r_phase = 0;

  RbEngine(const Graph& g_, const IdAssignment& ids_, int phases_, const ModelConfig& cfg_,
           RoundMetrics& met_, const ColorHook& hook_, bool lsb_)
      : g(g_), ids(ids_), phases(phases_), cfg(cfg_), metrics(met_), color_phase(hook_),
        lsb_agreement(lsb_) {}

  void init(const std::vector<int>& living) {
    n = g.n;
    if (living.empty()) throw std::invalid_argument("carve_rb: empty living set");
    if (phases < 1) throw std::invalid_argument("carve_rb: need at least one phase");
    if (cfg.faithful)
      throw std::invalid_argument("carve_rb: faithful mode is not supported for phase carving");
    if (cfg.bandwidth != kUnbounded && cfg.bandwidth < 1)
      throw std::invalid_argument("carve_rb: bandwidth must be positive or unbounded");
    S0 = static_cast<int>(living.size());
    m_p = std::max(1, ceil_log2(std::max(2, n)));
    ebits = ids.bits + 3;
    frag = cfg.bandwidth == kUnbounded
               ? 1
               : static_cast<int>((ebits + cfg.bandwidth - 1) / cfg.bandwidth);
    // ceil(2 * phases * log2 n) + 1, exact when n is a power of two
    if (n <= 2) {
      steps = 2 * phases + 1;
    } else if ((n & (n - 1)) == 0) {
      steps = 2 * phases * ceil_log2(static_cast<uint64_t>(n)) + 1;
    } else {
      long double x = 2.0L * phases * std::log2(static_cast<long double>(n));
      steps = static_cast<int>(std::ceil(static_cast<double>(x))) + 1;
    }
    alive.assign(static_cast<size_t>(n), 0);
    cluster_of.assign(static_cast<size_t>(n), -1);
    changes.assign(static_cast<size_t>(n), 0);
    for (size_t k = 0; k < living.size(); ++k) {
      int v = living[k];
      if (v < 0 || v >= n) throw std::invalid_argument("carve_rb: living node out of range");
      if (k > 0 && living[k - 1] >= v) throw std::invalid_argument("carve_rb: living set must be sorted");
      alive[static_cast<size_t>(v)] = 1;
    }
    for (int v : living) {
      ClusterState c;
      c.cid = ids.id[static_cast<size_t>(v)];
      c.seed = v;
      c.tree_depth[v] = 0;
      c.members = 1;
      cluster_of[static_cast<size_t>(v)] = static_cast<int>(cl.size());
      cl.push_back(std::move(c));
    }
    order.resize(cl.size());
    for (size_t i = 0; i < cl.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cl[static_cast<size_t>(a)].cid < cl[static_cast<size_t>(b)].cid; });
    for (size_t i = 1; i < order.size(); ++i)
      if (cl[static_cast<size_t>(order[i - 1])].cid == cl[static_cast<size_t>(order[i])].cid)
        throw std::invalid_argument("carve_rb: duplicate identifiers in living set");
    tr = "h n=" + std::to_string(n) + " b=" + std::to_string(phases) + " L=0 src=" +
         (lsb_agreement ? "rg" : "sid") + " S=" + std::to_string(S0) + "\n";
    for (int v : living)
      tr += "s " + std::to_string(v) + " " + u2s(ids.id[static_cast<size_t>(v)]) + "\n";
  }

  std::vector<Prop> propose_all() const {
    std::vector<Prop> props;
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<size_t>(v)]) continue;
      int cv = cluster_of[static_cast<size_t>(v)];
      if (cl[static_cast<size_t>(cv)].color_bit != 0) continue; // only red nodes propose
      int best = -1;
      uint64_t best_cid = 0;
      for (int w : g.adj[static_cast<size_t>(v)]) {
        if (!alive[static_cast<size_t>(w)]) continue;
        int cw = cluster_of[static_cast<size_t>(w)];
        if (cw == cv) continue;
        const ClusterState& t = cl[static_cast<size_t>(cw)];
        if (t.color_bit != 1 || t.stalling) continue;
        if (best < 0 || t.cid < best_cid) {
          best = cw;
          best_cid = t.cid;
        }
      }
      if (best < 0) continue;
      Prop p;
      p.v = v;
      p.from = cv;
      p.to = best;
      uint64_t cmin = 0;
      for (int w : g.adj[static_cast<size_t>(v)]) {
        if (!alive[static_cast<size_t>(w)] || cluster_of[static_cast<size_t>(w)] != best) continue;
        if (p.contact < 0 || ids.id[static_cast<size_t>(w)] < cmin) {
          p.contact = w;
          cmin = ids.id[static_cast<size_t>(w)];
        }
      }
      props.push_back(p);
    }
    return props;
  }

  bool do_step(int phase, int step) {
    std::vector<Prop> props = propose_all();
    std::vector<int> targets; // blue clusters able to receive, for the cost model
    for (int ci : order) {
      const auto& c = cl[static_cast<size_t>(ci)];
      if (!c.dissolved && c.color_bit == 1 && !c.stalling) targets.push_back(ci);
    }
    std::vector<AggBatch> batches = pack_batches(cl, targets, cfg.bandwidth);
    long long step_cost = 2LL * frag + 2 + agg_step_bound(batches, m_p);
    r_exchange += 2LL * frag + 2;
    r_aggregate += agg_step_bound(batches, m_p);
    metrics.rounds_total += step_cost;

    if (props.empty()) {
      tr += "I " + std::to_string(phase) + " " + std::to_string(step) + "\n";
      return false;
    }
    tr += "A " + std::to_string(phase) + " " + std::to_string(step) + "\n";
    for (const auto& p : props)
      tr += "P " + std::to_string(p.v) + " " + u2s(cl[static_cast<size_t>(p.from)].cid) + " " +
            u2s(cl[static_cast<size_t>(p.to)].cid) + " " + std::to_string(p.contact) + "\n";

    std::vector<int> pcount(cl.size(), 0);
    for (const auto& p : props) ++pcount[static_cast<size_t>(p.to)];
    std::vector<char> accepted(cl.size(), 0);
    for (int ci : order) {
      int p = pcount[static_cast<size_t>(ci)];
      if (p == 0) continue;
      ClusterState& c = cl[static_cast<size_t>(ci)];
      bool acc = static_cast<long long>(p) * 2 * phases >= c.members;
      if (acc) {
        accepted[static_cast<size_t>(ci)] = 1;
      } else {
        c.stalling = true;
        kills += p;
      }
      int after = acc ? c.members + p : c.members;
      tr += "D " + u2s(c.cid) + (acc ? " a " : " k ") + std::to_string(p) + " " +
            std::to_string(after) + "\n";
    }
    std::vector<char> touched(cl.size(), 0);
    for (const auto& p : props) {
      ClusterState& from = cl[static_cast<size_t>(p.from)];
      touched[static_cast<size_t>(p.from)] = 1;
      if (accepted[static_cast<size_t>(p.to)]) {
        ClusterState& to = cl[static_cast<size_t>(p.to)];
        cluster_of[static_cast<size_t>(p.v)] = p.to;
        --from.members;
        ++to.members;
        ++changes[static_cast<size_t>(p.v)];
        if (!to.tree_depth.count(p.v)) {
          int d = to.tree_depth.at(p.contact) + 1;
          to.tree_depth[p.v] = d;
          to.tree_edges.emplace_back(p.v, p.contact);
          to.tree_height = std::max(to.tree_height, d);
        }
      } else {
        alive[static_cast<size_t>(p.v)] = 0;
        cluster_of[static_cast<size_t>(p.v)] = -1;
        --from.members;
      }
    }
    assert(2 * kills <= S0);
    for (int ci : order) {
      if (!touched[static_cast<size_t>(ci)]) continue;
      ClusterState& c = cl[static_cast<size_t>(ci)];
      assert(c.members >= 0);
      if (c.members == 0 && !c.dissolved) {
        c.dissolved = true;
        tr += "X " + u2s(c.cid) + "\n";
      }
    }
    return true;
  }

  CarveResult run() {
    for (int phase = 1; phase <= phases; ++phase) {
      for (int ci : order) cl[static_cast<size_t>(ci)].stalling = false;
      {
        CarveView view{g, ids, cl, cluster_of, phase, 0, &cfg, &metrics};
        color_phase(view);
      }
      // members learn the phase color: one two-bit broadcast down every live tree
      std::vector<int> live;
      for (int ci : order)
        if (!cl[static_cast<size_t>(ci)].dissolved) live.push_back(ci);
      std::vector<AggBatch> live_batches = pack_batches(cl, live, cfg.bandwidth);
      long long color_cost = bcast_bound(live_batches, 2);
      r_phase += color_cost;
      metrics.rounds_total += color_cost;
      for (int ci : order) {
        const ClusterState& c = cl[static_cast<size_t>(ci)];
        if (c.dissolved) continue;
        tr += "C " + std::to_string(phase) + " " + u2s(c.cid) + " " +
              (c.color_bit < 0 ? "u" : c.color_bit == 0 ? "r" : "b") + " " +
              std::to_string(c.members) + "\n";
      }
      int step = 1;
      while (step <= steps) {
        bool acted = do_step(phase, step);
        ++step;
        if (!acted) break;
      }
      if (step <= steps) {
        long long idle_cost = static_cast<long long>(steps - step + 1) * (2LL * frag + 2);
        r_idle += idle_cost;
        metrics.rounds_total += idle_cost;
      }
      // full separation of the phase colors
      for (const auto& e : g.edges) {
        if (!alive[static_cast<size_t>(e.first)] || !alive[static_cast<size_t>(e.second)]) continue;
        int cu = cluster_of[static_cast<size_t>(e.first)], cv = cluster_of[static_cast<size_t>(e.second)];
        if (cu == cv) continue;
        const auto& a = cl[static_cast<size_t>(cu)];
        const auto& b = cl[static_cast<size_t>(cv)];
        if ((a.color_bit == 0 && b.color_bit == 1) || (a.color_bit == 1 && b.color_bit == 0))
          throw std::logic_error("carve_rb: red and blue clusters still adjacent at phase end");
        if (!lsb_agreement) assert(a.color_bit >= 0 && b.color_bit >= 0);
        if (lsb_agreement) {
          uint64_t mask = phase >= 64 ? ~0ull : ((1ull << phase) - 1);
          assert(((a.cid ^ b.cid) & mask) == 0);
        }
      }
      tr += "E " + std::to_string(phase) + "\n";
    }
    for (const auto& e : g.edges)
      if (alive[static_cast<size_t>(e.first)] && alive[static_cast<size_t>(e.second)] &&
          cluster_of[static_cast<size_t>(e.first)] != cluster_of[static_cast<size_t>(e.second)])
        throw std::logic_error("carve_rb: surviving clusters are adjacent");

    CarveResult res;
    for (int v = 0; v < n; ++v)
      if (alive[static_cast<size_t>(v)]) res.surviving.push_back(v);
    assert(2 * kills <= S0);
    assert(static_cast<long long>(res.surviving.size()) + kills == S0);
    tr += "T " + std::to_string(res.surviving.size()) + " " + std::to_string(kills) + "\n";
    metrics.ledger.emplace_back("carve.exchange", r_exchange);
    metrics.ledger.emplace_back("carve.aggregate", r_aggregate);
    metrics.ledger.emplace_back("carve.idle", r_idle);
    metrics.ledger.emplace_back("carve.phase_start", r_phase);
    res.clusters = std::move(cl);
    res.final_cluster = std::move(cluster_of);
    res.changes = std::move(changes);
    res.trace = std::move(tr);
    res.killed = kills;
    res.tokens_created = 0;
    return res;
  }
};

} // namespace

CarveResult carve(const Graph& g, const IdAssignment& ids, const std::vector<int>& living,
                  const CarveParams& params, const ModelConfig& cfg, RoundMetrics& metrics,
                  const ColorHook& hook) {
  FastEngine e(g, ids, params, cfg, metrics, hook);
  e.init(living);
  return e.run();
}

CarveResult carve_rb(const Graph& g, const IdAssignment& ids, const std::vector<int>& living,
                     int phases, const ModelConfig& cfg, RoundMetrics& metrics,
                     const ColorHook& color_phase, bool lsb_agreement) {
  if (!color_phase) throw std::invalid_argument("carve_rb: color hook required");
  RbEngine e(g, ids, phases, cfg, metrics, color_phase, lsb_agreement);
  e.init(living);
  return e.run();
}

CarveResult carve_rg_baseline(const Graph& g, const IdAssignment& ids,
                              const std::vector<int>& living, const ModelConfig& cfg,
                              RoundMetrics& metrics) {
  ColorHook by_bit = [&ids](CarveView& view) {
    for (auto& c : view.clusters)
      if (!c.dissolved) c.color_bit = cluster_bit(c.cid, view.phase, ids.bits);
  };
  return carve_rb(g, ids, living, ids.bits, cfg, metrics, by_bit, true);
}

} // namespace netdecomp
