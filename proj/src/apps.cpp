#include "netdecomp/apps.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <sstream>
#include <stdexcept>

#include "netdecomp/aggregate.hpp"
#include "netdecomp/bits.hpp"
#include "netdecomp/trees.hpp"
#include "netdecomp/verify.hpp"

namespace netdecomp {

namespace {

// leading field of the member reports; most significant bit first, so the
// convergecast hands the root its members in ascending node order
void append_msb(BitString& s, uint64_t v, int w) {
  for (int i = w - 1; i >= 0; --i) s.append_bit(static_cast<int>((v >> i) & 1u));
}

uint64_t read_msb(const BitString& s, int pos, int w) {
  uint64_t v = 0;
  for (int i = 0; i < w; ++i) v = (v << 1) | static_cast<uint64_t>(s.bit(pos + i));
  return v;
}

// one w-bit value from every node to all neighbors, chunked to the bandwidth
struct NeighborSend : NodeProgram {
  const Graph& gr;
  const std::vector<uint64_t>& val;
  int w, chunk, nchunks;
  std::vector<int> rnd;
  std::vector<std::vector<uint64_t>> got;

  NeighborSend(const Graph& g_, const std::vector<uint64_t>& v, int w_, long long bandwidth)
      : gr(g_), val(v), w(w_) {
    chunk = bandwidth == kUnbounded ? w : static_cast<int>(std::min<long long>(w, bandwidth));
    nchunks = (w + chunk - 1) / chunk;
    rnd.assign(static_cast<size_t>(gr.n), 0);
    got.resize(static_cast<size_t>(gr.n));
  }
  void init(int node, const Graph&) override {
    got[static_cast<size_t>(node)].assign(gr.adj[static_cast<size_t>(node)].size(), 0);
  }
  void round(int node, const std::vector<BitString>& inbox, std::vector<BitString>& outbox) override {
    int t = ++rnd[static_cast<size_t>(node)];
    if (t >= 2) {
      int off = (t - 2) * chunk, width = std::min(chunk, w - off);
      for (size_t i = 0; i < inbox.size(); ++i)
        if (!inbox[i].empty())
          got[static_cast<size_t>(node)][i] |= inbox[i].read_uint(0, width) << off;
    }
    if (t <= nchunks) {
      int off = (t - 1) * chunk, width = std::min(chunk, w - off);
      uint64_t mask = width >= 64 ? ~0ULL : (1ULL << width) - 1;
      uint64_t piece = (val[static_cast<size_t>(node)] >> off) & mask;
      for (auto& out : outbox) out.append_uint(piece, width);
    }
  }
  bool halted(int node) const override { return rnd[static_cast<size_t>(node)] > nchunks; }
};

// announce val to every neighbor; faithful runs move real messages and insist
// the received copies agree, logical runs charge the same round count
void run_exchange(const Graph& g, const std::vector<uint64_t>& val, int w, const ModelConfig& cfg,
                  RoundMetrics& metrics, const std::string& label) {
  long long chunk = cfg.bandwidth == kUnbounded ? w : std::min<long long>(w, cfg.bandwidth);
  long long rounds = (w + chunk - 1) / chunk + 1;
  if (!cfg.faithful) {
    metrics.charge(label, rounds);
    return;
  }
  NeighborSend prog(g, val, w, cfg.bandwidth);
  long long before = metrics.rounds_total;
  run_protocol(g, cfg, prog, metrics, rounds + 2, label);
  if (metrics.rounds_total - before != rounds)
    throw std::logic_error(label + ": exchange cost diverged");
  for (int v = 0; v < g.n; ++v)
    for (size_t i = 0; i < g.adj[static_cast<size_t>(v)].size(); ++i)
      if (prog.got[static_cast<size_t>(v)][i] !=
          val[static_cast<size_t>(g.adj[static_cast<size_t>(v)][i])])
        throw std::logic_error(label + ": exchanged values diverge");
}

struct ColorClass {
  std::vector<int> idx;    // cluster indices of this color
  std::vector<Tree> trees; // tree id = cluster index
  int K = 0;               // largest member count
  int md = 0;              // most in-cluster neighbors above one member
};

ColorClass collect_class(const Graph& g, const Decomposition& d, int colorno) {
  ColorClass cc;
  for (size_t ci = 0; ci < d.clusters.size(); ++ci) {
    const DecompCluster& c = d.clusters[ci];
    if (c.color != colorno) continue;
    cc.idx.push_back(static_cast<int>(ci));
    Tree t;
    t.id = static_cast<int>(ci);
    t.root = c.seed;
    t.edges = c.tree_edges;
    cc.trees.push_back(std::move(t));
    cc.K = std::max(cc.K, static_cast<int>(c.members.size()));
    for (int v : c.members) {
      int cnt = 0;
      for (int u : g.adj[static_cast<size_t>(v)])
        if (u > v && d.cluster_of[static_cast<size_t>(u)] == static_cast<int>(ci)) ++cnt;
      cc.md = std::max(cc.md, cnt);
    }
  }
  return cc;
}

// one member's decoded report
struct Report {
  int node = -1;
  int flag = 0;                // mis: dominated bit (unused by coloring)
  std::vector<char> used;      // coloring: palette already taken nearby
  std::vector<int> targets;    // in-cluster neighbors above node
};

void precheck(const Graph& g, const Decomposition& d, const std::string& op) {
  CheckReport rep = check_decomposition(g, d);
  for (const auto& it : rep.items)
    if (!it.pass)
      throw std::invalid_argument(op + ": invalid decomposition: " + it.name + ": " + it.witness);
  if (d.stats.colors < 1) throw std::invalid_argument(op + ": decomposition has no color classes");
}

// in-cluster neighbors above v, ascending
std::vector<int> uplinks(const Graph& g, const Decomposition& d, int v) {
  std::vector<int> out;
  for (int u : g.adj[static_cast<size_t>(v)])
    if (u > v && d.cluster_of[static_cast<size_t>(u)] == d.cluster_of[static_cast<size_t>(v)])
      out.push_back(u);
  return out;
}

constexpr int kWordBits = 63; // broadcast values carry at most 63 bits

// verdicts packed wbits a member, kWordBits a word, members in ascending order
std::vector<uint64_t> pack_words(const std::vector<int>& members, const std::vector<int>& value,
                                 int wbits, int nwords) {
  std::vector<uint64_t> words(static_cast<size_t>(nwords), 0);
  for (size_t k = 0; k < members.size(); ++k) {
    uint64_t v = static_cast<uint64_t>(value[static_cast<size_t>(members[k])]);
    for (int i = 0; i < wbits; ++i) {
      size_t bit = k * static_cast<size_t>(wbits) + static_cast<size_t>(i);
      if ((v >> i) & 1u) words[bit / kWordBits] |= 1ULL << (bit % kWordBits);
    }
  }
  return words;
}

// ship every cluster's verdicts down its tree, nwords words of kWordBits each
void scatter_verdicts(const Graph& g, const ColorClass& cc, const Decomposition& d,
                      const ChannelPlan& plan, const std::vector<int>& verdict, int wbits,
                      const ModelConfig& cfg, RoundMetrics& metrics, const std::string& op) {
  int nwords = (cc.K * wbits + kWordBits - 1) / kWordBits;
  std::map<int, std::vector<uint64_t>> words;
  for (int ci : cc.idx)
    words[ci] = pack_words(d.clusters[static_cast<size_t>(ci)].members, verdict, wbits, nwords);
  for (int wi = 0; wi < nwords; ++wi) {
    std::map<int, uint64_t> vals;
    for (int ci : cc.idx) vals[ci] = words[ci][static_cast<size_t>(wi)];
    BroadcastOutcome bo = pipelined_broadcast(g, cc.trees, plan, vals, kWordBits, cfg, metrics);
    for (const auto& kv : bo.received)
      if (kv.second != vals.at(kv.first.first))
        throw std::logic_error(op + ": scattered verdicts diverge");
  }
}

} // namespace

MisResult mis_via_decomposition(const Graph& g, const Decomposition& d, const ModelConfig& cfg,
                                RoundMetrics& metrics) {
  precheck(g, d, "mis_via_decomposition");
  if (cfg.faithful && cfg.bandwidth != kUnbounded && cfg.bandwidth < 1)
    throw std::invalid_argument("mis_via_decomposition: bandwidth must be positive");
  long long t0 = metrics.rounds_total;
  int n = g.n;
  int w = std::max(1, ceil_log2(static_cast<uint64_t>(std::max(2, n))));
  std::vector<int> selected(static_cast<size_t>(n), 0);
  std::vector<char> dominated(static_cast<size_t>(n), 0);
  std::vector<uint64_t> fresh(static_cast<size_t>(n), 0);

  for (int j = 1; j <= d.stats.colors; ++j) {
    ColorClass cc = collect_class(g, d, j);
    if (cc.idx.empty()) continue;
    if (j > 1) {
      // last class's picks announce themselves; their neighbors are dominated
      run_exchange(g, fresh, 1, cfg, metrics, "apps.mis.exchange");
      std::fill(fresh.begin(), fresh.end(), 0);
    }

    int m = w + 1 + w + cc.md * w; // node, dominated, degree, targets
    std::map<std::pair<int, int>, BitString> reports;
    for (int ci : cc.idx)
      for (int v : d.clusters[static_cast<size_t>(ci)].members) {
        BitString s;
        append_msb(s, static_cast<uint64_t>(v), w);
        s.append_bit(dominated[static_cast<size_t>(v)]);
        std::vector<int> up = uplinks(g, d, v);
        s.append_uint(up.size(), w);
        for (int u : up) s.append_uint(static_cast<uint64_t>(u), w);
        for (int k = static_cast<int>(up.size()); k < cc.md; ++k) s.append_uint(0, w);
        assert(s.size_bits() == m);
        reports[{ci, v}] = std::move(s);
      }

    ChannelPlan plan = plan_channels(g, cc.trees, cfg.bandwidth);
    ConvergecastOutcome co = pipelined_convergecast(g, cc.trees, plan, reports, m, cc.K, cfg, metrics);

    // each root decodes its members and solves greedily in ascending order
    for (int ci : cc.idx) {
      const std::vector<int>& members = d.clusters[static_cast<size_t>(ci)].members;
      auto rit = co.per_root.find(ci);
      if (rit == co.per_root.end() || rit->second.size() != members.size())
        throw std::logic_error("mis_via_decomposition: gathered reports diverge");
      std::map<int, size_t> pos;
      std::vector<Report> rep(members.size());
      for (size_t k = 0; k < members.size(); ++k) {
        const BitString& s = rit->second[k];
        Report& rk = rep[k];
        rk.node = static_cast<int>(read_msb(s, 0, w));
        rk.flag = s.bit(w);
        uint64_t cnt = s.read_uint(w + 1, w);
        for (uint64_t i = 0; i < cnt; ++i)
          rk.targets.push_back(static_cast<int>(s.read_uint(w + 1 + w + static_cast<int>(i) * w, w)));
        if (rk.node != members[k] || rk.flag != dominated[static_cast<size_t>(rk.node)] ||
            rk.targets != uplinks(g, d, rk.node))
          throw std::logic_error("mis_via_decomposition: gathered reports diverge");
        pos[rk.node] = k;
      }
      std::vector<char> blocked(members.size(), 0);
      for (size_t k = 0; k < members.size(); ++k) {
        if (rep[k].flag || blocked[k]) continue;
        int v = rep[k].node;
        selected[static_cast<size_t>(v)] = 1;
        fresh[static_cast<size_t>(v)] = 1;
        for (int u : rep[k].targets) blocked[pos.at(u)] = 1;
        for (int u : g.adj[static_cast<size_t>(v)]) dominated[static_cast<size_t>(u)] = 1;
      }
    }

    scatter_verdicts(g, cc, d, plan, selected, 1, cfg, metrics, "apps.mis");
  }

  MisResult res;
  for (int v = 0; v < n; ++v) {
    assert(selected[static_cast<size_t>(v)] || dominated[static_cast<size_t>(v)]);
    if (selected[static_cast<size_t>(v)]) res.selected.push_back(v);
  }
  for (const auto& e : g.edges)
    assert(!(selected[static_cast<size_t>(e.first)] && selected[static_cast<size_t>(e.second)]));
  res.rounds = metrics.rounds_total - t0;
  return res;
}

ColoringResult coloring_via_decomposition(const Graph& g, const Decomposition& d, int delta,
                                          const ModelConfig& cfg, RoundMetrics& metrics) {
  precheck(g, d, "coloring_via_decomposition");
  if (cfg.faithful && cfg.bandwidth != kUnbounded && cfg.bandwidth < 1)
    throw std::invalid_argument("coloring_via_decomposition: bandwidth must be positive");
  int maxdeg = 0;
  for (int v = 0; v < g.n; ++v) maxdeg = std::max(maxdeg, g.degree(v));
  if (delta < maxdeg)
    throw std::invalid_argument("coloring_via_decomposition: delta " + std::to_string(delta) +
                                " below max degree " + std::to_string(maxdeg));
  long long t0 = metrics.rounds_total;
  int n = g.n;
  int w = std::max(1, ceil_log2(static_cast<uint64_t>(std::max(2, n))));
  int wcol = std::max(1, ceil_log2(static_cast<uint64_t>(delta) + 2));
  std::vector<int> col(static_cast<size_t>(n), 0);
  std::vector<uint64_t> fresh(static_cast<size_t>(n), 0);

  for (int j = 1; j <= d.stats.colors; ++j) {
    ColorClass cc = collect_class(g, d, j);
    if (cc.idx.empty()) continue;
    if (j > 1) {
      run_exchange(g, fresh, wcol, cfg, metrics, "apps.coloring.exchange");
      std::fill(fresh.begin(), fresh.end(), 0);
    }

    int m = w + (delta + 1) + w + cc.md * w; // node, used palette, degree, targets
    std::map<std::pair<int, int>, BitString> reports;
    for (int ci : cc.idx)
      for (int v : d.clusters[static_cast<size_t>(ci)].members) {
        BitString s;
        append_msb(s, static_cast<uint64_t>(v), w);
        for (int c = 1; c <= delta + 1; ++c) {
          int hit = 0;
          for (int u : g.adj[static_cast<size_t>(v)])
            if (col[static_cast<size_t>(u)] == c) hit = 1;
          s.append_bit(hit);
        }
        std::vector<int> up = uplinks(g, d, v);
        s.append_uint(up.size(), w);
        for (int u : up) s.append_uint(static_cast<uint64_t>(u), w);
        for (int k = static_cast<int>(up.size()); k < cc.md; ++k) s.append_uint(0, w);
        assert(s.size_bits() == m);
        reports[{ci, v}] = std::move(s);
      }

    ChannelPlan plan = plan_channels(g, cc.trees, cfg.bandwidth);
    ConvergecastOutcome co = pipelined_convergecast(g, cc.trees, plan, reports, m, cc.K, cfg, metrics);

    for (int ci : cc.idx) {
      const std::vector<int>& members = d.clusters[static_cast<size_t>(ci)].members;
      auto rit = co.per_root.find(ci);
      if (rit == co.per_root.end() || rit->second.size() != members.size())
        throw std::logic_error("coloring_via_decomposition: gathered reports diverge");
      std::map<int, size_t> pos;
      std::vector<Report> rep(members.size());
      for (size_t k = 0; k < members.size(); ++k) {
        const BitString& s = rit->second[k];
        Report& rk = rep[k];
        rk.node = static_cast<int>(read_msb(s, 0, w));
        rk.used.assign(static_cast<size_t>(delta) + 2, 0);
        for (int c = 1; c <= delta + 1; ++c) rk.used[static_cast<size_t>(c)] = static_cast<char>(s.bit(w + c - 1));
        uint64_t cnt = s.read_uint(w + delta + 1, w);
        for (uint64_t i = 0; i < cnt; ++i)
          rk.targets.push_back(
              static_cast<int>(s.read_uint(w + delta + 1 + w + static_cast<int>(i) * w, w)));
        if (rk.node != members[k] || rk.targets != uplinks(g, d, rk.node))
          throw std::logic_error("coloring_via_decomposition: gathered reports diverge");
        for (int c = 1; c <= delta + 1; ++c) {
          int hit = 0;
          for (int u : g.adj[static_cast<size_t>(rk.node)])
            if (col[static_cast<size_t>(u)] == c) hit = 1;
          if (rk.used[static_cast<size_t>(c)] != hit)
            throw std::logic_error("coloring_via_decomposition: gathered reports diverge");
        }
        pos[rk.node] = k;
      }
      // greedy list assignment; in-cluster edges came up with the reports
      for (size_t k = 0; k < members.size(); ++k) {
        int busy = 0;
        for (int c = 1; c <= delta + 1; ++c)
          if (rep[k].used[static_cast<size_t>(c)]) ++busy;
        assert(busy <= delta); // a free list color always remains
        int picked = 0;
        for (int c = 1; c <= delta + 1 && !picked; ++c)
          if (!rep[k].used[static_cast<size_t>(c)]) picked = c;
        col[static_cast<size_t>(rep[k].node)] = picked;
        fresh[static_cast<size_t>(rep[k].node)] = static_cast<uint64_t>(picked);
        for (int u : rep[k].targets) rep[pos.at(u)].used[static_cast<size_t>(picked)] = 1;
      }
    }

    scatter_verdicts(g, cc, d, plan, col, wcol, cfg, metrics, "apps.coloring");
  }

  ColoringResult res;
  res.color = col;
  for (int v = 0; v < n; ++v)
    assert(col[static_cast<size_t>(v)] >= 1 && col[static_cast<size_t>(v)] <= delta + 1);
  for (const auto& e : g.edges)
    assert(col[static_cast<size_t>(e.first)] != col[static_cast<size_t>(e.second)]);
  res.rounds = metrics.rounds_total - t0;
  return res;
}

std::string to_text(const MisResult& r) {
  std::ostringstream out;
  for (int v : r.selected) out << "m " << v << "\n";
  return out.str();
}

std::string to_text(const ColoringResult& r) {
  std::ostringstream out;
  for (size_t v = 0; v < r.color.size(); ++v) out << "col " << v << " " << r.color[v] << "\n";
  return out.str();
}

} // namespace netdecomp
