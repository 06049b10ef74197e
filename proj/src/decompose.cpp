#include "netdecomp/decompose.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netdecomp {

namespace {

// longest member-to-member distance in g, one search per member
int weak_diameter(const Graph& g, const std::vector<int>& members) {
  if (members.size() < 2) return 0;
  int best = 0;
  std::vector<int> dist(static_cast<size_t>(g.n));
  std::set<int> wanted(members.begin(), members.end());
  for (int src : members) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<size_t>(src)] = 0;
    std::queue<int> q;
    q.push(src);
    size_t found = 1;
    while (!q.empty() && found < members.size()) {
      int u = q.front();
      q.pop();
      for (int w : g.adj[static_cast<size_t>(u)])
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
          if (wanted.count(w)) ++found;
          q.push(w);
        }
    }
    for (int v : members) {
      if (dist[static_cast<size_t>(v)] < 0)
        throw std::logic_error("weak_diameter: cluster members in different components");
      best = std::max(best, dist[static_cast<size_t>(v)]);
    }
  }
  return best;
}

// One carve iteration's surviving clusters appended as color `colorno`.
void absorb_carve(Decomposition& d, const CarveResult& cr, int colorno) {
  std::map<int, int> remap; // carve cluster index -> decomposition cluster index
  for (int v : cr.surviving) {
    int ci = cr.final_cluster[static_cast<size_t>(v)];
    assert(ci >= 0);
    auto [it, fresh] = remap.try_emplace(ci, static_cast<int>(d.clusters.size()));
    if (fresh) {
      const ClusterState& c = cr.clusters[static_cast<size_t>(ci)];
      DecompCluster dc;
      dc.color = colorno;
      dc.cid = c.cid;
      dc.seed = c.seed;
      dc.tree_edges = c.tree_edges;
      d.clusters.push_back(std::move(dc));
    }
    DecompCluster& dc = d.clusters[static_cast<size_t>(it->second)];
    dc.members.push_back(v);
    d.color[static_cast<size_t>(v)] = colorno;
    d.cluster_of[static_cast<size_t>(v)] = it->second;
  }
  d.stats.killed += cr.killed;
}

void finalize(const Graph& g, Decomposition& d) {
  for (int v = 0; v < g.n; ++v) {
    assert(d.color[static_cast<size_t>(v)] >= 1);
    assert(d.cluster_of[static_cast<size_t>(v)] >= 0);
  }
  assert(d.stats.colors <= ceil_log2(static_cast<uint64_t>(std::max(1, g.n))) + 1);
  // same color means same cluster across any edge
  for (const auto& e : g.edges)
    if (d.color[static_cast<size_t>(e.first)] == d.color[static_cast<size_t>(e.second)])
      assert(d.cluster_of[static_cast<size_t>(e.first)] == d.cluster_of[static_cast<size_t>(e.second)]);
  long long diam_bound = 112LL * d.L * d.L;
  for (const DecompCluster& c : d.clusters) {
    int wd = weak_diameter(g, c.members);
    assert(wd <= diam_bound);
    d.stats.max_weak_diameter = std::max(d.stats.max_weak_diameter, wd);
  }
  // Steiner overlap per color
  long long overlap_bound = 6LL * d.L + 2;
  std::map<std::pair<int, int>, long long> through; // (color, node) -> tree count
  for (const DecompCluster& c : d.clusters) {
    std::set<int> tn{c.seed};
    for (const auto& e : c.tree_edges) tn.insert(e.first);
    for (int v : tn) {
      long long cnt = ++through[{c.color, v}];
      assert(cnt <= overlap_bound);
      d.stats.max_overlap = std::max(d.stats.max_overlap, cnt);
    }
  }
}

} // namespace

int ceil_log_43(int n) {
  if (n < 1) throw std::invalid_argument("ceil_log_43: n must be positive");
  unsigned __int128 p4 = 1, p3 = 1;
  const unsigned __int128 cap = static_cast<unsigned __int128>(1) << 120;
  int k = 0;
  while (p4 < p3 * static_cast<unsigned __int128>(n)) {
    p4 *= 4;
    p3 *= 3;
    ++k;
    if (p3 > cap / static_cast<unsigned __int128>(n)) {
      // out of exact headroom (n beyond ~10^7); equality is impossible for
      // integer n >= 2, so the float answer is safe this far out
      long double r = std::log(static_cast<long double>(n)) / std::log(4.0L / 3.0L);
      return std::max(k, static_cast<int>(std::ceil(r)));
    }
  }
  return k;
}

Decomposition decompose_fast(const Graph& g, const IdAssignment& ids, const ModelConfig& cfg,
                             RoundMetrics& metrics) {
  if (g.n < 1) throw std::invalid_argument("decompose_fast: empty graph");
  CarveParams prm = make_carve_params(g.n, ids.bits);
  Decomposition d;
  d.variant = "fast";
  d.n = g.n;
  d.b = prm.b;
  d.L = prm.L;
  d.color.assign(static_cast<size_t>(g.n), 0);
  d.cluster_of.assign(static_cast<size_t>(g.n), -1);
  long long r0 = metrics.rounds_total;

  std::vector<int> living(static_cast<size_t>(g.n));
  for (int v = 0; v < g.n; ++v) living[static_cast<size_t>(v)] = v;
  int colorno = 0;
  while (!living.empty()) {
    ++colorno;
    CarveResult cr = carve(g, ids, living, prm, cfg, metrics);
    assert(2 * static_cast<long long>(cr.surviving.size()) >= static_cast<long long>(living.size()));
    absorb_carve(d, cr, colorno);
    std::vector<int> next;
    std::set_difference(living.begin(), living.end(), cr.surviving.begin(), cr.surviving.end(),
                        std::back_inserter(next));
    living = std::move(next);
  }
  d.stats.colors = colorno;
  d.stats.rounds = metrics.rounds_total - r0;
  finalize(g, d);
  return d;
}

CarveResult carve_id_independent_slow(const Graph& g, const IdAssignment& ids,
                                      const std::vector<int>& living, const ModelConfig& cfg,
                                      RoundMetrics& metrics) {
  int phases = 1 + ceil_log_43(std::max(1, g.n));
  // component snapshot from the previous phase start, for the contraction check
  std::vector<int> prev_comp;
  std::vector<long long> prev_size;
  bool have_prev = false;

  ColorHook hook = [&](CarveView& view) {
    int K = static_cast<int>(view.clusters.size());
    std::vector<char> live(static_cast<size_t>(K), 0);
    for (int i = 0; i < K; ++i)
      live[static_cast<size_t>(i)] =
          !view.clusters[static_cast<size_t>(i)].dissolved && view.clusters[static_cast<size_t>(i)].members > 0;
    std::vector<std::set<int>> adj(static_cast<size_t>(K));
    long long maxh = 0;
    for (int i = 0; i < K; ++i)
      if (live[static_cast<size_t>(i)])
        maxh = std::max(maxh, static_cast<long long>(view.clusters[static_cast<size_t>(i)].tree_height));
    for (const auto& e : g.edges) {
      int a = view.cluster_of[static_cast<size_t>(e.first)], b = view.cluster_of[static_cast<size_t>(e.second)];
      if (a < 0 || b < 0 || a == b) continue;
      adj[static_cast<size_t>(a)].insert(b);
      adj[static_cast<size_t>(b)].insert(a);
    }
    // the cluster graph is refreshed by one neighbor exchange plus a
    // convergecast up every live tree
    view.metrics->charge("carve.cluster_graph", 1 + maxh + ceil_log2(static_cast<uint64_t>(std::max(2, g.n))));

    std::vector<int> comp(static_cast<size_t>(K), -1);
    std::vector<long long> csize;
    for (int i = 0; i < K; ++i) {
      if (!live[static_cast<size_t>(i)] || comp[static_cast<size_t>(i)] >= 0) continue;
      int id = static_cast<int>(csize.size());
      csize.push_back(0);
      std::vector<int> stack{i};
      comp[static_cast<size_t>(i)] = id;
      while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        ++csize[static_cast<size_t>(id)];
        for (int o : adj[static_cast<size_t>(c)])
          if (comp[static_cast<size_t>(o)] < 0) {
            comp[static_cast<size_t>(o)] = id;
            stack.push_back(o);
          }
      }
    }
    if (have_prev) {
      // every surviving component must sit inside one previous component and,
      // if that one had >= 2 clusters, keep at most 3/4 of its count
      std::map<int, int> owner; // new component -> previous component
      for (int i = 0; i < K; ++i) {
        if (!live[static_cast<size_t>(i)]) continue;
        int nc = comp[static_cast<size_t>(i)], oc = prev_comp[static_cast<size_t>(i)];
        assert(oc >= 0);
        auto [it, fresh] = owner.try_emplace(nc, oc);
        if (!fresh) assert(it->second == oc);
      }
      for (const auto& [nc, oc] : owner)
        if (prev_size[static_cast<size_t>(oc)] >= 2)
          assert(4 * csize[static_cast<size_t>(nc)] <= 3 * prev_size[static_cast<size_t>(oc)]);
    }
    prev_comp = comp;
    prev_size = csize;
    have_prev = true;

    for (int i = 0; i < K; ++i) view.clusters[static_cast<size_t>(i)].color_bit = -1;
    std::vector<int> scope;
    for (int i = 0; i < K; ++i)
      if (live[static_cast<size_t>(i)] && !adj[static_cast<size_t>(i)].empty()) scope.push_back(i);
    if (scope.empty()) return;
    RBColoring rc =
        balanced_color_clusters(g, view.clusters, scope, view.cluster_of, *view.cfg, *view.metrics);
    for (const auto& [i, col] : rc.color)
      view.clusters[static_cast<size_t>(i)].color_bit = col == RB::blue ? 1 : 0;
  };

  return carve_rb(g, ids, living, phases, cfg, metrics, hook, false);
}

Decomposition decompose_fast_id_independent(const Graph& g, const IdAssignment& ids,
                                            const ModelConfig& cfg, RoundMetrics& metrics) {
  if (g.n < 1) throw std::invalid_argument("decompose_fast_id_independent: empty graph");
  int b = 1 + ceil_log_43(g.n);
  int l2 = std::max(1, ceil_log2(static_cast<uint64_t>(g.n)));
  long long need = 200LL * (l2 + b) * (l2 + b);
  long long h = (need + static_cast<long long>(l2) * l2 - 1) / (static_cast<long long>(l2) * l2);
  CarveParams prm = make_carve_params(g.n, b, BitSource::assigned_color);

  // Every living cluster's ground is part of the BFS universe (higher levels
  // are traversable), but only unfinished clusters newly arrived at their
  // level get colored; the rest keep the color from their own arrival.
  ColorHook hook = [&g, h](CarveView& view) {
    std::vector<int> back; // compact index -> cluster index
    std::vector<int> toc(view.clusters.size(), -1);
    std::vector<ClusterState> sub;
    std::vector<int> scope;
    for (size_t i = 0; i < view.clusters.size(); ++i) {
      const ClusterState& c = view.clusters[i];
      if (c.dissolved) continue;
      toc[i] = static_cast<int>(sub.size());
      back.push_back(static_cast<int>(i));
      if (!c.finished && c.arrival_phase == view.phase)
        scope.push_back(static_cast<int>(sub.size()));
      ClusterState s = c;
      s.level += 1; // carve levels start at 0, the partial coloring wants >= 1
      sub.push_back(std::move(s));
    }
    if (scope.empty()) return;
    std::vector<int> mo(static_cast<size_t>(g.n), -1);
    for (int v = 0; v < g.n; ++v) {
      int ci = view.cluster_of[static_cast<size_t>(v)];
      if (ci >= 0) mo[static_cast<size_t>(v)] = toc[static_cast<size_t>(ci)];
    }
    RBColoring rc = partial_color_levels(g, sub, scope, mo, h, *view.cfg, *view.metrics);
    for (const auto& [j, col] : rc.color)
      view.clusters[static_cast<size_t>(back[static_cast<size_t>(j)])].color_bit =
          col == RB::uncolored ? -1 : col == RB::red ? 0 : 1;
  };

  Decomposition d;
  d.variant = "fast-id";
  d.n = g.n;
  d.b = b;
  d.L = prm.L;
  d.color.assign(static_cast<size_t>(g.n), 0);
  d.cluster_of.assign(static_cast<size_t>(g.n), -1);
  long long r0 = metrics.rounds_total;

  std::vector<int> living(static_cast<size_t>(g.n));
  for (int v = 0; v < g.n; ++v) living[static_cast<size_t>(v)] = v;
  int colorno = 0;
  while (!living.empty()) {
    ++colorno;
    CarveResult cr = carve(g, ids, living, prm, cfg, metrics, hook);
    assert(2 * static_cast<long long>(cr.surviving.size()) >= static_cast<long long>(living.size()));
    absorb_carve(d, cr, colorno);
    std::vector<int> next;
    std::set_difference(living.begin(), living.end(), cr.surviving.begin(), cr.surviving.end(),
                        std::back_inserter(next));
    living = std::move(next);
  }
  d.stats.colors = colorno;
  d.stats.rounds = metrics.rounds_total - r0;
  finalize(g, d);
  return d;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_text(const Decomposition& d) {
  std::ostringstream out;
  out << "D1 variant=" << d.variant << " n=" << d.n << " b=" << d.b << " L=" << d.L
      << " seed=" << d.seed << "\n";
  for (int v = 0; v < d.n; ++v)
    out << "c " << v << " " << d.color[static_cast<size_t>(v)] << " "
        << d.cluster_of[static_cast<size_t>(v)] << "\n";
  for (size_t i = 0; i < d.clusters.size(); ++i) {
    const DecompCluster& c = d.clusters[i];
    out << "T " << i << " " << c.color << " " << c.seed << " " << c.cid << "\n";
    for (const auto& e : c.tree_edges) out << "e " << e.first << " " << e.second << "\n";
  }
  out << "S colors=" << d.stats.colors << " maxdiam=" << d.stats.max_weak_diameter
      << " overlap=" << d.stats.max_overlap << " rounds=" << d.stats.rounds
      << " killed=" << d.stats.killed << "\n";
  return out.str();
}

namespace {

long long kv_num(const std::string& tok, const std::string& key) {
  std::string pre = key + "=";
  if (tok.rfind(pre, 0) != 0)
    throw std::invalid_argument("decomposition: expected " + pre + "..., got '" + tok + "'");
  try {
    return std::stoll(tok.substr(pre.size()));
  } catch (const std::exception&) {
    throw std::invalid_argument("decomposition: bad number in '" + tok + "'");
  }
}

} // namespace

Decomposition parse_decomposition(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("decomposition: empty input");
  std::istringstream hdr(line);
  std::string tag, vtok;
  hdr >> tag >> vtok;
  if (tag != "D1") throw std::invalid_argument("decomposition: expected D1 header");
  if (vtok.rfind("variant=", 0) != 0)
    throw std::invalid_argument("decomposition: expected variant=...");
  Decomposition d;
  d.variant = vtok.substr(8);
  std::string t_n, t_b, t_l, t_s;
  hdr >> t_n >> t_b >> t_l >> t_s;
  d.n = static_cast<int>(kv_num(t_n, "n"));
  d.b = static_cast<int>(kv_num(t_b, "b"));
  d.L = static_cast<int>(kv_num(t_l, "L"));
  d.seed = static_cast<uint64_t>(kv_num(t_s, "seed"));
  if (d.n < 1) throw std::invalid_argument("decomposition: n must be positive");
  d.color.assign(static_cast<size_t>(d.n), 0);
  d.cluster_of.assign(static_cast<size_t>(d.n), -1);

  bool stats_seen = false;
  int expect_node = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (stats_seen) throw std::invalid_argument("decomposition: content after stats line");
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "c") {
      int v = -1, col = -1, cl = -1;
      if (!(ls >> v >> col >> cl)) throw std::invalid_argument("decomposition: malformed c line");
      if (v != expect_node)
        throw std::invalid_argument("decomposition: node lines out of order at " + std::to_string(v));
      if (v < 0 || v >= d.n) throw std::invalid_argument("decomposition: node out of range");
      if (col < 1) throw std::invalid_argument("decomposition: color must be >= 1");
      if (cl < 0) throw std::invalid_argument("decomposition: cluster must be >= 0");
      d.color[static_cast<size_t>(v)] = col;
      d.cluster_of[static_cast<size_t>(v)] = cl;
      ++expect_node;
    } else if (kind == "T") {
      long long idx = -1, col = -1, seed = -1;
      unsigned long long cid = 0;
      if (!(ls >> idx >> col >> seed >> cid))
        throw std::invalid_argument("decomposition: malformed T line");
      if (idx != static_cast<long long>(d.clusters.size()))
        throw std::invalid_argument("decomposition: cluster blocks out of order");
      if (seed < 0 || seed >= d.n) throw std::invalid_argument("decomposition: cluster seed out of range");
      DecompCluster c;
      c.color = static_cast<int>(col);
      c.seed = static_cast<int>(seed);
      c.cid = cid;
      d.clusters.push_back(std::move(c));
    } else if (kind == "e") {
      if (d.clusters.empty()) throw std::invalid_argument("decomposition: edge before any cluster");
      int a = -1, b = -1;
      if (!(ls >> a >> b)) throw std::invalid_argument("decomposition: malformed e line");
      if (a < 0 || a >= d.n || b < 0 || b >= d.n)
        throw std::invalid_argument("decomposition: tree edge endpoint out of range");
      d.clusters.back().tree_edges.emplace_back(a, b);
    } else if (kind == "S") {
      std::string t1, t2, t3, t4, t5;
      ls >> t1 >> t2 >> t3 >> t4 >> t5;
      d.stats.colors = static_cast<int>(kv_num(t1, "colors"));
      d.stats.max_weak_diameter = static_cast<int>(kv_num(t2, "maxdiam"));
      d.stats.max_overlap = kv_num(t3, "overlap");
      d.stats.rounds = kv_num(t4, "rounds");
      d.stats.killed = kv_num(t5, "killed");
      stats_seen = true;
    } else {
      throw std::invalid_argument("decomposition: unknown line '" + line + "'");
    }
  }
  if (!stats_seen) throw std::invalid_argument("decomposition: missing stats line");
  if (expect_node != d.n)
    throw std::invalid_argument("decomposition: " + std::to_string(expect_node) + " node lines for n=" +
                                std::to_string(d.n));
  for (int v = 0; v < d.n; ++v) {
    int cl = d.cluster_of[static_cast<size_t>(v)];
    if (cl >= static_cast<int>(d.clusters.size()))
      throw std::invalid_argument("decomposition: node " + std::to_string(v) +
                                  " references missing cluster " + std::to_string(cl));
  }
  // rebuild member lists from the node lines
  for (int v = 0; v < d.n; ++v)
    d.clusters[static_cast<size_t>(d.cluster_of[static_cast<size_t>(v)])].members.push_back(v);
  return d;
}

} // namespace netdecomp
