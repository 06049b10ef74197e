#include "netdecomp/balanced.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace netdecomp {

namespace {

using u128 = unsigned __int128;

bool is_prime(long long x) {
  if (x < 2) return false;
  for (long long d = 2; d * d <= x; ++d)
    if (x % d == 0) return false;
  return true;
}

long long next_prime(long long x) {
  while (!is_prime(x)) ++x;
  return x;
}

bool pow_ge(long long q, int e, u128 m) {
  u128 acc = 1;
  for (int i = 0; i < e; ++i) {
    acc *= static_cast<u128>(q);
    if (acc >= m) return true;
  }
  return acc >= m;
}

// Smallest r with r^e >= m, or 0 if none under the search cap. Candidates
// beyond the cap can never win: the high-degree option is always available
// with q well below it.
long long int_root_ceil(u128 m, int e) {
  const long long cap = 100000;
  if (!pow_ge(cap, e, m)) return 0;
  long long lo = 1, hi = cap;
  while (lo < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (pow_ge(mid, e, m)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

struct PaletteStep {
  long long q = 0;
  int d = 0;
};

// One reduction maps m colors to q^2 where q is prime, q >= cap*d + 1 (so a
// node always finds an evaluation point avoiding all <= cap neighbors) and
// q^(d+1) >= m (so distinct colors get distinct degree-d polynomials).
PaletteStep best_step(u128 m) {
  PaletteStep best;
  u128 bestpal = 0;
  for (int d = 1; d <= 66; ++d) {
    long long lo = static_cast<long long>(kVirtualDegreeCap) * d + 1;
    long long root = int_root_ceil(m, d + 1);
    if (root == 0) continue;
    long long q = next_prime(std::max(lo, root));
    u128 pal = static_cast<u128>(q) * static_cast<u128>(q);
    if (best.q == 0 || pal < bestpal) {
      best = {q, d};
      bestpal = pal;
    }
  }
  return best;
}

struct Schedule {
  std::vector<PaletteStep> steps;
  unsigned long long final_palette = 0;
};

Schedule reduction_schedule(int b) {
  if (b < 1 || b > 64) throw std::invalid_argument("reduction_schedule: bits must be in [1, 64]");
  u128 m = static_cast<u128>(1) << b;
  Schedule s;
  while (true) {
    PaletteStep st = best_step(m);
    if (st.q == 0) break;
    u128 pal = static_cast<u128>(st.q) * static_cast<u128>(st.q);
    if (pal >= m) break;
    s.steps.push_back(st);
    m = pal;
  }
  s.final_palette = static_cast<unsigned long long>(m);
  return s;
}

long long schedule_length(const Schedule& s) {
  const long long target = kVirtualDegreeCap + 1;
  long long f = static_cast<long long>(s.final_palette);
  long long removal = f > target ? f - target : 0;
  long long sweep = std::min(f, target);
  return 1 + static_cast<long long>(s.steps.size()) + removal + sweep;
}

int max_degree(const Graph& g) {
  int d = 0;
  for (int v = 0; v < g.n; ++v) d = std::max(d, g.degree(v));
  return d;
}

// ---------------------------------------------------------------------------
// Out-edge bookkeeping shared by the node and cluster versions.

std::vector<std::vector<int>> undirected(int n, const std::vector<int>& out) {
  std::vector<std::set<int>> s(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    if (out[static_cast<size_t>(v)] < 0) continue;
    s[static_cast<size_t>(v)].insert(out[static_cast<size_t>(v)]);
    s[static_cast<size_t>(out[static_cast<size_t>(v)])].insert(v);
  }
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) adj[static_cast<size_t>(v)].assign(s[static_cast<size_t>(v)].begin(), s[static_cast<size_t>(v)].end());
  return adj;
}

// Square of a bounded-degree adjacency structure, restricted to `keep`.
std::vector<std::pair<int, int>> square_edges(const std::vector<std::vector<int>>& adj,
                                              const std::vector<int>& keep,
                                              const std::vector<int>& pos) {
  std::vector<std::pair<int, int>> es;
  for (int v : keep) {
    std::set<int> reach;
    for (int u : adj[static_cast<size_t>(v)]) {
      reach.insert(u);
      for (int w : adj[static_cast<size_t>(u)]) reach.insert(w);
    }
    for (int u : reach) {
      if (u == v || pos[static_cast<size_t>(u)] < 0) continue;
      int a = pos[static_cast<size_t>(v)], bb = pos[static_cast<size_t>(u)];
      if (a < bb) es.emplace_back(a, bb);
    }
  }
  return es;
}

// Nearest MIS center within the chosen-edge graph, ties to the smaller key.
// Maximality of the two-hop MIS keeps every distance at 2 or less; 3 is the
// asserted ceiling.
struct CenterPick {
  int center = -1;
  int dist = -1;
};

std::vector<CenterPick> assign_centers(const std::vector<std::vector<int>>& adj,
                                       const std::vector<int>& members,
                                       const std::vector<int>& centers,
                                       const std::vector<uint64_t>& key) {
  std::map<int, CenterPick> best;
  std::vector<int> order(centers);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return key[static_cast<size_t>(a)] < key[static_cast<size_t>(b)]; });
  std::set<int> memberset(members.begin(), members.end());
  for (int s : order) {
    std::map<int, int> dist;
    dist[s] = 0;
    std::vector<int> frontier{s};
    for (int d = 1; d <= 3; ++d) {
      std::vector<int> next;
      for (int v : frontier)
        for (int u : adj[static_cast<size_t>(v)]) {
          if (dist.count(u) || !memberset.count(u)) continue;
          dist[u] = d;
          next.push_back(u);
        }
      frontier = std::move(next);
    }
    for (auto& [v, d] : dist) {
      auto it = best.find(v);
      if (it == best.end() || d < it->second.dist)
        best[v] = {s, d};
      // equal distance: earlier (smaller-key) center already won
    }
  }
  std::vector<CenterPick> res;
  for (int v : members) {
    auto it = best.find(v);
    if (it == best.end() || it->second.dist > 3)
      throw std::runtime_error("assign_centers: member beyond distance 3 of every center");
    res.push_back(it->second);
  }
  return res;
}

// Split one group half/half: first ceil(k/2) in ascending key order turn
// blue, the rest red.
void split_group(std::vector<std::pair<uint64_t, int>> group, std::map<int, RB>& color) {
  std::sort(group.begin(), group.end());
  size_t nb = (group.size() + 1) / 2;
  for (size_t i = 0; i < group.size(); ++i)
    color[group[i].second] = i < nb ? RB::blue : RB::red;
}

} // namespace

int log_star(double x) {
  int k = 0;
  while (x > 1.0) {
    x = std::log2(x);
    ++k;
  }
  return k;
}

int linial_reduce_steps(int b) {
  return static_cast<int>(reduction_schedule(b).steps.size());
}

long long linial_schedule_rounds(int b) { return schedule_length(reduction_schedule(b)); }

long long linial_round_bound(int b) {
  return kLogStarSlope * log_star(static_cast<double>(b)) + kLinialOffset;
}

LinialResult linial_mis(const Graph& gsq, const IdAssignment& ids, const ModelConfig& cfg,
                        RoundMetrics& metrics) {
  (void)cfg;
  int n = gsq.n;
  if (static_cast<int>(ids.id.size()) != n)
    throw std::invalid_argument("linial_mis: id count does not match graph");
  if (ids.bits < 1 || ids.bits > 64) throw std::invalid_argument("linial_mis: bits must be in [1, 64]");
  int dmax = max_degree(gsq);
  if (dmax > kVirtualDegreeCap)
    throw std::invalid_argument("linial_mis: degree " + std::to_string(dmax) + " exceeds cap " +
                                std::to_string(kVirtualDegreeCap));

  Schedule sched = reduction_schedule(ids.bits);
  std::vector<uint64_t> col(ids.id);

  for (const PaletteStep& st : sched.steps) {
    long long q = st.q;
    int d = st.d;
    // color -> degree-d polynomial over GF(q), coefficients the base-q digits
    std::vector<std::vector<long long>> coef(static_cast<size_t>(n), std::vector<long long>(static_cast<size_t>(d + 1)));
    for (int v = 0; v < n; ++v) {
      uint64_t c = col[static_cast<size_t>(v)];
      for (int j = 0; j <= d; ++j) {
        coef[static_cast<size_t>(v)][static_cast<size_t>(j)] = static_cast<long long>(c % static_cast<uint64_t>(q));
        c /= static_cast<uint64_t>(q);
      }
    }
    auto eval = [&](int v, long long x) {
      long long acc = 0;
      for (int j = d; j >= 0; --j) acc = (acc * x + coef[static_cast<size_t>(v)][static_cast<size_t>(j)]) % q;
      return acc;
    };
    std::vector<uint64_t> next(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
      long long x = -1;
      for (long long cand = 0; cand < q; ++cand) {
        long long pv = eval(v, cand);
        bool clash = false;
        for (int u : gsq.adj[static_cast<size_t>(v)])
          if (eval(u, cand) == pv) {
            clash = true;
            break;
          }
        if (!clash) {
          x = cand;
          break;
        }
      }
      assert(x >= 0); // q > cap * d rules out at most cap * d points
      next[static_cast<size_t>(v)] =
          static_cast<uint64_t>(x) * static_cast<uint64_t>(q) + static_cast<uint64_t>(eval(v, x));
    }
    col = std::move(next);
  }

  // drop one color class per round until the palette fits cap + 1
  const uint64_t target = static_cast<uint64_t>(kVirtualDegreeCap) + 1;
  uint64_t f = sched.final_palette;
  if (f > target) {
    std::map<uint64_t, std::vector<int>> high;
    for (int v = 0; v < n; ++v)
      if (col[static_cast<size_t>(v)] >= target) high[col[static_cast<size_t>(v)]].push_back(v);
    for (auto it = high.rbegin(); it != high.rend(); ++it) {
      for (int v : it->second) {
        std::vector<bool> used(static_cast<size_t>(target), false);
        for (int u : gsq.adj[static_cast<size_t>(v)])
          if (col[static_cast<size_t>(u)] < target) used[static_cast<size_t>(col[static_cast<size_t>(u)])] = true;
        uint64_t pick = 0;
        while (used[static_cast<size_t>(pick)]) ++pick;
        col[static_cast<size_t>(v)] = pick;
      }
    }
  }

  // greedy sweep, one color class per round
  uint64_t classes = std::min<uint64_t>(f, target);
  std::vector<std::vector<int>> bucket(static_cast<size_t>(classes));
  for (int v = 0; v < n; ++v) bucket[static_cast<size_t>(col[static_cast<size_t>(v)])].push_back(v);
  std::vector<bool> in_mis(static_cast<size_t>(n), false), blocked(static_cast<size_t>(n), false);
  for (uint64_t c = 0; c < classes; ++c)
    for (int v : bucket[static_cast<size_t>(c)]) {
      if (blocked[static_cast<size_t>(v)]) continue;
      in_mis[static_cast<size_t>(v)] = true;
      for (int u : gsq.adj[static_cast<size_t>(v)]) blocked[static_cast<size_t>(u)] = true;
    }

  LinialResult res;
  for (int v = 0; v < n; ++v)
    if (in_mis[static_cast<size_t>(v)]) res.selected.push_back(v);
  for (int v = 0; v < n; ++v) {
    bool dominated = in_mis[static_cast<size_t>(v)];
    for (int u : gsq.adj[static_cast<size_t>(v)]) {
      assert(!(in_mis[static_cast<size_t>(v)] && in_mis[static_cast<size_t>(u)]));
      dominated = dominated || in_mis[static_cast<size_t>(u)];
    }
    assert(dominated);
  }
  res.rounds = schedule_length(sched);
  res.reduce_steps = static_cast<long long>(sched.steps.size());
  metrics.charge("linial", res.rounds);
  return res;
}

// ---------------------------------------------------------------------------
// Node-level coloring

RBColoring balanced_color_nodes(const Graph& g, const IdAssignment& ids, const ModelConfig& cfg,
                                RoundMetrics& metrics) {
  int n = g.n;
  if (n <= 0) throw std::invalid_argument("balanced_color_nodes: empty graph");
  if (static_cast<int>(ids.id.size()) != n)
    throw std::invalid_argument("balanced_color_nodes: id count does not match graph");
  for (int v = 0; v < n; ++v)
    if (g.degree(v) == 0)
      throw std::invalid_argument("balanced_color_nodes: isolated node " + std::to_string(v));

  // out-edge: lowest-identifier neighbor
  std::vector<int> out(static_cast<size_t>(n), -1);
  std::vector<int> indeg(static_cast<size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    int pick = -1;
    for (int u : g.adj[static_cast<size_t>(v)])
      if (pick < 0 || ids.id[static_cast<size_t>(u)] < ids.id[static_cast<size_t>(pick)]) pick = u;
    out[static_cast<size_t>(v)] = pick;
    ++indeg[static_cast<size_t>(pick)];
  }
  std::vector<bool> heavy(static_cast<size_t>(n), false);
  int heavies = 0;
  for (int v = 0; v < n; ++v)
    if (indeg[static_cast<size_t>(v)] >= kHeavyInDegree) {
      heavy[static_cast<size_t>(v)] = true;
      ++heavies;
    }
  assert(heavies * kHeavyInDegree <= n);

  std::vector<std::vector<int>> hadj = undirected(n, out);
  std::vector<std::vector<int>> hp(static_cast<size_t>(n)); // chosen edges among light nodes
  for (int v = 0; v < n; ++v) {
    if (heavy[static_cast<size_t>(v)]) continue;
    for (int u : hadj[static_cast<size_t>(v)])
      if (!heavy[static_cast<size_t>(u)]) hp[static_cast<size_t>(v)].push_back(u);
  }

  RBColoring rc;

  // stars: heavy center plus the light in-neighbors with no light contact
  std::vector<bool> iso(static_cast<size_t>(n), false);
  for (int v = 0; v < n; ++v)
    iso[static_cast<size_t>(v)] = !heavy[static_cast<size_t>(v)] && hp[static_cast<size_t>(v)].empty();
  for (int c = 0; c < n; ++c) {
    if (!heavy[static_cast<size_t>(c)]) continue;
    std::vector<std::pair<uint64_t, int>> star{{ids.id[static_cast<size_t>(c)], c}};
    for (int v = 0; v < n; ++v)
      if (iso[static_cast<size_t>(v)] && out[static_cast<size_t>(v)] == c)
        star.emplace_back(ids.id[static_cast<size_t>(v)], v);
    split_group(std::move(star), rc.color);
  }

  // the rest group around a two-hop MIS
  std::vector<int> vb;
  std::vector<int> pos(static_cast<size_t>(n), -1);
  for (int v = 0; v < n; ++v)
    if (!heavy[static_cast<size_t>(v)] && !hp[static_cast<size_t>(v)].empty()) {
      pos[static_cast<size_t>(v)] = static_cast<int>(vb.size());
      vb.push_back(v);
    }
  long long lin_rounds = linial_schedule_rounds(ids.bits);
  if (!vb.empty()) {
    Graph gsq = make_graph(static_cast<int>(vb.size()), square_edges(hp, vb, pos));
    IdAssignment sub;
    sub.bits = ids.bits;
    for (int v : vb) sub.id.push_back(ids.id[static_cast<size_t>(v)]);
    RoundMetrics lm;
    LinialResult lin = linial_mis(gsq, sub, cfg, lm);
    assert(lin.rounds == lin_rounds);
    std::vector<int> centers;
    for (int i : lin.selected) centers.push_back(vb[static_cast<size_t>(i)]);
    std::vector<CenterPick> picks = assign_centers(hp, vb, centers, ids.id);
    std::map<int, std::vector<std::pair<uint64_t, int>>> groups;
    for (size_t i = 0; i < vb.size(); ++i)
      groups[picks[i].center].emplace_back(ids.id[static_cast<size_t>(vb[i])], vb[i]);
    for (auto& [center, group] : groups) {
      (void)center;
      assert(group.size() >= 2);
      split_group(std::move(group), rc.color);
    }
  }

  assert(static_cast<int>(rc.color.size()) == n);
  long long red = 0, blue = 0;
  for (auto& [v, c] : rc.color) {
    (void)v;
    if (c == RB::red) ++red;
    else ++blue;
  }
  assert(std::max(red, blue) <= 3LL * n / 4);

  rc.rounds = kNodeSetupRounds + kSquareRelay * lin_rounds + kNodeUnitRounds;
  metrics.charge("balanced.nodes", rc.rounds);
  return rc;
}

// ---------------------------------------------------------------------------
// Cluster-level coloring

namespace {

struct ClusterProp { // proposal <target cluster id, local node, foreign node>
  uint64_t cid = 0;
  int w = -1, wp = -1;
  int target = -1; // scope position
  bool operator<(const ClusterProp& o) const {
    return std::tie(cid, w, wp) < std::tie(o.cid, o.w, o.wp);
  }
};

} // namespace

RBColoring balanced_color_clusters(const Graph& g, const std::vector<ClusterState>& clusters,
                                   const std::vector<int>& scope, const std::vector<int>& member_of,
                                   const ModelConfig& cfg, RoundMetrics& metrics) {
  int n = g.n;
  if (scope.empty()) throw std::invalid_argument("balanced_color_clusters: empty scope");
  if (static_cast<int>(member_of.size()) != n)
    throw std::invalid_argument("balanced_color_clusters: member_of size mismatch");
  int k = static_cast<int>(scope.size());
  std::vector<int> spos; // cluster index -> scope position
  {
    std::map<int, int> sp;
    std::set<uint64_t> cids;
    for (int i = 0; i < k; ++i) {
      int ci = scope[static_cast<size_t>(i)];
      if (ci < 0 || ci >= static_cast<int>(clusters.size()))
        throw std::invalid_argument("balanced_color_clusters: scope index out of range");
      if (!sp.emplace(ci, i).second)
        throw std::invalid_argument("balanced_color_clusters: duplicate scope entry");
      if (!cids.insert(clusters[static_cast<size_t>(ci)].cid).second)
        throw std::invalid_argument("balanced_color_clusters: duplicate cluster id in scope");
    }
    spos.assign(clusters.size(), -1);
    for (auto& [ci, i] : sp) spos[static_cast<size_t>(ci)] = i;
  }
  std::vector<int> at(static_cast<size_t>(n), -1); // node -> scope position
  std::vector<int> msize(static_cast<size_t>(k), 0);
  for (int v = 0; v < n; ++v) {
    int ci = member_of[static_cast<size_t>(v)];
    if (ci < 0) continue;
    if (ci >= static_cast<int>(clusters.size()))
      throw std::invalid_argument("balanced_color_clusters: member_of entry out of range");
    int i = spos[static_cast<size_t>(ci)];
    if (i < 0) continue;
    at[static_cast<size_t>(v)] = i;
    ++msize[static_cast<size_t>(i)];
  }
  for (int i = 0; i < k; ++i)
    if (msize[static_cast<size_t>(i)] == 0)
      throw std::invalid_argument("balanced_color_clusters: scoped cluster has no members");
  auto cid_of = [&](int i) { return clusters[static_cast<size_t>(scope[static_cast<size_t>(i)])].cid; };

  // adjacency and minimum outgoing proposal per cluster
  std::vector<std::set<int>> adj(static_cast<size_t>(k));
  std::vector<ClusterProp> outp(static_cast<size_t>(k));
  auto offer = [&](int from, int to, int w, int wp) {
    adj[static_cast<size_t>(from)].insert(to);
    ClusterProp p{cid_of(to), w, wp, to};
    if (outp[static_cast<size_t>(from)].target < 0 || p < outp[static_cast<size_t>(from)])
      outp[static_cast<size_t>(from)] = p;
  };
  for (auto& [x, y] : g.edges) {
    int a = at[static_cast<size_t>(x)], b = at[static_cast<size_t>(y)];
    if (a < 0 || b < 0 || a == b) continue;
    offer(a, b, x, y);
    offer(b, a, y, x);
  }
  for (int i = 0; i < k; ++i)
    if (outp[static_cast<size_t>(i)].target < 0)
      throw std::invalid_argument("balanced_color_clusters: cluster " +
                                  std::to_string(cid_of(i)) + " is isolated in scope");

  std::vector<int> out(static_cast<size_t>(k));
  std::vector<int> indeg(static_cast<size_t>(k), 0);
  for (int i = 0; i < k; ++i) {
    out[static_cast<size_t>(i)] = outp[static_cast<size_t>(i)].target;
    ++indeg[static_cast<size_t>(outp[static_cast<size_t>(i)].target)];
  }
  std::vector<bool> heavy(static_cast<size_t>(k), false);
  for (int i = 0; i < k; ++i) heavy[static_cast<size_t>(i)] = indeg[static_cast<size_t>(i)] >= kHeavyInDegree;

  std::vector<std::vector<int>> hadj = undirected(k, out);
  std::vector<std::vector<int>> hp(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    if (heavy[static_cast<size_t>(i)]) continue;
    for (int j : hadj[static_cast<size_t>(i)])
      if (!heavy[static_cast<size_t>(j)]) hp[static_cast<size_t>(i)].push_back(j);
  }
  std::vector<bool> iso(static_cast<size_t>(k), false);
  for (int i = 0; i < k; ++i)
    iso[static_cast<size_t>(i)] = !heavy[static_cast<size_t>(i)] && hp[static_cast<size_t>(i)].empty();

  RBColoring rc;

  // heavy stars: token pairing along the Steiner tree. A token starts at the
  // landing node of each isolated in-neighbor's chosen edge plus one at the
  // root; pairs resolve where tokens meet, odd ones climb, a root leftover
  // turns blue.
  long long maxh = 0;
  for (int i = 0; i < k; ++i)
    maxh = std::max(maxh, static_cast<long long>(clusters[static_cast<size_t>(scope[static_cast<size_t>(i)])].tree_height));
  using Token = std::tuple<int, uint64_t, int>; // (rank, cluster id, scope position)
  for (int c = 0; c < k; ++c) {
    if (!heavy[static_cast<size_t>(c)]) continue;
    const ClusterState& cl = clusters[static_cast<size_t>(scope[static_cast<size_t>(c)])];
    // rank 0 marks the root token so it always sorts first
    std::map<int, std::vector<Token>> start; // tree node -> tokens
    start[cl.seed].emplace_back(0, 0, c);
    for (int d = 0; d < k; ++d) {
      if (!iso[static_cast<size_t>(d)] || out[static_cast<size_t>(d)] != c) continue;
      int land = outp[static_cast<size_t>(d)].wp;
      if (!cl.tree_depth.count(land))
        throw std::runtime_error("balanced_color_clusters: landing node off the Steiner tree");
      start[land].emplace_back(1, cid_of(d), d);
    }
    std::map<int, int> parent;
    for (auto& [node, par] : cl.tree_edges) parent[node] = par;
    std::vector<std::pair<int, int>> order; // (depth, node)
    for (auto& [node, dep] : cl.tree_depth) order.emplace_back(dep, node);
    std::sort(order.begin(), order.end(), [](auto& a, auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (auto& [dep, node] : order) {
      auto it = start.find(node);
      if (it == start.end()) continue;
      std::vector<Token>& toks = it->second;
      std::sort(toks.begin(), toks.end());
      size_t pairs = toks.size() / 2;
      for (size_t p = 0; p < pairs; ++p) {
        rc.color[scope[static_cast<size_t>(std::get<2>(toks[2 * p]))]] = RB::blue;
        rc.color[scope[static_cast<size_t>(std::get<2>(toks[2 * p + 1]))]] = RB::red;
      }
      if (toks.size() % 2 == 1) {
        Token leftover = toks.back();
        if (dep == 0) {
          rc.color[scope[static_cast<size_t>(std::get<2>(leftover))]] = RB::blue;
        } else {
          assert(parent.count(node));
          start[parent[node]].push_back(leftover);
        }
      }
    }
  }

  // light clusters with light contact: two-hop MIS and half/half groups
  std::vector<int> vb;
  std::vector<int> pos(static_cast<size_t>(k), -1);
  for (int i = 0; i < k; ++i)
    if (!heavy[static_cast<size_t>(i)] && !hp[static_cast<size_t>(i)].empty()) {
      pos[static_cast<size_t>(i)] = static_cast<int>(vb.size());
      vb.push_back(i);
    }
  uint64_t maxcid = 0;
  for (int i = 0; i < k; ++i) maxcid = std::max(maxcid, cid_of(i));
  // id width derived from the values, so renaming-with-padding changes nothing
  int cbits = maxcid == ~0ull ? 64 : std::max(1, ceil_log2(maxcid + 1));
  long long lin_rounds = linial_schedule_rounds(cbits);
  if (!vb.empty()) {
    Graph gsq = make_graph(static_cast<int>(vb.size()), square_edges(hp, vb, pos));
    IdAssignment sub;
    sub.bits = cbits;
    for (int i : vb) sub.id.push_back(cid_of(i));
    RoundMetrics lm;
    std::vector<uint64_t> keys(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) keys[static_cast<size_t>(i)] = cid_of(i);
    LinialResult lin = linial_mis(gsq, sub, cfg, lm);
    std::vector<int> centers;
    for (int i : lin.selected) centers.push_back(vb[static_cast<size_t>(i)]);
    std::vector<CenterPick> picks = assign_centers(hp, vb, centers, keys);
    std::map<int, std::vector<std::pair<uint64_t, int>>> groups;
    for (size_t i = 0; i < vb.size(); ++i)
      groups[picks[i].center].emplace_back(cid_of(vb[static_cast<size_t>(i)]), vb[static_cast<size_t>(i)]);
    for (auto& [center, group] : groups) {
      (void)center;
      assert(group.size() >= 2);
      std::sort(group.begin(), group.end());
      size_t nb = (group.size() + 1) / 2;
      for (size_t i = 0; i < group.size(); ++i)
        rc.color[scope[static_cast<size_t>(group[i].second)]] = i < nb ? RB::blue : RB::red;
    }
  }

  assert(static_cast<int>(rc.color.size()) == k);

  // per-component balance over the scope's cluster graph
  {
    std::vector<int> comp(static_cast<size_t>(k), -1);
    int nc = 0;
    for (int i = 0; i < k; ++i) {
      if (comp[static_cast<size_t>(i)] >= 0) continue;
      std::vector<int> stack{i};
      comp[static_cast<size_t>(i)] = nc;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[static_cast<size_t>(v)])
          if (comp[static_cast<size_t>(u)] < 0) {
            comp[static_cast<size_t>(u)] = nc;
            stack.push_back(u);
          }
      }
      ++nc;
    }
    std::vector<long long> size(static_cast<size_t>(nc), 0), red(static_cast<size_t>(nc), 0),
        blue(static_cast<size_t>(nc), 0);
    for (int i = 0; i < k; ++i) {
      ++size[static_cast<size_t>(comp[static_cast<size_t>(i)])];
      RB c = rc.color.at(scope[static_cast<size_t>(i)]);
      if (c == RB::red) ++red[static_cast<size_t>(comp[static_cast<size_t>(i)])];
      else ++blue[static_cast<size_t>(comp[static_cast<size_t>(i)])];
    }
    for (int c = 0; c < nc; ++c) {
      assert(size[static_cast<size_t>(c)] >= 2);
      assert(std::max(red[static_cast<size_t>(c)], blue[static_cast<size_t>(c)]) <=
             3 * size[static_cast<size_t>(c)] / 4);
    }
  }

  long long unit = maxh + ceil_log2(std::max(2, n)) + 4;
  rc.rounds = (kClusterSetupUnits + kSquareRelay * lin_rounds + kClusterFinishUnits) * unit +
              2 * maxh + 2;
  metrics.charge("balanced.clusters", rc.rounds);
  return rc;
}

// ---------------------------------------------------------------------------
// Per-level partial coloring

RBColoring partial_color_levels(const Graph& g, const std::vector<ClusterState>& clusters,
                                const std::vector<int>& scope, const std::vector<int>& member_of,
                                long long h, const ModelConfig& cfg, RoundMetrics& metrics) {
  int n = g.n;
  if (scope.empty()) throw std::invalid_argument("partial_color_levels: empty scope");
  if (static_cast<int>(member_of.size()) != n)
    throw std::invalid_argument("partial_color_levels: member_of size mismatch");
  if (h < 1) throw std::invalid_argument("partial_color_levels: h must be >= 1");
  int k = static_cast<int>(scope.size());
  std::vector<int> spos(clusters.size(), -1);
  std::set<int> levels;
  for (int i = 0; i < k; ++i) {
    int ci = scope[static_cast<size_t>(i)];
    if (ci < 0 || ci >= static_cast<int>(clusters.size()))
      throw std::invalid_argument("partial_color_levels: scope index out of range");
    if (spos[static_cast<size_t>(ci)] >= 0)
      throw std::invalid_argument("partial_color_levels: duplicate scope entry");
    spos[static_cast<size_t>(ci)] = i;
    if (clusters[static_cast<size_t>(ci)].level < 1)
      throw std::invalid_argument("partial_color_levels: cluster level below 1");
    levels.insert(clusters[static_cast<size_t>(ci)].level);
  }
  if (cfg.faithful && cfg.bandwidth != kUnbounded &&
      static_cast<long long>(levels.size()) > cfg.bandwidth)
    throw std::invalid_argument("partial_color_levels: bandwidth " + std::to_string(cfg.bandwidth) +
                                " cannot carry one bit per level (" +
                                std::to_string(levels.size()) + " levels)");

  std::vector<int> at(static_cast<size_t>(n), -1); // node -> scope position
  for (int v = 0; v < n; ++v) {
    int ci = member_of[static_cast<size_t>(v)];
    if (ci < 0 || ci >= static_cast<int>(clusters.size())) continue;
    if (spos[static_cast<size_t>(ci)] >= 0) at[static_cast<size_t>(v)] = spos[static_cast<size_t>(ci)];
  }
  auto level_of = [&](int i) { return clusters[static_cast<size_t>(scope[static_cast<size_t>(i)])].level; };

  long long l2 = ceil_log2(std::max(2, n));
  long long radius = h * l2 * l2;

  RBColoring rc;
  for (int i = 0; i < k; ++i) rc.color[scope[static_cast<size_t>(i)]] = RB::uncolored;

  long long max_level_rounds = 0;
  for (int lev : levels) {
    // simultaneous BFS from all level-lev members through nodes of level >= lev
    // clusters, scoped or not; only scoped clusters seed regions or get colored
    std::vector<bool> inu(static_cast<size_t>(n), false);
    for (int v = 0; v < n; ++v) {
      int ci = member_of[static_cast<size_t>(v)];
      if (ci >= 0 && ci < static_cast<int>(clusters.size()) &&
          clusters[static_cast<size_t>(ci)].level >= lev)
        inu[static_cast<size_t>(v)] = true;
    }
    std::vector<int> cap(static_cast<size_t>(n), -1), dist(static_cast<size_t>(n), -1),
        par(static_cast<size_t>(n), -1);
    std::vector<int> frontier;
    for (int v = 0; v < n; ++v)
      if (at[static_cast<size_t>(v)] >= 0 && level_of(at[static_cast<size_t>(v)]) == lev) {
        cap[static_cast<size_t>(v)] = at[static_cast<size_t>(v)];
        dist[static_cast<size_t>(v)] = 0;
        frontier.push_back(v);
      }
    if (frontier.empty()) continue;
    for (long long r = 1; r <= radius && !frontier.empty(); ++r) {
      // ties: smaller capturing cluster id, then smaller sender
      std::map<int, std::pair<uint64_t, int>> best;
      for (int v : frontier)
        for (int u : g.adj[static_cast<size_t>(v)]) {
          if (!inu[static_cast<size_t>(u)] || dist[static_cast<size_t>(u)] >= 0) continue;
          std::pair<uint64_t, int> cand{
              clusters[static_cast<size_t>(scope[static_cast<size_t>(cap[static_cast<size_t>(v)])])].cid, v};
          auto it = best.find(u);
          if (it == best.end() || cand < it->second) best[u] = cand;
        }
      std::vector<int> next;
      for (auto& [u, who] : best) {
        dist[static_cast<size_t>(u)] = static_cast<int>(r);
        par[static_cast<size_t>(u)] = who.second;
        cap[static_cast<size_t>(u)] = cap[static_cast<size_t>(who.second)];
        next.push_back(u);
      }
      frontier = std::move(next);
    }

    // region-extended clusters for this level
    std::vector<int> lv; // scope positions of level-lev clusters
    for (int i = 0; i < k; ++i)
      if (level_of(i) == lev) lv.push_back(i);
    std::vector<ClusterState> ext;
    std::vector<int> ext_member(static_cast<size_t>(n), -1);
    std::map<int, int> ext_of; // scope position -> ext index
    for (int i : lv) {
      ClusterState base = clusters[static_cast<size_t>(scope[static_cast<size_t>(i)])];
      ext_of[i] = static_cast<int>(ext.size());
      ext.push_back(std::move(base));
    }
    std::vector<std::vector<int>> captured(ext.size());
    for (int v = 0; v < n; ++v) {
      if (cap[static_cast<size_t>(v)] < 0) continue;
      int e = ext_of.at(cap[static_cast<size_t>(v)]);
      ext_member[static_cast<size_t>(v)] = e;
      if (dist[static_cast<size_t>(v)] > 0) captured[static_cast<size_t>(e)].push_back(v);
    }
    for (auto& [i, e] : ext_of) {
      (void)i;
      ClusterState& c = ext[static_cast<size_t>(e)];
      std::vector<int>& caps = captured[static_cast<size_t>(e)];
      std::sort(caps.begin(), caps.end(), [&](int a, int b) {
        return dist[static_cast<size_t>(a)] != dist[static_cast<size_t>(b)]
                   ? dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)]
                   : a < b;
      });
      for (int v : caps) {
        int p = par[static_cast<size_t>(v)];
        assert(c.tree_depth.count(p));
        c.tree_edges.emplace_back(v, p);
        c.tree_depth[v] = c.tree_depth[p] + 1;
        c.tree_height = std::max(c.tree_height, c.tree_depth[v]);
        ++c.members;
      }
    }

    // adjacency between extended clusters; isolated ones stay uncolored
    std::vector<std::set<int>> eadj(ext.size());
    for (auto& [x, y] : g.edges) {
      int a = ext_member[static_cast<size_t>(x)], b = ext_member[static_cast<size_t>(y)];
      if (a < 0 || b < 0 || a == b) continue;
      eadj[static_cast<size_t>(a)].insert(b);
      eadj[static_cast<size_t>(b)].insert(a);
    }
    std::vector<int> color_scope;
    for (size_t e = 0; e < ext.size(); ++e)
      if (!eadj[e].empty()) color_scope.push_back(static_cast<int>(e));
    if (color_scope.empty()) continue;
    std::set<int> in_cs(color_scope.begin(), color_scope.end());
    std::vector<int> emem(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
      if (ext_member[static_cast<size_t>(v)] >= 0 && in_cs.count(ext_member[static_cast<size_t>(v)]))
        emem[static_cast<size_t>(v)] = ext_member[static_cast<size_t>(v)];
    RoundMetrics lm;
    RBColoring sub = balanced_color_clusters(g, ext, color_scope, emem, cfg, lm);
    max_level_rounds = std::max(max_level_rounds, sub.rounds);
    std::vector<int> rev(ext.size(), -1); // ext index -> scope position
    for (auto& [si, ei] : ext_of) rev[static_cast<size_t>(ei)] = si;
    for (auto& [e, col] : sub.color)
      rc.color[scope[static_cast<size_t>(rev[static_cast<size_t>(e)])]] = col;
  }

  rc.rounds = radius + 2 + max_level_rounds;
  metrics.charge("balanced.partial", rc.rounds);
  return rc;
}

} // namespace netdecomp
