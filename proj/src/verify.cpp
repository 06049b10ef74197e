#include "netdecomp/verify.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netdecomp {

bool CheckReport::ok() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

const CheckItem* CheckReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return &it;
  return nullptr;
}

void CheckReport::note(const std::string& name) {
  if (!find(name)) items.push_back({name, true, ""});
}

void CheckReport::fail(const std::string& name, const std::string& witness) {
  for (auto& it : items)
    if (it.name == name) {
      if (it.pass) {
        it.pass = false;
        it.witness = witness;
      }
      return;
    }
  items.push_back({name, false, witness});
}

void CheckReport::measure(const std::string& key, long long v) {
  for (auto& kv : measured)
    if (kv.first == key) {
      kv.second = v;
      return;
    }
  measured.emplace_back(key, v);
}

std::string CheckReport::to_text() const {
  std::ostringstream out;
  for (const auto& it : items) {
    out << "check." << it.name << "=" << (it.pass ? "pass" : "fail") << "\n";
    if (!it.pass) out << "witness." << it.name << "=" << it.witness << "\n";
  }
  for (const auto& kv : measured) out << "measured." << kv.first << "=" << kv.second << "\n";
  out << "ok=" << (ok() ? 1 : 0) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// decomposition checker

CheckReport check_decomposition(const Graph& g, const Decomposition& d, const DecompBounds& bounds) {
  CheckReport r;
  const char* kStructure = "decomp.structure";
  const char* kAdjacency = "decomp.adjacency";
  const char* kDiameter = "decomp.diameter";
  const char* kTrees = "decomp.trees";
  const char* kOverlap = "decomp.overlap";
  const char* kColors = "decomp.colors";
  const char* kStats = "decomp.stats";
  for (const char* name : {kStructure, kAdjacency, kDiameter, kTrees, kOverlap, kColors, kStats})
    r.note(name);

  long long L = d.L;
  long long diam_bound = bounds.max_diameter >= 0 ? bounds.max_diameter : 112 * L * L;
  long long overlap_bound = bounds.max_overlap >= 0 ? bounds.max_overlap : 6 * L + 2;
  long long colors_bound =
      bounds.max_colors >= 0 ? bounds.max_colors : ceil_log2(static_cast<uint64_t>(std::max(1, d.n))) + 1;

  if (d.n != g.n) {
    r.fail(kStructure, "node count " + std::to_string(d.n) + " vs graph " + std::to_string(g.n));
    return r;
  }
  size_t n = static_cast<size_t>(g.n);
  if (d.color.size() != n || d.cluster_of.size() != n) {
    r.fail(kStructure, "per-node arrays sized " + std::to_string(d.color.size()) + "/" +
                           std::to_string(d.cluster_of.size()) + " for n=" + std::to_string(g.n));
    return r;
  }

  int nclusters = static_cast<int>(d.clusters.size());
  std::vector<int> seen(n, 0); // membership multiplicity
  for (int ci = 0; ci < nclusters; ++ci) {
    const DecompCluster& c = d.clusters[ci];
    if (c.color < 1) r.fail(kStructure, "cluster " + std::to_string(ci) + " color " + std::to_string(c.color));
    if (c.seed < 0 || c.seed >= g.n)
      r.fail(kStructure, "cluster " + std::to_string(ci) + " seed " + std::to_string(c.seed));
    if (c.members.empty()) r.fail(kStructure, "cluster " + std::to_string(ci) + " has no members");
    for (size_t i = 0; i < c.members.size(); ++i) {
      int v = c.members[i];
      if (v < 0 || v >= g.n) {
        r.fail(kStructure, "cluster " + std::to_string(ci) + " member " + std::to_string(v));
        continue;
      }
      if (i > 0 && c.members[i - 1] >= v)
        r.fail(kStructure, "cluster " + std::to_string(ci) + " members not sorted at " + std::to_string(v));
      seen[static_cast<size_t>(v)] += 1;
      if (d.cluster_of[static_cast<size_t>(v)] != ci)
        r.fail(kStructure, "node " + std::to_string(v) + " listed by cluster " + std::to_string(ci) +
                               " but assigned " + std::to_string(d.cluster_of[static_cast<size_t>(v)]));
      if (d.color[static_cast<size_t>(v)] != c.color)
        r.fail(kStructure, "node " + std::to_string(v) + " color " +
                               std::to_string(d.color[static_cast<size_t>(v)]) + " in color " +
                               std::to_string(c.color) + " cluster");
    }
  }
  for (int v = 0; v < g.n; ++v) {
    if (d.color[static_cast<size_t>(v)] < 1)
      r.fail(kStructure, "node " + std::to_string(v) + " uncovered (color " +
                             std::to_string(d.color[static_cast<size_t>(v)]) + ")");
    int ci = d.cluster_of[static_cast<size_t>(v)];
    if (ci < 0 || ci >= nclusters)
      r.fail(kStructure, "node " + std::to_string(v) + " cluster " + std::to_string(ci));
    if (seen[static_cast<size_t>(v)] != 1)
      r.fail(kStructure, "node " + std::to_string(v) + " in " + std::to_string(seen[static_cast<size_t>(v)]) +
                             " member lists");
  }
  if (!r.find(kStructure)->pass) return r; // replay below needs a sane shape

  // color classes contiguous from 1, count within bound
  int maxcolor = 0;
  for (const auto& c : d.clusters) maxcolor = std::max(maxcolor, c.color);
  std::vector<int> percolor(static_cast<size_t>(maxcolor) + 1, 0);
  for (const auto& c : d.clusters) percolor[static_cast<size_t>(c.color)] += 1;
  for (int j = 1; j <= maxcolor; ++j)
    if (percolor[static_cast<size_t>(j)] == 0) r.fail(kStructure, "color " + std::to_string(j) + " unused");
  r.measure("colors", maxcolor);
  if (maxcolor > colors_bound)
    r.fail(kColors, std::to_string(maxcolor) + " colors, bound " + std::to_string(colors_bound));

  // same-color clusters never touch
  for (const auto& e : g.edges) {
    size_t u = static_cast<size_t>(e.first), v = static_cast<size_t>(e.second);
    if (d.color[u] == d.color[v] && d.cluster_of[u] != d.cluster_of[v]) {
      r.fail(kAdjacency, "edge " + std::to_string(e.first) + "-" + std::to_string(e.second) + " color " +
                             std::to_string(d.color[u]) + " clusters " + std::to_string(d.cluster_of[u]) +
                             " " + std::to_string(d.cluster_of[v]));
      break;
    }
  }

  // weak diameter: BFS from every member through the whole graph, abandoned
  // once the frontier passes the bound
  long long maxdiam = 0;
  std::vector<int> dist(n);
  for (int ci = 0; ci < nclusters && r.find(kDiameter)->pass; ++ci) {
    const DecompCluster& c = d.clusters[ci];
    if (c.members.size() < 2) continue;
    for (int src : c.members) {
      std::fill(dist.begin(), dist.end(), -1);
      dist[static_cast<size_t>(src)] = 0;
      std::queue<int> q;
      q.push(src);
      size_t left = c.members.size() - 1;
      long long ecc = 0;
      while (!q.empty() && left > 0) {
        int u = q.front();
        q.pop();
        if (dist[static_cast<size_t>(u)] >= diam_bound) break; // anything new is past the bound
        for (int w : g.adj[static_cast<size_t>(u)]) {
          if (dist[static_cast<size_t>(w)] >= 0) continue;
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
          if (d.cluster_of[static_cast<size_t>(w)] == ci) {
            --left;
            ecc = std::max<long long>(ecc, dist[static_cast<size_t>(w)]);
          }
          q.push(w);
        }
      }
      if (left > 0) {
        int missing = -1;
        for (int w : c.members)
          if (dist[static_cast<size_t>(w)] < 0) {
            missing = w;
            break;
          }
        r.fail(kDiameter, "cluster " + std::to_string(ci) + " nodes " + std::to_string(src) + " " +
                              std::to_string(missing) + " further apart than " + std::to_string(diam_bound));
        break;
      }
      maxdiam = std::max(maxdiam, ecc);
    }
  }
  r.measure("max_weak_diameter", maxdiam);

  // Steiner trees: rooted at the seed, joined one node at a time along graph
  // edges, every member reached
  long long maxradius = 0;
  std::vector<std::set<int>> tree_nodes(static_cast<size_t>(nclusters));
  for (int ci = 0; ci < nclusters; ++ci) {
    const DecompCluster& c = d.clusters[ci];
    std::map<int, long long> depth;
    depth[c.seed] = 0;
    bool shape_ok = true;
    for (const auto& je : c.tree_edges) {
      int node = je.first, parent = je.second;
      if (node < 0 || node >= g.n || parent < 0 || parent >= g.n) {
        r.fail(kTrees, "cluster " + std::to_string(ci) + " join " + std::to_string(node) + " under " +
                           std::to_string(parent) + " out of range");
        shape_ok = false;
        break;
      }
      if (!depth.count(parent)) {
        r.fail(kTrees, "cluster " + std::to_string(ci) + " join " + std::to_string(node) +
                           " under absent parent " + std::to_string(parent));
        shape_ok = false;
        break;
      }
      if (depth.count(node)) {
        r.fail(kTrees, "cluster " + std::to_string(ci) + " node " + std::to_string(node) + " joins twice");
        shape_ok = false;
        break;
      }
      if (!g.has_edge(node, parent)) {
        r.fail(kTrees, "cluster " + std::to_string(ci) + " join " + std::to_string(node) + "-" +
                           std::to_string(parent) + " is not a graph edge");
        shape_ok = false;
        break;
      }
      depth[node] = depth[parent] + 1;
    }
    if (!shape_ok) continue;
    for (const auto& kv : depth) {
      tree_nodes[static_cast<size_t>(ci)].insert(kv.first);
      maxradius = std::max(maxradius, kv.second);
    }
    for (int v : c.members)
      if (!depth.count(v)) {
        r.fail(kTrees, "cluster " + std::to_string(ci) + " member " + std::to_string(v) + " not in its tree");
        break;
      }
  }
  r.measure("max_tree_radius", maxradius);
  if (bounds.max_tree_radius >= 0 && maxradius > bounds.max_tree_radius)
    r.fail(kTrees, "tree radius " + std::to_string(maxradius) + ", bound " +
                       std::to_string(bounds.max_tree_radius));

  // per color, trees through one node
  long long maxoverlap = 0;
  {
    std::map<std::pair<int, int>, long long> load; // (color, node)
    for (int ci = 0; ci < nclusters; ++ci)
      for (int v : tree_nodes[static_cast<size_t>(ci)]) {
        long long& x = load[{d.clusters[static_cast<size_t>(ci)].color, v}];
        x += 1;
        if (x > maxoverlap) maxoverlap = x;
        if (x > overlap_bound && r.find(kOverlap)->pass)
          r.fail(kOverlap, "node " + std::to_string(v) + " in " + std::to_string(x) + " color " +
                               std::to_string(d.clusters[static_cast<size_t>(ci)].color) + " trees, bound " +
                               std::to_string(overlap_bound));
      }
  }
  r.measure("max_overlap", maxoverlap);

  // the serialized stats block must agree with what is actually there
  if (d.stats.colors != maxcolor)
    r.fail(kStats, "claimed colors " + std::to_string(d.stats.colors) + " measured " + std::to_string(maxcolor));
  if (r.find(kDiameter)->pass && d.stats.max_weak_diameter != maxdiam)
    r.fail(kStats, "claimed diameter " + std::to_string(d.stats.max_weak_diameter) + " measured " +
                       std::to_string(maxdiam));
  if (r.find(kTrees)->pass && r.find(kOverlap)->pass && d.stats.max_overlap != maxoverlap)
    r.fail(kStats, "claimed overlap " + std::to_string(d.stats.max_overlap) + " measured " +
                       std::to_string(maxoverlap));
  return r;
}

// ---------------------------------------------------------------------------
// carving trace replay

namespace {

struct TraceCluster {
  uint64_t cid = 0;
  int level = 0;
  long long tokens = 1;
  long long phase_tok = 1;
  long long prev_phi = LLONG_MIN;
  bool stalling = false, finished = false, dissolved = false;
  int bit = 0;     // current phase decision bit, blue = 1
  char bitc = '0'; // the C line's letter, kept apart to tell red from uncolored
  std::vector<long long> chain;
  std::set<int> tree;
  std::set<int> nodes;
};

struct Pending { // one P line
  int v = 0, contact = 0;
  int from = -1, to = -1; // cluster indices
};

bool chains_comparable(const std::vector<long long>& a, const std::vector<long long>& b) {
  size_t k = std::min(a.size(), b.size());
  for (size_t i = 0; i < k; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

} // namespace

CheckReport check_carve_trace(const Graph& g, const std::string& trace) {
  CheckReport r;
  const char* kParse = "trace.parse";
  const char* kAccounting = "trace.accounting";
  const char* kTokens = "trace.tokens";
  const char* kPotStep = "trace.potential_step";
  const char* kPotPhase = "trace.potential_phase";
  const char* kChanges = "trace.changes";
  const char* kCreated = "trace.created";
  const char* kKills = "trace.kills";
  const char* kAncestry = "trace.ancestry";
  const char* kTree = "trace.tree";
  const char* kFinished = "trace.finished";
  for (const char* name : {kParse, kAccounting, kTokens, kPotStep, kPotPhase, kChanges, kCreated,
                           kKills, kAncestry, kTree, kFinished})
    r.note(name);

  // tokenized lines
  std::vector<std::vector<std::string>> lines;
  {
    std::istringstream in(trace);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      if (!toks.empty()) lines.push_back(std::move(toks));
    }
  }
  size_t cur = 0;
  auto where = [&]() { return "line " + std::to_string(cur + 1); };
  auto tag = [&]() -> std::string { return cur < lines.size() ? lines[cur][0] : ""; };
  bool dead = false; // parse gave up
  auto parse_fail = [&](const std::string& msg) {
    r.fail(kParse, where() + ": " + msg);
    dead = true;
  };
  auto num = [&](const std::string& tok, long long& out) {
    try {
      size_t pos = 0;
      out = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return true;
    } catch (...) {
      parse_fail("bad number '" + tok + "'");
      return false;
    }
  };
  auto unum = [&](const std::string& tok, uint64_t& out) {
    try {
      size_t pos = 0;
      out = std::stoull(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return true;
    } catch (...) {
      parse_fail("bad number '" + tok + "'");
      return false;
    }
  };
  auto keyed = [&](const std::string& tok, const std::string& key, std::string& out) {
    if (tok.size() < key.size() + 1 || tok.compare(0, key.size(), key) != 0 || tok[key.size()] != '=') {
      parse_fail("expected " + key + "=..., got '" + tok + "'");
      return false;
    }
    out = tok.substr(key.size() + 1);
    return true;
  };

  // header
  long long hn = 0, hb = 0, hL = 0, hS = 0;
  bool src_id = true;
  {
    if (lines.empty() || lines[0][0] != "h" || lines[0].size() != 6) {
      r.fail(kParse, "line 1: missing h header");
      return r;
    }
    std::string v;
    if (!keyed(lines[0][1], "n", v) || !num(v, hn)) return r;
    if (!keyed(lines[0][2], "b", v) || !num(v, hb)) return r;
    if (!keyed(lines[0][3], "L", v) || !num(v, hL)) return r;
    if (!keyed(lines[0][4], "src", v)) return r;
    if (v != "id" && v != "col") {
      r.fail(kParse, "line 1: src '" + v + "'");
      return r;
    }
    src_id = v == "id";
    if (!keyed(lines[0][5], "S", v) || !num(v, hS)) return r;
    cur = 1;
  }
  if (hn != g.n) {
    r.fail(kParse, "header n=" + std::to_string(hn) + " but graph has " + std::to_string(g.n));
    return r;
  }
  if (hb < 1 || hS < 1 || hL != hb + ceil_log2(static_cast<uint64_t>(std::max<long long>(1, hn)))) {
    r.fail(kParse, "header b=" + std::to_string(hb) + " L=" + std::to_string(hL) + " S=" + std::to_string(hS));
    return r;
  }
  int b = static_cast<int>(hb);
  long long L = hL, S0 = hS, phases = 2 * L, steps_per_phase = 28 * L, kill_cost = 14 * L;
  r.measure("n", hn);
  r.measure("b", b);
  r.measure("L", L);
  r.measure("seeds", S0);

  // seed lines
  std::vector<TraceCluster> tc;
  std::map<uint64_t, int> bycid;
  std::vector<int> node_cluster(static_cast<size_t>(g.n), -1);
  std::vector<char> alive(static_cast<size_t>(g.n), 0);
  std::vector<long long> changes(static_cast<size_t>(g.n), 0);
  while (!dead && tag() == "s") {
    if (lines[cur].size() != 3) {
      parse_fail("s line needs node and id");
      break;
    }
    long long node;
    uint64_t idv;
    if (!num(lines[cur][1], node) || !unum(lines[cur][2], idv)) break;
    if (node < 0 || node >= hn) {
      parse_fail("s node " + std::to_string(node) + " out of range");
      break;
    }
    if (alive[static_cast<size_t>(node)]) {
      parse_fail("node " + std::to_string(node) + " seeded twice");
      break;
    }
    if (bycid.count(idv)) {
      parse_fail("duplicate cluster id " + std::to_string(idv));
      break;
    }
    TraceCluster c;
    c.cid = idv;
    c.tree.insert(static_cast<int>(node));
    c.nodes.insert(static_cast<int>(node));
    bycid[idv] = static_cast<int>(tc.size());
    node_cluster[static_cast<size_t>(node)] = static_cast<int>(tc.size());
    alive[static_cast<size_t>(node)] = 1;
    tc.push_back(std::move(c));
    ++cur;
  }
  if (dead) return r;
  if (static_cast<long long>(tc.size()) != S0) {
    r.fail(kParse, where() + ": " + std::to_string(tc.size()) + " seed lines for S=" + std::to_string(S0));
    return r;
  }

  long long created = S0, kills = 0;
  auto phi_of = [&](long long phase, const TraceCluster& c) {
    int bit = src_id ? cluster_bit(c.cid, c.level + 1, b) : c.bit;
    return 3 * phase - 2 * c.level + bit;
  };
  auto scan_edges = [&](long long phase, const std::string& spot) {
    if (!r.find(kAncestry)->pass) return;
    for (const auto& e : g.edges) {
      size_t u = static_cast<size_t>(e.first), v = static_cast<size_t>(e.second);
      if (!alive[u] || !alive[v]) continue;
      int cu = node_cluster[u], cv = node_cluster[v];
      if (cu == cv) continue;
      if (!chains_comparable(tc[static_cast<size_t>(cu)].chain, tc[static_cast<size_t>(cv)].chain)) {
        r.fail(kAncestry, "phase " + std::to_string(phase) + " " + spot + ": edge " +
                              std::to_string(e.first) + "-" + std::to_string(e.second) + " clusters " +
                              std::to_string(tc[static_cast<size_t>(cu)].cid) + " " +
                              std::to_string(tc[static_cast<size_t>(cv)].cid) +
                              " on unrelated transcript branches");
        return;
      }
    }
  };
  auto acct = [&](const std::string& msg) { r.fail(kAccounting, where() + ": " + msg); };

  for (long long phase = 1; phase <= phases && !dead; ++phase) {
    // phase start: one C line per live cluster, ascending cluster id
    std::set<int> expect_c;
    for (size_t i = 0; i < tc.size(); ++i)
      if (!tc[i].dissolved) expect_c.insert(static_cast<int>(i));
    std::set<int> got_c;
    while (!dead && tag() == "C") {
      if (lines[cur].size() != 7) {
        parse_fail("C line needs 6 fields");
        break;
      }
      long long ph, lev, tok, phi;
      uint64_t cid;
      if (!num(lines[cur][1], ph) || !unum(lines[cur][2], cid) || !num(lines[cur][3], lev) ||
          !num(lines[cur][4], tok) || !num(lines[cur][5], phi))
        break;
      if (ph != phase) {
        parse_fail("C for phase " + std::to_string(ph) + " inside phase " + std::to_string(phase));
        break;
      }
      auto it = bycid.find(cid);
      if (it == bycid.end()) {
        parse_fail("C names unknown cluster " + std::to_string(cid));
        break;
      }
      TraceCluster& c = tc[static_cast<size_t>(it->second)];
      if (c.dissolved) acct("C line for dissolved cluster " + std::to_string(cid));
      if (!got_c.insert(it->second).second) acct("second C line for cluster " + std::to_string(cid));
      if (lev != c.level) {
        acct("cluster " + std::to_string(cid) + " claims level " + std::to_string(lev) + ", replay has " +
             std::to_string(c.level));
        c.level = static_cast<int>(lev);
      }
      if (tok != c.tokens) {
        acct("cluster " + std::to_string(cid) + " claims " + std::to_string(tok) + " tokens, replay has " +
             std::to_string(c.tokens));
        c.tokens = tok;
      }
      const std::string& bc = lines[cur][6];
      int bit = 0;
      if (src_id) {
        bit = cluster_bit(c.cid, c.level + 1, b);
        if (bc != std::string(1, static_cast<char>('0' + bit)))
          acct("cluster " + std::to_string(cid) + " decision bit '" + bc + "' vs id bit " + std::to_string(bit));
      } else {
        if (bc != "u" && bc != "r" && bc != "b") {
          parse_fail("decision bit '" + bc + "'");
          break;
        }
        bit = bc == "b" ? 1 : 0;
      }
      c.bit = bit;
      c.bitc = bc[0];
      long long want_phi = 3 * phase - 2 * c.level + bit;
      if (phi != want_phi)
        acct("cluster " + std::to_string(cid) + " claims potential " + std::to_string(phi) + ", not " +
             std::to_string(want_phi));
      if (!c.finished) {
        long long e = phase - 2 * c.level - 1;
        if (e >= 0 && e < 62 && c.tokens < (1LL << e))
          r.fail(kTokens, "phase " + std::to_string(phase) + ": cluster " + std::to_string(cid) + " holds " +
                              std::to_string(c.tokens) + " tokens, floor " + std::to_string(1LL << e));
      }
      if (want_phi < c.prev_phi)
        r.fail(kPotPhase, "phase " + std::to_string(phase) + ": cluster " + std::to_string(cid) +
                              " potential fell " + std::to_string(c.prev_phi) + " -> " + std::to_string(want_phi));
      c.prev_phi = want_phi;
      c.phase_tok = c.tokens;
      ++cur;
    }
    if (dead) break;
    if (got_c != expect_c) acct("phase " + std::to_string(phase) + " C lines cover the wrong clusters");
    scan_edges(phase, "start");

    // steps
    long long step_no = 1;
    bool stalled_out = false;
    while (!dead && (tag() == "A" || tag() == "I")) {
      bool active = tag() == "A";
      if (lines[cur].size() != 3) {
        parse_fail("step line needs phase and step");
        break;
      }
      long long ph, st;
      if (!num(lines[cur][1], ph) || !num(lines[cur][2], st)) break;
      if (ph != phase) {
        parse_fail("step for phase " + std::to_string(ph) + " inside phase " + std::to_string(phase));
        break;
      }
      if (st != step_no) acct("step " + std::to_string(st) + " where " + std::to_string(step_no) + " was due");
      if (st > steps_per_phase) acct("step " + std::to_string(st) + " past the phase budget");
      if (stalled_out) acct("step after a silent stall");
      std::vector<int> ev;
      for (size_t i = 0; i < tc.size(); ++i)
        if (!tc[i].dissolved && !tc[i].stalling && !tc[i].finished) ev.push_back(static_cast<int>(i));
      if (ev.empty()) acct("step with no cluster evaluating");
      ++cur;

      if (!active) {
        // a step nobody proposed in: every evaluating cluster stalls
        for (int ci : ev) tc[static_cast<size_t>(ci)].stalling = true;
        stalled_out = true;
        step_no += 1;
        continue;
      }

      std::vector<Pending> props;
      std::set<int> proposed;
      while (!dead && tag() == "P") {
        if (lines[cur].size() != 5) {
          parse_fail("P line needs node, clusters, contact");
          break;
        }
        long long v, contact;
        uint64_t fc, oc;
        if (!num(lines[cur][1], v) || !unum(lines[cur][2], fc) || !unum(lines[cur][3], oc) ||
            !num(lines[cur][4], contact))
          break;
        if (v < 0 || v >= hn || contact < 0 || contact >= hn) {
          parse_fail("P endpoints out of range");
          break;
        }
        Pending p;
        p.v = static_cast<int>(v);
        p.contact = static_cast<int>(contact);
        if (!alive[static_cast<size_t>(p.v)]) acct("dead node " + std::to_string(p.v) + " proposing");
        if (!proposed.insert(p.v).second) acct("node " + std::to_string(p.v) + " proposes twice in one step");
        p.from = node_cluster[static_cast<size_t>(p.v)];
        auto fit = bycid.find(fc);
        if (fit == bycid.end() || fit->second != p.from)
          acct("node " + std::to_string(p.v) + " claims cluster " + std::to_string(fc));
        auto oit = bycid.find(oc);
        if (oit == bycid.end()) {
          acct("proposal to unknown cluster " + std::to_string(oc));
          ++cur;
          continue;
        }
        p.to = oit->second;
        const TraceCluster& to = tc[static_cast<size_t>(p.to)];
        if (to.dissolved || p.to == p.from) acct("proposal to cluster " + std::to_string(oc));
        if (!alive[static_cast<size_t>(p.contact)] || node_cluster[static_cast<size_t>(p.contact)] != p.to)
          r.fail(kTree, "contact " + std::to_string(p.contact) + " is not a member of cluster " +
                            std::to_string(oc));
        else if (!to.tree.count(p.contact))
          r.fail(kTree, "contact " + std::to_string(p.contact) + " outside the tree of cluster " +
                            std::to_string(oc));
        if (!g.has_edge(p.v, p.contact))
          r.fail(kTree, "proposal " + std::to_string(p.v) + " -> " + std::to_string(p.contact) +
                            " without a graph edge");
        if (p.from >= 0) props.push_back(p);
        ++cur;
      }
      if (dead) break;
      if (props.empty()) acct("A step without proposals");

      std::vector<long long> pcount(tc.size(), 0);
      for (const auto& p : props)
        if (p.to >= 0) pcount[static_cast<size_t>(p.to)] += 1;

      std::set<int> decided;
      std::vector<char> accepted(tc.size(), 0);
      while (!dead && tag() == "D") {
        if (lines[cur].size() != 5) {
          parse_fail("D line needs cluster, verdict, count, tokens");
          break;
        }
        uint64_t cid;
        long long p, after;
        if (!unum(lines[cur][1], cid) || !num(lines[cur][3], p) || !num(lines[cur][4], after)) break;
        const std::string& verdict = lines[cur][2];
        if (verdict != "a" && verdict != "k") {
          parse_fail("verdict '" + verdict + "'");
          break;
        }
        auto it = bycid.find(cid);
        if (it == bycid.end()) {
          parse_fail("D names unknown cluster " + std::to_string(cid));
          break;
        }
        TraceCluster& c = tc[static_cast<size_t>(it->second)];
        if (!decided.insert(it->second).second) acct("second verdict for cluster " + std::to_string(cid));
        if (p != pcount[static_cast<size_t>(it->second)])
          acct("cluster " + std::to_string(cid) + " decides on " + std::to_string(p) + " proposals, saw " +
               std::to_string(pcount[static_cast<size_t>(it->second)]));
        bool rule_accepts = p * steps_per_phase >= c.tokens;
        if (verdict == "a") {
          if (!rule_accepts)
            acct("cluster " + std::to_string(cid) + " accepts " + std::to_string(p) + " with " +
                 std::to_string(c.tokens) + " tokens");
          if (after != c.tokens + p)
            acct("cluster " + std::to_string(cid) + " accepts to " + std::to_string(after) + ", not " +
                 std::to_string(c.tokens + p));
          accepted[static_cast<size_t>(it->second)] = 1;
          created += p;
          if (created > 7 * S0 * L)
            r.fail(kCreated, "phase " + std::to_string(phase) + " step " + std::to_string(st) + ": " +
                                 std::to_string(created) + " tokens created, bound " +
                                 std::to_string(7 * S0 * L));
        } else {
          if (rule_accepts)
            acct("cluster " + std::to_string(cid) + " kills " + std::to_string(p) + " with " +
                 std::to_string(c.tokens) + " tokens");
          if (after != c.tokens - p * kill_cost)
            acct("cluster " + std::to_string(cid) + " kills to " + std::to_string(after) + ", not " +
                 std::to_string(c.tokens - p * kill_cost));
          if (after <= 0 || 2 * after < c.phase_tok)
            acct("cluster " + std::to_string(cid) + " overspends on kills: " + std::to_string(after) +
                 " left of " + std::to_string(c.phase_tok));
          c.stalling = true;
          kills += p;
          if (2 * kills > S0)
            r.fail(kKills, "phase " + std::to_string(phase) + " step " + std::to_string(st) + ": " +
                               std::to_string(kills) + " of " + std::to_string(S0) + " seeds killed");
        }
        c.tokens = after;
        ++cur;
      }
      if (dead) break;
      std::set<int> evset(ev.begin(), ev.end());
      if (decided != evset) acct("verdicts cover the wrong clusters");

      // apply the batch
      for (const auto& p : props) {
        if (p.to < 0) continue;
        TraceCluster& from = tc[static_cast<size_t>(p.from)];
        TraceCluster& to = tc[static_cast<size_t>(p.to)];
        if (accepted[static_cast<size_t>(p.to)]) {
          if (phi_of(phase, to) <= phi_of(phase, from))
            r.fail(kPotStep, "phase " + std::to_string(phase) + " step " + std::to_string(st) + ": node " +
                                 std::to_string(p.v) + " moved " + std::to_string(from.cid) + " -> " +
                                 std::to_string(to.cid) + " with potential " +
                                 std::to_string(phi_of(phase, from)) + " -> " +
                                 std::to_string(phi_of(phase, to)));
          from.nodes.erase(p.v);
          to.nodes.insert(p.v);
          node_cluster[static_cast<size_t>(p.v)] = p.to;
          changes[static_cast<size_t>(p.v)] += 1;
          if (changes[static_cast<size_t>(p.v)] > 6 * L + 1)
            r.fail(kChanges, "node " + std::to_string(p.v) + " changed clusters " +
                                 std::to_string(changes[static_cast<size_t>(p.v)]) + " times, bound " +
                                 std::to_string(6 * L + 1));
          to.tree.insert(p.v); // re-entries keep the old spot
        } else {
          from.nodes.erase(p.v);
          alive[static_cast<size_t>(p.v)] = 0;
          node_cluster[static_cast<size_t>(p.v)] = -1;
        }
      }

      // dissolutions
      std::set<int> expect_x;
      for (size_t i = 0; i < tc.size(); ++i)
        if (!tc[i].dissolved && tc[i].nodes.empty() && !tc[i].tree.empty()) expect_x.insert(static_cast<int>(i));
      // only clusters touched this step dissolve; untouched ones were never emptied
      std::set<int> got_x;
      while (!dead && tag() == "X") {
        if (lines[cur].size() != 2) {
          parse_fail("X line needs a cluster");
          break;
        }
        uint64_t cid;
        if (!unum(lines[cur][1], cid)) break;
        auto it = bycid.find(cid);
        if (it == bycid.end()) {
          parse_fail("X names unknown cluster " + std::to_string(cid));
          break;
        }
        got_x.insert(it->second);
        tc[static_cast<size_t>(it->second)].dissolved = true;
        ++cur;
      }
      if (dead) break;
      if (got_x != expect_x) acct("dissolutions cover the wrong clusters");
      for (int ci : expect_x) tc[static_cast<size_t>(ci)].dissolved = true;
      scan_edges(phase, "step " + std::to_string(st));
      step_no += 1;
    }
    if (dead) break;

    // phase end
    if (tag() != "E" || lines[cur].size() != 2) {
      parse_fail("expected E line");
      break;
    }
    long long ph;
    if (!num(lines[cur][1], ph)) break;
    if (ph != phase) {
      parse_fail("E for phase " + std::to_string(ph) + " inside phase " + std::to_string(phase));
      break;
    }
    ++cur;

    std::set<int> expect_l;
    for (size_t i = 0; i < tc.size(); ++i)
      if (!tc[i].dissolved && tc[i].stalling) expect_l.insert(static_cast<int>(i));
    std::set<int> got_l;
    while (!dead && tag() == "L") {
      if (lines[cur].size() != 4) {
        parse_fail("L line needs cluster, level, branch");
        break;
      }
      uint64_t cid;
      long long lev, branch;
      if (!unum(lines[cur][1], cid) || !num(lines[cur][2], lev) || !num(lines[cur][3], branch)) break;
      auto it = bycid.find(cid);
      if (it == bycid.end()) {
        parse_fail("L names unknown cluster " + std::to_string(cid));
        break;
      }
      TraceCluster& c = tc[static_cast<size_t>(it->second)];
      if (c.dissolved || !c.stalling) acct("cluster " + std::to_string(cid) + " climbs without stalling");
      got_l.insert(it->second);
      if (lev != c.level + 1)
        acct("cluster " + std::to_string(cid) + " climbs to " + std::to_string(lev) + " from " +
             std::to_string(c.level));
      c.level = static_cast<int>(lev);
      long long want_branch;
      if (src_id)
        want_branch = 2 * phase + cluster_bit(c.cid, c.level, b);
      else
        want_branch = 3 * phase + (c.bitc == 'u' ? 0 : c.bitc == 'r' ? 1 : 2);
      if (branch != want_branch)
        acct("cluster " + std::to_string(cid) + " takes branch " + std::to_string(branch) + ", not " +
             std::to_string(want_branch));
      c.chain.push_back(branch);
      c.stalling = false;
      ++cur;
      if (c.level >= b) {
        if (tag() == "F" && lines[cur].size() == 2) {
          uint64_t fcid;
          if (!unum(lines[cur][1], fcid)) break;
          if (fcid != cid) acct("F line names " + std::to_string(fcid) + " after L " + std::to_string(cid));
          ++cur;
        } else {
          acct("cluster " + std::to_string(cid) + " reached level " + std::to_string(b) + " with no F line");
        }
        c.finished = true;
      }
    }
    if (dead) break;
    if (got_l != expect_l) acct("phase " + std::to_string(phase) + " level-ups cover the wrong clusters");
    scan_edges(phase, "end");
  }
  if (dead) return r;

  // final tally
  if (tag() != "T" || lines[cur].size() != 3) {
    r.fail(kParse, where() + ": expected T line");
    return r;
  }
  long long tsurv, tkill;
  if (!num(lines[cur][1], tsurv) || !num(lines[cur][2], tkill)) return r;
  ++cur;
  if (cur != lines.size()) r.fail(kParse, where() + ": content after the T line");

  long long alive_count = 0;
  for (int v = 0; v < g.n; ++v)
    if (alive[static_cast<size_t>(v)]) ++alive_count;
  if (tsurv != alive_count)
    r.fail(kAccounting, "T claims " + std::to_string(tsurv) + " survivors, replay has " +
                            std::to_string(alive_count));
  if (tkill != kills)
    r.fail(kAccounting, "T claims " + std::to_string(tkill) + " kills, replay has " + std::to_string(kills));
  if (tsurv + tkill != S0)
    r.fail(kAccounting, "T " + std::to_string(tsurv) + "+" + std::to_string(tkill) + " != S=" +
                            std::to_string(S0));
  if (2 * tkill > S0)
    r.fail(kKills, std::to_string(tkill) + " of " + std::to_string(S0) + " seeds killed");
  for (const auto& c : tc)
    if (!c.dissolved && !(c.finished && c.level == b)) {
      r.fail(kFinished, "cluster " + std::to_string(c.cid) + " ends at level " + std::to_string(c.level) +
                            " of " + std::to_string(b));
      break;
    }
  r.measure("surviving", alive_count);
  r.measure("kills", kills);
  r.measure("created", created);
  long long maxch = 0;
  for (long long x : changes) maxch = std::max(maxch, x);
  r.measure("max_changes", maxch);
  return r;
}

// ---------------------------------------------------------------------------
// red/blue balance

CheckReport check_balance(const std::vector<std::vector<int>>& adj, const std::map<int, RB>& color,
                          const std::vector<int>& scope, double factor) {
  CheckReport r;
  const char* kScope = "balance.scope";
  const char* kGlobal = "balance.global";
  const char* kComponent = "balance.component";
  for (const char* name : {kScope, kGlobal, kComponent}) r.note(name);

  int n = static_cast<int>(adj.size());
  std::vector<char> in(static_cast<size_t>(n), 0);
  for (int v : scope) {
    if (v < 0 || v >= n) {
      r.fail(kScope, "entity " + std::to_string(v) + " out of range");
      return r;
    }
    if (in[static_cast<size_t>(v)]) r.fail(kScope, "entity " + std::to_string(v) + " scoped twice");
    in[static_cast<size_t>(v)] = 1;
  }
  auto bound = [&](long long k) {
    return static_cast<long long>(std::floor(factor * static_cast<double>(k) + 1e-9));
  };
  auto col = [&](int v) {
    auto it = color.find(v);
    return it == color.end() ? RB::uncolored : it->second;
  };

  long long red = 0, blue = 0, uncolored = 0;
  for (int v : scope) {
    RB c = col(v);
    if (c == RB::red)
      ++red;
    else if (c == RB::blue)
      ++blue;
    else
      ++uncolored;
  }
  long long k = static_cast<long long>(scope.size());
  if (red > bound(k))
    r.fail(kGlobal, std::to_string(red) + " red of " + std::to_string(k) + ", bound " +
                        std::to_string(bound(k)));
  if (blue > bound(k))
    r.fail(kGlobal, std::to_string(blue) + " blue of " + std::to_string(k) + ", bound " +
                        std::to_string(bound(k)));
  r.measure("red", red);
  r.measure("blue", blue);
  r.measure("uncolored", uncolored);

  // components induced on the scope
  std::vector<int> comp(static_cast<size_t>(n), -1);
  int ncomp = 0;
  long long largest = 0;
  for (int s : scope) {
    if (comp[static_cast<size_t>(s)] >= 0) continue;
    int id = ncomp++;
    long long size = 0, cred = 0, cblue = 0;
    std::vector<int> stack{s};
    comp[static_cast<size_t>(s)] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      ++size;
      RB c = col(u);
      if (c == RB::red) ++cred;
      if (c == RB::blue) ++cblue;
      for (int w : adj[static_cast<size_t>(u)]) {
        if (w < 0 || w >= n || !in[static_cast<size_t>(w)] || comp[static_cast<size_t>(w)] >= 0) continue;
        comp[static_cast<size_t>(w)] = id;
        stack.push_back(w);
      }
    }
    largest = std::max(largest, size);
    if (cred > bound(size) || cblue > bound(size))
      r.fail(kComponent, "component of " + std::to_string(s) + " holds " + std::to_string(cred) + " red " +
                             std::to_string(cblue) + " blue of " + std::to_string(size) + ", bound " +
                             std::to_string(bound(size)));
  }
  r.measure("components", ncomp);
  r.measure("largest_component", largest);
  return r;
}

} // namespace netdecomp
