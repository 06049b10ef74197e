#include "netdecomp/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace netdecomp {

uint64_t mix64(uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t rand_key(uint64_t seed, uint64_t i, uint64_t j) {
  return mix64(mix64(mix64(seed) ^ i) ^ (j * 0x9e3779b97f4a7c15ull));
}

double rand_unit(uint64_t seed, uint64_t i, uint64_t j) {
  return static_cast<double>(rand_key(seed, i, j) >> 11) * (1.0 / 9007199254740992.0);
}

bool Graph::has_edge(int u, int v) const {
  const auto& a = adj[static_cast<size_t>(u)];
  return std::binary_search(a.begin(), a.end(), v);
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n <= 0) throw std::invalid_argument("graph: n must be positive");
  Graph g;
  g.n = n;
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= n || e.first == e.second)
      throw std::invalid_argument("graph: bad edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.adj.assign(static_cast<size_t>(n), {});
  for (auto [u, v] : g.edges) {
    g.adj[static_cast<size_t>(u)].push_back(v);
    g.adj[static_cast<size_t>(v)].push_back(u);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

Graph gen_path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return make_graph(n, std::move(e));
}

Graph gen_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle: n >= 3 required");
  auto g = gen_path(n);
  std::vector<std::pair<int, int>> e = g.edges;
  e.push_back({0, n - 1});
  return make_graph(n, std::move(e));
}

Graph gen_star(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.push_back({0, i});
  return make_graph(n, std::move(e));
}

Graph gen_complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.push_back({u, v});
  return make_graph(n, std::move(e));
}

Graph gen_grid(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid: rows/cols must be positive");
  auto at = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.push_back({at(r, c), at(r, c + 1)});
      if (r + 1 < rows) e.push_back({at(r, c), at(r + 1, c)});
    }
  return make_graph(rows * cols, std::move(e));
}

Graph gen_tree(int n, uint64_t seed) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) {
    int parent = static_cast<int>(rand_key(seed, static_cast<uint64_t>(i), 0) % static_cast<uint64_t>(i));
    e.push_back({parent, i});
  }
  return make_graph(n, std::move(e));
}

Graph gen_gnp(int n, double p, uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("gnp: p out of range");
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rand_unit(seed, static_cast<uint64_t>(u), static_cast<uint64_t>(v)) < p) e.push_back({u, v});
  return make_graph(n, std::move(e));
}

// ---------------------------------------------------------------------------

int ceil_log2(uint64_t n) {
  int k = 0;
  while ((1ull << k) < n) ++k;
  return k;
}

uint64_t IdAssignment::bit_of(uint64_t v_id, int i) const {
  if (i < 1 || i > bits) return 0;
  return (v_id >> (i - 1)) & 1ull;
}

IdAssignment assign_ids(int n, IdScheme scheme, int bits, uint64_t seed) {
  int minimal = std::max(1, ceil_log2(static_cast<uint64_t>(n)));
  IdAssignment ids;
  ids.bits = bits > 0 ? bits : minimal;
  if (ids.bits < minimal)
    throw std::invalid_argument("assign_ids: width " + std::to_string(ids.bits) + " too small for n=" + std::to_string(n));
  if (ids.bits > 64) throw std::invalid_argument("assign_ids: width > 64 unsupported");
  ids.id.resize(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) ids.id[static_cast<size_t>(v)] = static_cast<uint64_t>(v);
  if (scheme == IdScheme::shuffled) {
    // seeded Fisher-Yates over the value array
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rand_key(seed, static_cast<uint64_t>(i), 1) % static_cast<uint64_t>(i + 1));
      std::swap(ids.id[static_cast<size_t>(i)], ids.id[static_cast<size_t>(j)]);
    }
  }
  return ids;
}

// ---------------------------------------------------------------------------

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0, n = -1, m = -1;
  std::vector<std::pair<int, int>> edges;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("edge list, line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "p") {
      if (n >= 0) fail("duplicate header");
      if (!(ls >> n >> m) || n <= 0 || m < 0) fail("bad header");
    } else if (tag == "e") {
      int u, v;
      if (n < 0) fail("edge before header");
      if (!(ls >> u >> v)) fail("bad edge");
      if (!(0 <= u && u < v && v < n)) fail("edge endpoints must satisfy 0 <= u < v < n");
      edges.push_back({u, v});
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (n < 0) throw std::runtime_error("edge list: missing header");
  if (static_cast<int>(edges.size()) != m)
    throw std::runtime_error("edge list: header claims " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
  return make_graph(n, std::move(edges));
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "p " << g.n << " " << g.m() << "\n";
  for (auto [u, v] : g.edges) out << "e " << u << " " << v << "\n";
  return out.str();
}

IdAssignment parse_id_sidecar(const std::string& text, int n) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  IdAssignment ids;
  ids.id.assign(static_cast<size_t>(n), ~0ull);
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("id sidecar, line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "b") {
      if (!(ls >> ids.bits) || ids.bits <= 0 || ids.bits > 64) fail("bad width");
    } else if (tag == "i") {
      int v;
      uint64_t val;
      if (!(ls >> v >> val)) fail("bad id record");
      if (v < 0 || v >= n) fail("node out of range");
      ids.id[static_cast<size_t>(v)] = val;
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (ids.bits == 0) throw std::runtime_error("id sidecar: missing width");
  for (int v = 0; v < n; ++v) {
    uint64_t val = ids.id[static_cast<size_t>(v)];
    if (val == ~0ull) throw std::runtime_error("id sidecar: node " + std::to_string(v) + " has no id");
    if (ids.bits < 64 && (val >> ids.bits) != 0)
      throw std::runtime_error("id sidecar: id of node " + std::to_string(v) + " exceeds width");
  }
  std::vector<uint64_t> sorted = ids.id;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::runtime_error("id sidecar: identifiers not distinct");
  return ids;
}

std::string format_id_sidecar(const IdAssignment& ids) {
  std::ostringstream out;
  out << "b " << ids.bits << "\n";
  for (size_t v = 0; v < ids.id.size(); ++v) out << "i " << v << " " << ids.id[v] << "\n";
  return out.str();
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

void save_graph_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_edge_list(g);
}

GraphSpec parse_graph_spec(const std::string& text) {
  GraphSpec spec;
  if (text.rfind("gen:", 0) != 0) {
    spec.family = "file";
    spec.path = text;
    return spec;
  }
  auto rest = text.substr(4);
  auto colon = rest.find(':');
  spec.family = rest.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : rest.substr(colon + 1);
  std::istringstream in(args);
  std::string kv;
  while (std::getline(in, kv, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("graph spec: expected key=value, got '" + kv + "'");
    std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k != "n" && k != "rows" && k != "cols" && k != "p" && k != "seed")
      throw std::invalid_argument("graph spec: unknown key '" + k + "'");
    try {
      if (k == "n") spec.n = std::stoi(v);
      else if (k == "rows") spec.rows = std::stoi(v);
      else if (k == "cols") spec.cols = std::stoi(v);
      else if (k == "p") spec.p = std::stod(v);
      else spec.seed = std::stoull(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("graph spec: bad value '" + v + "' for key '" + k + "'");
    }
  }
  return spec;
}

Graph realize(const GraphSpec& spec) {
  if (spec.family == "file") return load_graph_file(spec.path);
  if (spec.family == "path") return gen_path(spec.n);
  if (spec.family == "cycle") return gen_cycle(spec.n);
  if (spec.family == "star") return gen_star(spec.n);
  if (spec.family == "complete") return gen_complete(spec.n);
  if (spec.family == "grid") return gen_grid(spec.rows, spec.cols);
  if (spec.family == "tree") return gen_tree(spec.n, spec.seed);
  if (spec.family == "gnp") return gen_gnp(spec.n, spec.p, spec.seed);
  throw std::invalid_argument("graph spec: unknown family '" + spec.family + "'");
}

}  // namespace netdecomp
