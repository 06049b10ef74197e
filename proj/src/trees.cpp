#include "netdecomp/trees.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace netdecomp {

TreeView view_of(const Graph& g, const Tree& t) {
  TreeView v;
  v.id = t.id;
  v.root = t.root;
  if (t.root < 0 || t.root >= g.n) throw std::invalid_argument("tree " + std::to_string(t.id) + ": bad root");
  v.parent[t.root] = -1;
  for (auto [child, parent] : t.edges) {
    if (!g.has_edge(child, parent))
      throw std::invalid_argument("tree " + std::to_string(t.id) + ": edge (" + std::to_string(child) + "," +
                                  std::to_string(parent) + ") not in graph");
    if (v.parent.count(child))
      throw std::invalid_argument("tree " + std::to_string(t.id) + ": node " + std::to_string(child) +
                                  " has two parents");
    v.parent[child] = parent;
  }
  for (auto& [node, par] : v.parent) {
    v.nodes.push_back(node);
    if (par >= 0) v.children[par].push_back(node);
  }
  std::sort(v.nodes.begin(), v.nodes.end());
  for (auto& [node, kids] : v.children) std::sort(kids.begin(), kids.end());

  // depths via walk from the root; every node must be reached (connectivity
  // and acyclicity together)
  std::vector<int> stack = {t.root};
  v.depth[t.root] = 0;
  size_t seen = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    auto it = v.children.find(u);
    if (it == v.children.end()) continue;
    for (int c : it->second) {
      v.depth[c] = v.depth[u] + 1;
      v.height = std::max(v.height, v.depth[c]);
      stack.push_back(c);
      ++seen;
    }
  }
  if (seen != v.parent.size())
    throw std::invalid_argument("tree " + std::to_string(t.id) + ": not connected to its root");
  return v;
}

ChannelPlan plan_channels(const Graph& g, const std::vector<Tree>& trees, long long bandwidth) {
  ChannelPlan plan;
  plan.bandwidth = bandwidth;
  for (const auto& t : trees) {
    TreeView v = view_of(g, t);
    plan.depth = std::max(plan.depth, v.height);
    for (auto [child, parent] : t.edges) {
      auto key = std::minmax(child, parent);
      plan.edge_trees[{key.first, key.second}].push_back(t.id);
    }
  }
  for (auto& [edge, ids] : plan.edge_trees) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw std::invalid_argument("plan_channels: duplicate tree on one edge");
    plan.max_trees_per_edge = std::max(plan.max_trees_per_edge, static_cast<int>(ids.size()));
  }
  if (bandwidth == kUnbounded) {
    plan.bit_budget = 0;  // unchunked
  } else {
    if (plan.max_trees_per_edge > bandwidth)
      throw std::runtime_error("plan_channels: " + std::to_string(plan.max_trees_per_edge) +
                               " trees share an edge but bandwidth is " + std::to_string(bandwidth));
    plan.bit_budget = plan.max_trees_per_edge == 0 ? static_cast<int>(std::min<long long>(bandwidth, 1 << 20))
                                                   : static_cast<int>(bandwidth / plan.max_trees_per_edge);
  }
  return plan;
}

}  // namespace netdecomp
