#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netdecomp/trees.hpp"

using namespace netdecomp;

TEST_CASE("view_of indexes a rooted tree") {
  Graph g = gen_grid(2, 3); // nodes 0..5, row-major
  Tree t;
  t.id = 7;
  t.root = 0;
  t.edges = {{1, 0}, {4, 1}, {3, 0}};
  TreeView v = view_of(g, t);
  CHECK(v.id == 7);
  CHECK(v.nodes == std::vector<int>{0, 1, 3, 4});
  CHECK(v.parent.at(0) == -1);
  CHECK(v.parent.at(4) == 1);
  CHECK(v.depth.at(0) == 0);
  CHECK(v.depth.at(4) == 2);
  CHECK(v.height == 2);
  CHECK(v.children.at(0) == std::vector<int>{1, 3});
}

TEST_CASE("view_of rejects malformed trees") {
  Graph g = gen_path(4);
  Tree bad_root{1, 9, {}};
  CHECK_THROWS_AS(view_of(g, bad_root), std::invalid_argument);

  Tree not_edge{1, 0, {{2, 0}}}; // (0,2) is not a path edge
  CHECK_THROWS_AS(view_of(g, not_edge), std::invalid_argument);

  Tree two_parents{1, 0, {{1, 0}, {1, 2}}};
  CHECK_THROWS_AS(view_of(g, two_parents), std::invalid_argument);

  Tree unreachable{1, 0, {{3, 2}}}; // 2 never attaches to the root
  CHECK_THROWS_AS(view_of(g, unreachable), std::invalid_argument);
}

TEST_CASE("plan_channels splits bandwidth by overlap") {
  Graph g = gen_path(4);
  Tree a{0, 0, {{1, 0}, {2, 1}}};
  Tree b{1, 2, {{1, 2}, {3, 2}}};
  // edge (1,2) carries both trees
  ChannelPlan plan = plan_channels(g, {a, b}, 8);
  CHECK(plan.max_trees_per_edge == 2);
  CHECK(plan.bit_budget == 4);
  CHECK(plan.depth == 2);
  CHECK(plan.edge_trees.at({1, 2}) == std::vector<int>{0, 1});
  CHECK(plan.chunks(5) == 2);
  CHECK(plan.chunks(0) == 0);

  ChannelPlan wide = plan_channels(g, {a, b}, kUnbounded);
  CHECK(wide.bit_budget <= 0);
  CHECK(wide.chunks(1000) == 1);

  CHECK_THROWS_AS(plan_channels(g, {a, b}, 1), std::runtime_error); // P=2 > B=1
}

TEST_CASE("plan_channels rejects duplicate tree ids on an edge") {
  Graph g = gen_path(3);
  Tree a{5, 0, {{1, 0}}};
  Tree b{5, 2, {{1, 2}}};
  CHECK_NOTHROW(plan_channels(g, {a, b}, 4)); // no shared edge, ids may repeat
  Tree c{5, 1, {{0, 1}}};
  CHECK_THROWS_AS(plan_channels(g, {a, c}, 4), std::invalid_argument);
}
