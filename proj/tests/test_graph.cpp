#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netdecomp/graph.hpp"

using namespace netdecomp;

TEST_CASE("counter rng is deterministic and order independent") {
  uint64_t a = rand_key(7, 3, 9);
  uint64_t b = rand_key(7, 4, 9);
  uint64_t c = rand_key(8, 3, 9);
  CHECK(a == rand_key(7, 3, 9));
  CHECK(a != b);
  CHECK(a != c);
  for (int i = 0; i < 200; ++i) {
    double u = rand_unit(11, static_cast<uint64_t>(i), 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("generators produce the expected shapes") {
  Graph p = gen_path(5);
  CHECK(p.n == 5);
  CHECK(p.m() == 4);
  CHECK(p.has_edge(0, 1));
  CHECK(!p.has_edge(0, 2));
  CHECK(p.degree(0) == 1);
  CHECK(p.degree(2) == 2);

  Graph c = gen_cycle(6);
  CHECK(c.m() == 6);
  CHECK(c.has_edge(0, 5));

  Graph s = gen_star(5);
  CHECK(s.m() == 4);
  CHECK(s.degree(0) == 4);

  Graph k = gen_complete(4);
  CHECK(k.m() == 6);

  Graph gr = gen_grid(2, 3);
  CHECK(gr.n == 6);
  CHECK(gr.m() == 7);

  Graph t = gen_tree(40, 5);
  CHECK(t.n == 40);
  CHECK(t.m() == 39);
}

TEST_CASE("gnp is seed deterministic") {
  Graph a = gen_gnp(60, 0.1, 42);
  Graph b = gen_gnp(60, 0.1, 42);
  Graph c = gen_gnp(60, 0.1, 43);
  CHECK(a.edges == b.edges);
  CHECK(a.edges != c.edges);
  CHECK_THROWS_AS(gen_gnp(10, 1.5, 0), std::invalid_argument);
}

TEST_CASE("graph validation and normalization") {
  CHECK_THROWS_AS(make_graph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_graph(3, {{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(make_graph(3, {{1, 1}}), std::invalid_argument);
  Graph g = make_graph(3, {{2, 1}, {1, 2}, {0, 1}}); // reversed + duplicate collapse
  CHECK(g.m() == 2);
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(2, 1));
}

TEST_CASE("ceil_log2") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(4) == 2);
  CHECK(ceil_log2(5) == 3);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
}

TEST_CASE("id assignment schemes") {
  IdAssignment seq = assign_ids(10, IdScheme::sequential, 0, 0);
  CHECK(seq.bits == 4);
  for (int v = 0; v < 10; ++v) CHECK(seq.id[static_cast<size_t>(v)] == static_cast<uint64_t>(v));
  CHECK(seq.bit_of(5, 1) == 1);
  CHECK(seq.bit_of(5, 2) == 0);
  CHECK(seq.bit_of(5, 3) == 1);
  CHECK(seq.bit_of(5, 4) == 0);
  CHECK(seq.bit_of(5, 99) == 0);

  IdAssignment pad = assign_ids(10, IdScheme::padded, 32, 0);
  CHECK(pad.bits == 32);
  CHECK(pad.id == seq.id); // same values, wider recorded width

  IdAssignment shuf = assign_ids(10, IdScheme::shuffled, 0, 9);
  std::vector<uint64_t> sorted = shuf.id;
  std::sort(sorted.begin(), sorted.end());
  for (int v = 0; v < 10; ++v) CHECK(sorted[static_cast<size_t>(v)] == static_cast<uint64_t>(v));
  CHECK(shuf.id == assign_ids(10, IdScheme::shuffled, 0, 9).id);

  CHECK_THROWS_AS(assign_ids(10, IdScheme::sequential, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(assign_ids(4, IdScheme::sequential, 65, 0), std::invalid_argument);
}

TEST_CASE("edge list round trip") {
  Graph g = gen_grid(3, 3);
  Graph h = parse_edge_list(format_edge_list(g));
  CHECK(h.n == g.n);
  CHECK(h.edges == g.edges);

  CHECK_THROWS(parse_edge_list("e 0 1\n"));            // edge before header
  CHECK_THROWS(parse_edge_list("p 3 1\n"));            // count mismatch
  CHECK_THROWS(parse_edge_list("p 3 1\ne 1 0\n"));     // unordered endpoints
  CHECK_THROWS(parse_edge_list("p 3 1\nz 0 1\n"));     // unknown record

  Graph w = parse_edge_list("# comment\np 3 2 # trailing\ne 0 1\ne 1 2\n");
  CHECK(w.n == 3);
  CHECK(w.m() == 2);
}

TEST_CASE("id sidecar round trip") {
  IdAssignment ids = assign_ids(6, IdScheme::shuffled, 8, 4);
  IdAssignment back = parse_id_sidecar(format_id_sidecar(ids), 6);
  CHECK(back.bits == ids.bits);
  CHECK(back.id == ids.id);

  CHECK_THROWS(parse_id_sidecar("i 0 1\n", 1));                    // missing width
  CHECK_THROWS(parse_id_sidecar("b 2\ni 0 1\n", 2));               // node 1 missing
  CHECK_THROWS(parse_id_sidecar("b 2\ni 0 9\ni 1 1\n", 2));        // exceeds width
  CHECK_THROWS(parse_id_sidecar("b 2\ni 0 1\ni 1 1\n", 2));        // duplicate value
}

TEST_CASE("graph specs") {
  GraphSpec s = parse_graph_spec("gen:gnp:n=256,p=0.03,seed=7");
  CHECK(s.family == "gnp");
  CHECK(s.n == 256);
  CHECK(s.p == doctest::Approx(0.03));
  CHECK(s.seed == 7);
  Graph g = realize(s);
  CHECK(g.n == 256);

  GraphSpec gr = parse_graph_spec("gen:grid:rows=4,cols=5");
  CHECK(realize(gr).n == 20);

  GraphSpec f = parse_graph_spec("some/file.graph");
  CHECK(f.family == "file");
  CHECK(f.path == "some/file.graph");

  CHECK_THROWS_AS(parse_graph_spec("gen:gnp:wat"), std::invalid_argument);
  CHECK_THROWS_AS(parse_graph_spec("gen:gnp:q=3"), std::invalid_argument);
  CHECK_THROWS_AS(realize(parse_graph_spec("gen:mystery:n=3")), std::invalid_argument);
}
