#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "tracelink/error.hpp"
#include "tracelink/graph.hpp"
#include "tracelink/kernels.hpp"

using namespace tracelink;

TEST_CASE("build_graph") {
  TimeWindow w{3, 0, 100, {{0, 1, 10}, {1, 2, 20}}};
  auto g = build_graph(w, 3);
  CHECK(g.edge_src == std::vector<NodeId>{0, 1});
  CHECK(g.edge_dst == std::vector<NodeId>{1, 2});
  CHECK(g.edge_ts == std::vector<Millis>{10, 20});
  CHECK(g.window_index == 3);

  TimeWindow parallel{0, 0, 100, {{0, 1, 10}, {0, 1, 30}}};
  CHECK(build_graph(parallel, 2).edge_count() == 2);

  TimeWindow empty{0, 0, 100, {}};
  auto e = build_graph(empty, 5);
  CHECK(e.edge_count() == 0);
  CHECK(e.n_nodes == 5);

  CHECK_THROWS_AS(build_graph(w, 2), Error);
}

TEST_CASE("unique_edge_set") {
  TimeWindow w{0, 0, 100, {{0, 1, 1}, {0, 1, 2}, {1, 2, 3}}};
  CHECK(unique_edge_set(build_graph(w, 3)) == EdgeSet{{0, 1}, {1, 2}});
  CHECK(unique_edge_set(build_graph({0, 0, 100, {}}, 3)).empty());
  TimeWindow mutual{0, 0, 100, {{0, 1, 1}, {1, 0, 2}}};
  CHECK(unique_edge_set(build_graph(mutual, 2)).size() == 2);
}

TEST_CASE("degree_counts") {
  TimeWindow w{0, 0, 100, {{0, 1, 1}, {1, 2, 2}}};
  CHECK(degree_counts(build_graph(w, 3)) == std::vector<std::size_t>{1, 2, 1});
  TimeWindow par{0, 0, 100, {{0, 1, 1}, {0, 1, 2}}};
  CHECK(degree_counts(build_graph(par, 2)) == std::vector<std::size_t>{2, 2});
  CHECK(degree_counts(build_graph({0, 0, 100, {}}, 4)) == std::vector<std::size_t>(4, 0));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = testing::random_graph(2 + trial % 13, trial % 40, rng, true);
    auto d = degree_counts(g);
    CHECK(std::accumulate(d.begin(), d.end(), std::size_t{0}) == 2 * g.edge_count());
  }
}

TEST_CASE("identity features") {
  IdentityFeatures x{4};
  CHECK(x.dim() == 4);
  for (NodeId i = 0; i < 4; ++i)
    for (NodeId j = 0; j < 4; ++j) CHECK(x.dot(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("topology adds one self-loop per node") {
  TimeWindow w{0, 0, 100, {{0, 1, 1}, {2, 1, 2}, {0, 1, 3}}};
  auto topo = make_topology(build_graph(w, 3));
  CHECK(topo.edge_count() == 6);
  // in-edges of node 1: the three graph edges, then its self-loop (id 4)
  CHECK(topo.in_offsets[2] - topo.in_offsets[1] == 4);
  CHECK(topo.in_edges[topo.in_offsets[1]] == 0);
  CHECK(topo.in_edges[topo.in_offsets[2] - 1] == 4);
  CHECK(topo.out_offsets[1] - topo.out_offsets[0] == 3);
}

TEST_CASE("edge list dump") {
  TimeWindow w{0, 0, 100, {{0, 1, 10}, {1, 2, 20}}};
  std::ostringstream out;
  write_edge_list(out, build_graph(w, 3));
  CHECK(out.str() == "0,1,10\n1,2,20\n");
}
