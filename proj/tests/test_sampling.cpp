#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "tracelink/error.hpp"
#include "tracelink/sampling.hpp"

using namespace tracelink;

namespace {

EdgeSet edges_of(const std::vector<EdgePair>& pairs) { return {pairs.begin(), pairs.end()}; }

WindowedGraph graph_of(std::size_t n, const std::vector<EdgePair>& pairs) {
  WindowedGraph g;
  g.n_nodes = n;
  for (const auto& [s, d] : pairs) {
    g.edge_src.push_back(s);
    g.edge_dst.push_back(d);
    g.edge_ts.push_back(0);
  }
  return g;
}

}  // namespace

TEST_CASE("sampling kinds parse") {
  CHECK(parse_sampling_kind("none") == SamplingKind::None);
  CHECK(parse_sampling_kind("advanced") == SamplingKind::Advanced);
  CHECK(to_string(SamplingKind::Simple) == "simple");
  CHECK_THROWS_AS(parse_sampling_kind("Simple"), Error);
  CHECK_THROWS_AS(SamplingStrategy::advanced(-1), Error);
  CHECK_THROWS_AS(SamplingStrategy::advanced(std::nan("")), Error);
}

TEST_CASE("analyze_sampling") {
  CHECK(analyze_sampling(2, 3).kind == SamplingKind::Simple);  // 2/4
  CHECK(analyze_sampling(3, 3).kind == SamplingKind::None);    // 3/3
  CHECK(analyze_sampling(4, 3).kind == SamplingKind::None);    // 4/2
  CHECK(analyze_sampling(9, 100).kind == SamplingKind::Advanced);
  auto adv = analyze_sampling(9, 100, {}, 0.25);
  REQUIRE(adv.alpha.has_value());
  CHECK(*adv.alpha == 0.25);
  CHECK(analyze_sampling(100, 100).kind == SamplingKind::Simple);
  CHECK_FALSE(analyze_sampling(100, 100).alpha.has_value());
}

TEST_CASE("analyze_sampling boundaries") {
  CHECK(analyze_sampling(1, 2).kind == SamplingKind::None);
  CHECK(analyze_sampling(40, 10).kind == SamplingKind::None);      // 40/50 = 0.8
  CHECK(analyze_sampling(39, 10).kind == SamplingKind::Simple);    // 39/51
  CHECK(analyze_sampling(102, 102).kind == SamplingKind::Simple);  // 102/10200 = 0.01
  CHECK(analyze_sampling(101, 102).kind == SamplingKind::Advanced);
  CHECK(analyze_sampling(100, 25000).kind == SamplingKind::Advanced);
  ImbalanceThresholds strict{0.5, 0.2};
  CHECK(analyze_sampling(39, 10, strict).kind == SamplingKind::None);
  CHECK(analyze_sampling(10, 10, strict).kind == SamplingKind::Advanced);
}

TEST_CASE("simple_negative_sample") {
  Rng rng(3);
  SUBCASE("forced pair") {
    EdgeSet all;
    for (NodeId i = 0; i < 4; ++i)
      for (NodeId j = 0; j < 4; ++j)
        if (i != j && !(i == 2 && j == 0)) all.insert({i, j});
    auto neg = simple_negative_sample(all, 4, 1, rng);
    REQUIRE(neg.pairs.size() == 1);
    CHECK(neg.pairs[0] == EdgePair{2, 0});
  }
  SUBCASE("k = 0") { CHECK(simple_negative_sample({}, 5, 0, rng).pairs.empty()); }
  SUBCASE("duplicates are allowed within one call") {
    auto neg = simple_negative_sample({{0, 1}}, 3, 5, rng);
    CHECK(neg.pairs.size() == 5);
    CHECK(edges_of(neg.pairs).size() <= 5);
  }
  SUBCASE("infeasible") {
    try {
      simple_negative_sample({{0, 1}}, 2, 2, rng);
      FAIL("expected a sampling error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Sampling);
    }
  }
  SUBCASE("uniform over the 19 legal pairs") {
    const EdgeSet existing{{0, 1}};
    std::map<EdgePair, std::size_t> counts;
    const std::size_t draws = 10000;
    std::vector<EdgePair> drawn;
    for (std::size_t i = 0; i < draws; ++i) {
      drawn.push_back(simple_negative_sample(existing, 5, 1, rng).pairs.at(0));
    }
    for (const auto& p : drawn) {
      CHECK(p.first != p.second);
      CHECK(existing.count(p) == 0);
      ++counts[p];
    }
    CHECK(counts.size() == 19);
    const double pr = 1.0 / 19;
    const double sigma = std::sqrt(draws * pr * (1 - pr));
    double chi2 = 0;
    for (const auto& [pair, c] : counts) {
      CHECK(std::abs(c - draws * pr) <= 3 * sigma);
      chi2 += (c - draws * pr) * (c - draws * pr) / (draws * pr);
    }
    // 18 degrees of freedom, 99.9th percentile is about 42.3
    CHECK(chi2 < 42.3);
  }
}

TEST_CASE("degree weights") {
  auto w = degree_weights({2, 1, 1}, 1.0);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.25));
  auto u = degree_weights({0, 5, 3, 0}, 0.0);
  for (double x : u) CHECK(x == doctest::Approx(0.25));
  auto z = degree_weights({0, 4, 1}, 0.5);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("source sampler frequencies") {
  auto g = graph_of(3, {{0, 1}, {0, 2}});
  SourceSampler src(g, 1.0);
  Rng rng(17);
  std::vector<std::size_t> counts(3);
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) ++counts[src(rng)];
  const double expect[] = {0.5, 0.25, 0.25};
  for (int v = 0; v < 3; ++v) {
    const double sigma = std::sqrt(draws * expect[v] * (1 - expect[v]));
    CHECK(std::abs(counts[v] - draws * expect[v]) <= 3 * sigma);
  }
}

TEST_CASE("advanced_negative_sample") {
  Rng rng(11);
  SUBCASE("empty graph") {
    auto g = graph_of(4, {});
    CHECK(advanced_negative_sample(g, {}, 0.1, rng).pairs.empty());
  }
  SUBCASE("reverse pairs are excluded") {
    // only (2,0) and (0,2) remain once both orientations of existing edges go
    auto g = graph_of(3, {{0, 1}, {1, 2}});
    auto neg = advanced_negative_sample(g, unique_edge_set(g), 1.0, rng);
    REQUIRE(neg.pairs.size() == 2);
    for (const auto& p : neg.pairs) {
      CHECK(((p == EdgePair{0, 2}) || (p == EdgePair{2, 0})));
    }
  }
  SUBCASE("no legal pair") {
    auto g = graph_of(2, {{0, 1}});
    try {
      advanced_negative_sample(g, unique_edge_set(g), 0.1, rng, 10);
      FAIL("expected a sampling error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Sampling);
    }
  }
  SUBCASE("one negative per positive, multi-edges counted") {
    auto g = graph_of(6, {{0, 1}, {0, 1}, {0, 1}, {2, 3}});
    CHECK(advanced_negative_sample(g, unique_edge_set(g), 0.1, rng).pairs.size() == 4);
  }
  SUBCASE("same seed, same negatives") {
    auto g = testing::random_graph(30, 60, rng);
    Rng a(5), b(5);
    CHECK(advanced_negative_sample(g, unique_edge_set(g), 0.1, a).pairs ==
          advanced_negative_sample(g, unique_edge_set(g), 0.1, b).pairs);
  }
}

TEST_CASE("draw_negatives dispatch") {
  Rng rng(2);
  auto g = testing::random_graph(20, 15, rng);
  CHECK(draw_negatives(g, SamplingStrategy::none(), rng).pairs.empty());
  CHECK(draw_negatives(g, SamplingStrategy::simple(), rng).pairs.size() == 15);
  auto adv = draw_negatives(g, SamplingStrategy::advanced(0.5), rng);
  CHECK(adv.pairs.size() == 15);
  auto existing = unique_edge_set(g);
  for (const auto& [s, d] : adv.pairs) {
    CHECK(s != d);
    CHECK(existing.count({s, d}) == 0);
    CHECK(existing.count({d, s}) == 0);
  }
}
