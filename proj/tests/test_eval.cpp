#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "tracelink/error.hpp"
#include "tracelink/eval.hpp"

using namespace tracelink;

namespace {

std::vector<ScoredPair> make_pairs(std::initializer_list<double> pos,
                                   std::initializer_list<double> neg) {
  std::vector<ScoredPair> out;
  for (double s : pos) out.push_back({0, 1, s, 1});
  for (double s : neg) out.push_back({1, 0, s, 0});
  return out;
}

double brute_auc(const std::vector<ScoredPair>& pairs) {
  double wins = 0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    if (p.label != 1) continue;
    for (const auto& q : pairs) {
      if (q.label != 0) continue;
      ++n;
      if (p.score > q.score) wins += 1;
      else if (p.score == q.score) wins += 0.5;
    }
  }
  return wins / static_cast<double>(n);
}

// Scores drawn from a small grid so ties are common.
std::vector<ScoredPair> random_instance(std::mt19937_64& rng, std::size_t max_pairs) {
  std::uniform_int_distribution<std::size_t> size(2, max_pairs);
  std::uniform_int_distribution<int> grid(0, 12);
  std::bernoulli_distribution label(0.5);
  std::vector<ScoredPair> out;
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) out.push_back({0, 0, grid(rng) / 12.0, label(rng) ? 1 : 0});
  out[0].label = 1;
  out[1].label = 0;
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST_CASE("auc") {
  CHECK(auc(make_pairs({0.9, 0.8}, {0.2, 0.1})) == 1.0);
  CHECK(auc(make_pairs({0.4, 0.4}, {0.4, 0.4, 0.4})) == 0.5);
  CHECK(auc(make_pairs({0.7, 0.3}, {0.5})) == 0.5);
  CHECK(auc(make_pairs({0.1}, {0.9})) == 0.0);
  CHECK_THROWS_AS(auc(make_pairs({0.5}, {})), Error);
  CHECK_THROWS_AS(auc(make_pairs({}, {0.5})), Error);
}

TEST_CASE("auc equals the pairwise oracle") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    auto pairs = random_instance(rng, 50);
    CHECK(auc(pairs) == doctest::Approx(brute_auc(pairs)).epsilon(1e-15));
  }
}

TEST_CASE("roc area equals auc") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    auto pairs = random_instance(rng, 50);
    if (trial % 2) {
      for (auto& p : pairs) p.score = u(rng);  // tie-free variant
    }
    CHECK(std::abs(trapezoid_area(roc_points(pairs)) - auc(pairs)) < 1e-9);
  }
}

TEST_CASE("roc_points shape") {
  auto perfect = roc_points(make_pairs({0.9, 0.8}, {0.2, 0.1}));
  REQUIRE(perfect.size() == 5);
  CHECK(perfect.front().threshold == std::numeric_limits<double>::infinity());
  CHECK(perfect.front().x == 0);
  CHECK(perfect.front().y == 0);
  CHECK(perfect[2].x == 0);
  CHECK(perfect[2].y == 1);
  CHECK(perfect.back().x == 1);
  CHECK(perfect.back().y == 1);

  auto ties = roc_points(make_pairs({0.3, 0.3}, {0.3}));
  REQUIRE(ties.size() == 2);
  CHECK(trapezoid_area(ties) == 0.5);
  CHECK_THROWS_AS(roc_points(make_pairs({0.3}, {})), Error);
}

TEST_CASE("pr_points") {
  auto perfect = pr_points(make_pairs({0.9, 0.8}, {0.2, 0.1}));
  for (std::size_t i = 0; i < 2; ++i) CHECK(perfect[i].y == 1.0);
  auto single = pr_points(make_pairs({0.7}, {}));
  REQUIRE(single.size() == 1);
  CHECK(single[0].x == 1.0);
  CHECK(single[0].y == 1.0);
  CHECK_THROWS_AS(pr_points(make_pairs({}, {0.2})), Error);

  // 4-pair case against direct enumeration of every distinct threshold
  auto mixed = make_pairs({0.8, 0.4}, {0.6, 0.4});
  auto pts = pr_points(mixed);
  const std::vector<double> thresholds{0.8, 0.6, 0.4};
  REQUIRE(pts.size() == thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    int tp = 0, fp = 0;
    for (const auto& p : mixed) {
      if (p.score >= thresholds[i]) (p.label ? tp : fp)++;
    }
    CHECK(pts[i].threshold == thresholds[i]);
    CHECK(pts[i].x == doctest::Approx(tp / 2.0));
    CHECK(pts[i].y == doctest::Approx(static_cast<double>(tp) / (tp + fp)));
  }
}

TEST_CASE("curves are monotone as the threshold descends") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto pairs = random_instance(rng, 40);
    auto pr = pr_points(pairs);
    auto roc = roc_points(pairs);
    for (std::size_t i = 1; i < pr.size(); ++i) {
      CHECK(pr[i].threshold < pr[i - 1].threshold);
      CHECK(pr[i].x >= pr[i - 1].x);
    }
    CHECK(pr.back().x == 1.0);
    for (std::size_t i = 1; i < roc.size(); ++i) {
      CHECK(roc[i].x >= roc[i - 1].x);
      CHECK(roc[i].y >= roc[i - 1].y);
    }
    CHECK(roc.back().x == 1.0);
    CHECK(roc.back().y == 1.0);
  }
}

TEST_CASE("confusion and scalar metrics") {
  auto c = confusion(make_pairs({0.9}, {0.1}), 0.5);
  CHECK(c == Confusion{1, 0, 0, 1});
  CHECK(confusion(make_pairs({0.4}, {}), 0.5).fn == 1);
  CHECK(confusion(make_pairs({0.5}, {0.5}), 0.5) == Confusion{0, 0, 1, 1});

  auto all = scalar_metrics({1, 0, 0, 1});
  CHECK(all.accuracy == 1.0);
  CHECK(all.precision == 1.0);
  CHECK(all.recall == 1.0);
  CHECK(all.f1 == 1.0);

  auto degenerate = scalar_metrics({0, 0, 5, 5});
  CHECK(degenerate.precision == 0);
  CHECK(degenerate.precision_undefined);
  CHECK(degenerate.recall == 0);
  CHECK_FALSE(degenerate.recall_undefined);
  CHECK(degenerate.f1 == 0);
  CHECK(degenerate.f1_undefined);
  CHECK(degenerate.accuracy == 0.5);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> count(0, 30);
  for (int trial = 0; trial < 500; ++trial) {
    Confusion k{count(rng), count(rng), count(rng), count(rng) + 1};
    auto m = scalar_metrics(k);
    const double tp = k.tp, fp = k.fp, fn = k.fn, tn = k.tn;
    CHECK(m.accuracy == (tp + tn) / (tp + fp + fn + tn));
    if (k.tp + k.fp) CHECK(m.precision == tp / (tp + fp));
    if (k.tp + k.fn) CHECK(m.recall == tp / (tp + fn));
    if (m.precision + m.recall > 0) {
      CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    }
  }
}

TEST_CASE("BCE of uniform predictions is ln 2") {
  std::vector<double> half(37, 0.5);
  CHECK(std::abs(bce_loss(half, half) - std::log(2.0)) < 1e-9);
}

TEST_CASE("evaluate_windows") {
  std::mt19937_64 rng(2);
  const std::size_t n = 12;
  auto params = init_params(n, 4, 2, rng);
  std::vector<WindowedGraph> windows;
  windows.push_back(testing::random_graph(n, 3, rng));
  windows.push_back(testing::random_graph(n, 0, rng));
  windows.push_back(testing::random_graph(n, 9, rng));
  for (std::size_t i = 0; i < windows.size(); ++i) windows[i].window_index = 70 + i;

  EvalConfig cfg;
  cfg.seed = 31;
  auto a = evaluate_windows(params, windows, cfg);
  auto b = evaluate_windows(params, windows, cfg);
  REQUIRE(a.report.windows.size() == 2);  // the empty window is skipped
  CHECK(a.report.windows[0].window == 70);
  CHECK(a.report.windows[0].positives == 3);
  CHECK(a.report.windows[0].negatives == 3);
  CHECK(a.scored[1].size() == 18);
  std::ostringstream ja, jb;
  write_metrics_json(ja, a.report);
  write_metrics_json(jb, b.report);
  CHECK(ja.str() == jb.str());

  // pooled metrics are computed over the concatenated pairs
  std::vector<ScoredPair> pooled;
  for (const auto& w : a.scored) pooled.insert(pooled.end(), w.begin(), w.end());
  CHECK(a.report.pooled.auc == auc(pooled));
  CHECK(a.report.pooled.counts == confusion(pooled, cfg.tau));

  auto doc = nlohmann::json::parse(ja.str());
  CHECK(doc["windows"].size() == 2);
  for (const char* key : {"auc", "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn"}) {
    CHECK(doc["aggregate"].contains(key));
  }

  // a different threshold moves the confusion counts but never the AUC
  cfg.tau = 0.0;
  auto shifted = evaluate_windows(params, windows, cfg);
  CHECK(shifted.report.pooled.auc == a.report.pooled.auc);
  CHECK(shifted.report.pooled.counts.fn == 0);

  std::vector<WindowedGraph> empty{testing::random_graph(n, 0, rng)};
  CHECK_THROWS_AS(evaluate_windows(params, empty, cfg), Error);
}

TEST_CASE("export_attention") {
  std::mt19937_64 rng(6);
  const std::size_t n = 8;
  auto params = init_params(n, 4, 2, rng);
  WindowedGraph g;
  g.n_nodes = n;
  for (auto [s, d] : {std::pair{1u, 2u}, {3u, 2u}, {1u, 2u}, {6u, 5u}}) {
    g.edge_src.push_back(s);
    g.edge_dst.push_back(d);
    g.edge_ts.push_back(0);
  }
  GatModel model{params, {}};
  model_forward(model, g);
  auto m = export_attention(model.attention, 0, 4);
  REQUIRE(m.rows == 4);
  REQUIRE(m.cols == 4);
  // node 2's whole neighbourhood {1, 3, 2} lies inside [0, 4)
  CHECK(m(2, 1) + m(2, 2) + m(2, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(2, 0) == 0.0);
  CHECK(m(1, 2) == 0.0);

  WindowedGraph bare;
  bare.n_nodes = n;
  GatModel bare_model{params, {}};
  model_forward(bare_model, bare);
  auto diag = export_attention(bare_model.attention, 2, 6);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(diag(i, j) == (i == j ? 1.0 : 0.0));

  CHECK_THROWS_AS(export_attention(model.attention, 3, 3), Error);
  CHECK_THROWS_AS(export_attention(model.attention, 0, n + 1), Error);
}

TEST_CASE("csv writers") {
  std::ostringstream pr, roc, scored;
  std::vector<CurvePoint> pts{{0.9, 0.5, 1.0}};
  write_pr_csv(pr, pts);
  write_roc_csv(roc, pts);
  CHECK(pr.str().rfind("threshold,precision,recall\n", 0) == 0);
  CHECK(roc.str().rfind("threshold,fpr,tpr\n", 0) == 0);
  write_scored_pairs_csv(scored, make_pairs({0.25}, {}));
  CHECK(scored.str() == "src,dst,score,label\n0,1,0.25,1\n");
}
