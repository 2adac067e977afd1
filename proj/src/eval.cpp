#include "tracelink/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "json.hpp"

#include "tracelink/error.hpp"
#include "tracelink/seed.hpp"

namespace tracelink {
namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts count_classes(std::span<const ScoredPair> pairs) {
  ClassCounts c;
  for (const auto& p : pairs) (p.label ? c.pos : c.neg)++;
  return c;
}

std::vector<ScoredPair> sorted_desc(std::span<const ScoredPair> pairs) {
  std::vector<ScoredPair> v(pairs.begin(), pairs.end());
  std::stable_sort(v.begin(), v.end(),
                   [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });
  return v;
}

// Calls fn(threshold, tp, fp) once per distinct score, highest first.
template <typename Fn>
void sweep(std::span<const ScoredPair> pairs, Fn&& fn) {
  auto v = sorted_desc(pairs);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < v.size();) {
    const double t = v[i].score;
    while (i < v.size() && v[i].score == t) {
      (v[i].label ? tp : fp)++;
      ++i;
    }
    fn(t, tp, fp);
  }
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

MetricBlock metric_block(std::span<const ScoredPair> pairs, double tau) {
  MetricBlock b;
  b.auc = auc(pairs);
  b.counts = confusion(pairs, tau);
  b.scalars = scalar_metrics(b.counts);
  return b;
}

nlohmann::json block_json(const MetricBlock& b) {
  nlohmann::json j;
  j["auc"] = b.auc;
  j["accuracy"] = b.scalars.accuracy;
  j["precision"] = b.scalars.precision;
  j["recall"] = b.scalars.recall;
  j["f1"] = b.scalars.f1;
  j["tp"] = b.counts.tp;
  j["fp"] = b.counts.fp;
  j["fn"] = b.counts.fn;
  j["tn"] = b.counts.tn;
  nlohmann::json flags = nlohmann::json::array();
  if (b.scalars.accuracy_undefined) flags.push_back("accuracy");
  if (b.scalars.precision_undefined) flags.push_back("precision");
  if (b.scalars.recall_undefined) flags.push_back("recall");
  if (b.scalars.f1_undefined) flags.push_back("f1");
  j["undefined"] = flags;
  return j;
}

}  // namespace

double auc(std::span<const ScoredPair> pairs) {
  const ClassCounts cc = count_classes(pairs);
  if (cc.pos == 0 || cc.neg == 0) {
    throw Error(ErrorKind::Metric, "AUC needs at least one positive and one negative");
  }
  // Rank-sum form: for each tie group, positives beat all negatives below
  // the group and half of the negatives inside it.
  auto v = sorted_desc(pairs);
  double wins = 0;
  std::size_t neg_remaining = cc.neg;
  for (std::size_t i = 0; i < v.size();) {
    const double t = v[i].score;
    std::size_t gp = 0, gn = 0;
    while (i < v.size() && v[i].score == t) {
      (v[i].label ? gp : gn)++;
      ++i;
    }
    neg_remaining -= gn;
    wins += static_cast<double>(gp) * (static_cast<double>(neg_remaining) + 0.5 * static_cast<double>(gn));
  }
  return wins / (static_cast<double>(cc.pos) * static_cast<double>(cc.neg));
}

Confusion confusion(std::span<const ScoredPair> pairs, double tau) {
  Confusion c;
  for (const auto& p : pairs) {
    const bool predicted = p.score > tau;
    if (p.label) {
      (predicted ? c.tp : c.fn)++;
    } else {
      (predicted ? c.fp : c.tn)++;
    }
  }
  return c;
}

ScalarMetrics scalar_metrics(const Confusion& c) {
  ScalarMetrics m;
  auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    if (den == 0) {
      undefined = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(c.tp + c.tn, c.total(), m.accuracy_undefined);
  m.precision = ratio(c.tp, c.tp + c.fp, m.precision_undefined);
  m.recall = ratio(c.tp, c.tp + c.fn, m.recall_undefined);
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_undefined = true;
  }
  return m;
}

std::vector<CurvePoint> pr_points(std::span<const ScoredPair> pairs) {
  const ClassCounts cc = count_classes(pairs);
  if (cc.pos == 0) throw Error(ErrorKind::Metric, "PR curve needs at least one positive");
  std::vector<CurvePoint> pts;
  sweep(pairs, [&](double t, std::size_t tp, std::size_t fp) {
    pts.push_back({t, static_cast<double>(tp) / static_cast<double>(cc.pos),
                   static_cast<double>(tp) / static_cast<double>(tp + fp)});
  });
  return pts;
}

std::vector<CurvePoint> roc_points(std::span<const ScoredPair> pairs) {
  const ClassCounts cc = count_classes(pairs);
  if (cc.pos == 0 || cc.neg == 0) {
    throw Error(ErrorKind::Metric, "ROC curve needs both classes");
  }
  std::vector<CurvePoint> pts{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  sweep(pairs, [&](double t, std::size_t tp, std::size_t fp) {
    pts.push_back({t, static_cast<double>(fp) / static_cast<double>(cc.neg),
                   static_cast<double>(tp) / static_cast<double>(cc.pos)});
  });
  return pts;
}

double trapezoid_area(std::span<const CurvePoint> points) {
  double area = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) * 0.5;
  }
  return area;
}

EvalResult evaluate_windows(const GatParams& params, const std::vector<WindowedGraph>& windows,
                            const EvalConfig& cfg) {
  std::vector<const WindowedGraph*> active;
  for (const auto& w : windows) {
    if (w.edge_count() > 0) active.push_back(&w);
  }
  if (active.empty()) throw Error(ErrorKind::Training, "no test window contains any edge");
  SamplingStrategy sampling = cfg.sampling;
  // Scoring needs a negative class even when training used none.
  if (sampling.kind == SamplingKind::None) sampling = SamplingStrategy::simple();

  EvalResult result;
  result.report.tau = cfg.tau;
  result.scored.resize(active.size());
  result.report.windows.resize(active.size());
  std::vector<AttentionRecord> attention(active.size());
  std::vector<std::exception_ptr> failures(active.size());

  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(active.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t a = 0; a < count; ++a) {
    try {
      const WindowedGraph& g = *active[a];
      Rng rng(derive_seed(cfg.seed, "eval-negatives", g.window_index));
      const NegativeEdges negatives = draw_negatives(g, sampling, rng, cfg.retry_factor);
      const ForwardPass pass = forward(params, g);
      auto& scored = result.scored[a];
      scored.reserve(g.edge_count() + negatives.pairs.size());
      for (std::size_t e = 0; e < g.edge_count(); ++e) {
        scored.push_back({g.edge_src[e], g.edge_dst[e],
                          link_probability(pass.h2, g.edge_src[e], g.edge_dst[e]), 1});
      }
      for (const auto& [s, d] : negatives.pairs) {
        scored.push_back({s, d, link_probability(pass.h2, s, d), 0});
      }
      WindowReport& wr = result.report.windows[a];
      wr.window = g.window_index;
      wr.start = g.window_start;
      wr.end = g.window_end;
      wr.positives = g.edge_count();
      wr.negatives = negatives.pairs.size();
      wr.metrics = metric_block(scored, cfg.tau);
      wr.pr = pr_points(scored);
      wr.roc = roc_points(scored);
      if (a + 1 == count) attention[a] = attention_record(pass, params.dims.heads);
    } catch (...) {
      failures[a] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  result.attention = std::move(attention.back());

  std::vector<ScoredPair> pooled;
  for (const auto& s : result.scored) pooled.insert(pooled.end(), s.begin(), s.end());
  EvalReport& rep = result.report;
  rep.pooled = metric_block(pooled, cfg.tau);
  rep.pooled_pr = pr_points(pooled);
  rep.pooled_roc = roc_points(pooled);

  const double n = static_cast<double>(rep.windows.size());
  for (const auto& w : rep.windows) {
    rep.macro.auc += w.metrics.auc / n;
    rep.macro.scalars.accuracy += w.metrics.scalars.accuracy / n;
    rep.macro.scalars.precision += w.metrics.scalars.precision / n;
    rep.macro.scalars.recall += w.metrics.scalars.recall / n;
    rep.macro.scalars.f1 += w.metrics.scalars.f1 / n;
    rep.macro.counts.tp += w.metrics.counts.tp;
    rep.macro.counts.fp += w.metrics.counts.fp;
    rep.macro.counts.fn += w.metrics.counts.fn;
    rep.macro.counts.tn += w.metrics.counts.tn;
  }
  return result;
}

Matrix export_attention(const AttentionRecord& record, std::size_t lo, std::size_t hi) {
  if (!(lo < hi && hi <= record.n_nodes)) {
    throw Error(ErrorKind::Config, "attention export range [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + ") is empty or exceeds " +
                                       std::to_string(record.n_nodes) + " nodes");
  }
  Matrix m(hi - lo, hi - lo);
  for (std::size_t e = 0; e < record.src.size(); ++e) {
    const std::size_t i = record.dst[e];
    const std::size_t j = record.src[e];
    if (i < lo || i >= hi || j < lo || j >= hi) continue;
    double mean = 0;
    for (std::size_t k = 0; k < record.heads; ++k) mean += record.alpha(e, k);
    m(i - lo, j - lo) += mean / static_cast<double>(record.heads);
  }
  return m;
}

void write_metrics_json(std::ostream& out, const EvalReport& report) {
  nlohmann::json doc;
  doc["tau"] = report.tau;
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : report.windows) {
    nlohmann::json j = block_json(w.metrics);
    j["window"] = w.window;
    j["start_ms"] = w.start;
    j["end_ms"] = w.end;
    j["positives"] = w.positives;
    j["negatives"] = w.negatives;
    windows.push_back(std::move(j));
  }
  doc["windows"] = std::move(windows);
  doc["aggregate"] = block_json(report.pooled);
  doc["macro"] = block_json(report.macro);
  out << doc.dump(2) << '\n';
}

void write_pr_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "threshold,precision,recall\n";
  for (const auto& p : points) out << fmt(p.threshold) << ',' << fmt(p.y) << ',' << fmt(p.x) << '\n';
}

void write_roc_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : points) out << fmt(p.threshold) << ',' << fmt(p.x) << ',' << fmt(p.y) << '\n';
}

void write_scored_pairs_csv(std::ostream& out, std::span<const ScoredPair> pairs) {
  out << "src,dst,score,label\n";
  for (const auto& p : pairs) {
    out << p.src << ',' << p.dst << ',' << fmt(p.score) << ',' << p.label << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << fmt(m(r, c));
    }
    out << '\n';
  }
}

}  // namespace tracelink
