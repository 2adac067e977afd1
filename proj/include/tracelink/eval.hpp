#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "tracelink/gat.hpp"

namespace tracelink {

struct ScoredPair {
  NodeId src = 0;
  NodeId dst = 0;
  double score = 0;  // link probability
  int label = 0;     // 1 = observed link, 0 = sampled negative
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Zero denominators yield 0 with the matching flag raised.
struct ScalarMetrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool accuracy_undefined = false;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

/// One point of a threshold sweep. PR: x = recall, y = precision.
/// ROC: x = false-positive rate, y = true-positive rate.
struct CurvePoint {
  double threshold = 0;
  double x = 0;
  double y = 0;
};

/// Mann-Whitney estimate, ties counted 1/2. Error{Metric} if a class is absent.
double auc(std::span<const ScoredPair> pairs);

/// Predicted positive iff score > tau.
Confusion confusion(std::span<const ScoredPair> pairs, double tau = 0.5);

ScalarMetrics scalar_metrics(const Confusion& c);

/// Sweep over distinct scores, descending; predicted positive iff score >= threshold.
std::vector<CurvePoint> pr_points(std::span<const ScoredPair> pairs);
/// Same sweep, preceded by the (0,0) anchor at threshold +inf.
std::vector<CurvePoint> roc_points(std::span<const ScoredPair> pairs);

/// Trapezoidal area under a curve, integrating y over x.
double trapezoid_area(std::span<const CurvePoint> points);

struct MetricBlock {
  double auc = 0;
  ScalarMetrics scalars;
  Confusion counts;
};

struct WindowReport {
  std::size_t window = 0;
  Millis start = 0;
  Millis end = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  MetricBlock metrics;
  std::vector<CurvePoint> pr;
  std::vector<CurvePoint> roc;
};

struct EvalReport {
  double tau = 0.5;
  std::vector<WindowReport> windows;
  MetricBlock pooled;  // all windows' scored pairs pooled
  MetricBlock macro;   // unweighted mean of per-window metrics; counts summed
  std::vector<CurvePoint> pooled_pr;
  std::vector<CurvePoint> pooled_roc;
};

struct EvalConfig {
  SamplingStrategy sampling = SamplingStrategy::advanced(0.1);
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::size_t retry_factor = 10;
};

struct EvalResult {
  EvalReport report;
  std::vector<std::vector<ScoredPair>> scored;  // one entry per evaluated window
  AttentionRecord attention;                    // layer 1, last evaluated window
};

/// Scores every edge of each non-empty window and one sampled negative per
/// edge, using that window's own edges for message passing. Windows are
/// independent and run in parallel; negatives for window w are drawn from a
/// generator seeded by (seed, w). Error{Training} if all windows are empty.
EvalResult evaluate_windows(const GatParams& params, const std::vector<WindowedGraph>& windows,
                            const EvalConfig& cfg);

/// Dense (hi-lo)^2 matrix of head-averaged coefficients, row = destination,
/// column = source. Parallel edges add up; absent pairs are 0.
Matrix export_attention(const AttentionRecord& record, std::size_t lo, std::size_t hi);

void write_metrics_json(std::ostream& out, const EvalReport& report);
void write_pr_csv(std::ostream& out, std::span<const CurvePoint> points);
void write_roc_csv(std::ostream& out, std::span<const CurvePoint> points);
void write_scored_pairs_csv(std::ostream& out, std::span<const ScoredPair> pairs);
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace tracelink
