#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tracelink/graph.hpp"

namespace tracelink {

using Rng = std::mt19937_64;

enum class SamplingKind { None, Simple, Advanced };

std::string to_string(SamplingKind kind);
/// Accepts "none", "simple", "advanced" (case-sensitive).
SamplingKind parse_sampling_kind(const std::string& s);

/// `alpha` is the degree exponent and only present for Advanced.
struct SamplingStrategy {
  SamplingKind kind = SamplingKind::Advanced;
  std::optional<double> alpha = 0.1;

  static SamplingStrategy none() { return {SamplingKind::None, std::nullopt}; }
  static SamplingStrategy simple() { return {SamplingKind::Simple, std::nullopt}; }
  static SamplingStrategy advanced(double alpha = 0.1);
};

/// Positive/negative ratio cut-offs used by analyze_sampling.
struct ImbalanceThresholds {
  double balanced = 0.8;   // ratio >= balanced -> None
  double moderate = 0.01;  // moderate <= ratio < balanced -> Simple
};

struct NegativeEdges {
  std::vector<EdgePair> pairs;
};

/// Picks a strategy from |P| / (n(n-1) - |P|). Advanced gets `alpha`.
SamplingStrategy analyze_sampling(std::size_t n_pos, std::size_t n_nodes,
                                  const ImbalanceThresholds& thresholds = {},
                                  double alpha = 0.1);

/// k ordered non-self-loop pairs drawn uniformly from those not in `existing`.
/// Throws Error{Sampling} when fewer than k candidates exist.
NegativeEdges simple_negative_sample(const EdgeSet& existing, std::size_t n_nodes,
                                     std::size_t k, Rng& rng);

/// Source weights d^alpha (0^0 = 1), normalized.
std::vector<double> degree_weights(const std::vector<std::size_t>& degrees, double alpha);

/// Source-node draw used by advanced sampling: P(v) = d_v^alpha / sum d^alpha.
class SourceSampler {
 public:
  SourceSampler(const WindowedGraph& graph, double alpha);
  NodeId operator()(Rng& rng) { return dist_(rng); }
  std::vector<double> probabilities() const { return dist_.probabilities(); }

 private:
  std::discrete_distribution<NodeId> dist_;
};

/// One negative per edge of `graph`. Source ~ d^alpha, destination uniform;
/// pairs that exist (either direction) or are self-loops are redrawn, at most
/// retry_factor * n_nodes times per edge before Error{Sampling}.
NegativeEdges advanced_negative_sample(const WindowedGraph& graph, const EdgeSet& existing,
                                       double alpha, Rng& rng,
                                       std::size_t retry_factor = 10);

}  // namespace tracelink

namespace tracelink {

/// Negatives for one window under `strategy`, excluding the window's own
/// edges: one per edge for Simple/Advanced, none for None.
NegativeEdges draw_negatives(const WindowedGraph& graph, const SamplingStrategy& strategy,
                             Rng& rng, std::size_t retry_factor = 10);

}  // namespace tracelink
