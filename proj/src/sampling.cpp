#include "tracelink/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tracelink/error.hpp"

namespace tracelink {

std::string to_string(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::None: return "none";
    case SamplingKind::Simple: return "simple";
    case SamplingKind::Advanced: return "advanced";
  }
  return "?";
}

SamplingKind parse_sampling_kind(const std::string& s) {
  if (s == "none") return SamplingKind::None;
  if (s == "simple") return SamplingKind::Simple;
  if (s == "advanced") return SamplingKind::Advanced;
  throw Error(ErrorKind::Config, "unknown sampling kind '" + s + "'");
}

SamplingStrategy SamplingStrategy::advanced(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0) {
    throw Error(ErrorKind::Config, "sampling alpha must be finite and >= 0");
  }
  return {SamplingKind::Advanced, alpha};
}

SamplingStrategy analyze_sampling(std::size_t n_pos, std::size_t n_nodes,
                                  const ImbalanceThresholds& thresholds, double alpha) {
  const double all_pairs = static_cast<double>(n_nodes) * static_cast<double>(n_nodes - 1);
  const double n_neg = all_pairs - static_cast<double>(n_pos);
  const double ratio = n_neg > 0 ? static_cast<double>(n_pos) / n_neg
                                 : std::numeric_limits<double>::infinity();
  if (ratio >= thresholds.balanced) return SamplingStrategy::none();
  if (ratio >= thresholds.moderate) return SamplingStrategy::simple();
  return SamplingStrategy::advanced(alpha);
}

NegativeEdges simple_negative_sample(const EdgeSet& existing, std::size_t n_nodes,
                                     std::size_t k, Rng& rng) {
  NegativeEdges out;
  if (k == 0) return out;
  std::size_t blocked = 0;
  for (const auto& [s, d] : existing) {
    if (s != d && s < n_nodes && d < n_nodes) ++blocked;
  }
  const std::size_t total = n_nodes < 2 ? 0 : n_nodes * (n_nodes - 1);
  if (total <= blocked || k > total - blocked) {
    throw Error(ErrorKind::Sampling, "cannot draw " + std::to_string(k) +
                                         " negatives: only " +
                                         std::to_string(total - std::min(total, blocked)) +
                                         " non-edges exist");
  }
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n_nodes - 1));
  out.pairs.reserve(k);
  while (out.pairs.size() < k) {
    NodeId s = pick(rng);
    NodeId d = pick(rng);
    if (s == d || existing.count({s, d})) continue;
    out.pairs.emplace_back(s, d);
  }
  return out;
}

std::vector<double> degree_weights(const std::vector<std::size_t>& degrees, double alpha) {
  std::vector<double> w(degrees.size());
  double total = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    // std::pow(0.0, 0.0) == 1, which is the convention we want.
    w[i] = std::pow(static_cast<double>(degrees[i]), alpha);
    total += w[i];
  }
  if (total > 0) {
    for (auto& x : w) x /= total;
  }
  return w;
}

SourceSampler::SourceSampler(const WindowedGraph& graph, double alpha) {
  auto weights = degree_weights(degree_counts(graph), alpha);
  dist_ = std::discrete_distribution<NodeId>(weights.begin(), weights.end());
}

NegativeEdges advanced_negative_sample(const WindowedGraph& graph, const EdgeSet& existing,
                                       double alpha, Rng& rng, std::size_t retry_factor) {
  NegativeEdges out;
  const std::size_t n_edges = graph.edge_count();
  if (n_edges == 0) return out;
  const std::size_t n = graph.n_nodes;
  SourceSampler pick_src(graph, alpha);
  std::uniform_int_distribution<NodeId> pick_dst(0, static_cast<NodeId>(n - 1));
  const std::size_t budget = std::max<std::size_t>(1, retry_factor * n);

  out.pairs.reserve(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    bool found = false;
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
      NodeId s = pick_src(rng);
      NodeId d = pick_dst(rng);
      if (s == d || existing.count({s, d}) || existing.count({d, s})) continue;
      out.pairs.emplace_back(s, d);
      found = true;
      break;
    }
    if (!found) {
      throw Error(ErrorKind::Sampling, "no legal negative pair found after " +
                                           std::to_string(budget) + " attempts");
    }
  }
  return out;
}

}  // namespace tracelink

namespace tracelink {

NegativeEdges draw_negatives(const WindowedGraph& graph, const SamplingStrategy& strategy,
                             Rng& rng, std::size_t retry_factor) {
  switch (strategy.kind) {
    case SamplingKind::None:
      return {};
    case SamplingKind::Simple:
      return simple_negative_sample(unique_edge_set(graph), graph.n_nodes, graph.edge_count(),
                                    rng);
    case SamplingKind::Advanced:
      return advanced_negative_sample(graph, unique_edge_set(graph), strategy.alpha.value_or(0.1),
                                      rng, retry_factor);
  }
  return {};
}

}  // namespace tracelink
