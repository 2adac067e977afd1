#pragma once

#include <cstdint>
#include <vector>

#include "tracelink/graph.hpp"
#include "tracelink/ingest.hpp"

namespace tracelink {

/// Synthetic call-graph trace parameters.
///
/// The first `gateways` services are ingress points. Every other service is
/// routed through one fixed gateway; a request picks its entry service
/// uniformly and arrives through that service's gateway. Each non-gateway
/// service also owns a fixed list of downstream dependencies picked by
/// Zipf(hub_exponent) popularity over non-gateway services; routes plus
/// dependencies form the backbone. From the entry service the request
/// expands into a call tree:
/// every call spawns a geometric number of children with mean m = d / (1 + d),
/// d = tree_depth_mean, so an untruncated tree carries d calls on average. A
/// child follows the backbone except with probability noise_fraction, when
/// any service is picked by popularity instead. The per-window event count is
/// Poisson with mean events_per_window_mean * (1 + load_amplitude *
/// sin(2 pi t / period)) at the window midpoint t.
struct SynthConfig {
  std::size_t n_services = 200;
  Millis duration = 10000;
  Millis window_hint = 100;
  double events_per_window_mean = 60;
  double hub_exponent = 2.0;
  double tree_depth_mean = 3.0;
  Millis period = 2000;
  double load_amplitude = 0.5;
  std::size_t deps_per_service = 1;
  double noise_fraction = 0.05;
  std::size_t max_depth = 6;
  std::size_t gateways = 4;
  std::uint64_t seed = 1;
};

/// Throws Error{Config} for invalid or zero-yield configurations.
void validate(const SynthConfig& cfg);

/// Service names "svc-NNNN" by index.
std::string service_name(std::size_t index);

/// The pairs requests follow (caller, callee) by service index: each
/// service's gateway route, then the dependency lists.
std::vector<std::pair<std::size_t, std::size_t>> backbone_pairs(const SynthConfig& cfg);

/// Events sorted by timestamp, all within [0, duration).
std::vector<CleanEvent> generate_trace(const SynthConfig& cfg);

/// Distinct (caller, callee) pairs of events with timestamp in [t_train, t_max),
/// expressed in the ids of `mapping`. Unknown names throw.
EdgeSet ground_truth_future_links(const std::vector<CleanEvent>& trace, const NodeMapping& mapping,
                                  Millis t_train, Millis t_max);

}  // namespace tracelink
