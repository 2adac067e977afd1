#pragma once

#include <cstdint>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "tracelink/preprocess.hpp"

namespace tracelink {

using EdgePair = std::pair<NodeId, NodeId>;
using EdgeSet = std::set<EdgePair>;

/// Directed multigraph of one time window. edge_src/edge_dst/edge_ts are
/// parallel arrays; parallel edges are kept.
struct WindowedGraph {
  std::size_t n_nodes = 0;
  std::size_t window_index = 0;
  std::vector<NodeId> edge_src;
  std::vector<NodeId> edge_dst;
  std::vector<Millis> edge_ts;
  Millis window_start = 0;
  Millis window_end = 0;

  std::size_t edge_count() const { return edge_src.size(); }
};

/// Node i's feature is the i-th standard basis vector of R^n. Never
/// materialized: projecting it through a weight matrix selects row i.
struct IdentityFeatures {
  std::size_t n_nodes = 0;
  std::size_t dim() const { return n_nodes; }
  double dot(NodeId i, NodeId j) const { return i == j ? 1.0 : 0.0; }
};

/// One edge per event, in event order. Throws Error{Data} on ids >= n_nodes.
WindowedGraph build_graph(const TimeWindow& window, std::size_t n_nodes);

EdgeSet unique_edge_set(const WindowedGraph& graph);

/// In-degree plus out-degree per node, multi-edges counted.
std::vector<std::size_t> degree_counts(const WindowedGraph& graph);

/// "src,dst,timestamp" per line.
void write_edge_list(std::ostream& out, const WindowedGraph& graph);

}  // namespace tracelink
