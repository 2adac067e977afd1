#include "tracelink/graph.hpp"

#include <string>

#include "tracelink/error.hpp"

namespace tracelink {

WindowedGraph build_graph(const TimeWindow& window, std::size_t n_nodes) {
  WindowedGraph g;
  g.n_nodes = n_nodes;
  g.window_index = window.index;
  g.window_start = window.start;
  g.window_end = window.end;
  g.edge_src.reserve(window.events.size());
  g.edge_dst.reserve(window.events.size());
  g.edge_ts.reserve(window.events.size());
  for (const auto& ev : window.events) {
    if (ev.src >= n_nodes || ev.dst >= n_nodes) {
      throw Error(ErrorKind::Data, "edge (" + std::to_string(ev.src) + "," +
                                       std::to_string(ev.dst) + ") references a node >= " +
                                       std::to_string(n_nodes));
    }
    g.edge_src.push_back(ev.src);
    g.edge_dst.push_back(ev.dst);
    g.edge_ts.push_back(ev.timestamp);
  }
  return g;
}

EdgeSet unique_edge_set(const WindowedGraph& graph) {
  EdgeSet set;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    set.emplace(graph.edge_src[e], graph.edge_dst[e]);
  }
  return set;
}

std::vector<std::size_t> degree_counts(const WindowedGraph& graph) {
  std::vector<std::size_t> deg(graph.n_nodes, 0);
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    ++deg[graph.edge_src[e]];
    ++deg[graph.edge_dst[e]];
  }
  return deg;
}

void write_edge_list(std::ostream& out, const WindowedGraph& graph) {
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    out << graph.edge_src[e] << ',' << graph.edge_dst[e] << ',' << graph.edge_ts[e] << '\n';
  }
}

}  // namespace tracelink
