#pragma once

#include <vector>

#include "tracelink/graph.hpp"
#include "tracelink/matrix.hpp"

namespace tracelink {

inline constexpr double kLeakySlope = 0.2;

/// Message-passing structure of one window: every graph edge j->i plus a
/// self-loop i->i per node. Edge ids 0..E-1 are the graph edges in order,
/// E..E+n-1 the self-loops. Both CSR views list edge ids in ascending order.
struct Topology {
  std::size_t n_nodes = 0;
  std::vector<NodeId> src;
  std::vector<NodeId> dst;
  std::vector<std::size_t> in_offsets;   // n+1, grouped by dst
  std::vector<std::size_t> in_edges;
  std::vector<std::size_t> out_offsets;  // n+1, grouped by src
  std::vector<std::size_t> out_edges;

  std::size_t edge_count() const { return src.size(); }
};

Topology make_topology(const WindowedGraph& graph);

/// Per-edge, per-head values kept from the forward pass.
struct AttentionCache {
  Matrix raw;    // E x heads, a_dst.z_i + a_src.z_j before LeakyReLU
  Matrix alpha;  // E x heads, softmax over each destination's in-edges
};

// Layout shared by both implementations:
//   z    n x (heads*F), head k in columns [k*F, (k+1)*F)
//   att  heads x 2F, row k = [a_dst | a_src]
//   out  n x (heads*F), out_i^k = sum_{e: j->i} alpha_e^k z_j^k

namespace serial {

/// Straightforward edge-list loops with scatter-adds. Kept as the reference
/// the parallel kernels are tested against.
void matmul(const Matrix& a, const Matrix& b, Matrix& c);     // c = a b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);  // c = a^T b
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);  // c = a b^T
void attention_forward(const Topology& topo, const Matrix& z, const Matrix& att,
                       std::size_t heads, Matrix& out, AttentionCache& cache);
/// Accumulates nothing: d_z and d_att are overwritten.
void attention_backward(const Topology& topo, const Matrix& z, const Matrix& att,
                        std::size_t heads, const AttentionCache& cache, const Matrix& d_out,
                        Matrix& d_z, Matrix& d_att);

}  // namespace serial

namespace omp {

/// OpenMP versions. Every output element is produced by one thread with a
/// fixed summation order, so results do not depend on the thread count.
void matmul(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
void attention_forward(const Topology& topo, const Matrix& z, const Matrix& att,
                       std::size_t heads, Matrix& out, AttentionCache& cache);
void attention_backward(const Topology& topo, const Matrix& z, const Matrix& att,
                        std::size_t heads, const AttentionCache& cache, const Matrix& d_out,
                        Matrix& d_z, Matrix& d_att);

}  // namespace omp

}  // namespace tracelink
