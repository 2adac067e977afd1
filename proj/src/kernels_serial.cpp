#include <algorithm>
#include <cmath>
#include <limits>

#include "tracelink/kernels.hpp"

namespace tracelink {

Topology make_topology(const WindowedGraph& graph) {
  const std::size_t n = graph.n_nodes;
  Topology t;
  t.n_nodes = n;
  t.src = graph.edge_src;
  t.dst = graph.edge_dst;
  for (std::size_t i = 0; i < n; ++i) {
    t.src.push_back(static_cast<NodeId>(i));
    t.dst.push_back(static_cast<NodeId>(i));
  }
  const std::size_t m = t.src.size();

  auto build = [&](const std::vector<NodeId>& key, std::vector<std::size_t>& offsets,
                   std::vector<std::size_t>& ids) {
    offsets.assign(n + 1, 0);
    for (std::size_t e = 0; e < m; ++e) ++offsets[key[e] + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    ids.resize(m);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t e = 0; e < m; ++e) ids[fill[key[e]]++] = e;
  };
  build(t.dst, t.in_offsets, t.in_edges);
  build(t.src, t.out_offsets, t.out_edges);
  return t;
}

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.cols, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double ari = a(r, i);
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += ari * b(r, j);
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  }
}

void attention_forward(const Topology& topo, const Matrix& z, const Matrix& att,
                       std::size_t heads, Matrix& out, AttentionCache& cache) {
  const std::size_t n = topo.n_nodes;
  const std::size_t m = topo.edge_count();
  const std::size_t f = z.cols / heads;
  cache.raw.resize(m, heads);
  cache.alpha.resize(m, heads);
  out.resize(n, z.cols);

  for (std::size_t k = 0; k < heads; ++k) {
    std::vector<double> score(m);
    std::vector<double> node_max(n, -std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < m; ++e) {
      double r = 0;
      for (std::size_t c = 0; c < f; ++c) {
        r += att(k, c) * z(topo.dst[e], k * f + c) + att(k, f + c) * z(topo.src[e], k * f + c);
      }
      cache.raw(e, k) = r;
      score[e] = r > 0 ? r : kLeakySlope * r;
      node_max[topo.dst[e]] = std::max(node_max[topo.dst[e]], score[e]);
    }
    std::vector<double> denom(n, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      score[e] = std::exp(score[e] - node_max[topo.dst[e]]);
      denom[topo.dst[e]] += score[e];
    }
    for (std::size_t e = 0; e < m; ++e) {
      const double a = score[e] / denom[topo.dst[e]];
      cache.alpha(e, k) = a;
      for (std::size_t c = 0; c < f; ++c) {
        out(topo.dst[e], k * f + c) += a * z(topo.src[e], k * f + c);
      }
    }
  }
}

void attention_backward(const Topology& topo, const Matrix& z, const Matrix& att,
                        std::size_t heads, const AttentionCache& cache, const Matrix& d_out,
                        Matrix& d_z, Matrix& d_att) {
  const std::size_t n = topo.n_nodes;
  const std::size_t m = topo.edge_count();
  const std::size_t f = z.cols / heads;
  d_z.resize(z.rows, z.cols);
  d_att.resize(heads, 2 * f);

  for (std::size_t k = 0; k < heads; ++k) {
    // d alpha_e = d_out_i . z_j ; softmax backward needs sum_i alpha d alpha.
    std::vector<double> d_alpha(m);
    std::vector<double> weighted(n, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      const NodeId i = topo.dst[e];
      const NodeId j = topo.src[e];
      double s = 0;
      for (std::size_t c = 0; c < f; ++c) s += d_out(i, k * f + c) * z(j, k * f + c);
      d_alpha[e] = s;
      weighted[i] += cache.alpha(e, k) * s;
      for (std::size_t c = 0; c < f; ++c) {
        d_z(j, k * f + c) += cache.alpha(e, k) * d_out(i, k * f + c);
      }
    }
    for (std::size_t e = 0; e < m; ++e) {
      const NodeId i = topo.dst[e];
      const NodeId j = topo.src[e];
      const double d_score = cache.alpha(e, k) * (d_alpha[e] - weighted[i]);
      const double d_raw = cache.raw(e, k) > 0 ? d_score : kLeakySlope * d_score;
      for (std::size_t c = 0; c < f; ++c) {
        d_att(k, c) += d_raw * z(i, k * f + c);
        d_att(k, f + c) += d_raw * z(j, k * f + c);
        d_z(i, k * f + c) += d_raw * att(k, c);
        d_z(j, k * f + c) += d_raw * att(k, f + c);
      }
    }
  }
}

}  // namespace serial
}  // namespace tracelink
