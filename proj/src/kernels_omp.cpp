#include <algorithm>
#include <cmath>
#include <limits>

#include "tracelink/kernels.hpp"

namespace tracelink::omp {
namespace {

inline double leaky(double x) { return x > 0 ? x : kLeakySlope * x; }

// dot of a length-f slice of `coeff` row `k` starting at `offset` with z row `row`, head k
inline double head_dot(const Matrix& coeff, std::size_t k, std::size_t offset, const Matrix& z,
                       std::size_t row, std::size_t f) {
  const double* a = coeff.data.data() + k * coeff.cols + offset;
  const double* x = z.data.data() + row * z.cols + k * f;
  double s = 0;
  for (std::size_t c = 0; c < f; ++c) s += a[c] * x[c];
  return s;
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.rows, b.cols);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* ci = c.data.data() + i * c.cols;
    const double* ai = a.data.data() + i * a.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      const double* bk = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.cols, b.cols);
  // Gradient inputs are mostly zero rows; skipping them keeps the summation
  // order of the remaining terms unchanged.
  std::vector<std::size_t> live;
  for (std::size_t r = 0; r < b.rows; ++r) {
    const double* br = b.data.data() + r * b.cols;
    if (std::any_of(br, br + b.cols, [](double x) { return x != 0.0; })) live.push_back(r);
  }
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* ci = c.data.data() + i * c.cols;
    for (std::size_t r : live) {
      const double ari = a.data[r * a.cols + i];
      const double* br = b.data.data() + r * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += ari * br[j];
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  c.resize(a.rows, b.rows);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* ai = a.data.data() + i * a.cols;
    if (std::all_of(ai, ai + a.cols, [](double x) { return x == 0.0; })) continue;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.data.data() + j * b.cols;
      double s = 0;
      for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      c.data[i * c.cols + j] = s;
    }
  }
}

void attention_forward(const Topology& topo, const Matrix& z, const Matrix& att,
                       std::size_t heads, Matrix& out, AttentionCache& cache) {
  const std::size_t n = topo.n_nodes;
  const std::size_t f = z.cols / heads;
  cache.raw.resize(topo.edge_count(), heads);
  cache.alpha.resize(topo.edge_count(), heads);
  out.resize(n, z.cols);

  // Source-side halves of the attention logits, one per (node, head).
  Matrix src_part(n, heads);
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < nn; ++j) {
    for (std::size_t k = 0; k < heads; ++k) src_part(j, k) = head_dot(att, k, f, z, j, f);
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const std::size_t lo = topo.in_offsets[i];
    const std::size_t hi = topo.in_offsets[i + 1];
    for (std::size_t k = 0; k < heads; ++k) {
      const double dst_part = head_dot(att, k, 0, z, i, f);
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.in_edges[p];
        const double r = dst_part + src_part(topo.src[e], k);
        cache.raw(e, k) = r;
        peak = std::max(peak, leaky(r));
      }
      double denom = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.in_edges[p];
        const double w = std::exp(leaky(cache.raw(e, k)) - peak);
        cache.alpha(e, k) = w;
        denom += w;
      }
      double* oi = out.data.data() + i * out.cols + k * f;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.in_edges[p];
        const double a = cache.alpha(e, k) / denom;
        cache.alpha(e, k) = a;
        const double* zj = z.data.data() + topo.src[e] * z.cols + k * f;
        for (std::size_t c = 0; c < f; ++c) oi[c] += a * zj[c];
      }
    }
  }
}

void attention_backward(const Topology& topo, const Matrix& z, const Matrix& att,
                        std::size_t heads, const AttentionCache& cache, const Matrix& d_out,
                        Matrix& d_z, Matrix& d_att) {
  const std::size_t n = topo.n_nodes;
  const std::size_t f = z.cols / heads;
  d_z.resize(z.rows, z.cols);
  d_att.resize(heads, 2 * f);

  Matrix d_raw(topo.edge_count(), heads);
  Matrix d_dst(n, heads);  // sum of d_raw over in-edges
  Matrix d_src(n, heads);  // sum of d_raw over out-edges
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const std::size_t lo = topo.in_offsets[i];
    const std::size_t hi = topo.in_offsets[i + 1];
    for (std::size_t k = 0; k < heads; ++k) {
      const double* gi = d_out.data.data() + i * d_out.cols + k * f;
      double weighted = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.in_edges[p];
        const double* zj = z.data.data() + topo.src[e] * z.cols + k * f;
        double s = 0;
        for (std::size_t c = 0; c < f; ++c) s += gi[c] * zj[c];
        d_raw(e, k) = s;  // d alpha, rewritten below
        weighted += cache.alpha(e, k) * s;
      }
      double acc = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.in_edges[p];
        const double d_score = cache.alpha(e, k) * (d_raw(e, k) - weighted);
        const double g = cache.raw(e, k) > 0 ? d_score : kLeakySlope * d_score;
        d_raw(e, k) = g;
        acc += g;
      }
      d_dst(i, k) = acc;
    }
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < nn; ++j) {
    const std::size_t lo = topo.out_offsets[j];
    const std::size_t hi = topo.out_offsets[j + 1];
    double* dzj = d_z.data.data() + j * d_z.cols;
    for (std::size_t k = 0; k < heads; ++k) {
      double acc = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t e = topo.out_edges[p];
        const double a = cache.alpha(e, k);
        const double* gi = d_out.data.data() + topo.dst[e] * d_out.cols + k * f;
        for (std::size_t c = 0; c < f; ++c) dzj[k * f + c] += a * gi[c];
        acc += d_raw(e, k);
      }
      d_src(j, k) = acc;
      const double* a_dst = att.data.data() + k * att.cols;
      const double* a_src = a_dst + f;
      for (std::size_t c = 0; c < f; ++c) {
        dzj[k * f + c] += d_dst(j, k) * a_dst[c] + acc * a_src[c];
      }
    }
  }

  const std::ptrdiff_t cells = static_cast<std::ptrdiff_t>(heads * f);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < cells; ++q) {
    const std::size_t k = static_cast<std::size_t>(q) / f;
    const std::size_t c = static_cast<std::size_t>(q) % f;
    double g_dst = 0;
    double g_src = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = z(i, k * f + c);
      g_dst += d_dst(i, k) * zi;
      g_src += d_src(i, k) * zi;
    }
    d_att(k, c) = g_dst;
    d_att(k, f + c) = g_src;
  }
}

}  // namespace tracelink::omp
