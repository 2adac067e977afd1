#include <omp.h>

#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "tracelink/kernels.hpp"

using namespace tracelink;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows == b.rows);
  REQUIRE(a.cols == b.cols);
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      for (std::size_t k = 0; k < a.cols; ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace

TEST_CASE("matrix products agree with the triple loop") {
  std::mt19937_64 rng(8);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {7, 3, 5}, {33, 17, 9}, {4, 64, 2}}) {
    auto a = testing::random_matrix(m, k, rng);
    auto b = testing::random_matrix(k, n, rng);
    const Matrix want = naive_product(a, b);
    Matrix c;
    serial::matmul(a, b, c);
    CHECK(max_abs_diff(c, want) < 1e-12);
    omp::matmul(a, b, c);
    CHECK(max_abs_diff(c, want) < 1e-12);
    serial::matmul_tn(transpose(a), b, c);
    CHECK(max_abs_diff(c, want) < 1e-12);
    omp::matmul_tn(transpose(a), b, c);
    CHECK(max_abs_diff(c, want) < 1e-12);
    serial::matmul_nt(a, transpose(b), c);
    CHECK(max_abs_diff(c, want) < 1e-12);
    omp::matmul_nt(a, transpose(b), c);
    CHECK(max_abs_diff(c, want) < 1e-12);
  }
}

TEST_CASE("serial and OpenMP attention kernels agree") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 17, heads = 1 + trial % 3, f = 1 + trial % 5;
    auto g = testing::random_graph(n, (trial * 7) % 45, rng, true);
    auto topo = make_topology(g);
    auto z = testing::random_matrix(n, heads * f, rng, 2.0);
    auto att = testing::random_matrix(heads, 2 * f, rng, 2.0);
    auto d_out = testing::random_matrix(n, heads * f, rng);

    Matrix out_s, out_p, dz_s, dz_p, da_s, da_p;
    AttentionCache cache_s, cache_p;
    serial::attention_forward(topo, z, att, heads, out_s, cache_s);
    omp::attention_forward(topo, z, att, heads, out_p, cache_p);
    CHECK(max_abs_diff(out_s, out_p) < 1e-12);
    CHECK(max_abs_diff(cache_s.alpha, cache_p.alpha) < 1e-12);
    serial::attention_backward(topo, z, att, heads, cache_s, d_out, dz_s, da_s);
    omp::attention_backward(topo, z, att, heads, cache_p, d_out, dz_p, da_p);
    CHECK(max_abs_diff(dz_s, dz_p) < 1e-11);
    CHECK(max_abs_diff(da_s, da_p) < 1e-11);
  }
}

TEST_CASE("attention forward matches the dense layer") {
  std::mt19937_64 rng(13);
  const std::size_t n = 9, heads = 2, f = 3;
  auto g = testing::random_graph(n, 25, rng);
  auto w = testing::random_matrix(n, heads * f, rng);
  auto att = testing::random_matrix(heads, 2 * f, rng);
  const auto dense = testing::dense_gat_layer(testing::identity(n), w, att, heads, g);
  Matrix out;
  AttentionCache cache;
  omp::attention_forward(make_topology(g), w, att, heads, out, cache);
  CHECK(max_abs_diff(out, dense.out) < 1e-12);
}

TEST_CASE("OpenMP kernels are independent of the thread count") {
  std::mt19937_64 rng(3);
  auto g = testing::random_graph(40, 200, rng);
  auto topo = make_topology(g);
  auto z = testing::random_matrix(40, 2 * 8, rng);
  auto att = testing::random_matrix(2, 16, rng);
  auto d_out = testing::random_matrix(40, 16, rng);
  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    Matrix out, dz, da;
    AttentionCache cache;
    omp::attention_forward(topo, z, att, 2, out, cache);
    omp::attention_backward(topo, z, att, 2, cache, d_out, dz, da);
    return std::tuple{out, dz, da};
  };
  const int before = omp_get_max_threads();
  auto one = run(1);
  auto four = run(4);
  omp_set_num_threads(before);
  CHECK(std::get<0>(one) == std::get<0>(four));
  CHECK(std::get<1>(one) == std::get<1>(four));
  CHECK(std::get<2>(one) == std::get<2>(four));
}
