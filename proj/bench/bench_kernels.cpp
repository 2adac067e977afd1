// Serial reference vs OpenMP kernels at desk-scale shapes, plus one full
// training step. Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>

#include "tracelink/gat.hpp"
#include "tracelink/kernels.hpp"
#include "tracelink/sampling.hpp"

using namespace tracelink;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Matrix m(r, c);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : m.data) x = u(rng);
  return m;
}

WindowedGraph random_graph(std::size_t n, std::size_t edges, std::mt19937_64& rng) {
  WindowedGraph g;
  g.n_nodes = n;
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  while (g.edge_count() < edges) {
    const NodeId s = node(rng), d = node(rng);
    if (s == d) continue;
    g.edge_src.push_back(s);
    g.edge_dst.push_back(d);
    g.edge_ts.push_back(0);
  }
  return g;
}

struct AttentionFixture {
  Topology topo;
  Matrix z, att, d_out, out, d_z, d_att;
  AttentionCache cache;
  AttentionFixture(std::size_t n, std::size_t edges, std::size_t heads, std::size_t f) {
    std::mt19937_64 rng(1);
    topo = make_topology(random_graph(n, edges, rng));
    z = random_matrix(n, heads * f, rng);
    att = random_matrix(heads, 2 * f, rng);
    d_out = random_matrix(n, heads * f, rng);
  }
};

template <auto Fn>
void bench_matmul(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 128, rng), b = random_matrix(128, 64, rng);
  Matrix c;
  for (auto _ : state) {
    Fn(a, b, c);
    benchmark::DoNotOptimize(c.data.data());
  }
}

template <auto Forward>
void bench_attention_forward(benchmark::State& state) {
  AttentionFixture fx(state.range(0), state.range(1), 2, 64);
  for (auto _ : state) {
    Forward(fx.topo, fx.z, fx.att, 2, fx.out, fx.cache);
    benchmark::DoNotOptimize(fx.out.data.data());
  }
}

template <auto Forward, auto Backward>
void bench_attention_backward(benchmark::State& state) {
  AttentionFixture fx(state.range(0), state.range(1), 2, 64);
  Forward(fx.topo, fx.z, fx.att, 2, fx.out, fx.cache);
  for (auto _ : state) {
    Backward(fx.topo, fx.z, fx.att, 2, fx.cache, fx.d_out, fx.d_z, fx.d_att);
    benchmark::DoNotOptimize(fx.d_z.data.data());
  }
}

void bench_training_step(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, static_cast<std::size_t>(state.range(1)), rng);
  GatParams params = init_params(n, 64, 2, rng);
  AdamState adam = AdamState::for_params(params);
  std::vector<EdgePair> pos;
  for (std::size_t e = 0; e < g.edge_count(); ++e) pos.emplace_back(g.edge_src[e], g.edge_dst[e]);
  const auto neg = advanced_negative_sample(g, unique_edge_set(g), 0.1, rng);
  for (auto _ : state) {
    auto lg = compute_gradients(params, g, pos, neg.pairs);
    optimizer_step(params, lg.grad, adam);
    benchmark::DoNotOptimize(params.w2.data.data());
  }
}

}  // namespace

BENCHMARK(bench_matmul<serial::matmul>)->Name("matmul/serial")->Arg(200)->Arg(2000);
BENCHMARK(bench_matmul<omp::matmul>)->Name("matmul/omp")->Arg(200)->Arg(2000);
BENCHMARK(bench_attention_forward<serial::attention_forward>)
    ->Name("attention_forward/serial")
    ->Args({200, 60})
    ->Args({5000, 50000});
BENCHMARK(bench_attention_forward<omp::attention_forward>)
    ->Name("attention_forward/omp")
    ->Args({200, 60})
    ->Args({5000, 50000});
BENCHMARK(bench_attention_backward<serial::attention_forward, serial::attention_backward>)
    ->Name("attention_backward/serial")
    ->Args({200, 60})
    ->Args({5000, 50000});
BENCHMARK(bench_attention_backward<omp::attention_forward, omp::attention_backward>)
    ->Name("attention_backward/omp")
    ->Args({200, 60})
    ->Args({5000, 50000});
BENCHMARK(bench_training_step)->Name("training_step")->Args({200, 60})->Args({2000, 1000});

BENCHMARK_MAIN();
