#include "tracelink/gat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tracelink/error.hpp"
#include "tracelink/seed.hpp"

namespace tracelink {
namespace {

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double row_dot(const Matrix& m, NodeId a, NodeId b) {
  const double* x = m.data.data() + a * m.cols;
  const double* y = m.data.data() + b * m.cols;
  double s = 0;
  for (std::size_t c = 0; c < m.cols; ++c) s += x[c] * y[c];
  return s;
}

void glorot(Matrix& m, double fan_in, double fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : m.data) x = dist(rng);
}

void check_shapes(const GatParams& params, const WindowedGraph& graph) {
  if (graph.n_nodes != params.dims.n_nodes) {
    throw Error(ErrorKind::Model, "graph has " + std::to_string(graph.n_nodes) +
                                      " nodes but the model was built for " +
                                      std::to_string(params.dims.n_nodes));
  }
}

void check_pairs(std::span<const EdgePair> pairs, std::size_t n) {
  for (const auto& [s, d] : pairs) {
    if (s >= n || d >= n) throw Error(ErrorKind::Model, "scored pair references unknown node");
  }
}

struct Scored {
  double loss = 0;
  std::vector<double> pos;
  std::vector<double> neg;
};

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Scored score_pairs(const Matrix& h, std::span<const EdgePair> pos_edges,
                   std::span<const EdgePair> neg_edges) {
  Scored s;
  s.pos.reserve(pos_edges.size());
  s.neg.reserve(neg_edges.size());
  std::vector<double> pos_logits, neg_logits;
  for (const auto& [a, b] : pos_edges) pos_logits.push_back(row_dot(h, a, b));
  for (const auto& [a, b] : neg_edges) neg_logits.push_back(row_dot(h, a, b));
  for (double x : pos_logits) s.pos.push_back(sigmoid(x));
  for (double x : neg_logits) s.neg.push_back(sigmoid(x));
  s.loss = bce_with_logits(pos_logits, neg_logits);
  return s;
}

LossAndGradients backprop(const GatParams& params, const WindowedGraph& graph,
                          std::span<const EdgePair> pos_edges,
                          std::span<const EdgePair> neg_edges, ForwardPass& pass) {
  const std::size_t total = pos_edges.size() + neg_edges.size();
  if (total == 0) throw Error(ErrorKind::Training, "loss is undefined without any scored pairs");
  pass = forward(params, graph);
  check_pairs(pos_edges, params.dims.n_nodes);
  check_pairs(neg_edges, params.dims.n_nodes);

  LossAndGradients out;
  out.grad = zero_params(params.dims);
  const Matrix& h = pass.h2;
  const Scored scored = score_pairs(h, pos_edges, neg_edges);
  out.loss = scored.loss;

  // dL/ds for s = h_src . h_dst.
  Matrix d_h2(h.rows, h.cols);
  auto accumulate = [&](const EdgePair& pair, double p, bool positive) {
    const double g = (positive ? p - 1.0 : p) / static_cast<double>(total);
    const auto [a, b] = pair;
    for (std::size_t c = 0; c < h.cols; ++c) {
      d_h2(a, c) += g * h(b, c);
      d_h2(b, c) += g * h(a, c);
    }
  };
  for (std::size_t e = 0; e < pos_edges.size(); ++e) accumulate(pos_edges[e], scored.pos[e], true);
  for (std::size_t e = 0; e < neg_edges.size(); ++e) accumulate(neg_edges[e], scored.neg[e], false);

  Matrix d_z2;
  omp::attention_backward(pass.topo, pass.z2, params.att2, 1, pass.layer2, d_h2, d_z2,
                          out.grad.att2);
  omp::matmul_tn(pass.a1, d_z2, out.grad.w2);
  Matrix d_h1;
  omp::matmul_nt(d_z2, params.w2, d_h1);
  for (std::size_t i = 0; i < d_h1.size(); ++i) {
    const double x = pass.h1.data[i];
    if (x <= 0) d_h1.data[i] *= std::exp(x);
  }
  // Identity features: the layer-1 projection is w1 itself, so dL/dw1 = dL/dz1.
  omp::attention_backward(pass.topo, params.w1, params.att1, params.dims.heads, pass.layer1,
                          d_h1, out.grad.w1, out.grad.att1);
  return out;
}

}  // namespace

GatParams zero_params(const GatDims& dims) {
  GatParams p;
  p.dims = dims;
  p.w1.resize(dims.n_nodes, dims.heads * dims.hidden);
  p.att1.resize(dims.heads, 2 * dims.hidden);
  p.w2.resize(dims.heads * dims.hidden, dims.hidden);
  p.att2.resize(1, 2 * dims.hidden);
  return p;
}

GatParams init_params(std::size_t n_nodes, std::size_t hidden, std::size_t heads, Rng& rng) {
  if (hidden < 1 || heads < 1) {
    throw Error(ErrorKind::Config, "hidden and heads must be at least 1");
  }
  GatParams p = zero_params({n_nodes, hidden, heads});
  glorot(p.w1, static_cast<double>(n_nodes), static_cast<double>(hidden), rng);
  glorot(p.att1, 2.0 * static_cast<double>(hidden), 1.0, rng);
  glorot(p.w2, static_cast<double>(heads * hidden), static_cast<double>(hidden), rng);
  glorot(p.att2, 2.0 * static_cast<double>(hidden), 1.0, rng);
  return p;
}

AttentionRecord attention_coefficients(const LayerParams& layer, const Matrix& features,
                                       const WindowedGraph& graph) {
  if (features.cols != layer.weight.rows || features.rows != graph.n_nodes) {
    throw Error(ErrorKind::Model, "feature matrix does not match layer fan-in");
  }
  Topology topo = make_topology(graph);
  Matrix z;
  omp::matmul(features, layer.weight, z);
  Matrix out;
  AttentionCache cache;
  omp::attention_forward(topo, z, layer.att, layer.heads, out, cache);
  return AttentionRecord{graph.n_nodes, layer.heads, topo.src, topo.dst, cache.alpha};
}

Matrix gat_layer_forward(const LayerParams& layer, const Matrix& features,
                         const WindowedGraph& graph, bool concat) {
  if (features.cols != layer.weight.rows || features.rows != graph.n_nodes) {
    throw Error(ErrorKind::Model, "feature matrix does not match layer fan-in");
  }
  Topology topo = make_topology(graph);
  Matrix z;
  omp::matmul(features, layer.weight, z);
  Matrix out;
  AttentionCache cache;
  omp::attention_forward(topo, z, layer.att, layer.heads, out, cache);
  if (concat || layer.heads == 1) return out;
  const std::size_t f = out.cols / layer.heads;
  Matrix mean(out.rows, f);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t k = 0; k < layer.heads; ++k) {
      for (std::size_t c = 0; c < f; ++c) mean(i, c) += out(i, k * f + c);
    }
    for (std::size_t c = 0; c < f; ++c) mean(i, c) /= static_cast<double>(layer.heads);
  }
  return mean;
}

ForwardPass forward(const GatParams& params, const WindowedGraph& graph) {
  check_shapes(params, graph);
  ForwardPass pass;
  pass.topo = make_topology(graph);
  omp::attention_forward(pass.topo, params.w1, params.att1, params.dims.heads, pass.h1,
                         pass.layer1);
  pass.a1 = pass.h1;
  for (auto& x : pass.a1.data) {
    if (x <= 0) x = std::expm1(x);
  }
  omp::matmul(pass.a1, params.w2, pass.z2);
  omp::attention_forward(pass.topo, pass.z2, params.att2, 1, pass.h2, pass.layer2);
  return pass;
}

AttentionRecord attention_record(const ForwardPass& pass, std::size_t heads) {
  return AttentionRecord{pass.topo.n_nodes, heads, pass.topo.src, pass.topo.dst,
                         pass.layer1.alpha};
}

Embeddings model_forward(GatModel& model, const WindowedGraph& graph) {
  ForwardPass pass = forward(model.params, graph);
  model.attention = attention_record(pass, model.params.dims.heads);
  return Embeddings{std::move(pass.h2)};
}

double link_probability(const Matrix& embeddings, NodeId src, NodeId dst) {
  return sigmoid(row_dot(embeddings, src, dst));
}

double bce_loss(std::span<const double> pos_probs, std::span<const double> neg_probs) {
  const std::size_t total = pos_probs.size() + neg_probs.size();
  if (total == 0) throw Error(ErrorKind::Training, "loss is undefined without any scored pairs");
  auto clamp = [](double p) {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  };
  double sum = 0;
  for (double p : pos_probs) sum += std::log(clamp(p));
  for (double p : neg_probs) sum += std::log(1.0 - clamp(p));
  return -sum / static_cast<double>(total);
}

double bce_with_logits(std::span<const double> pos_logits, std::span<const double> neg_logits) {
  const std::size_t total = pos_logits.size() + neg_logits.size();
  if (total == 0) throw Error(ErrorKind::Training, "loss is undefined without any scored pairs");
  double sum = 0;
  for (double x : pos_logits) sum += softplus(-x);
  for (double x : neg_logits) sum += softplus(x);
  return sum / static_cast<double>(total);
}

LossAndGradients compute_gradients(const GatParams& params, const WindowedGraph& graph,
                                   std::span<const EdgePair> pos_edges,
                                   std::span<const EdgePair> neg_edges) {
  ForwardPass pass;
  return backprop(params, graph, pos_edges, neg_edges, pass);
}

double compute_loss(const GatParams& params, const WindowedGraph& graph,
                    std::span<const EdgePair> pos_edges, std::span<const EdgePair> neg_edges) {
  ForwardPass pass = forward(params, graph);
  return score_pairs(pass.h2, pos_edges, neg_edges).loss;
}

AdamState AdamState::for_params(const GatParams& params) {
  return AdamState{zero_params(params.dims), zero_params(params.dims), 0};
}

void optimizer_step(GatParams& params, const GatParams& grads, AdamState& state,
                    const AdamConfig& cfg) {
  if (!(state.m.dims == params.dims)) {
    throw Error(ErrorKind::Model, "optimizer state does not match model shape");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto update = [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      p.data[i] -= cfg.lr * (m.data[i] / c1) / (std::sqrt(v.data[i] / c2) + cfg.eps);
    }
  };
  update(params.w1, grads.w1, state.m.w1, state.v.w1);
  update(params.att1, grads.att1, state.m.att1, state.v.att1);
  update(params.w2, grads.w2, state.m.w2, state.v.w2);
  update(params.att2, grads.att2, state.m.att2, state.v.att2);
}

TrainArtifacts train(GatModel& model, const std::vector<WindowedGraph>& windows,
                     const TrainConfig& cfg) {
  std::vector<const WindowedGraph*> active;
  for (const auto& w : windows) {
    if (w.edge_count() > 0) active.push_back(&w);
  }
  if (active.empty()) throw Error(ErrorKind::Training, "no training window contains any edge");

  TrainArtifacts artifacts;
  artifacts.loss_history.reserve(cfg.epochs * active.size());
  AdamState state = AdamState::for_params(model.params);
  std::vector<EdgePair> positives;
  ForwardPass pass;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const WindowedGraph* w : active) {
      Rng rng(derive_seed(cfg.seed, "train-negatives", epoch, w->window_index));
      const NegativeEdges negatives = draw_negatives(*w, cfg.sampling, rng, cfg.retry_factor);
      positives.clear();
      for (std::size_t e = 0; e < w->edge_count(); ++e) {
        positives.emplace_back(w->edge_src[e], w->edge_dst[e]);
      }
      LossAndGradients lg = backprop(model.params, *w, positives, negatives.pairs, pass);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorKind::Training, "non-finite loss at epoch " + std::to_string(epoch) +
                                             ", window " + std::to_string(w->window_index));
      }
      artifacts.loss_history.push_back({epoch, w->window_index, lg.loss});
      optimizer_step(model.params, lg.grad, state, cfg.adam);
    }
    model.attention = attention_record(pass, model.params.dims.heads);
    if (std::find(cfg.snapshot_epochs.begin(), cfg.snapshot_epochs.end(), epoch) !=
        cfg.snapshot_epochs.end()) {
      artifacts.snapshots.push_back({epoch, active.back()->window_index, model.attention});
    }
  }
  artifacts.params = model.params;
  return artifacts;
}

std::vector<int> classify_links(std::span<const double> probs, double tau) {
  std::vector<int> labels;
  labels.reserve(probs.size());
  for (double p : probs) labels.push_back(p > tau ? 1 : 0);
  return labels;
}

}  // namespace tracelink
