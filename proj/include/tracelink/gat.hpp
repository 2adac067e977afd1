#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tracelink/graph.hpp"
#include "tracelink/kernels.hpp"
#include "tracelink/matrix.hpp"
#include "tracelink/sampling.hpp"

namespace tracelink {

struct GatDims {
  std::size_t n_nodes = 0;
  std::size_t hidden = 64;
  std::size_t heads = 2;

  friend bool operator==(const GatDims&, const GatDims&) = default;
};

/// Learnable parameters of the two-layer network.
///
/// Layer 1 has `heads` heads over identity node features: head k owns the
/// column block [k*hidden, (k+1)*hidden) of `w1` and row k of `att1`
/// ([a_dst | a_src]). Layer 2 is a single head reading the concatenated
/// layer-1 output.
struct GatParams {
  GatDims dims;
  Matrix w1;    // n_nodes x heads*hidden
  Matrix att1;  // heads x 2*hidden
  Matrix w2;    // heads*hidden x hidden
  Matrix att2;  // 1 x 2*hidden

  /// Visits the four tensors in checkpoint order.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn("w1", w1);
    fn("att1", att1);
    fn("w2", w2);
    fn("att2", att2);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    fn("w1", w1);
    fn("att1", att1);
    fn("w2", w2);
    fn("att2", att2);
  }
  std::size_t parameter_count() const {
    return w1.size() + att1.size() + w2.size() + att2.size();
  }

  friend bool operator==(const GatParams&, const GatParams&) = default;
};

/// Zero tensors shaped for `dims`.
GatParams zero_params(const GatDims& dims);

/// Glorot-uniform weights and attention vectors.
GatParams init_params(std::size_t n_nodes, std::size_t hidden, std::size_t heads, Rng& rng);

/// Layer-1 attention coefficients per message edge (graph edges, then one
/// self-loop per node).
struct AttentionRecord {
  std::size_t n_nodes = 0;
  std::size_t heads = 0;
  std::vector<NodeId> src;
  std::vector<NodeId> dst;
  Matrix alpha;  // edges x heads
};

struct Embeddings {
  Matrix h;  // n_nodes x hidden
};

/// Parameters plus the attention of the most recent forward pass.
struct GatModel {
  GatParams params;
  AttentionRecord attention;
};

/// One attention layer acting on explicit features.
struct LayerParams {
  Matrix weight;  // fan_in x heads*hidden
  Matrix att;     // heads x 2*hidden
  std::size_t heads = 1;
};

AttentionRecord attention_coefficients(const LayerParams& layer, const Matrix& features,
                                       const WindowedGraph& graph);

/// Aggregated messages without activation. concat=false averages the heads.
Matrix gat_layer_forward(const LayerParams& layer, const Matrix& features,
                         const WindowedGraph& graph, bool concat);

/// Intermediate values of a full forward pass, kept for backpropagation.
struct ForwardPass {
  Topology topo;
  AttentionCache layer1;
  AttentionCache layer2;
  Matrix h1;  // layer-1 output, n x heads*hidden
  Matrix a1;  // ELU(h1)
  Matrix z2;  // a1 w2
  Matrix h2;  // embeddings, n x hidden
};

ForwardPass forward(const GatParams& params, const WindowedGraph& graph);
AttentionRecord attention_record(const ForwardPass& pass, std::size_t heads);

/// Forward pass that also stores layer-1 attention in `model.attention`.
Embeddings model_forward(GatModel& model, const WindowedGraph& graph);

double link_probability(const Matrix& embeddings, NodeId src, NodeId dst);
inline double link_probability(const Embeddings& emb, NodeId src, NodeId dst) {
  return link_probability(emb.h, src, dst);
}

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy with probabilities clamped to [eps, 1-eps].
double bce_loss(std::span<const double> pos_probs, std::span<const double> neg_probs);

/// Training loss: the same cross-entropy evaluated from logits s = h_u . h_v as
/// softplus(-s) for positives and softplus(s) for negatives. Agrees with
/// bce_loss wherever no probability is clamped and stays differentiable where
/// one would be.
double bce_with_logits(std::span<const double> pos_logits, std::span<const double> neg_logits);

struct LossAndGradients {
  double loss = 0;
  GatParams grad;
};

LossAndGradients compute_gradients(const GatParams& params, const WindowedGraph& graph,
                                   std::span<const EdgePair> pos_edges,
                                   std::span<const EdgePair> neg_edges);

/// Loss only; shares every step with compute_gradients up to the loss.
double compute_loss(const GatParams& params, const WindowedGraph& graph,
                    std::span<const EdgePair> pos_edges, std::span<const EdgePair> neg_edges);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  GatParams m;
  GatParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const GatParams& params);
};

void optimizer_step(GatParams& params, const GatParams& grads, AdamState& state,
                    const AdamConfig& cfg = {});

struct TrainConfig {
  std::size_t epochs = 200;
  AdamConfig adam;
  SamplingStrategy sampling = SamplingStrategy::advanced(0.1);
  std::size_t retry_factor = 10;
  std::vector<std::size_t> snapshot_epochs{0, 49, 99, 149, 199};
  std::uint64_t seed = 0;
};

struct LossEntry {
  std::size_t epoch = 0;
  std::size_t window = 0;
  double loss = 0;
};

struct AttentionSnapshot {
  std::size_t epoch = 0;
  std::size_t window = 0;
  AttentionRecord record;
};

struct TrainArtifacts {
  std::vector<LossEntry> loss_history;
  std::vector<AttentionSnapshot> snapshots;
  GatParams params;
};

/// Per epoch, per non-empty window: forward, score positives and sampled
/// negatives, BCE, backprop, one Adam step. Snapshots hold the attention of
/// the last window processed in each snapshot epoch. Throws Error{Training}
/// when every window is empty.
TrainArtifacts train(GatModel& model, const std::vector<WindowedGraph>& windows,
                     const TrainConfig& cfg);

/// 1 iff p > tau.
std::vector<int> classify_links(std::span<const double> probs, double tau = 0.5);

}  // namespace tracelink
