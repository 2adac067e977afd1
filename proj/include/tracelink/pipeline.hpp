#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tracelink/error.hpp"
#include "tracelink/eval.hpp"
#include "tracelink/gat.hpp"
#include "tracelink/ingest.hpp"
#include "tracelink/preprocess.hpp"
#include "tracelink/sampling.hpp"
#include "tracelink/synth.hpp"

namespace tracelink {

struct ModelConfig {
  std::size_t hidden = 64;
  std::size_t heads = 2;
  std::size_t epochs = 200;
  double lr = 0.01;
  double tau = 0.5;
};

struct SamplingConfig {
  std::string kind = "auto";       // auto | none | simple | advanced
  double alpha = 0.1;
  std::size_t retry_factor = 10;
  ImbalanceThresholds thresholds;
  std::string eval_kind = "advanced";  // negatives used when scoring test windows
};

/// Everything one end-to-end run needs. Empty trace_path means "use synth".
struct RunConfig {
  std::string trace_path;
  TraceSchema schema;
  SynthConfig synth;
  Millis window_size = 100;
  Millis t_train = 7000;
  Millis t_max = 10000;
  bool temporal = true;  // false: one graph for all training events, one for all test events
  ModelConfig model;
  SamplingConfig sampling;
  std::vector<std::size_t> snapshot_epochs{0, 49, 99, 149, 199};
  std::size_t attention_lo = 0;
  std::size_t attention_hi = 100;
  UnknownNames unknown_names = UnknownNames::Strict;
  std::uint64_t seed = 42;
  std::string out_dir = "run";
};

/// Cross-field checks. Throws Error{Config}.
void validate(const RunConfig& cfg);

/// Synth parameters with the run's window size and horizon and a seed
/// derived from the master seed.
SynthConfig effective_synth(const RunConfig& cfg);

struct PreparedData {
  NodeMapping mapping;
  std::vector<CleanEvent> events;  // cleaned, sorted
  std::size_t skipped_lines = 0;
  std::size_t dropped_events = 0;
  std::vector<TimeWindow> windows;
  TrainTestSplit split;
};

/// Loads (or generates) the trace, cleans it against the window horizon
/// [0, t_max), maps nodes over the whole trace, and splits windows.
PreparedData prepare(const RunConfig& cfg);

/// Graphs for a window sequence, built in parallel. Non-temporal mode merges
/// the windows into a single graph first.
std::vector<WindowedGraph> build_graphs(const std::vector<TimeWindow>& windows,
                                        std::size_t n_nodes, bool temporal);

/// "auto" asks analyze_sampling using the mean distinct-pair count of the
/// non-empty training graphs.
SamplingStrategy resolve_sampling(const SamplingConfig& cfg,
                                  const std::vector<WindowedGraph>& train_graphs);

struct TrainOutcome {
  TrainArtifacts artifacts;
  SamplingStrategy sampling;
  NodeMapping mapping;
  std::string checkpoint_path;
};

/// Writes node_mapping.tsv, checkpoint.gat, loss_history.csv,
/// attention/epoch_NNN.csv and train_summary.json under cfg.out_dir.
TrainOutcome cmd_train(const RunConfig& cfg);

/// Writes metrics.json, curves/{pr,roc}_window_NNNN.csv (+ pooled),
/// scored/window_NNNN.csv and attention_eval.csv under cfg.out_dir.
/// `mapping_path` defaults to <out_dir>/node_mapping.tsv.
EvalResult cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                        const std::string& mapping_path = "");

/// Writes the synthetic trace with a provenance comment. Returns event count.
std::size_t cmd_generate(const RunConfig& cfg, const std::string& path);

/// One summary row per metrics file.
void cmd_report(const std::vector<std::string>& metrics_paths, std::ostream& out);

/// Process exit code for a failure category: 1 usage, 2 data, 3 numeric.
int exit_code(ErrorKind kind);

}  // namespace tracelink
