#include "tracelink/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tracelink/checkpoint.hpp"
#include "tracelink/error.hpp"
#include "tracelink/seed.hpp"

namespace tracelink {
namespace fs = std::filesystem;
namespace {

// Re-raises module errors prefixed with the pipeline stage that failed.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

std::string numbered(const char* prefix, std::size_t n, int width, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu%s", prefix, width, n, suffix);
  return buf;
}

std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

SamplingStrategy eval_sampling(const SamplingConfig& cfg) {
  const SamplingKind kind = parse_sampling_kind(cfg.eval_kind);
  if (kind == SamplingKind::Advanced) return SamplingStrategy::advanced(cfg.alpha);
  if (kind == SamplingKind::Simple) return SamplingStrategy::simple();
  return SamplingStrategy::none();
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.window_size <= 0) throw Error(ErrorKind::Config, "window size must be positive");
  if (!(0 < cfg.t_train && cfg.t_train < cfg.t_max)) {
    throw Error(ErrorKind::Config, "need 0 < t_train < t_max");
  }
  if (cfg.t_train % cfg.window_size != 0) {
    throw Error(ErrorKind::Config, "t_train must be a multiple of the window size");
  }
  if (cfg.model.hidden == 0 || cfg.model.heads == 0) {
    throw Error(ErrorKind::Config, "hidden and heads must be at least 1");
  }
  if (!(cfg.model.tau > 0 && cfg.model.tau < 1)) {
    throw Error(ErrorKind::Config, "tau must lie in (0, 1)");
  }
  if (!(cfg.model.lr > 0)) throw Error(ErrorKind::Config, "learning rate must be positive");
  if (!(cfg.sampling.alpha >= 0) || !std::isfinite(cfg.sampling.alpha)) {
    throw Error(ErrorKind::Config, "sampling alpha must be finite and >= 0");
  }
  if (cfg.sampling.kind != "auto") parse_sampling_kind(cfg.sampling.kind);
  parse_sampling_kind(cfg.sampling.eval_kind);
  if (cfg.attention_lo >= cfg.attention_hi) {
    throw Error(ErrorKind::Config, "attention export range is empty");
  }
}

SynthConfig effective_synth(const RunConfig& cfg) {
  SynthConfig s = cfg.synth;
  s.duration = cfg.t_max;
  s.window_hint = cfg.window_size;
  s.seed = derive_seed(cfg.seed, "synth");
  return s;
}

PreparedData prepare(const RunConfig& cfg) {
  validate(cfg);
  PreparedData data;
  std::vector<RawEvent> raw;
  if (cfg.trace_path.empty()) {
    auto generated = stage("synth", [&] { return generate_trace(effective_synth(cfg)); });
    raw.reserve(generated.size());
    for (auto& ev : generated) raw.push_back({ev.caller, ev.callee, ev.timestamp, {}});
  } else {
    ParseResult parsed = stage("ingest", [&] { return parse_trace_file(cfg.trace_path, cfg.schema); });
    data.skipped_lines = parsed.skipped;
    raw = std::move(parsed.events);
  }
  // Windows are half-open, so the last representable millisecond is t_max - 1.
  data.events = clean_trace(raw, cfg.t_max - 1);
  data.dropped_events = raw.size() - data.events.size();
  data.mapping = build_node_mapping(data.events);
  auto mapped = stage("preprocess", [&] { return apply_mapping(data.events, data.mapping); });
  data.windows = stage("preprocess", [&] {
    return segment_windows(mapped, cfg.window_size, cfg.t_max);
  });
  data.split = stage("preprocess", [&] {
    return split_train_test(data.windows, cfg.t_train, cfg.t_max);
  });
  return data;
}

std::vector<WindowedGraph> build_graphs(const std::vector<TimeWindow>& windows,
                                        std::size_t n_nodes, bool temporal) {
  if (!temporal) {
    if (windows.empty()) return {};
    return {build_graph(merge_windows(windows), n_nodes)};
  }
  std::vector<WindowedGraph> graphs(windows.size());
  std::vector<std::exception_ptr> failures(windows.size());
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t w = 0; w < count; ++w) {
    try {
      graphs[w] = build_graph(windows[w], n_nodes);
    } catch (...) {
      failures[w] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return graphs;
}

SamplingStrategy resolve_sampling(const SamplingConfig& cfg,
                                  const std::vector<WindowedGraph>& train_graphs) {
  if (cfg.kind == "auto") {
    std::size_t pairs = 0, active = 0, n_nodes = 0;
    for (const auto& g : train_graphs) {
      n_nodes = g.n_nodes;
      if (g.edge_count() == 0) continue;
      pairs += unique_edge_set(g).size();
      ++active;
    }
    if (active == 0 || n_nodes < 2) return SamplingStrategy::advanced(cfg.alpha);
    return analyze_sampling(pairs / active, n_nodes, cfg.thresholds, cfg.alpha);
  }
  const SamplingKind kind = parse_sampling_kind(cfg.kind);
  if (kind == SamplingKind::Advanced) return SamplingStrategy::advanced(cfg.alpha);
  if (kind == SamplingKind::Simple) return SamplingStrategy::simple();
  return SamplingStrategy::none();
}

TrainOutcome cmd_train(const RunConfig& cfg) {
  PreparedData data = prepare(cfg);
  const std::size_t n = data.mapping.size();
  auto graphs = stage("graph", [&] { return build_graphs(data.split.train, n, cfg.temporal); });

  TrainOutcome outcome;
  outcome.sampling = resolve_sampling(cfg.sampling, graphs);
  outcome.mapping = data.mapping;

  GatModel model;
  Rng init_rng(derive_seed(cfg.seed, "init"));
  model.params = stage("model", [&] {
    return init_params(n, cfg.model.hidden, cfg.model.heads, init_rng);
  });
  TrainConfig tc;
  tc.epochs = cfg.model.epochs;
  tc.adam.lr = cfg.model.lr;
  tc.sampling = outcome.sampling;
  tc.retry_factor = cfg.sampling.retry_factor;
  tc.snapshot_epochs = cfg.snapshot_epochs;
  tc.seed = derive_seed(cfg.seed, "train");
  outcome.artifacts = stage("train", [&] { return train(model, graphs, tc); });

  const fs::path out(cfg.out_dir);
  {
    auto f = open_out(out / "node_mapping.tsv");
    data.mapping.write(f);
  }
  outcome.checkpoint_path = (out / "checkpoint.gat").string();
  save_checkpoint(outcome.checkpoint_path, Checkpoint{model.params, data.mapping.digest()});
  {
    auto f = open_out(out / "loss_history.csv");
    f << "epoch,window,loss\n";
    for (const auto& e : outcome.artifacts.loss_history) {
      f << e.epoch << ',' << e.window << ',' << fmt(e.loss) << '\n';
    }
  }
  const std::size_t hi = std::min(cfg.attention_hi, n);
  for (const auto& snap : outcome.artifacts.snapshots) {
    if (cfg.attention_lo >= hi) break;
    auto f = open_out(out / "attention" / numbered("epoch_", snap.epoch, 3, ".csv"));
    write_matrix_csv(f, export_attention(snap.record, cfg.attention_lo, hi));
  }
  {
    nlohmann::json summary;
    summary["nodes"] = n;
    summary["events"] = data.events.size();
    summary["skipped_lines"] = data.skipped_lines;
    summary["dropped_events"] = data.dropped_events;
    summary["train_windows"] = data.split.train.size();
    summary["test_windows"] = data.split.test.size();
    summary["sampling"] = to_string(outcome.sampling.kind);
    if (outcome.sampling.alpha) summary["alpha"] = *outcome.sampling.alpha;
    summary["epochs"] = cfg.model.epochs;
    summary["seed"] = cfg.seed;
    auto f = open_out(out / "train_summary.json");
    f << summary.dump(2) << '\n';
  }
  return outcome;
}

EvalResult cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                        const std::string& mapping_path) {
  validate(cfg);
  const fs::path out(cfg.out_dir);
  const Checkpoint ckpt = stage("checkpoint", [&] { return load_checkpoint(checkpoint_path); });
  const std::string map_path =
      mapping_path.empty() ? (out / "node_mapping.tsv").string() : mapping_path;
  NodeMapping mapping = stage("mapping", [&] {
    std::ifstream in(map_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open node mapping '" + map_path + "'");
    return NodeMapping::read(in);
  });
  if (mapping.digest() != ckpt.mapping_digest && cfg.unknown_names == UnknownNames::Strict) {
    throw Error(ErrorKind::Data,
                "compatibility: checkpoint was trained against a different node mapping");
  }
  if (mapping.size() != ckpt.params.dims.n_nodes && cfg.unknown_names == UnknownNames::Strict) {
    throw Error(ErrorKind::Data, "compatibility: mapping size differs from model node count");
  }

  // Re-read the trace with the stored mapping instead of rebuilding one.
  std::vector<RawEvent> raw;
  if (cfg.trace_path.empty()) {
    for (auto& ev : stage("synth", [&] { return generate_trace(effective_synth(cfg)); })) {
      raw.push_back({ev.caller, ev.callee, ev.timestamp, {}});
    }
  } else {
    raw = stage("ingest", [&] { return parse_trace_file(cfg.trace_path, cfg.schema); }).events;
  }
  const auto events = clean_trace(raw, cfg.t_max - 1);
  auto mapped = stage("preprocess", [&] { return apply_mapping(events, mapping, cfg.unknown_names); });
  const std::size_t n = ckpt.params.dims.n_nodes;
  // Services first seen after training have no learned row; their events are skipped.
  std::erase_if(mapped, [n](const MappedEvent& e) { return e.src >= n || e.dst >= n; });
  auto windows = stage("preprocess", [&] { return segment_windows(mapped, cfg.window_size, cfg.t_max); });
  auto split = stage("preprocess", [&] { return split_train_test(windows, cfg.t_train, cfg.t_max); });
  auto graphs = stage("graph", [&] { return build_graphs(split.test, n, cfg.temporal); });

  EvalConfig ec;
  ec.sampling = eval_sampling(cfg.sampling);
  ec.tau = cfg.model.tau;
  ec.seed = derive_seed(cfg.seed, "evaluate");
  ec.retry_factor = cfg.sampling.retry_factor;
  EvalResult result = stage("evaluate", [&] { return evaluate_windows(ckpt.params, graphs, ec); });

  {
    auto f = open_out(out / "metrics.json");
    write_metrics_json(f, result.report);
  }
  for (std::size_t w = 0; w < result.report.windows.size(); ++w) {
    const auto& wr = result.report.windows[w];
    auto pr = open_out(out / "curves" / numbered("pr_window_", wr.window, 4, ".csv"));
    write_pr_csv(pr, wr.pr);
    auto roc = open_out(out / "curves" / numbered("roc_window_", wr.window, 4, ".csv"));
    write_roc_csv(roc, wr.roc);
    auto sp = open_out(out / "scored" / numbered("window_", wr.window, 4, ".csv"));
    write_scored_pairs_csv(sp, result.scored[w]);
  }
  {
    auto pr = open_out(out / "curves" / "pr_pooled.csv");
    write_pr_csv(pr, result.report.pooled_pr);
    auto roc = open_out(out / "curves" / "roc_pooled.csv");
    write_roc_csv(roc, result.report.pooled_roc);
  }
  const std::size_t hi = std::min(cfg.attention_hi, n);
  if (cfg.attention_lo < hi) {
    auto f = open_out(out / "attention_eval.csv");
    write_matrix_csv(f, export_attention(result.attention, cfg.attention_lo, hi));
  }
  return result;
}

std::size_t cmd_generate(const RunConfig& cfg, const std::string& path) {
  validate(cfg);
  const SynthConfig synth = effective_synth(cfg);
  const auto events = stage("synth", [&] { return generate_trace(synth); });
  auto f = open_out(fs::absolute(path));
  f << "# synthetic call-graph trace: seed=" << cfg.seed << " services=" << synth.n_services
    << " duration_ms=" << synth.duration << " window_ms=" << synth.window_hint << '\n';
  write_trace(f, events);
  if (!f) throw Error(ErrorKind::Io, "failed writing trace '" + path + "'");
  return events.size();
}

void cmd_report(const std::vector<std::string>& metrics_paths, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %8s %8s %9s %8s %8s %7s %7s %7s %7s\n", "run", "auc",
                "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn");
  out << line;
  for (const auto& path : metrics_paths) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open metrics file '" + path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Data, "report: '" + path + "' is not valid JSON");
    }
    if (!doc.contains("aggregate")) {
      throw Error(ErrorKind::Data, "report: '" + path + "' has no aggregate block");
    }
    const auto& a = doc["aggregate"];
    std::snprintf(line, sizeof line, "%-32s %8.4f %8.4f %9.4f %8.4f %8.4f %7zu %7zu %7zu %7zu\n",
                  path.c_str(), a["auc"].get<double>(), a["accuracy"].get<double>(),
                  a["precision"].get<double>(), a["recall"].get<double>(),
                  a["f1"].get<double>(), a["tp"].get<std::size_t>(),
                  a["fp"].get<std::size_t>(), a["fn"].get<std::size_t>(),
                  a["tn"].get<std::size_t>());
    out << line;
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::Io:
    case ErrorKind::Data: return 2;
    case ErrorKind::Sampling:
    case ErrorKind::Model:
    case ErrorKind::Training:
    case ErrorKind::Metric: return 3;
  }
  return 3;
}

}  // namespace tracelink
