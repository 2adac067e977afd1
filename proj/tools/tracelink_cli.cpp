// tracelink: microservice call-trace link prediction.
//
//   tracelink generate --out trace.csv [--seed N]
//   tracelink train    [--trace trace.csv] --out-dir run
//   tracelink evaluate [--trace trace.csv] --out-dir run [--checkpoint run/checkpoint.gat]
//   tracelink report   run/metrics.json [more.json ...]
//
// Every subcommand accepts --config FILE with key=value lines using the long
// flag names (e.g. "window-size=100"); flags on the command line win.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tracelink/error.hpp"
#include "tracelink/pipeline.hpp"

namespace {

using tracelink::RunConfig;

void add_run_options(CLI::App& app, RunConfig& cfg, std::string& delimiter,
                     std::string& unknown) {
  app.set_config("--config", "", "key=value configuration file");
  app.add_option("--trace", cfg.trace_path, "Trace file (omit to use the synthetic generator)");
  app.add_option("--caller-column", cfg.schema.caller_column, "Column holding the caller")
      ->capture_default_str();
  app.add_option("--callee-column", cfg.schema.callee_column, "Column holding the callee")
      ->capture_default_str();
  app.add_option("--timestamp-column", cfg.schema.timestamp_column,
                 "Column holding the timestamp in ms")
      ->capture_default_str();
  app.add_option("--columns", cfg.schema.columns,
                 "Column names when the file has no header row")
      ->delimiter(',');
  app.add_flag("!--no-header", cfg.schema.header, "Trace file has no header row");
  app.add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
  app.add_option("--window-size", cfg.window_size, "Window length in ms")->capture_default_str();
  app.add_option("--t-train", cfg.t_train, "End of the training interval in ms")
      ->capture_default_str();
  app.add_option("--t-max", cfg.t_max, "End of the test interval in ms")->capture_default_str();
  app.add_option("--temporal", cfg.temporal, "Per-window graphs (off: one graph per split)")
      ->capture_default_str();
  app.add_option("--hidden", cfg.model.hidden, "Embedding dimension")->capture_default_str();
  app.add_option("--heads", cfg.model.heads, "Layer-1 attention heads")->capture_default_str();
  app.add_option("--epochs", cfg.model.epochs, "Training epochs")->capture_default_str();
  app.add_option("--lr", cfg.model.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--tau", cfg.model.tau, "Classification threshold")->capture_default_str();
  app.add_option("--sampling", cfg.sampling.kind, "auto|none|simple|advanced")
      ->capture_default_str();
  app.add_option("--alpha", cfg.sampling.alpha, "Degree exponent for advanced sampling")
      ->capture_default_str();
  app.add_option("--retry-factor", cfg.sampling.retry_factor,
                 "Rejection budget per negative, in multiples of the node count")
      ->capture_default_str();
  app.add_option("--balanced-ratio", cfg.sampling.thresholds.balanced,
                 "Positive/negative ratio at or above which no sampling is used")
      ->capture_default_str();
  app.add_option("--moderate-ratio", cfg.sampling.thresholds.moderate,
                 "Ratio at or above which simple sampling is used")
      ->capture_default_str();
  app.add_option("--eval-sampling", cfg.sampling.eval_kind,
                 "Negatives drawn when scoring test windows")
      ->capture_default_str();
  app.add_option("--snapshot-epochs", cfg.snapshot_epochs, "Epochs whose attention is exported")
      ->delimiter(',');
  app.add_option("--attention-lo", cfg.attention_lo, "First node of the attention export")
      ->capture_default_str();
  app.add_option("--attention-hi", cfg.attention_hi, "One past the last exported node")
      ->capture_default_str();
  app.add_option("--unknown-names", unknown, "strict|lenient handling of unmapped services")
      ->check(CLI::IsMember({"strict", "lenient"}))
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir, "Output directory")->capture_default_str();

  auto& s = cfg.synth;
  app.add_option("--synth-services", s.n_services, "Synthetic: number of services")
      ->capture_default_str();
  app.add_option("--synth-events-per-window", s.events_per_window_mean,
                 "Synthetic: mean events per window")
      ->capture_default_str();
  app.add_option("--synth-hub-exponent", s.hub_exponent, "Synthetic: Zipf exponent")
      ->capture_default_str();
  app.add_option("--synth-tree-mean", s.tree_depth_mean, "Synthetic: mean calls per request")
      ->capture_default_str();
  app.add_option("--synth-period", s.period, "Synthetic: load period in ms")
      ->capture_default_str();
  app.add_option("--synth-amplitude", s.load_amplitude, "Synthetic: load modulation")
      ->capture_default_str();
  app.add_option("--synth-deps", s.deps_per_service, "Synthetic: backbone callees per service")
      ->capture_default_str();
  app.add_option("--synth-noise", s.noise_fraction, "Synthetic: off-backbone call fraction")
      ->capture_default_str();
  app.add_option("--synth-gateways", s.gateways, "Synthetic: ingress services")
      ->capture_default_str();
  app.add_option("--synth-max-depth", s.max_depth, "Synthetic: call tree depth cap")
      ->capture_default_str();
}

void finish_config(RunConfig& cfg, const std::string& delimiter, const std::string& unknown) {
  if (delimiter.size() != 1) {
    throw tracelink::Error(tracelink::ErrorKind::Config, "delimiter must be one character");
  }
  cfg.schema.delimiter = delimiter == "\\t" ? '\t' : delimiter[0];
  cfg.unknown_names =
      unknown == "lenient" ? tracelink::UnknownNames::Lenient : tracelink::UnknownNames::Strict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microservice call-trace link prediction"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string delimiter = ",";
  std::string unknown = "strict";

  auto* gen = app.add_subcommand("generate", "Write a synthetic trace");
  std::string gen_out = "trace.csv";
  add_run_options(*gen, cfg, delimiter, unknown);
  gen->add_option("--out", gen_out, "Trace file to write")->capture_default_str();

  auto* tr = app.add_subcommand("train", "Train on the training windows");
  add_run_options(*tr, cfg, delimiter, unknown);

  auto* ev = app.add_subcommand("evaluate", "Score the test windows with a checkpoint");
  std::string checkpoint;
  std::string mapping;
  add_run_options(*ev, cfg, delimiter, unknown);
  ev->add_option("--checkpoint", checkpoint, "Checkpoint (default <out-dir>/checkpoint.gat)");
  ev->add_option("--mapping", mapping, "Node mapping (default <out-dir>/node_mapping.tsv)");

  auto* rep = app.add_subcommand("report", "Summarize metrics files");
  std::vector<std::string> metrics;
  rep->add_option("metrics", metrics, "metrics.json files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*rep) {
      tracelink::cmd_report(metrics, std::cout);
      return 0;
    }
    finish_config(cfg, delimiter, unknown);
    if (*gen) {
      const auto n = tracelink::cmd_generate(cfg, gen_out);
      std::cout << "wrote " << n << " events to " << gen_out << '\n';
    } else if (*tr) {
      const auto outcome = tracelink::cmd_train(cfg);
      const auto& hist = outcome.artifacts.loss_history;
      std::cout << "sampling: " << tracelink::to_string(outcome.sampling.kind) << '\n'
                << "nodes: " << outcome.mapping.size() << '\n'
                << "loss entries: " << hist.size() << '\n';
      if (!hist.empty()) std::cout << "final loss: " << hist.back().loss << '\n';
      std::cout << "checkpoint: " << outcome.checkpoint_path << '\n';
    } else if (*ev) {
      if (checkpoint.empty()) checkpoint = cfg.out_dir + "/checkpoint.gat";
      const auto result = tracelink::cmd_evaluate(cfg, checkpoint, mapping);
      const auto& a = result.report.pooled;
      std::cout << "auc " << a.auc << "  accuracy " << a.scalars.accuracy << "  precision "
                << a.scalars.precision << "  recall " << a.scalars.recall << "  f1 "
                << a.scalars.f1 << '\n'
                << "metrics: " << cfg.out_dir << "/metrics.json\n";
    }
  } catch (const tracelink::Error& e) {
    std::cerr << "error (" << tracelink::to_string(e.kind()) << "): " << e.what() << '\n';
    return tracelink::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
