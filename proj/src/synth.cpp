#include "tracelink/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tracelink/error.hpp"

namespace tracelink {
namespace {

using Rng = std::mt19937_64;

struct Generator {
  const SynthConfig& cfg;
  Rng rng;
  std::vector<std::size_t> by_rank;                  // popularity rank -> service
  std::discrete_distribution<std::size_t> popular;   // rank
  std::vector<std::vector<std::size_t>> deps;
  std::vector<std::size_t> route;                     // entry service -> its gateway
  std::geometric_distribution<int> children;
  std::bernoulli_distribution noise;
  std::uniform_int_distribution<std::size_t> gateway;
  std::uniform_int_distribution<std::size_t> entry;

  explicit Generator(const SynthConfig& c)
      : cfg(c),
        rng(c.seed),
        // geometric counts failures: mean (1-p)/p = d/(1+d) for p = 1/(1 + d/(1+d))
        children(1.0 / (1.0 + c.tree_depth_mean / (1.0 + c.tree_depth_mean))),
        noise(c.noise_fraction),
        gateway(0, c.gateways - 1),
        entry(c.gateways, c.n_services - 1) {
    const std::size_t inner = cfg.n_services - cfg.gateways;
    std::vector<double> weights(inner);
    for (std::size_t r = 0; r < inner; ++r) {
      weights[r] = std::pow(static_cast<double>(r + 1), -cfg.hub_exponent);
    }
    popular = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    by_rank.resize(inner);
    for (std::size_t r = 0; r < inner; ++r) by_rank[r] = cfg.gateways + r;
    std::shuffle(by_rank.begin(), by_rank.end(), rng);

    route.assign(cfg.n_services, 0);
    for (std::size_t s = cfg.gateways; s < cfg.n_services; ++s) route[s] = gateway(rng);

    const std::size_t want = std::min(cfg.deps_per_service, inner - 1);
    deps.resize(cfg.n_services);
    for (std::size_t s = cfg.gateways; s < cfg.n_services; ++s) {
      // Rejection keeps the draw Zipf-shaped; bounded so tiny systems terminate.
      for (std::size_t tries = 0; deps[s].size() < want && tries < 1000 * want; ++tries) {
        const std::size_t d = by_rank[popular(rng)];
        if (d == s || std::find(deps[s].begin(), deps[s].end(), d) != deps[s].end()) continue;
        deps[s].push_back(d);
      }
      for (std::size_t d = cfg.gateways; deps[s].size() < want; ++d) {
        if (d != s && std::find(deps[s].begin(), deps[s].end(), d) == deps[s].end()) {
          deps[s].push_back(d);
        }
      }
    }
  }

  std::size_t pick_child(std::size_t caller) {
    if (!deps[caller].empty() && !noise(rng)) {
      std::uniform_int_distribution<std::size_t> which(0, deps[caller].size() - 1);
      return deps[caller][which(rng)];
    }
    while (true) {
      const std::size_t d = by_rank[popular(rng)];
      if (d != caller) return d;
    }
  }

  // Depth-first expansion of one call tree into (caller, callee) pairs.
  void expand(std::size_t caller, std::size_t depth,
              std::vector<std::pair<std::size_t, std::size_t>>& calls) {
    if (depth >= cfg.max_depth) return;
    const int n = children(rng);
    for (int c = 0; c < n; ++c) {
      const std::size_t callee = pick_child(caller);
      calls.emplace_back(caller, callee);
      expand(callee, depth + 1, calls);
    }
  }

  void request(std::vector<std::pair<std::size_t, std::size_t>>& calls) {
    const std::size_t root = entry(rng);
    calls.emplace_back(route[root], root);
    expand(root, 0, calls);
  }
};

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.n_services < 2) throw Error(ErrorKind::Config, "synth: need at least 2 services");
  if (cfg.gateways < 1 || cfg.gateways + 2 > cfg.n_services) {
    throw Error(ErrorKind::Config, "synth: need 1 <= gateways <= n_services - 2");
  }
  if (cfg.duration <= 0) throw Error(ErrorKind::Config, "synth: duration must be positive");
  if (cfg.window_hint <= 0) throw Error(ErrorKind::Config, "synth: window size must be positive");
  if (!(cfg.hub_exponent > 1)) throw Error(ErrorKind::Config, "synth: hub exponent must exceed 1");
  if (cfg.period <= 0) throw Error(ErrorKind::Config, "synth: period must be positive");
  if (!(cfg.load_amplitude >= 0 && cfg.load_amplitude <= 1)) {
    throw Error(ErrorKind::Config, "synth: load amplitude must lie in [0, 1]");
  }
  if (!(cfg.noise_fraction >= 0 && cfg.noise_fraction <= 1)) {
    throw Error(ErrorKind::Config, "synth: noise fraction must lie in [0, 1]");
  }
  if (!(cfg.events_per_window_mean > 0) || !(cfg.tree_depth_mean >= 0)) {
    throw Error(ErrorKind::Config, "synth: configuration yields zero expected events");
  }
}

std::string service_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "svc-%04zu", index);
  return buf;
}

std::vector<std::pair<std::size_t, std::size_t>> backbone_pairs(const SynthConfig& cfg) {
  validate(cfg);
  Generator gen(cfg);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = cfg.gateways; s < cfg.n_services; ++s) pairs.emplace_back(gen.route[s], s);
  for (std::size_t s = 0; s < cfg.n_services; ++s) {
    for (std::size_t d : gen.deps[s]) pairs.emplace_back(s, d);
  }
  return pairs;
}

std::vector<CleanEvent> generate_trace(const SynthConfig& cfg) {
  validate(cfg);
  Generator gen(cfg);
  std::vector<CleanEvent> events;
  std::vector<std::pair<std::size_t, std::size_t>> calls;

  for (Millis start = 0; start < cfg.duration; start += cfg.window_hint) {
    const Millis end = std::min(start + cfg.window_hint, cfg.duration);
    const double mid = 0.5 * static_cast<double>(start + end);
    const double phase = 2.0 * std::numbers::pi * mid / static_cast<double>(cfg.period);
    const double width = static_cast<double>(end - start) / static_cast<double>(cfg.window_hint);
    const double rate =
        cfg.events_per_window_mean * width * (1.0 + cfg.load_amplitude * std::sin(phase));
    const std::size_t target =
        rate > 0 ? static_cast<std::size_t>(std::poisson_distribution<long>(rate)(gen.rng)) : 0;

    calls.clear();
    while (calls.size() < target) gen.request(calls);
    calls.resize(target);

    std::uniform_int_distribution<Millis> when(start, end - 1);
    for (const auto& [caller, callee] : calls) {
      events.push_back({service_name(caller), service_name(callee), when(gen.rng)});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const CleanEvent& a, const CleanEvent& b) { return a.timestamp < b.timestamp; });
  return events;
}

EdgeSet ground_truth_future_links(const std::vector<CleanEvent>& trace, const NodeMapping& mapping,
                                  Millis t_train, Millis t_max) {
  if (!(t_train < t_max)) throw Error(ErrorKind::Config, "ground truth needs t_train < t_max");
  EdgeSet links;
  for (const auto& ev : trace) {
    if (ev.timestamp >= t_train && ev.timestamp < t_max) {
      links.emplace(mapping.at(ev.caller), mapping.at(ev.callee));
    }
  }
  return links;
}

}  // namespace tracelink
