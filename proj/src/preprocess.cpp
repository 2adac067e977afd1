#include "tracelink/preprocess.hpp"

#include <charconv>
#include <sstream>

#include "tracelink/error.hpp"
#include "tracelink/seed.hpp"

namespace tracelink {

NodeId NodeMapping::intern(const std::string& name) {
  auto [it, inserted] = forward_.try_emplace(name, static_cast<NodeId>(reverse_.size()));
  if (inserted) reverse_.push_back(name);
  return it->second;
}

NodeId NodeMapping::at(const std::string& name) const {
  auto it = forward_.find(name);
  if (it == forward_.end()) {
    throw Error(ErrorKind::Data, "service '" + name + "' is not in the node mapping");
  }
  return it->second;
}

void NodeMapping::write(std::ostream& out) const {
  for (std::size_t id = 0; id < reverse_.size(); ++id) {
    out << id << '\t' << reverse_[id] << '\n';
  }
}

NodeMapping NodeMapping::read(std::istream& in) {
  NodeMapping mapping;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    std::size_t id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + (tab == std::string::npos ? 0 : tab), id);
    if (tab == std::string::npos || ec != std::errc{} || ptr != line.data() + tab ||
        id != mapping.size() || tab + 1 >= line.size()) {
      throw Error(ErrorKind::Data, "malformed node mapping at line " + std::to_string(lineno));
    }
    std::string name = line.substr(tab + 1);
    if (mapping.contains(name)) {
      throw Error(ErrorKind::Data, "duplicate service '" + name + "' in node mapping");
    }
    mapping.intern(name);
  }
  return mapping;
}

std::uint64_t NodeMapping::digest() const {
  std::ostringstream os;
  write(os);
  return fnv1a64(os.str());
}

NodeMapping build_node_mapping(const std::vector<CleanEvent>& events) {
  NodeMapping mapping;
  for (const auto& ev : events) {
    mapping.intern(ev.caller);
    mapping.intern(ev.callee);
  }
  return mapping;
}

std::vector<MappedEvent> apply_mapping(const std::vector<CleanEvent>& events,
                                       NodeMapping& mapping, UnknownNames mode) {
  std::vector<MappedEvent> out;
  out.reserve(events.size());
  for (const auto& ev : events) {
    if (mode == UnknownNames::Lenient) {
      out.push_back({mapping.intern(ev.caller), mapping.intern(ev.callee), ev.timestamp});
    } else {
      out.push_back({mapping.at(ev.caller), mapping.at(ev.callee), ev.timestamp});
    }
  }
  return out;
}

std::vector<MappedEvent> apply_mapping(const std::vector<CleanEvent>& events,
                                       const NodeMapping& mapping) {
  std::vector<MappedEvent> out;
  out.reserve(events.size());
  for (const auto& ev : events) {
    out.push_back({mapping.at(ev.caller), mapping.at(ev.callee), ev.timestamp});
  }
  return out;
}

std::vector<TimeWindow> segment_windows(const std::vector<MappedEvent>& events,
                                        Millis w_size, Millis t_max) {
  if (w_size <= 0) throw Error(ErrorKind::Config, "window size must be positive");
  if (t_max <= 0) throw Error(ErrorKind::Config, "t_max must be positive");
  std::vector<TimeWindow> windows;
  for (Millis t = 0; t < t_max; t += w_size) {
    windows.push_back(TimeWindow{windows.size(), t, t + w_size, {}});
  }
  Millis prev = 0;
  for (const auto& ev : events) {
    if (ev.timestamp < prev) throw Error(ErrorKind::Data, "events are not sorted by timestamp");
    prev = ev.timestamp;
    if (ev.timestamp < 0 || ev.timestamp >= windows.back().end) {
      throw Error(ErrorKind::Data,
                  "event timestamp " + std::to_string(ev.timestamp) + " outside windowed range");
    }
    windows[static_cast<std::size_t>(ev.timestamp / w_size)].events.push_back(ev);
  }
  return windows;
}

TrainTestSplit split_train_test(const std::vector<TimeWindow>& windows, Millis t_train,
                                Millis t_max) {
  if (!(0 < t_train && t_train < t_max)) {
    throw Error(ErrorKind::Config, "train boundary must satisfy 0 < t_train < t_max");
  }
  TrainTestSplit split;
  for (const auto& w : windows) {
    if (w.start < t_train && w.end > t_train) {
      throw Error(ErrorKind::Config, "t_train " + std::to_string(t_train) +
                                         " is not a multiple of the window size");
    }
    if (w.end <= t_train) {
      split.train.push_back(w);
    } else if (w.start >= t_train && w.start < t_max) {
      split.test.push_back(w);
    }
  }
  return split;
}

TimeWindow merge_windows(const std::vector<TimeWindow>& windows) {
  TimeWindow merged;
  if (windows.empty()) return merged;
  merged.index = windows.front().index;
  merged.start = windows.front().start;
  merged.end = windows.back().end;
  for (const auto& w : windows) {
    merged.events.insert(merged.events.end(), w.events.begin(), w.events.end());
  }
  return merged;
}

}  // namespace tracelink
