#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tracelink/ingest.hpp"

namespace tracelink {

using NodeId = std::uint32_t;

/// Dense bijection between service names and node ids 0..size()-1.
class NodeMapping {
 public:
  NodeMapping() = default;

  /// Returns the id of `name`, assigning the next id if it is new.
  NodeId intern(const std::string& name);
  /// Id of a known name; throws Error{Data} naming the service otherwise.
  NodeId at(const std::string& name) const;
  bool contains(const std::string& name) const { return forward_.count(name) != 0; }
  const std::string& name(NodeId id) const { return reverse_.at(id); }
  std::size_t size() const { return reverse_.size(); }
  const std::vector<std::string>& names() const { return reverse_; }

  /// "id<TAB>name" per line, ids ascending.
  void write(std::ostream& out) const;
  static NodeMapping read(std::istream& in);
  /// FNV-1a over the serialized form; identifies the mapping a model was trained on.
  std::uint64_t digest() const;

  friend bool operator==(const NodeMapping& a, const NodeMapping& b) {
    return a.reverse_ == b.reverse_;
  }

 private:
  std::unordered_map<std::string, NodeId> forward_;
  std::vector<std::string> reverse_;
};

struct MappedEvent {
  NodeId src = 0;
  NodeId dst = 0;
  Millis timestamp = 0;

  friend bool operator==(const MappedEvent&, const MappedEvent&) = default;
};

/// Half-open interval [start, end) and the events falling in it.
struct TimeWindow {
  std::size_t index = 0;
  Millis start = 0;
  Millis end = 0;
  std::vector<MappedEvent> events;
};

enum class UnknownNames { Strict, Lenient };

/// Ids follow first occurrence, scanning caller then callee of each event.
NodeMapping build_node_mapping(const std::vector<CleanEvent>& events);

/// Strict: unknown names throw. Lenient: unknown names get fresh ids appended
/// to `mapping`.
std::vector<MappedEvent> apply_mapping(const std::vector<CleanEvent>& events,
                                       NodeMapping& mapping,
                                       UnknownNames mode = UnknownNames::Strict);
std::vector<MappedEvent> apply_mapping(const std::vector<CleanEvent>& events,
                                       const NodeMapping& mapping);

/// Windows [k*w, (k+1)*w) for k*w < t_max. Events at or beyond the last
/// window end are not representable and raise Error{Data}.
std::vector<TimeWindow> segment_windows(const std::vector<MappedEvent>& events,
                                        Millis w_size, Millis t_max);

struct TrainTestSplit {
  std::vector<TimeWindow> train;
  std::vector<TimeWindow> test;
};

/// train: windows with end <= t_train; test: windows with start in [t_train, t_max).
TrainTestSplit split_train_test(const std::vector<TimeWindow>& windows, Millis t_train,
                                Millis t_max);

/// Concatenates windows into one spanning window (non-temporal variant).
TimeWindow merge_windows(const std::vector<TimeWindow>& windows);

}  // namespace tracelink
