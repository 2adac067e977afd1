#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace tracelink {

using Millis = std::int64_t;

/// One trace record as read from disk. Nothing is validated yet.
struct RawEvent {
  std::string caller;
  std::string callee;
  Millis timestamp = 0;
  std::vector<std::pair<std::string, std::string>> attrs;  // unanalyzed columns
};

/// A record that passed cleaning: non-empty endpoints, 0 <= timestamp <= t_max.
struct CleanEvent {
  std::string caller;
  std::string callee;
  Millis timestamp = 0;

  friend bool operator==(const CleanEvent&, const CleanEvent&) = default;
};

/// Binds the logical caller/callee/timestamp columns to physical column
/// names. With `header` set, `columns` is replaced by the file's header row.
struct TraceSchema {
  std::vector<std::string> columns{"timestamp", "caller", "callee"};
  std::string caller_column = "caller";
  std::string callee_column = "callee";
  std::string timestamp_column = "timestamp";
  char delimiter = ',';
  bool header = true;
};

struct ParseResult {
  std::vector<RawEvent> events;
  std::size_t skipped = 0;
};

/// Reads delimited text, one event per line. Blank lines and lines starting
/// with '#' are ignored; malformed lines are counted in `skipped`.
/// Throws Error{Config} when the schema lacks a required column.
ParseResult parse_trace(std::istream& source, const TraceSchema& schema);

/// Opens `path` and parses it. Throws Error{Io} when unreadable.
ParseResult parse_trace_file(const std::string& path, const TraceSchema& schema);

/// Drops incomplete or out-of-range records and stable-sorts by timestamp.
std::vector<CleanEvent> clean_trace(const std::vector<RawEvent>& events, Millis t_max);
std::vector<CleanEvent> clean_trace(const std::vector<CleanEvent>& events, Millis t_max);

/// Writes events in the format parse_trace reads with the default schema.
void write_trace(std::ostream& out, const std::vector<CleanEvent>& events);

}  // namespace tracelink
