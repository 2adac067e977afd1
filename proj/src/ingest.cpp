#include "tracelink/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string_view>

#include "tracelink/error.hpp"

namespace tracelink {
namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Integer or decimal milliseconds; fractions truncate toward zero.
std::optional<Millis> parse_millis(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  Millis whole = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), whole);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return whole;
  double value = 0;
  auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (dec != std::errc{} || dptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  if (std::fabs(value) > 9.0e18) return std::nullopt;
  return static_cast<Millis>(std::trunc(value));
}

std::size_t column_index(const std::vector<std::string>& columns, const std::string& name) {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw Error(ErrorKind::Config, "trace schema has no column named '" + name + "'");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

}  // namespace

ParseResult parse_trace(std::istream& source, const TraceSchema& schema) {
  std::vector<std::string> columns = schema.columns;
  ParseResult result;
  std::string line;
  bool header_pending = schema.header;

  auto resolve = [&] {
    return std::array<std::size_t, 3>{column_index(columns, schema.caller_column),
                                      column_index(columns, schema.callee_column),
                                      column_index(columns, schema.timestamp_column)};
  };
  std::array<std::size_t, 3> idx{};
  if (!header_pending) idx = resolve();

  while (std::getline(source, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(view, schema.delimiter);
    if (header_pending) {
      columns.clear();
      for (auto f : fields) columns.emplace_back(trim(f));
      idx = resolve();
      header_pending = false;
      continue;
    }
    if (fields.size() != columns.size()) {
      ++result.skipped;
      continue;
    }
    auto ts = parse_millis(fields[idx[2]]);
    if (!ts) {
      ++result.skipped;
      continue;
    }
    RawEvent ev;
    ev.caller = std::string(trim(fields[idx[0]]));
    ev.callee = std::string(trim(fields[idx[1]]));
    ev.timestamp = *ts;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == idx[0] || c == idx[1] || c == idx[2]) continue;
      ev.attrs.emplace_back(columns[c], std::string(trim(fields[c])));
    }
    result.events.push_back(std::move(ev));
  }
  if (source.bad()) throw Error(ErrorKind::Io, "read error while parsing trace");
  if (header_pending) {
    // Empty file: still validate the schema we were given.
    resolve();
  }
  return result;
}

ParseResult parse_trace_file(const std::string& path, const TraceSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open trace file '" + path + "'");
  return parse_trace(in, schema);
}

namespace {

template <typename Event>
std::vector<CleanEvent> clean_impl(const std::vector<Event>& events, Millis t_max) {
  std::vector<CleanEvent> out;
  out.reserve(events.size());
  for (const auto& ev : events) {
    if (ev.caller.empty() || ev.callee.empty()) continue;
    if (ev.timestamp < 0 || ev.timestamp > t_max) continue;
    out.push_back(CleanEvent{ev.caller, ev.callee, ev.timestamp});
  }
  std::stable_sort(out.begin(), out.end(), [](const CleanEvent& a, const CleanEvent& b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

}  // namespace

std::vector<CleanEvent> clean_trace(const std::vector<RawEvent>& events, Millis t_max) {
  return clean_impl(events, t_max);
}

std::vector<CleanEvent> clean_trace(const std::vector<CleanEvent>& events, Millis t_max) {
  return clean_impl(events, t_max);
}

void write_trace(std::ostream& out, const std::vector<CleanEvent>& events) {
  out << "timestamp,caller,callee\n";
  for (const auto& ev : events) {
    out << ev.timestamp << ',' << ev.caller << ',' << ev.callee << '\n';
  }
}

}  // namespace tracelink
