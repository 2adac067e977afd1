#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "tracelink/gat.hpp"

namespace tracelink {

/// Text checkpoint, version 1:
///
///   tracelink-gat-checkpoint 1
///   n_nodes <n>
///   hidden <f>
///   heads <k>
///   mapping_digest <16 hex digits>
///   tensor w1 <rows> <cols>
///   <rows lines of space-separated values>
///   tensor att1 ... / tensor w2 ... / tensor att2 ...
///   end
///
/// Values use the shortest representation that round-trips exactly.
struct Checkpoint {
  GatParams params;
  std::uint64_t mapping_digest = 0;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws Error{Io} when the file is missing, Error{Data} when malformed.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tracelink
