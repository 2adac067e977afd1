#include "tracelink/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tracelink/error.hpp"

namespace tracelink {
namespace {

constexpr const char* kMagic = "tracelink-gat-checkpoint";
constexpr int kVersion = 1;

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::Data, "malformed checkpoint: " + what);
}

template <typename T>
T expect_field(std::istream& in, const std::string& key) {
  std::string name;
  T value{};
  if (!(in >> name) || name != key || !(in >> value)) malformed("expected '" + key + "'");
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const GatDims& d = ckpt.params.dims;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(ckpt.mapping_digest));
  out << kMagic << ' ' << kVersion << '\n'
      << "n_nodes " << d.n_nodes << '\n'
      << "hidden " << d.hidden << '\n'
      << "heads " << d.heads << '\n'
      << "mapping_digest " << digest << '\n';
  ckpt.params.for_each_tensor([&](const char* name, const Matrix& m) {
    out << "tensor " << name << ' ' << m.rows << ' ' << m.cols << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        if (c) out << ' ';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  });
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) malformed("bad header");
  if (version != kVersion) malformed("unsupported version " + std::to_string(version));
  GatDims dims;
  dims.n_nodes = expect_field<std::size_t>(in, "n_nodes");
  dims.hidden = expect_field<std::size_t>(in, "hidden");
  dims.heads = expect_field<std::size_t>(in, "heads");
  std::string hex = expect_field<std::string>(in, "mapping_digest");
  Checkpoint ckpt;
  auto [hp, hec] = std::from_chars(hex.data(), hex.data() + hex.size(), ckpt.mapping_digest, 16);
  if (hec != std::errc{} || hp != hex.data() + hex.size()) malformed("bad mapping digest");

  ckpt.params = zero_params(dims);
  ckpt.params.for_each_tensor([&](const char* name, Matrix& m) {
    std::string tag, got;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> got >> rows >> cols) || tag != "tensor" || got != name) {
      malformed(std::string("expected tensor ") + name);
    }
    if (rows != m.rows || cols != m.cols) malformed(std::string("shape mismatch for ") + name);
    std::string token;
    for (auto& x : m.data) {
      if (!(in >> token)) malformed(std::string("truncated tensor ") + name);
      auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
      if (ec != std::errc{} || p != token.data() + token.size() || !std::isfinite(x)) {
        malformed(std::string("bad value in ") + name);
      }
    }
  });
  std::string end;
  if (!(in >> end) || end != "end") malformed("missing end marker");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
  write_checkpoint(out, ckpt);
  if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::Io, "checkpoint file not found: '" + path + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace tracelink
