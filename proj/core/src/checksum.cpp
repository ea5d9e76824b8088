#include "relsum/checksum.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "relsum/error.hpp"

namespace relsum {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::duplicate_id: return "duplicate_id";
    case ErrorCategory::unusable_target: return "unusable_target";
    case ErrorCategory::unknown_node: return "unknown_node";
    case ErrorCategory::empty_graph: return "empty_graph";
    case ErrorCategory::dimension_mismatch: return "dimension_mismatch";
    case ErrorCategory::config: return "config";
    case ErrorCategory::non_finite: return "non_finite";
    case ErrorCategory::missing_artifact: return "missing_artifact";
    case ErrorCategory::config_mismatch: return "config_mismatch";
    case ErrorCategory::leakage: return "leakage";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  return fnv1a64(std::as_bytes(std::span(text.data(), text.size())));
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  return fnv1a64(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCategory::io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace relsum
