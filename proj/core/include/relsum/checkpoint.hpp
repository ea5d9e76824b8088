#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "relsum/summarizer.hpp"

namespace relsum {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, all integers u32 little-endian:
///   "RSCK" version dim width_count widths... vocab_size
///   vocabulary (length-prefixed UTF-8 strings)
///   tensor_count, then per tensor: name, rows, cols, rows*cols f32 column-major
std::string serialize_checkpoint(const SummarizerModel& model);
SummarizerModel deserialize_checkpoint(std::string_view bytes);

/// Lines "name rows cols fnv1a64" in tensor order, checksums over the f32 payload.
std::string checkpoint_manifest(const SummarizerModel& model);

/// Writes `path` and `path`.manifest. Loading verifies every checksum.
void save_checkpoint(const SummarizerModel& model, const std::filesystem::path& path);
SummarizerModel load_checkpoint(const std::filesystem::path& path);

/// The model as it will be after a save/load cycle.
SummarizerModel round_to_float(SummarizerModel model);

}  // namespace relsum
