#pragma once

#include <filesystem>

#include "ddlab/mlp.hpp"

namespace ddlab {

/// Versioned binary model file: magic "MLPC", u32 version, u32 width count,
/// u32 widths, then per layer the row-major weight payload followed by the
/// bias payload, all 64-bit little-endian. Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ddlab
