#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ddlab {

/// Raw contents of an IDX image file (pixels still unscaled bytes).
struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols bytes
};

/// Readers for the big-endian IDX format (magic 0x00000803 for images,
/// 0x00000801 for labels). Failures raise IdxError with a distinct kind for
/// bad magic, truncated payload, and count mismatch.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Companion writers, used to produce fixtures and subsets.
void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

}  // namespace ddlab
