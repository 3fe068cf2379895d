#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ddlab/dataset.hpp"

namespace ddlab {

/// Persistent description of one label-noise draw: enough to rebuild the
/// noisy dataset exactly, plus the content hash of the clean dataset it was
/// drawn from so it can refuse to attach to anything else.
struct NoiseRecord {
    int version = 1;
    std::uint64_t dataset_hash = 0;
    std::uint64_t seed = 0;
    double p = 0.0;
    NoiseMode mode = NoiseMode::uniform_all;
    std::vector<std::uint32_t> mask;
    std::vector<int> labels_original;
    std::vector<int> labels_effective;
};

NoiseRecord make_noise_record(const Dataset& base, const NoisyDataset& noisy);

/// JSON sidecar with deterministic key order; save -> load -> save is
/// byte-identical.
void save_noise_record(const std::filesystem::path& path, const NoiseRecord& record);
NoiseRecord load_noise_record(const std::filesystem::path& path);

/// Rebuild the noisy dataset from a record. Refuses (DataError) when the
/// record's dataset hash does not match `base`.
NoisyDataset apply_noise_record(const Dataset& base, const NoiseRecord& record);

}  // namespace ddlab
