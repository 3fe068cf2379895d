#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ddlab/matrix.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

/// Images as an N x (rows*cols) matrix with pixel values scaled to [0,1],
/// labels as class indices. Immutable after construction.
struct Dataset {
    Matrix images;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

enum class NoiseMode {
    uniform_all,    // resampled label uniform over all 10 classes (may equal the original)
    uniform_other,  // resampled label uniform over the 9 wrong classes
};

/// A dataset after the once-sampled label-noise protocol. noise_mask holds
/// the corrupted indices in ascending order; under uniform_all a masked
/// label may still coincide with the original. labels_original is never
/// touched by corruption.
struct NoisyDataset {
    Matrix images;
    std::vector<int> labels_effective;
    std::vector<int> labels_original;
    std::vector<std::uint32_t> noise_mask;
    double p = 0.0;
    std::uint64_t seed = 0;
    NoiseMode mode = NoiseMode::uniform_all;

    std::size_t size() const { return labels_effective.size(); }
    bool is_noisy(std::size_t i) const;
    /// Indices not in the noise mask, ascending.
    std::vector<std::uint32_t> clean_indices() const;
};

/// Read an IDX image/label pair, scale pixels by 1/255, check counts agree.
Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path);

/// n samples drawn without replacement, seeded. n must not exceed the size.
Dataset subsample(const Dataset& ds, std::size_t n, Rng& rng);

/// Each index independently enters the noise mask with probability p; masked
/// labels are resampled per the mode. Accepts only a clean Dataset, so noise
/// can never be injected twice.
NoisyDataset inject_label_noise(const Dataset& ds, double p, Rng& rng,
                                NoiseMode mode = NoiseMode::uniform_all);
NoisyDataset inject_label_noise(const NoisyDataset&, double, Rng&,
                                NoiseMode = NoiseMode::uniform_all) = delete;

/// Content hash of images and labels (FNV-1a over the raw bytes). Used to
/// bind noise records and diagnoses to the dataset they were made from.
std::uint64_t dataset_content_hash(const Dataset& ds);

/// Hash of the noise outcome (mask + effective labels); equal across all
/// cells of a sweep that share one noise draw.
std::uint64_t noise_content_hash(const NoisyDataset& ds);

}  // namespace ddlab
