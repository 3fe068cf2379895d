#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddlab/sweep.hpp"

namespace ddlab {

/// Depth-vs-width study on top of a frozen random representation: one random
/// 784 -> rep_width ReLU layer is drawn once and shared by every run; only
/// classifier stacks of the listed depths/widths train on its features.
/// Depth d means d fully connected layers: d-1 hidden layers of equal width
/// plus the output layer, so depth 1 is a plain linear classifier.
struct FrozenRepConfig {
    DatasetSpec data;
    int rep_width = 20;
    std::vector<int> classifier_depths = {1, 2, 3, 4};
    std::vector<int> classifier_widths = {2, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64};
    int epochs = 400;
    int batch_size = 128;
    double lr0 = 0.05;
    int lr_step = 50;
    std::uint64_t seed = 0;
    std::string output_dir;
};

/// One trained classifier. `params` counts the trained (classifier)
/// parameters only; the frozen layer is shared by every row. Width is 0 for
/// depth-1 rows (no hidden layer).
struct FrozenRepRow {
    int depth = 0;
    int width = 0;
    long long params = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

std::vector<FrozenRepRow> run_frozen_rep_experiment(const FrozenRepConfig& config);

std::string frozen_rep_config_json(const FrozenRepConfig& config);
void write_frozen_rep_csv(const std::filesystem::path& path,
                          std::span<const FrozenRepRow> rows);
std::vector<FrozenRepRow> read_frozen_rep_csv(const std::filesystem::path& path);

}  // namespace ddlab
