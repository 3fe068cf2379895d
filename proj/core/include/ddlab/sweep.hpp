#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddlab/dataset.hpp"
#include "ddlab/diagnostics.hpp"
#include "ddlab/mlp.hpp"
#include "ddlab/report_json.hpp"

namespace ddlab {

enum class Split { train, test };

struct DatasetSpec {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::size_t n_train = 4000;
    std::uint64_t subsample_seed = 1;
};

struct DiagnosticsConfig {
    int knn_k = 10;
    int richness_group_size = 20;
    int richness_draws = 50;
    RichnessMode richness_mode = RichnessMode::signed_mean;
    Split cam_split = Split::train;
    Split richness_split = Split::test;
    Split sparsity_split = Split::test;
    Split ndcg_split = Split::test;
};

struct SweepConfig {
    std::vector<int> widths;  // nonempty, strictly increasing
    int replicates = 3;
    double noise_p = 0.0;
    std::uint64_t noise_seed = 2;
    NoiseMode noise_mode = NoiseMode::uniform_all;
    DatasetSpec data;
    TrainConfig train;  // per-cell seeds are derived from `seed`, not train.seed
    DiagnosticsConfig diag;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string output_dir;
    bool save_checkpoints = true;
    bool save_sidecars = true;
};

/// One (width, replicate) cell. Metric doubles are NaN when absent
/// (knn columns when p = 0, every metric when the cell failed).
struct SweepRecord {
    int k = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    long long params = 0;
    bool ok = false;
    std::uint64_t noise_hash = 0;
    double train_loss, train_error, test_loss, test_error;
    double cam_sim_input_hidden, cam_sim_hidden_output;
    double richness;
    double knn_p, knn_p_star;
    double activation_sparsity;
    double weight_sparsity_at_0_1, weight_sparsity_at_0_01;
    double ndcg;

    SweepRecord();
};

/// Replicate means over the ok cells of one width.
struct SweepSummaryRow {
    int k = 0;
    int n_ok = 0;
    double train_loss, train_error, test_loss, test_error;
    double cam_sim_input_hidden, cam_sim_hidden_output;
    double richness;
    double knn_p, knn_p_star;
    double activation_sparsity;
    double weight_sparsity_at_0_1, weight_sparsity_at_0_01;
    double ndcg;

    SweepSummaryRow();
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<SweepSummaryRow> summary;
    std::optional<int> interpolation_threshold;
};

/// Train, capture, diagnose and persist every (width, replicate) cell.
/// Label noise is sampled once per sweep and shared by every cell; records
/// are appended to records.csv and flushed as cells finish, so an
/// interrupted sweep resumes by skipping completed cells. Diverged cells are
/// recorded as failed and the sweep continues.
SweepResult run_sweep(const SweepConfig& config);

/// Smallest width whose replicate-mean train error is at most 1/n_train
/// (zero misclassifications); nullopt when never reached. Records must be
/// sorted by k (run_sweep output order).
std::optional<int> detect_interpolation_threshold(std::span<const SweepRecord> records,
                                                  std::size_t n_train);

std::vector<SweepSummaryRow> summarize(std::span<const SweepRecord> records);

std::string records_csv_header();
std::string record_csv_row(const SweepRecord& r);
std::vector<SweepRecord> read_records_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path,
                       std::span<const SweepSummaryRow> rows);
std::vector<SweepSummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Resolved-config echo written into every output directory.
std::string sweep_config_json(const SweepConfig& config);

/// The per-cell p=0-safe diagnostics pass shared by run_sweep and the
/// diagnose command.
DiagnosticsBundle diagnose_model(const MlpModel& model, const NoisyDataset& train_set,
                                 const Dataset& test_set, const DiagnosticsConfig& diag,
                                 std::uint64_t richness_seed);

}  // namespace ddlab
