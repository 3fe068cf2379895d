#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "ddlab/dataset.hpp"
#include "ddlab/matrix.hpp"
#include "ddlab/mlp.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

/// Class-activation matrix for one predicted class and one layer pair
/// (layer_from, layer_from+1): the mean over that class's samples of the
/// outer product between the two layers' activations.
struct Cam {
    int class_id = 0;
    int layer_from = 0;
    int support = 0;  // number of samples predicted as class_id
    Matrix matrix;
};

/// One CAM per class with support > 0; empty classes are omitted (their ids
/// are reported in `missing_classes`, never emitted as zero matrices).
struct CamSet {
    std::vector<Cam> cams;
    std::vector<int> missing_classes;
};

CamSet compute_cams(const ActivationCapture& capture, int layer_from);

/// Pairwise cosine similarities between CAMs and the mean over distinct
/// pairs. `pairwise` is symmetric with a unit diagonal, indexed like `cams`.
struct CamSimilarityStats {
    std::vector<int> class_ids;
    Matrix pairwise;
    double mean = 0.0;  // over distinct pairs (off-diagonal)
};

CamSimilarityStats cam_similarity_stats(const CamSet& cams);

enum class RichnessMode {
    signed_mean,  // score = mean over hidden units of the signed group-average
    vector_norm,  // score = Euclidean norm of the signed group-average vector
};

struct RichnessOptions {
    int group_size = 20;
    int draws = 50;
    std::uint64_t seed = 0;
    RichnessMode mode = RichnessMode::signed_mean;
    /// Enumerate all 2^group_size sign vectors instead of sampling
    /// (group_size <= 25). `draws` is ignored when set.
    bool exhaustive = false;
    /// Capture layer to read; -1 means the penultimate layer.
    int layer = -1;
};

struct RichnessReport {
    std::array<double, 10> per_class{};   // NaN for classes with no full group
    std::array<int, 10> groups_per_class{};
    double overall = 0.0;  // mean over classes with at least one full group
    RichnessOptions options;
};

/// Sub-sampled Rademacher richness of class-wise activations: samples are
/// bucketed by predicted class, split into disjoint groups of `group_size`
/// (remainder dropped); each group's richness is the max over sign draws of
/// the scored group average, classes average their groups. Per-group draw
/// streams are seeded by (seed, class, group), so adding draws extends a
/// stream instead of reshuffling it.
RichnessReport estimate_richness(const ActivationCapture& capture, const RichnessOptions& options);

struct KnnReport {
    int k = 10;
    double p_original = 0.0;   // fraction of noisy samples whose neighbour majority
                               // matches the original label (the paper's P)
    double p_corrupted = 0.0;  // same against the corrupted label (P*)
    std::size_t noisy_count = 0;
};

/// For every noisy training sample, rank the clean samples by cosine
/// similarity of penultimate activations, take the top k, and majority-vote
/// their labels; ties go to the most similar neighbour whose label is tied.
/// Requires a nonempty noise mask and at least k clean samples.
KnnReport knn_noisy_prediction(const ActivationCapture& capture_train, const NoisyDataset& dataset,
                               int k = 10);

/// For each threshold t, the fraction of weight entries with |w| < t
/// (biases excluded). Thresholds map sorted ascending, so ratios are
/// non-decreasing.
std::map<double, double> weight_sparsity(const MlpModel& model,
                                         const std::vector<double>& thresholds = {0.1, 0.01});

std::size_t count_exact_zero_weights(const MlpModel& model);

/// Mean over samples of (strictly positive units / layer width) at the given
/// capture layer (-1 = penultimate).
double activation_sparsity(const ActivationCapture& capture, int layer = -1);

struct NdcgReport {
    double value = 0.0;  // mean over neurons that fire at least once
    int active_neurons = 0;
    int silent_neurons = 0;
};

/// Class-specialisation score per neuron: firing frequency per predicted
/// class, normalised to a distribution, sorted descending, discounted by
/// 1/log2(rank+1), then rescaled so a uniform distribution maps to 0 and a
/// one-hot distribution to 1. Reported as the mean over firing neurons.
NdcgReport class_ndcg(const ActivationCapture& capture, int layer = -1);

}  // namespace ddlab
