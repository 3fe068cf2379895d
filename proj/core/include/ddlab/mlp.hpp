#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ddlab/matrix.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

/// Fully connected ReLU network. weights[l] has shape
/// (layer_widths[l] x layer_widths[l+1]); activations flow left to right as
/// row vectors, hidden layers are ReLU, the last layer emits raw logits.
struct MlpModel {
    std::vector<int> layer_widths;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    int input_width() const { return layer_widths.front(); }
    int output_width() const { return layer_widths.back(); }
    std::size_t num_weight_layers() const { return weights.size(); }
};

struct TrainConfig {
    int epochs = 1;
    int batch_size = 128;
    double lr0 = 0.05;
    int lr_step = 50;  // epochs per learning-rate decay step
    std::uint64_t seed = 0;
};

/// Per-layer activations of one batch. layers[0] is the input batch itself,
/// layers[L] the logits. predicted[i] = argmax of logits row i, lowest
/// class index winning ties.
struct ActivationCapture {
    std::vector<Matrix> layers;
    std::vector<int> predicted;

    std::size_t batch_size() const { return predicted.size(); }
    /// Index of the penultimate layer (the hidden layer feeding the classifier).
    std::size_t penultimate() const { return layers.size() - 2; }
};

struct Gradients {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;
};

struct EpochStats {
    double loss = 0.0;   // mean minibatch loss seen during the epoch
    double error = 0.0;  // fraction of minibatch samples misclassified during the epoch
};

struct EvalResult {
    double loss = 0.0;
    double error = 0.0;
};

/// Weights drawn uniformly from +-sqrt(6/fan_in) (ReLU-scaled), biases zero.
/// widths must have length >= 2 and all entries positive.
MlpModel init_model(std::span<const int> widths, Rng& rng);

long long count_params(const MlpModel& model);

/// Full forward pass with per-layer capture. batch.cols() must equal the
/// model input width.
ActivationCapture forward(const MlpModel& model, const Matrix& batch);

/// Mean softmax cross-entropy over the batch plus gradients for every
/// weight and bias. Labels must lie in [0, output_width).
double loss_and_grads(const MlpModel& model, const Matrix& batch,
                      std::span<const int> labels, Gradients& grads);

/// lr0 / sqrt(1 + floor(epoch / lr_step)).
double lr_at(const TrainConfig& config, int epoch);

/// Plain SGD, no momentum, no weight decay, no augmentation. Batches are
/// drawn by a seeded shuffle each epoch. Aborts with TrainingDiverged if the
/// loss goes non-finite. Returns one EpochStats per epoch.
std::vector<EpochStats> train(MlpModel& model, const Matrix& images,
                              std::span<const int> labels, const TrainConfig& config);

/// Mean cross-entropy and misclassification rate of the model on a dataset.
EvalResult evaluate(const MlpModel& model, const Matrix& images, std::span<const int> labels);

}  // namespace ddlab
