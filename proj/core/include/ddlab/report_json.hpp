#pragma once

#include <map>
#include <optional>
#include <string>

#include "ddlab/diagnostics.hpp"

namespace ddlab {

/// The diagnostics computed for one model, any subset present. Serialises to
/// a JSON object with one key per present report, each echoing its own
/// parameters (seed, k, group_size, draws, mode) so the numbers are
/// regenerable from the file alone.
struct DiagnosticsBundle {
    std::optional<CamSimilarityStats> cam_input_hidden;
    std::optional<CamSimilarityStats> cam_hidden_output;
    std::optional<RichnessReport> richness;
    std::optional<KnnReport> knn;
    std::optional<std::map<double, double>> weight_sparsity;
    std::optional<std::size_t> exact_zero_weights;
    std::optional<double> activation_sparsity;
    std::optional<NdcgReport> ndcg;
};

std::string to_json_string(const DiagnosticsBundle& bundle, int indent = 2);

/// Shortest round-trip decimal form of a double ("" for NaN). Shared by the
/// CSV writers so identical values always print identically.
std::string format_double(double v);

}  // namespace ddlab
