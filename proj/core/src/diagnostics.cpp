#include "ddlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

int resolve_layer(const ActivationCapture& capture, int layer) {
    const int resolved = layer < 0 ? static_cast<int>(capture.penultimate()) : layer;
    if (resolved < 0 || static_cast<std::size_t>(resolved) >= capture.layers.size())
        throw ValueError("capture has no layer " + std::to_string(resolved));
    return resolved;
}

std::vector<std::vector<std::uint32_t>> bucket_by_class(const ActivationCapture& capture,
                                                        int num_classes) {
    std::vector<std::vector<std::uint32_t>> buckets(num_classes);
    for (std::uint32_t i = 0; i < capture.predicted.size(); ++i)
        buckets[capture.predicted[i]].push_back(i);
    return buckets;
}

}  // namespace

CamSet compute_cams(const ActivationCapture& capture, int layer_from) {
    if (layer_from < 0 || static_cast<std::size_t>(layer_from) + 1 >= capture.layers.size())
        throw ValueError("compute_cams: capture lacks layer pair (" + std::to_string(layer_from) +
                         ", " + std::to_string(layer_from + 1) + ")");
    const Matrix& lo = capture.layers[layer_from];
    const Matrix& hi = capture.layers[layer_from + 1];
    const int num_classes = static_cast<int>(capture.layers.back().cols());
    const auto buckets = bucket_by_class(capture, num_classes);

    CamSet out;
    for (int j = 0; j < num_classes; ++j) {
        const auto& idx = buckets[j];
        if (idx.empty()) {
            out.missing_classes.push_back(j);
            continue;
        }
        Matrix acc(lo.cols(), hi.cols());
        for (std::uint32_t i : idx) {
            const auto u = lo.row(i);
            const auto v = hi.row(i);
            for (std::size_t r = 0; r < u.size(); ++r) {
                const double ur = u[r];
                if (ur == 0.0) continue;
                double* row = acc.data() + r * v.size();
                for (std::size_t c = 0; c < v.size(); ++c) row[c] += ur * v[c];
            }
        }
        const double inv = 1.0 / static_cast<double>(idx.size());
        for (std::size_t t = 0; t < acc.size(); ++t) acc.data()[t] *= inv;
        out.cams.push_back({j, layer_from, static_cast<int>(idx.size()), std::move(acc)});
    }
    return out;
}

CamSimilarityStats cam_similarity_stats(const CamSet& set) {
    const std::size_t n = set.cams.size();
    if (n < 2) throw ValueError("cam_similarity_stats: need at least 2 CAMs");
    CamSimilarityStats stats;
    stats.class_ids.reserve(n);
    for (const Cam& c : set.cams) stats.class_ids.push_back(c.class_id);
    stats.pairwise = Matrix(n, n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stats.pairwise(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine_similarity(set.cams[i].matrix, set.cams[j].matrix);
            stats.pairwise(i, j) = s;
            stats.pairwise(j, i) = s;
            sum += s;
        }
    }
    stats.mean = sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
    return stats;
}

RichnessReport estimate_richness(const ActivationCapture& capture,
                                 const RichnessOptions& options) {
    if (options.group_size < 1) throw ValueError("estimate_richness: group_size must be >= 1");
    if (!options.exhaustive && options.draws < 1)
        throw ValueError("estimate_richness: draws must be >= 1");
    if (options.exhaustive && options.group_size > 25)
        throw ValueError("estimate_richness: exhaustive enumeration limited to group_size <= 25");
    const int layer = resolve_layer(capture, options.layer);
    const Matrix& acts = capture.layers[layer];
    const std::size_t width = acts.cols();
    const int num_classes = static_cast<int>(capture.layers.back().cols());
    if (num_classes > 10) throw ValueError("estimate_richness: more than 10 classes unsupported");
    const auto buckets = bucket_by_class(capture, num_classes);
    const auto g = static_cast<std::size_t>(options.group_size);

    RichnessReport report;
    report.options = options;
    report.per_class.fill(std::numeric_limits<double>::quiet_NaN());
    report.groups_per_class.fill(0);

    std::vector<double> group_mean(width);
    double overall_sum = 0.0;
    int classes_counted = 0;

    for (int j = 0; j < num_classes; ++j) {
        const auto& idx = buckets[j];
        const std::size_t groups = idx.size() / g;
        report.groups_per_class[j] = static_cast<int>(groups);
        if (groups == 0) continue;
        double class_sum = 0.0;
        for (std::size_t grp = 0; grp < groups; ++grp) {
            const std::uint32_t* members = idx.data() + grp * g;
            double best = -std::numeric_limits<double>::infinity();
            const std::uint64_t n_draws =
                options.exhaustive ? (1ULL << options.group_size)
                                   : static_cast<std::uint64_t>(options.draws);
            Rng draw_rng(derive_seed(options.seed, {static_cast<std::uint64_t>(j), grp}));
            for (std::uint64_t d = 0; d < n_draws; ++d) {
                std::fill(group_mean.begin(), group_mean.end(), 0.0);
                if (options.exhaustive) {
                    for (std::size_t i = 0; i < g; ++i) {
                        const double sign = (d >> i) & 1ULL ? 1.0 : -1.0;
                        const auto row = acts.row(members[i]);
                        for (std::size_t h = 0; h < width; ++h) group_mean[h] += sign * row[h];
                    }
                } else {
                    const std::vector<double> sigma = sample_rademacher(draw_rng, g);
                    for (std::size_t i = 0; i < g; ++i) {
                        const double sign = sigma[i];
                        const auto row = acts.row(members[i]);
                        for (std::size_t h = 0; h < width; ++h) group_mean[h] += sign * row[h];
                    }
                }
                for (auto& v : group_mean) v /= static_cast<double>(g);
                double score;
                if (options.mode == RichnessMode::signed_mean) {
                    score = std::accumulate(group_mean.begin(), group_mean.end(), 0.0) /
                            static_cast<double>(width);
                } else {
                    score = norm2(group_mean);
                }
                best = std::max(best, score);
            }
            class_sum += best;
        }
        report.per_class[j] = class_sum / static_cast<double>(groups);
        overall_sum += report.per_class[j];
        ++classes_counted;
    }
    if (classes_counted == 0)
        throw ValueError("estimate_richness: no class has " + std::to_string(options.group_size) +
                         " samples");
    report.overall = overall_sum / static_cast<double>(classes_counted);
    return report;
}

KnnReport knn_noisy_prediction(const ActivationCapture& capture_train,
                               const NoisyDataset& dataset, int k) {
    if (dataset.noise_mask.empty()) throw ValueError("knn_noisy_prediction: no noisy samples");
    if (k < 1) throw ValueError("knn_noisy_prediction: k must be >= 1");
    if (capture_train.batch_size() != dataset.size())
        throw DimensionError("knn_noisy_prediction: capture/dataset size mismatch");
    const std::vector<std::uint32_t> clean = dataset.clean_indices();
    if (static_cast<std::size_t>(k) > clean.size())
        throw ValueError("knn_noisy_prediction: k=" + std::to_string(k) + " exceeds clean count " +
                         std::to_string(clean.size()));

    const Matrix& acts = capture_train.layers[capture_train.penultimate()];
    std::vector<double> norms(acts.rows());
    for (std::size_t i = 0; i < acts.rows(); ++i) norms[i] = norm2(acts.row(i));

    const int num_classes = static_cast<int>(capture_train.layers.back().cols());
    std::vector<std::pair<double, std::uint32_t>> sims(clean.size());
    std::size_t hit_original = 0, hit_corrupted = 0;

    for (std::uint32_t noisy : dataset.noise_mask) {
        const auto q = acts.row(noisy);
        const double qn = norms[noisy];
        for (std::size_t c = 0; c < clean.size(); ++c) {
            const std::uint32_t idx = clean[c];
            // A zero vector has no defined cosine direction; rank it below
            // every attainable similarity so it is only picked as a last resort.
            double s = -2.0;
            if (qn != 0.0 && norms[idx] != 0.0)
                s = dot(q, acts.row(idx)) / (qn * norms[idx]);
            sims[c] = {s, idx};
        }
        auto more_similar = [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        };
        std::partial_sort(sims.begin(), sims.begin() + k, sims.end(), more_similar);

        std::array<int, 10> votes{};
        for (int t = 0; t < k; ++t) ++votes[dataset.labels_effective[sims[t].second]];
        int top = 0;
        for (int c = 1; c < num_classes; ++c)
            if (votes[c] > votes[top]) top = c;
        // Break vote ties toward the most similar neighbour carrying a tied label.
        int majority = -1;
        for (int t = 0; t < k && majority < 0; ++t) {
            const int label = dataset.labels_effective[sims[t].second];
            if (votes[label] == votes[top]) majority = label;
        }
        if (majority == dataset.labels_original[noisy]) ++hit_original;
        if (majority == dataset.labels_effective[noisy]) ++hit_corrupted;
    }

    KnnReport report;
    report.k = k;
    report.noisy_count = dataset.noise_mask.size();
    const auto m = static_cast<double>(report.noisy_count);
    report.p_original = static_cast<double>(hit_original) / m;
    report.p_corrupted = static_cast<double>(hit_corrupted) / m;
    return report;
}

std::map<double, double> weight_sparsity(const MlpModel& model,
                                         const std::vector<double>& thresholds) {
    std::size_t total = 0;
    for (const Matrix& w : model.weights) total += w.size();
    std::map<double, double> out;
    for (double t : thresholds) {
        std::size_t count = 0;
        for (const Matrix& w : model.weights)
            for (std::size_t i = 0; i < w.size(); ++i)
                if (std::abs(w.data()[i]) < t) ++count;
        out[t] = total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
    }
    return out;
}

std::size_t count_exact_zero_weights(const MlpModel& model) {
    std::size_t count = 0;
    for (const Matrix& w : model.weights)
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w.data()[i] == 0.0) ++count;
    return count;
}

double activation_sparsity(const ActivationCapture& capture, int layer) {
    const int resolved = resolve_layer(capture, layer);
    const Matrix& acts = capture.layers[resolved];
    if (acts.rows() == 0 || acts.cols() == 0)
        throw ValueError("activation_sparsity: empty layer");
    double sum = 0.0;
    for (std::size_t i = 0; i < acts.rows(); ++i) {
        std::size_t live = 0;
        for (double v : acts.row(i))
            if (v > 0.0) ++live;
        sum += static_cast<double>(live) / static_cast<double>(acts.cols());
    }
    return sum / static_cast<double>(acts.rows());
}

NdcgReport class_ndcg(const ActivationCapture& capture, int layer) {
    const int resolved = resolve_layer(capture, layer);
    const Matrix& acts = capture.layers[resolved];
    const int num_classes = static_cast<int>(capture.layers.back().cols());
    const std::size_t width = acts.cols();

    // DCG of the uniform distribution over num_classes ranks; the one-hot
    // distribution scores exactly 1 (all mass at rank 1, discount log2(2)).
    double uniform_dcg = 0.0;
    for (int r = 1; r <= num_classes; ++r)
        uniform_dcg += (1.0 / num_classes) / std::log2(static_cast<double>(r) + 1.0);

    std::vector<double> freq(num_classes);
    NdcgReport report;
    double sum = 0.0;
    for (std::size_t h = 0; h < width; ++h) {
        std::fill(freq.begin(), freq.end(), 0.0);
        double fires = 0.0;
        for (std::size_t i = 0; i < acts.rows(); ++i) {
            if (acts(i, h) > 0.0) {
                freq[capture.predicted[i]] += 1.0;
                fires += 1.0;
            }
        }
        if (fires == 0.0) {
            ++report.silent_neurons;
            continue;
        }
        for (auto& f : freq) f /= fires;
        std::sort(freq.begin(), freq.end(), std::greater<>());
        double dcg = 0.0;
        for (int r = 0; r < num_classes; ++r)
            dcg += freq[r] / std::log2(static_cast<double>(r) + 2.0);
        sum += (dcg - uniform_dcg) / (1.0 - uniform_dcg);
        ++report.active_neurons;
    }
    if (report.active_neurons == 0) throw ValueError("class_ndcg: no neuron ever activates");
    report.value = sum / static_cast<double>(report.active_neurons);
    return report;
}

}  // namespace ddlab
