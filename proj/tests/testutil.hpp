#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately use the most literal formulation available (triple loops,
// full enumeration, full pairwise scans) and never call the code paths they
// check.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "ddlab/dataset.hpp"
#include "ddlab/idx.hpp"
#include "ddlab/matrix.hpp"
#include "ddlab/mlp.hpp"
#include "ddlab/rng.hpp"

namespace testutil {

inline ddlab::Matrix random_matrix(std::size_t rows, std::size_t cols, ddlab::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
    ddlab::Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

inline ddlab::Matrix naive_matmul(const ddlab::Matrix& a, const ddlab::Matrix& b) {
    ddlab::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline ddlab::Matrix naive_outer(std::span<const double> u, std::span<const double> v) {
    ddlab::Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

inline double max_rel_diff(const ddlab::Matrix& a, const ddlab::Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), 1e-300});
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
        }
    return worst;
}

/// Exhaustive supremum over all sign vectors of the scored group average;
/// the reference for the sampled richness estimator.
inline double richness_sup_oracle(const ddlab::Matrix& acts,
                                  std::span<const std::uint32_t> members, bool vector_norm) {
    const std::size_t g = members.size();
    const std::size_t width = acts.cols();
    double best = -1e300;
    for (std::uint64_t bits = 0; bits < (1ULL << g); ++bits) {
        std::vector<double> mean(width, 0.0);
        for (std::size_t i = 0; i < g; ++i) {
            const double sign = (bits >> i) & 1ULL ? 1.0 : -1.0;
            for (std::size_t h = 0; h < width; ++h) mean[h] += sign * acts(members[i], h);
        }
        for (auto& v : mean) v /= static_cast<double>(g);
        double score = 0.0;
        if (vector_norm) {
            for (double v : mean) score += v * v;
            score = std::sqrt(score);
        } else {
            for (double v : mean) score += v;
            score /= static_cast<double>(width);
        }
        best = std::max(best, score);
    }
    return best;
}

struct KnnOracleResult {
    double p = 0.0;
    double p_star = 0.0;
};

/// Full pairwise-similarity k-NN vote, no shortcuts. Mirrors the documented
/// tie rules: neighbours ordered by (similarity desc, index asc); vote ties
/// resolved by the most similar neighbour holding a tied label.
inline KnnOracleResult knn_oracle(const ddlab::Matrix& acts, const ddlab::NoisyDataset& ds,
                                  int k) {
    const auto clean = ds.clean_indices();
    std::size_t hit = 0, hit_star = 0;
    for (std::uint32_t noisy : ds.noise_mask) {
        std::vector<std::pair<double, std::uint32_t>> sims;
        const auto q = acts.row(noisy);
        const double qn = ddlab::norm2(q);
        for (std::uint32_t c : clean) {
            const double cn = ddlab::norm2(acts.row(c));
            double s = -2.0;
            if (qn != 0.0 && cn != 0.0) s = ddlab::dot(q, acts.row(c)) / (qn * cn);
            sims.emplace_back(s, c);
        }
        std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<int> votes(10, 0);
        for (int t = 0; t < k; ++t) ++votes[ds.labels_effective[sims[t].second]];
        const int top_count = *std::max_element(votes.begin(), votes.end());
        int majority = -1;
        for (int t = 0; t < k && majority < 0; ++t) {
            const int label = ds.labels_effective[sims[t].second];
            if (votes[label] == top_count) majority = label;
        }
        if (majority == ds.labels_original[noisy]) ++hit;
        if (majority == ds.labels_effective[noisy]) ++hit_star;
    }
    const auto m = static_cast<double>(ds.noise_mask.size());
    return {static_cast<double>(hit) / m, static_cast<double>(hit_star) / m};
}

/// Deterministic 4x4-pixel, 10-class stand-in for MNIST: class c lights
/// pixels c and (c+5) mod 16 with noise on top. Learnable by tiny MLPs in a
/// few epochs. Writes train/test IDX pairs with the standard file names.
inline void write_synthetic_idx(const std::filesystem::path& dir, std::size_t n_train,
                                std::size_t n_test, std::uint64_t seed) {
    ddlab::Rng rng(seed);
    auto emit = [&rng, &dir](const char* img_name, const char* lbl_name, std::size_t n) {
        std::vector<std::uint8_t> pixels(n * 16);
        std::vector<std::uint8_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int c = static_cast<int>(rng.below(10));
            labels[i] = static_cast<std::uint8_t>(c);
            for (int px = 0; px < 16; ++px) {
                double v = rng.uniform(0.0, 0.25);
                if (px == c || px == (c + 5) % 16) v = rng.uniform(0.7, 1.0);
                pixels[i * 16 + px] = static_cast<std::uint8_t>(v * 255.0);
            }
        }
        ddlab::write_idx_images(dir / img_name, 4, 4, pixels);
        ddlab::write_idx_labels(dir / lbl_name, labels);
    };
    emit("train-images-idx3-ubyte", "train-labels-idx1-ubyte", n_train);
    emit("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", n_test);
}

/// Unique temp directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("ddlab_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace testutil
