#include "ddlab/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "ddlab/error.hpp"
#include "ddlab/idx.hpp"

namespace ddlab {

namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

}  // namespace

bool NoisyDataset::is_noisy(std::size_t i) const {
    return std::binary_search(noise_mask.begin(), noise_mask.end(),
                              static_cast<std::uint32_t>(i));
}

std::vector<std::uint32_t> NoisyDataset::clean_indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(size() - noise_mask.size());
    std::size_t m = 0;
    for (std::uint32_t i = 0; i < size(); ++i) {
        if (m < noise_mask.size() && noise_mask[m] == i) {
            ++m;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path) {
    IdxImages raw = read_idx_images(images_path);
    std::vector<std::uint8_t> labels = read_idx_labels(labels_path);
    if (raw.count != labels.size())
        throw IdxError(IdxError::Kind::count_mismatch,
                       "images hold " + std::to_string(raw.count) + " samples but labels hold " +
                           std::to_string(labels.size()));
    Dataset ds;
    const std::size_t d = raw.rows * raw.cols;
    ds.images = Matrix(raw.count, d);
    for (std::size_t i = 0; i < raw.pixels.size(); ++i)
        ds.images.data()[i] = static_cast<double>(raw.pixels[i]) / 255.0;
    ds.labels.assign(labels.begin(), labels.end());
    return ds;
}

Dataset subsample(const Dataset& ds, std::size_t n, Rng& rng) {
    if (n > ds.size())
        throw ValueError("subsample: n=" + std::to_string(n) + " exceeds dataset size " +
                         std::to_string(ds.size()));
    std::vector<std::uint32_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first n entries become the sample.
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(ds.size() - i));
        std::swap(idx[i], idx[j]);
    }
    Dataset out;
    const std::size_t d = ds.images.cols();
    out.images = Matrix(n, d);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(out.images.data() + i * d, ds.images.data() + static_cast<std::size_t>(idx[i]) * d,
                    d * sizeof(double));
        out.labels[i] = ds.labels[idx[i]];
    }
    return out;
}

NoisyDataset inject_label_noise(const Dataset& ds, double p, Rng& rng, NoiseMode mode) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValueError("inject_label_noise: p must be in [0,1]");
    NoisyDataset out;
    out.images = ds.images;
    out.labels_original = ds.labels;
    out.labels_effective = ds.labels;
    out.p = p;
    out.seed = rng.seed();
    out.mode = mode;
    const int num_classes = 10;
    for (std::uint32_t i = 0; i < ds.size(); ++i) {
        if (rng.uniform() >= p) continue;
        out.noise_mask.push_back(i);
        if (mode == NoiseMode::uniform_all) {
            out.labels_effective[i] = static_cast<int>(rng.below(num_classes));
        } else {
            int draw = static_cast<int>(rng.below(num_classes - 1));
            if (draw >= ds.labels[i]) ++draw;
            out.labels_effective[i] = draw;
        }
    }
    return out;
}

std::uint64_t dataset_content_hash(const Dataset& ds) {
    std::uint64_t h = kFnvOffset;
    const std::uint64_t rows = ds.images.rows(), cols = ds.images.cols();
    fnv1a(h, &rows, sizeof rows);
    fnv1a(h, &cols, sizeof cols);
    fnv1a(h, ds.images.data(), ds.images.size() * sizeof(double));
    for (int l : ds.labels) {
        const auto v = static_cast<std::uint8_t>(l);
        fnv1a(h, &v, 1);
    }
    return h;
}

std::uint64_t noise_content_hash(const NoisyDataset& ds) {
    std::uint64_t h = kFnvOffset;
    fnv1a(h, ds.noise_mask.data(), ds.noise_mask.size() * sizeof(std::uint32_t));
    for (int l : ds.labels_effective) {
        const auto v = static_cast<std::uint8_t>(l);
        fnv1a(h, &v, 1);
    }
    return h;
}

}  // namespace ddlab
