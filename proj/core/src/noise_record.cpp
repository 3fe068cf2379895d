#include "ddlab/noise_record.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

const char* mode_name(NoiseMode m) {
    return m == NoiseMode::uniform_all ? "uniform_all" : "uniform_other";
}

NoiseMode mode_from_name(const std::string& s) {
    if (s == "uniform_all") return NoiseMode::uniform_all;
    if (s == "uniform_other") return NoiseMode::uniform_other;
    throw DataError("noise record: unknown mode '" + s + "'");
}

}  // namespace

NoiseRecord make_noise_record(const Dataset& base, const NoisyDataset& noisy) {
    NoiseRecord rec;
    rec.dataset_hash = dataset_content_hash(base);
    rec.seed = noisy.seed;
    rec.p = noisy.p;
    rec.mode = noisy.mode;
    rec.mask = noisy.noise_mask;
    rec.labels_original = noisy.labels_original;
    rec.labels_effective = noisy.labels_effective;
    return rec;
}

void save_noise_record(const std::filesystem::path& path, const NoiseRecord& rec) {
    json j;
    j["version"] = rec.version;
    j["dataset_hash"] = hash_hex(rec.dataset_hash);
    j["seed"] = rec.seed;
    j["p"] = rec.p;
    j["mode"] = mode_name(rec.mode);
    j["mask"] = rec.mask;
    j["labels_original"] = rec.labels_original;
    j["labels_effective"] = rec.labels_effective;
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("noise record: cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw DataError("noise record: write failed for " + path.string());
}

NoiseRecord load_noise_record(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("noise record: cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("noise record: malformed JSON in " + path.string() + ": " + e.what());
    }
    try {
        NoiseRecord rec;
        rec.version = j.at("version").get<int>();
        if (rec.version != 1)
            throw DataError("noise record: unsupported version " + std::to_string(rec.version));
        rec.dataset_hash = hash_from_hex(j.at("dataset_hash").get<std::string>());
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.p = j.at("p").get<double>();
        rec.mode = mode_from_name(j.at("mode").get<std::string>());
        rec.mask = j.at("mask").get<std::vector<std::uint32_t>>();
        rec.labels_original = j.at("labels_original").get<std::vector<int>>();
        rec.labels_effective = j.at("labels_effective").get<std::vector<int>>();
        if (rec.labels_original.size() != rec.labels_effective.size())
            throw DataError("noise record: label array size mismatch");
        return rec;
    } catch (const json::exception& e) {
        throw DataError("noise record: missing or mistyped field in " + path.string() + ": " +
                        e.what());
    }
}

NoisyDataset apply_noise_record(const Dataset& base, const NoiseRecord& rec) {
    const std::uint64_t have = dataset_content_hash(base);
    if (have != rec.dataset_hash)
        throw DataError("noise record: dataset hash " + hash_hex(have) +
                        " does not match record hash " + hash_hex(rec.dataset_hash));
    if (rec.labels_original.size() != base.size())
        throw DataError("noise record: label count does not match dataset");
    if (rec.labels_original != base.labels)
        throw DataError("noise record: original labels do not match dataset");
    NoisyDataset out;
    out.images = base.images;
    out.labels_original = rec.labels_original;
    out.labels_effective = rec.labels_effective;
    out.noise_mask = rec.mask;
    out.p = rec.p;
    out.seed = rec.seed;
    out.mode = rec.mode;
    return out;
}

}  // namespace ddlab
