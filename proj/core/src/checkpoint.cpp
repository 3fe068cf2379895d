#include "ddlab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError("checkpoint: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw DataError("checkpoint: truncated payload");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(model.layer_widths.size()));
    for (int w : model.layer_widths) put_u32(os, static_cast<std::uint32_t>(w));
    for (std::size_t l = 0; l < model.num_weight_layers(); ++l) {
        const Matrix& w = model.weights[l];
        for (std::size_t i = 0; i < w.size(); ++i) put_f64(os, w.data()[i]);
        for (double b : model.biases[l]) put_f64(os, b);
    }
    if (!os) throw DataError("checkpoint: write failed for " + path.string());
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("checkpoint: bad magic in " + path.string());
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t n_widths = get_u32(is);
    if (n_widths < 2) throw DataError("checkpoint: fewer than two layer widths");
    MlpModel model;
    model.layer_widths.resize(n_widths);
    for (auto& w : model.layer_widths) {
        w = static_cast<int>(get_u32(is));
        if (w <= 0) throw DataError("checkpoint: non-positive layer width");
    }
    for (std::uint32_t l = 0; l + 1 < n_widths; ++l) {
        Matrix w(static_cast<std::size_t>(model.layer_widths[l]),
                 static_cast<std::size_t>(model.layer_widths[l + 1]));
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = get_f64(is);
        std::vector<double> b(model.layer_widths[l + 1]);
        for (auto& v : b) v = get_f64(is);
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    char extra;
    if (is.read(&extra, 1))
        throw DataError("checkpoint: trailing bytes in " + path.string());
    return model;
}

}  // namespace ddlab
