#include "ddlab/idx.hpp"

#include <fstream>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t get_be32(std::istream& is, const std::string& ctx) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IdxError(IdxError::Kind::truncated, ctx + ": truncated header");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void put_be32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("idx: cannot open " + path.string());
    const std::string ctx = path.filename().string();
    const std::uint32_t magic = get_be32(is, ctx);
    if (magic != kImageMagic)
        throw IdxError(IdxError::Kind::bad_magic,
                       ctx + ": image magic " + std::to_string(magic) + " != 2051");
    IdxImages out;
    out.count = get_be32(is, ctx);
    out.rows = get_be32(is, ctx);
    out.cols = get_be32(is, ctx);
    const std::size_t expect = out.count * out.rows * out.cols;
    out.pixels.resize(expect);
    is.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(expect));
    if (static_cast<std::size_t>(is.gcount()) != expect)
        throw IdxError(IdxError::Kind::truncated,
                       ctx + ": expected " + std::to_string(expect) + " pixel bytes, got " +
                           std::to_string(is.gcount()));
    return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("idx: cannot open " + path.string());
    const std::string ctx = path.filename().string();
    const std::uint32_t magic = get_be32(is, ctx);
    if (magic != kLabelMagic)
        throw IdxError(IdxError::Kind::bad_magic,
                       ctx + ": label magic " + std::to_string(magic) + " != 2049");
    const std::uint32_t count = get_be32(is, ctx);
    std::vector<std::uint8_t> labels(count);
    is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(is.gcount()) != count)
        throw IdxError(IdxError::Kind::truncated,
                       ctx + ": expected " + std::to_string(count) + " label bytes, got " +
                           std::to_string(is.gcount()));
    return labels;
}

void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
    if (rows == 0 || cols == 0 || pixels.size() % (rows * cols) != 0)
        throw ValueError("write_idx_images: pixel payload not a multiple of rows*cols");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("idx: cannot open " + path.string() + " for writing");
    put_be32(os, kImageMagic);
    put_be32(os, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
    put_be32(os, static_cast<std::uint32_t>(rows));
    put_be32(os, static_cast<std::uint32_t>(cols));
    os.write(reinterpret_cast<const char*>(pixels.data()),
             static_cast<std::streamsize>(pixels.size()));
    if (!os) throw DataError("idx: write failed for " + path.string());
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("idx: cannot open " + path.string() + " for writing");
    put_be32(os, kLabelMagic);
    put_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
    if (!os) throw DataError("idx: write failed for " + path.string());
}

}  // namespace ddlab
