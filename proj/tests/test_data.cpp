#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "ddlab/dataset.hpp"
#include "ddlab/error.hpp"
#include "ddlab/idx.hpp"
#include "ddlab/noise_record.hpp"
#include "testutil.hpp"

using namespace ddlab;

namespace {

/// 3 tiny 2x2 images with labels 0,1,2.
void write_fixture(const std::filesystem::path& dir) {
    const std::vector<std::uint8_t> pixels{0,   255, 128, 64,   // image 0
                                           255, 255, 0,   0,    // image 1
                                           10,  20,  30,  40};  // image 2
    const std::vector<std::uint8_t> labels{0, 1, 2};
    write_idx_images(dir / "imgs", 2, 2, pixels);
    write_idx_labels(dir / "labels", labels);
}

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("synthetic IDX fixture round-trips through writer and loader") {
    testutil::TempDir tmp("idx");
    write_fixture(tmp.path());
    const Dataset ds = load_dataset(tmp.path() / "imgs", tmp.path() / "labels");
    CHECK(ds.size() == 3);
    CHECK(ds.images.cols() == 4);
    CHECK(ds.images(0, 0) == doctest::Approx(0.0));
    CHECK(ds.images(0, 1) == doctest::Approx(1.0));
    CHECK(ds.images(0, 2) == doctest::Approx(128.0 / 255.0));
    CHECK(ds.labels == std::vector<int>{0, 1, 2});
}

TEST_CASE("IDX loader raises distinct error kinds") {
    testutil::TempDir tmp("idxerr");
    write_fixture(tmp.path());

    // Labels parsed as images: wrong magic.
    try {
        read_idx_images(tmp.path() / "labels");
        FAIL("expected IdxError");
    } catch (const IdxError& e) {
        CHECK(e.kind() == IdxError::Kind::bad_magic);
    }

    // Truncated payload.
    auto bytes = slurp(tmp.path() / "imgs");
    bytes.resize(bytes.size() - 3);
    {
        std::ofstream os(tmp.path() / "trunc", std::ios::binary);
        os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }
    try {
        read_idx_images(tmp.path() / "trunc");
        FAIL("expected IdxError");
    } catch (const IdxError& e) {
        CHECK(e.kind() == IdxError::Kind::truncated);
    }

    // Image/label count mismatch.
    const std::vector<std::uint8_t> two_labels{0, 1};
    write_idx_labels(tmp.path() / "short_labels", two_labels);
    try {
        load_dataset(tmp.path() / "imgs", tmp.path() / "short_labels");
        FAIL("expected IdxError");
    } catch (const IdxError& e) {
        CHECK(e.kind() == IdxError::Kind::count_mismatch);
    }
}

TEST_CASE("MNIST train files hold 60000 samples of 784 features" *
          doctest::skip(std::getenv("DDLAB_DATA_DIR") == nullptr)) {
    const std::filesystem::path dir(std::getenv("DDLAB_DATA_DIR") ? std::getenv("DDLAB_DATA_DIR")
                                                                  : "");
    const Dataset ds = load_dataset(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    CHECK(ds.size() == 60000);
    CHECK(ds.images.cols() == 784);
    for (int l : ds.labels) {
        CHECK(l >= 0);
        CHECK(l <= 9);
    }
    for (std::size_t i = 0; i < 784; ++i) {
        CHECK(ds.images.data()[i] >= 0.0);
        CHECK(ds.images.data()[i] <= 1.0);
    }
}

TEST_CASE("subsample") {
    Rng data_rng(30);
    Dataset ds;
    ds.images = testutil::random_matrix(50, 3, data_rng);
    ds.labels.resize(50);
    for (auto& l : ds.labels) l = static_cast<int>(data_rng.below(10));

    SUBCASE("n = size is a permutation") {
        Rng rng(31);
        const Dataset out = subsample(ds, 50, rng);
        std::multiset<double> before, after;
        for (std::size_t i = 0; i < ds.images.size(); ++i) before.insert(ds.images.data()[i]);
        for (std::size_t i = 0; i < out.images.size(); ++i) after.insert(out.images.data()[i]);
        CHECK(before == after);
    }
    SUBCASE("drawn without replacement") {
        Rng rng(32);
        const Dataset out = subsample(ds, 20, rng);
        std::set<double> firsts;
        for (std::size_t i = 0; i < 20; ++i) firsts.insert(out.images(i, 0));
        CHECK(firsts.size() == 20);  // all distinct rows (values are continuous)
    }
    SUBCASE("same seed, same subset") {
        Rng r1(33), r2(33);
        CHECK(subsample(ds, 10, r1).images == subsample(ds, 10, r2).images);
    }
    SUBCASE("n > size rejected") {
        Rng rng(34);
        CHECK_THROWS_AS(subsample(ds, 51, rng), ValueError);
    }
}

TEST_CASE("label noise boundaries") {
    Rng data_rng(35);
    Dataset ds;
    ds.images = testutil::random_matrix(100, 2, data_rng);
    ds.labels.resize(100);
    for (auto& l : ds.labels) l = static_cast<int>(data_rng.below(10));

    Rng r0(36);
    const NoisyDataset clean = inject_label_noise(ds, 0.0, r0);
    CHECK(clean.noise_mask.empty());
    CHECK(clean.labels_effective == ds.labels);

    Rng r1(37);
    const NoisyDataset full = inject_label_noise(ds, 1.0, r1);
    CHECK(full.noise_mask.size() == 100);

    Rng r2(38);
    CHECK_THROWS_AS(inject_label_noise(ds, 1.5, r2), ValueError);
    CHECK_THROWS_AS(inject_label_noise(ds, -0.1, r2), ValueError);
}

TEST_CASE("mask size stays within the binomial 4-sigma band at p=0.2, N=4000") {
    Rng data_rng(39);
    Dataset ds;
    ds.images = testutil::random_matrix(4000, 1, data_rng);
    ds.labels.assign(4000, 3);
    Rng rng(40);
    const NoisyDataset noisy = inject_label_noise(ds, 0.2, rng);
    const double sigma = std::sqrt(4000 * 0.2 * 0.8);
    CHECK(noisy.noise_mask.size() > 800 - 4 * sigma);
    CHECK(noisy.noise_mask.size() < 800 + 4 * sigma);
}

TEST_CASE("clean labels never change; originals never touched") {
    Rng data_rng(41);
    Dataset ds;
    ds.images = testutil::random_matrix(500, 2, data_rng);
    ds.labels.resize(500);
    for (auto& l : ds.labels) l = static_cast<int>(data_rng.below(10));
    Rng rng(42);
    const NoisyDataset noisy = inject_label_noise(ds, 0.3, rng);
    CHECK(noisy.labels_original == ds.labels);
    for (std::size_t i = 0; i < noisy.size(); ++i)
        if (!noisy.is_noisy(i)) CHECK(noisy.labels_effective[i] == noisy.labels_original[i]);
    // uniform_other mode never keeps the original label
    Rng rng2(43);
    const NoisyDataset other = inject_label_noise(ds, 0.3, rng2, NoiseMode::uniform_other);
    for (std::uint32_t i : other.noise_mask)
        CHECK(other.labels_effective[i] != other.labels_original[i]);
}

// Injecting into an already-noisy dataset is a compile error, not a runtime
// path: the overload taking NoisyDataset is deleted.
template <typename T, typename = void>
struct can_inject : std::false_type {};
template <typename T>
struct can_inject<T, std::void_t<decltype(inject_label_noise(
                         std::declval<const T&>(), 0.1, std::declval<Rng&>()))>>
    : std::true_type {};
static_assert(can_inject<Dataset>::value);
static_assert(!can_inject<NoisyDataset>::value);

TEST_CASE("empirical mask rate over 1000 seeded injections at p=0.1") {
    Rng data_rng(44);
    Dataset ds;
    ds.images = testutil::random_matrix(1000, 1, data_rng);
    ds.labels.assign(1000, 0);
    double total = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Rng rng(1000 + trial);
        total += static_cast<double>(inject_label_noise(ds, 0.1, rng).noise_mask.size()) / 1000.0;
    }
    const double mean = total / 1000.0;
    CHECK(mean > 0.09);
    CHECK(mean < 0.11);
}

TEST_CASE("noise record round-trip is byte-idempotent") {
    testutil::TempDir tmp("noiserec");
    Rng data_rng(45);
    Dataset ds;
    ds.images = testutil::random_matrix(60, 3, data_rng);
    ds.labels.resize(60);
    for (auto& l : ds.labels) l = static_cast<int>(data_rng.below(10));
    Rng rng(46);
    const NoisyDataset noisy = inject_label_noise(ds, 0.25, rng);

    const auto p1 = tmp.path() / "rec1.json";
    const auto p2 = tmp.path() / "rec2.json";
    save_noise_record(p1, make_noise_record(ds, noisy));
    const NoiseRecord loaded = load_noise_record(p1);
    save_noise_record(p2, loaded);
    CHECK(slurp(p1) == slurp(p2));

    const NoisyDataset rebuilt = apply_noise_record(ds, loaded);
    CHECK(rebuilt.labels_effective == noisy.labels_effective);
    CHECK(rebuilt.noise_mask == noisy.noise_mask);
    CHECK(noise_content_hash(rebuilt) == noise_content_hash(noisy));
}

TEST_CASE("noise record refuses a different dataset") {
    testutil::TempDir tmp("noisehash");
    Rng data_rng(47);
    Dataset ds;
    ds.images = testutil::random_matrix(40, 3, data_rng);
    ds.labels.assign(40, 1);
    Rng rng(48);
    const NoisyDataset noisy = inject_label_noise(ds, 0.5, rng);
    const auto path = tmp.path() / "rec.json";
    save_noise_record(path, make_noise_record(ds, noisy));

    Dataset other = ds;
    other.images(0, 0) += 0.5;
    CHECK_THROWS_AS(apply_noise_record(other, load_noise_record(path)), DataError);
}

TEST_CASE("p=0 record stores an empty mask") {
    testutil::TempDir tmp("noisezero");
    Rng data_rng(49);
    Dataset ds;
    ds.images = testutil::random_matrix(10, 2, data_rng);
    ds.labels.assign(10, 2);
    Rng rng(50);
    const auto path = tmp.path() / "rec.json";
    save_noise_record(path, make_noise_record(ds, inject_label_noise(ds, 0.0, rng)));
    const NoiseRecord rec = load_noise_record(path);
    CHECK(rec.mask.empty());
    CHECK(rec.p == 0.0);
}
