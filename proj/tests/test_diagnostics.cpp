#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddlab/diagnostics.hpp"
#include "ddlab/error.hpp"
#include "testutil.hpp"

using namespace ddlab;

namespace {

/// Capture with explicit layers and predictions; logits synthesised one-hot
/// so predicted classes are exactly `predicted`.
ActivationCapture make_capture(Matrix hidden, std::vector<int> predicted, int num_classes = 10) {
    ActivationCapture cap;
    Matrix logits(hidden.rows(), num_classes);
    for (std::size_t i = 0; i < hidden.rows(); ++i) logits(i, predicted[i]) = 1.0;
    Matrix input(hidden.rows(), 1);
    for (std::size_t i = 0; i < hidden.rows(); ++i) input(i, 0) = 1.0;
    cap.layers.push_back(std::move(input));
    cap.layers.push_back(std::move(hidden));
    cap.layers.push_back(std::move(logits));
    cap.predicted = std::move(predicted);
    return cap;
}

}  // namespace

TEST_CASE("a single-sample class CAM equals that sample's outer product") {
    ActivationCapture cap;
    cap.layers.push_back(Matrix::from_rows({{1.0, 2.0}}));
    cap.layers.push_back(Matrix::from_rows({{3.0, 4.0, 5.0}}));
    Matrix logits(1, 10);
    logits(0, 3) = 1.0;
    cap.layers.push_back(logits);
    cap.predicted = {3};

    const CamSet set = compute_cams(cap, 0);
    REQUIRE(set.cams.size() == 1);
    CHECK(set.cams[0].class_id == 3);
    CHECK(set.cams[0].support == 1);
    CHECK(set.cams[0].matrix == outer(cap.layers[0].row(0), cap.layers[1].row(0)));
    CHECK(set.missing_classes.size() == 9);
}

TEST_CASE("two identical samples leave the CAM unchanged") {
    ActivationCapture cap;
    cap.layers.push_back(Matrix::from_rows({{1.0, -1.0}, {1.0, -1.0}}));
    cap.layers.push_back(Matrix::from_rows({{2.0, 0.5}, {2.0, 0.5}}));
    Matrix logits(2, 10);
    logits(0, 7) = logits(1, 7) = 1.0;
    cap.layers.push_back(logits);
    cap.predicted = {7, 7};

    const CamSet set = compute_cams(cap, 0);
    REQUIRE(set.cams.size() == 1);
    CHECK(set.cams[0].support == 2);
    CHECK(testutil::max_rel_diff(set.cams[0].matrix,
                                 outer(cap.layers[0].row(0), cap.layers[1].row(0))) < 1e-15);
}

TEST_CASE("CAMs match the naive per-sample accumulation oracle") {
    Rng rng(60);
    const std::size_t n = 30;
    Matrix lo = testutil::random_matrix(n, 6, rng, 0.0, 1.0);
    Matrix hi = testutil::random_matrix(n, 4, rng, 0.0, 1.0);
    std::vector<int> pred(n);
    for (auto& p : pred) p = static_cast<int>(rng.below(10));

    ActivationCapture cap;
    Matrix logits(n, 10);
    for (std::size_t i = 0; i < n; ++i) logits(i, pred[i]) = 1.0;
    cap.layers = {lo, hi, logits};
    cap.predicted = pred;

    const CamSet set = compute_cams(cap, 0);
    for (const Cam& cam : set.cams) {
        Matrix acc(6, 4);
        int sup = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != cam.class_id) continue;
            ++sup;
            const Matrix o = testutil::naive_outer(lo.row(i), hi.row(i));
            for (std::size_t t = 0; t < acc.size(); ++t) acc.data()[t] += o.data()[t];
        }
        for (std::size_t t = 0; t < acc.size(); ++t) acc.data()[t] /= sup;
        CHECK(cam.support == sup);
        CHECK(testutil::max_rel_diff(cam.matrix, acc) < 1e-12);
    }
}

TEST_CASE("CAM similarity stats") {
    SUBCASE("identical CAMs give mean 1") {
        CamSet set;
        const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
        set.cams.push_back({0, 0, 1, m});
        set.cams.push_back({1, 0, 1, m});
        set.cams.push_back({2, 0, 1, m});
        const auto stats = cam_similarity_stats(set);
        CHECK(stats.mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(stats.pairwise(0, 0) == 1.0);
        CHECK(stats.pairwise(0, 1) == stats.pairwise(1, 0));
    }
    SUBCASE("orthogonal CAMs give mean 0") {
        CamSet set;
        set.cams.push_back({0, 0, 1, Matrix::from_rows({{1, 0}})});
        set.cams.push_back({1, 0, 1, Matrix::from_rows({{0, 1}})});
        CHECK(cam_similarity_stats(set).mean == doctest::Approx(0.0));
    }
    SUBCASE("fewer than two CAMs is an error") {
        CamSet set;
        set.cams.push_back({0, 0, 1, Matrix::from_rows({{1, 0}})});
        CHECK_THROWS_AS(cam_similarity_stats(set), ValueError);
    }
}

TEST_CASE("CAM linearity and similarity scale invariance") {
    Rng rng(61);
    Matrix lo = testutil::random_matrix(25, 5, rng, 0.0, 1.0);
    Matrix hi = testutil::random_matrix(25, 3, rng, 0.0, 1.0);
    std::vector<int> pred(25);
    for (auto& p : pred) p = static_cast<int>(rng.below(3));
    ActivationCapture cap;
    Matrix logits(25, 10);
    for (std::size_t i = 0; i < 25; ++i) logits(i, pred[i]) = 1.0;
    cap.layers = {lo, hi, logits};
    cap.predicted = pred;

    ActivationCapture scaled = cap;
    for (std::size_t i = 0; i < scaled.layers[0].size(); ++i) scaled.layers[0].data()[i] *= 3.5;

    const CamSet a = compute_cams(cap, 0);
    const CamSet b = compute_cams(scaled, 0);
    for (std::size_t i = 0; i < a.cams.size(); ++i) {
        Matrix want = a.cams[i].matrix;
        for (std::size_t t = 0; t < want.size(); ++t) want.data()[t] *= 3.5;
        CHECK(testutil::max_rel_diff(b.cams[i].matrix, want) < 1e-12);
    }
    CHECK(cam_similarity_stats(a).mean ==
          doctest::Approx(cam_similarity_stats(b).mean).epsilon(1e-12));
}

TEST_CASE("richness of all-zero activations is exactly zero") {
    Matrix hidden(40, 3);
    std::vector<int> pred(40, 2);
    const auto cap = make_capture(std::move(hidden), std::move(pred));
    RichnessOptions opts;
    opts.group_size = 10;
    opts.draws = 20;
    const auto report = estimate_richness(cap, opts);
    CHECK(report.overall == 0.0);
    CHECK(report.per_class[2] == 0.0);
    CHECK(report.groups_per_class[2] == 4);
}

TEST_CASE("sampled richness never exceeds the exhaustive supremum") {
    Rng rng(62);
    Matrix hidden = testutil::random_matrix(10, 3, rng, 0.0, 2.0);
    std::vector<int> pred(10, 5);
    const auto cap = make_capture(hidden, pred);

    std::vector<std::uint32_t> members(10);
    std::iota(members.begin(), members.end(), 0);

    for (const bool vector_norm : {false, true}) {
        RichnessOptions opts;
        opts.group_size = 10;
        opts.draws = 50;
        opts.seed = 63;
        opts.mode = vector_norm ? RichnessMode::vector_norm : RichnessMode::signed_mean;
        const double sampled = estimate_richness(cap, opts).overall;
        const double sup = testutil::richness_sup_oracle(hidden, members, vector_norm);
        CHECK(sampled <= sup + 1e-15);

        opts.exhaustive = true;
        const double enumerated = estimate_richness(cap, opts).overall;
        CHECK(enumerated == doctest::Approx(sup).epsilon(1e-13));
    }
}

TEST_CASE("richness is positively homogeneous") {
    Rng rng(64);
    Matrix hidden = testutil::random_matrix(60, 4, rng, 0.0, 1.0);
    std::vector<int> pred;
    for (std::size_t i = 0; i < 60; ++i) pred.push_back(static_cast<int>(i % 3));
    const auto cap = make_capture(hidden, pred);

    Matrix doubled = hidden;
    for (std::size_t i = 0; i < doubled.size(); ++i) doubled.data()[i] *= 2.0;
    const auto cap2 = make_capture(doubled, pred);

    RichnessOptions opts;
    opts.group_size = 5;
    opts.draws = 40;
    opts.seed = 65;
    const auto r1 = estimate_richness(cap, opts);
    const auto r2 = estimate_richness(cap2, opts);
    CHECK(std::abs(r2.overall - 2.0 * r1.overall) < 1e-12);
}

TEST_CASE("richness draw streams extend: max over 100 draws >= max over 50") {
    Rng rng(66);
    Matrix hidden = testutil::random_matrix(20, 3, rng, 0.0, 1.0);
    std::vector<int> pred(20, 0);
    const auto cap = make_capture(hidden, pred);

    RichnessOptions opts;
    opts.group_size = 20;
    opts.seed = 67;
    opts.draws = 50;
    const double at50 = estimate_richness(cap, opts).overall;
    opts.draws = 100;
    const double at100 = estimate_richness(cap, opts).overall;
    CHECK(at100 >= at50);
}

TEST_CASE("richness requires one full group somewhere") {
    Rng rng(68);
    Matrix hidden = testutil::random_matrix(6, 2, rng);
    std::vector<int> pred(6, 1);
    const auto cap = make_capture(hidden, pred);
    RichnessOptions opts;
    opts.group_size = 20;
    CHECK_THROWS_AS(estimate_richness(cap, opts), ValueError);
}

TEST_CASE("richness is deterministic given (capture, seed, parameters)") {
    Rng rng(69);
    Matrix hidden = testutil::random_matrix(50, 4, rng, 0.0, 1.0);
    std::vector<int> pred(50);
    for (std::size_t i = 0; i < 50; ++i) pred[i] = static_cast<int>(i % 2);
    const auto cap = make_capture(hidden, pred);
    RichnessOptions opts;
    opts.group_size = 10;
    opts.draws = 30;
    opts.seed = 70;
    CHECK(estimate_richness(cap, opts).overall == estimate_richness(cap, opts).overall);
}

namespace {

NoisyDataset make_noisy_fixture(std::size_t n, double p, std::uint64_t seed, Matrix* hidden_out,
                                ActivationCapture* cap_out) {
    Rng rng(seed);
    Dataset ds;
    ds.images = testutil::random_matrix(n, 2, rng, 0.0, 1.0);
    ds.labels.resize(n);
    for (auto& l : ds.labels) l = static_cast<int>(rng.below(10));
    Rng noise_rng(seed + 1);
    NoisyDataset noisy = inject_label_noise(ds, p, noise_rng);

    Matrix hidden = testutil::random_matrix(n, 5, rng, 0.0, 1.0);
    std::vector<int> pred(n, 0);
    *cap_out = make_capture(hidden, pred);
    *hidden_out = std::move(hidden);
    return noisy;
}

}  // namespace

TEST_CASE("knn matches the exhaustive pairwise oracle") {
    Matrix hidden;
    ActivationCapture cap;
    const NoisyDataset noisy = make_noisy_fixture(200, 0.2, 71, &hidden, &cap);
    for (int k : {1, 3, 10}) {
        const KnnReport got = knn_noisy_prediction(cap, noisy, k);
        const auto want = testutil::knn_oracle(hidden, noisy, k);
        CHECK(got.p_original == want.p);
        CHECK(got.p_corrupted == want.p_star);
        CHECK(got.noisy_count == noisy.noise_mask.size());
    }
}

TEST_CASE("knn: coincident nearest neighbour of the original class counts toward P") {
    Dataset ds;
    ds.images = Matrix(4, 1);
    ds.labels = {5, 5, 2, 2};
    Rng rng(72);
    NoisyDataset noisy = inject_label_noise(ds, 0.0, rng);
    // Corrupt sample 0 by hand: original 5, flipped to 2.
    noisy.noise_mask = {0};
    noisy.labels_effective[0] = 2;
    noisy.p = 0.25;

    Matrix hidden = Matrix::from_rows({{1.0, 0.0},    // noisy, same direction as sample 1
                                       {2.0, 0.0},    // clean, label 5
                                       {0.0, 1.0},    // clean, label 2
                                       {0.0, 3.0}});  // clean, label 2
    const auto cap = make_capture(hidden, {0, 0, 0, 0});
    const KnnReport rep = knn_noisy_prediction(cap, noisy, 1);
    CHECK(rep.p_original == 1.0);
    CHECK(rep.p_corrupted == 0.0);
}

TEST_CASE("knn guards") {
    Matrix hidden;
    ActivationCapture cap;
    const NoisyDataset clean = make_noisy_fixture(50, 0.0, 73, &hidden, &cap);
    CHECK_THROWS_WITH_AS(knn_noisy_prediction(cap, clean, 5),
                         doctest::Contains("no noisy samples"), ValueError);

    const NoisyDataset noisy = make_noisy_fixture(20, 0.5, 74, &hidden, &cap);
    CHECK_THROWS_AS(knn_noisy_prediction(cap, noisy, 1000), ValueError);
}

TEST_CASE("weight sparsity") {
    Rng rng(75);
    const std::vector<int> widths{4, 3, 2};
    MlpModel m = init_model(widths, rng);

    SUBCASE("zeroed model is fully sparse at any threshold") {
        for (auto& w : m.weights) w = Matrix(w.rows(), w.cols());
        const auto ratios = weight_sparsity(m, {0.1, 0.01, 1e-9});
        for (const auto& [t, r] : ratios) CHECK(r == 1.0);
        CHECK(count_exact_zero_weights(m) == 18);
    }
    SUBCASE("ratios are non-decreasing in the threshold") {
        const auto ratios = weight_sparsity(m, {0.001, 0.01, 0.1, 1.0, 10.0});
        double prev = -1.0;
        for (const auto& [t, r] : ratios) {
            CHECK(r >= prev);
            prev = r;
        }
        CHECK(ratios.at(10.0) == 1.0);
    }
}

TEST_CASE("activation sparsity boundaries and oracle") {
    SUBCASE("all-dead layer is 0") {
        const auto cap = make_capture(Matrix(8, 4), std::vector<int>(8, 0));
        CHECK(activation_sparsity(cap) == 0.0);
    }
    SUBCASE("all-positive layer is 1") {
        Rng rng(76);
        const auto cap =
            make_capture(testutil::random_matrix(8, 4, rng, 0.1, 1.0), std::vector<int>(8, 0));
        CHECK(activation_sparsity(cap) == 1.0);
    }
    SUBCASE("random capture equals the per-sample loop oracle") {
        Rng rng(77);
        Matrix hidden = testutil::random_matrix(30, 6, rng, -1.0, 1.0);
        const auto cap = make_capture(hidden, std::vector<int>(30, 0));
        double want = 0.0;
        for (std::size_t i = 0; i < 30; ++i) {
            int live = 0;
            for (std::size_t h = 0; h < 6; ++h)
                if (hidden(i, h) > 0.0) ++live;
            want += live / 6.0;
        }
        want /= 30.0;
        CHECK(activation_sparsity(cap) == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("class NDCG endpoints are exact") {
    SUBCASE("all neurons fire on one class only -> 1") {
        Matrix hidden(20, 3);
        std::vector<int> pred(20, 5);
        for (std::size_t i = 0; i < hidden.size(); ++i) hidden.data()[i] = 1.0;
        const auto cap = make_capture(std::move(hidden), std::move(pred));
        const auto rep = class_ndcg(cap);
        CHECK(rep.value == 1.0);
        CHECK(rep.active_neurons == 3);
        CHECK(rep.silent_neurons == 0);
    }
    SUBCASE("all neurons fire equally on all 10 classes -> 0") {
        Matrix hidden(20, 3);
        std::vector<int> pred(20);
        for (std::size_t i = 0; i < 20; ++i) pred[i] = static_cast<int>(i % 10);
        for (std::size_t i = 0; i < hidden.size(); ++i) hidden.data()[i] = 0.5;
        const auto cap = make_capture(std::move(hidden), std::move(pred));
        CHECK(class_ndcg(cap).value == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("no neuron ever fires -> error") {
        const auto cap = make_capture(Matrix(5, 2), std::vector<int>(5, 0));
        CHECK_THROWS_AS(class_ndcg(cap), ValueError);
    }
}

TEST_CASE("class NDCG of a 50/50 split matches the hand-computed value") {
    // One neuron firing half on class 0 and half on class 1.
    Matrix hidden(10, 1);
    std::vector<int> pred(10);
    for (std::size_t i = 0; i < 10; ++i) {
        hidden(i, 0) = 1.0;
        pred[i] = i < 5 ? 0 : 1;
    }
    const auto cap = make_capture(std::move(hidden), std::move(pred));

    double uniform_dcg = 0.0;
    for (int r = 1; r <= 10; ++r) uniform_dcg += 0.1 / std::log2(r + 1.0);
    const double dcg = 0.5 / std::log2(2.0) + 0.5 / std::log2(3.0);
    const double want = (dcg - uniform_dcg) / (1.0 - uniform_dcg);

    const double got = class_ndcg(cap).value;
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got > 0.0);
    CHECK(got < 1.0);
}

TEST_CASE("class NDCG is invariant to neuron order and sample duplication") {
    Rng rng(78);
    Matrix hidden = testutil::random_matrix(40, 5, rng, -0.5, 1.0);
    std::vector<int> pred(40);
    for (auto& p : pred) p = static_cast<int>(rng.below(10));
    const auto cap = make_capture(hidden, pred);
    const double base = class_ndcg(cap).value;

    Matrix swapped = hidden;
    for (std::size_t i = 0; i < 40; ++i) std::swap(swapped(i, 0), swapped(i, 4));
    const auto cap_swapped = make_capture(std::move(swapped), std::vector<int>(pred));
    CHECK(class_ndcg(cap_swapped).value == doctest::Approx(base).epsilon(1e-14));

    Matrix doubled(80, 5);
    std::vector<int> pred2(80);
    for (std::size_t i = 0; i < 80; ++i) {
        for (std::size_t h = 0; h < 5; ++h) doubled(i, h) = hidden(i / 2, h);
        pred2[i] = pred[i / 2];
    }
    const auto cap_doubled = make_capture(std::move(doubled), std::move(pred2));
    CHECK(class_ndcg(cap_doubled).value == doctest::Approx(base).epsilon(1e-14));
}
