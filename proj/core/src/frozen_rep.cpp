#include "ddlab/frozen_rep.hpp"

#include <cmath>
#include <limits>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ddlab/error.hpp"
#include "ddlab/report_json.hpp"

namespace ddlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedRep = 10;
constexpr std::uint64_t kSeedInit = 11;
constexpr std::uint64_t kSeedShuffle = 12;

/// ReLU(x W + b) for the frozen layer; the classifier never backpropagates
/// through it, so features are computed once per split.
Matrix frozen_features(const Matrix& images, const Matrix& w, const std::vector<double>& b) {
    Matrix out = matmul(images, w);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* row = out.data() + i * out.cols();
        for (std::size_t j = 0; j < out.cols(); ++j) {
            row[j] += b[j];
            if (row[j] < 0.0) row[j] = 0.0;
        }
    }
    return out;
}

}  // namespace

std::vector<FrozenRepRow> run_frozen_rep_experiment(const FrozenRepConfig& config) {
    if (config.rep_width < 1) throw ConfigError("frozen-rep: rep_width must be >= 1");
    if (config.classifier_depths.empty()) throw ConfigError("frozen-rep: depths must be nonempty");
    for (int d : config.classifier_depths)
        if (d < 1) throw ConfigError("frozen-rep: depths must be >= 1");
    if (config.output_dir.empty()) throw ConfigError("frozen-rep: output_dir must be set");

    const fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("frozen-rep: cannot create output dir " + out_dir.string());
    {
        std::ofstream os(out_dir / "frozen_rep_config.json", std::ios::trunc);
        os << frozen_rep_config_json(config);
    }

    const Dataset train_full = load_dataset(config.data.train_images, config.data.train_labels);
    const Dataset test = load_dataset(config.data.test_images, config.data.test_labels);
    Rng sub_rng(config.data.subsample_seed);
    const Dataset train_set = subsample(train_full, config.data.n_train, sub_rng);

    // One random representation layer for the entire experiment.
    Rng rep_rng(derive_seed(config.seed, {kSeedRep}));
    const double limit = std::sqrt(6.0 / static_cast<double>(train_set.images.cols()));
    Matrix rep_w(train_set.images.cols(), config.rep_width);
    for (std::size_t i = 0; i < rep_w.size(); ++i) rep_w.data()[i] = rep_rng.uniform(-limit, limit);
    const std::vector<double> rep_b(config.rep_width, 0.0);

    const Matrix feats_train = frozen_features(train_set.images, rep_w, rep_b);
    const Matrix feats_test = frozen_features(test.images, rep_w, rep_b);

    std::vector<FrozenRepRow> rows;
    for (int depth : config.classifier_depths) {
        std::vector<int> width_grid = depth == 1 ? std::vector<int>{0} : config.classifier_widths;
        for (int width : width_grid) {
            std::vector<int> widths;
            widths.push_back(config.rep_width);
            for (int l = 0; l < depth - 1; ++l) widths.push_back(width);
            widths.push_back(10);

            const std::uint64_t cell = derive_seed(
                config.seed, {static_cast<std::uint64_t>(depth), static_cast<std::uint64_t>(width)});
            Rng init_rng(derive_seed(cell, {kSeedInit}));
            MlpModel model = init_model(widths, init_rng);

            TrainConfig tc;
            tc.epochs = config.epochs;
            tc.batch_size = config.batch_size;
            tc.lr0 = config.lr0;
            tc.lr_step = config.lr_step;
            tc.seed = derive_seed(cell, {kSeedShuffle});

            FrozenRepRow row;
            row.depth = depth;
            row.width = width;
            row.params = count_params(model);
            try {
                train(model, feats_train, train_set.labels, tc);
                row.train_accuracy = 1.0 - evaluate(model, feats_train, train_set.labels).error;
                row.test_accuracy = 1.0 - evaluate(model, feats_test, test.labels).error;
            } catch (const TrainingDiverged&) {
                row.train_accuracy = std::numeric_limits<double>::quiet_NaN();
                row.test_accuracy = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    write_frozen_rep_csv(out_dir / "frozen_rep.csv", rows);
    return rows;
}

std::string frozen_rep_config_json(const FrozenRepConfig& c) {
    json j;
    j["rep_width"] = c.rep_width;
    j["classifier_depths"] = c.classifier_depths;
    j["classifier_widths"] = c.classifier_widths;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["lr0"] = c.lr0;
    j["lr_step"] = c.lr_step;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["dataset"] = {{"train_images", c.data.train_images},
                    {"train_labels", c.data.train_labels},
                    {"test_images", c.data.test_images},
                    {"test_labels", c.data.test_labels},
                    {"n_train", c.data.n_train},
                    {"subsample_seed", c.data.subsample_seed}};
    return j.dump(2) + "\n";
}

void write_frozen_rep_csv(const fs::path& path, std::span<const FrozenRepRow> rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("frozen_rep.csv: cannot open " + path.string() + " for writing");
    os << "depth,width,params,train_accuracy,test_accuracy\n";
    for (const auto& r : rows)
        os << r.depth << ',' << r.width << ',' << r.params << ','
           << format_double(r.train_accuracy) << ',' << format_double(r.test_accuracy) << '\n';
    if (!os) throw DataError("frozen_rep.csv: write failed");
}

std::vector<FrozenRepRow> read_frozen_rep_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("frozen_rep.csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "depth,width,params,train_accuracy,test_accuracy")
        throw DataError("frozen_rep.csv: unexpected header");
    std::vector<FrozenRepRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        FrozenRepRow r;
        std::size_t pos = 0;
        auto next = [&line, &pos]() {
            const std::size_t c = line.find(',', pos);
            std::string f = line.substr(pos, c == std::string::npos ? c : c - pos);
            pos = c == std::string::npos ? line.size() : c + 1;
            return f;
        };
        r.depth = std::stoi(next());
        r.width = std::stoi(next());
        r.params = std::stoll(next());
        const std::string tr = next(), te = next();
        r.train_accuracy = tr.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(tr);
        r.test_accuracy = te.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(te);
        out.push_back(r);
    }
    return out;
}

}  // namespace ddlab
