// Command-line front end: width sweeps, single-model diagnostics, plot-data
// reports, and the frozen-representation depth study. Configs are strict
// JSON (unknown keys rejected); every flag here overrides its config value.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ddlab/checkpoint.hpp"
#include "ddlab/error.hpp"
#include "ddlab/frozen_rep.hpp"
#include "ddlab/noise_record.hpp"
#include "ddlab/report_json.hpp"
#include "ddlab/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ddlab;

namespace {

constexpr const char* kDataDirEnv = "DDLAB_DATA_DIR";

constexpr const char* kTrainImages = "train-images-idx3-ubyte";
constexpr const char* kTrainLabels = "train-labels-idx1-ubyte";
constexpr const char* kTestImages = "t10k-images-idx3-ubyte";
constexpr const char* kTestLabels = "t10k-labels-idx1-ubyte";

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown key '" + where + key + "'");
    }
}

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    try {
        json j;
        is >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config: malformed JSON in " + path + ": " + e.what());
    }
}

NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "uniform_all") return NoiseMode::uniform_all;
    if (s == "uniform_other") return NoiseMode::uniform_other;
    throw ConfigError("config: noise mode must be uniform_all or uniform_other, got '" + s + "'");
}

RichnessMode parse_richness_mode(const std::string& s) {
    if (s == "signed_mean") return RichnessMode::signed_mean;
    if (s == "vector_norm") return RichnessMode::vector_norm;
    throw ConfigError("config: richness mode must be signed_mean or vector_norm, got '" + s + "'");
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ConfigError("config: split must be train or test, got '" + s + "'");
}

struct DatasetOverrides {
    std::string data_dir;
    std::string train_images, train_labels, test_images, test_labels;
    std::optional<std::size_t> n_train;
    std::optional<std::uint64_t> subsample_seed;
};

void parse_dataset_spec(const json& j, DatasetSpec& spec, std::string& data_dir) {
    check_keys(j, {"data_dir", "train_images", "train_labels", "test_images", "test_labels",
                   "n_train", "subsample_seed"},
               "dataset.");
    if (j.contains("data_dir")) data_dir = j["data_dir"].get<std::string>();
    if (j.contains("train_images")) spec.train_images = j["train_images"].get<std::string>();
    if (j.contains("train_labels")) spec.train_labels = j["train_labels"].get<std::string>();
    if (j.contains("test_images")) spec.test_images = j["test_images"].get<std::string>();
    if (j.contains("test_labels")) spec.test_labels = j["test_labels"].get<std::string>();
    if (j.contains("n_train")) spec.n_train = j["n_train"].get<std::size_t>();
    if (j.contains("subsample_seed")) spec.subsample_seed = j["subsample_seed"].get<std::uint64_t>();
}

/// Fill any unset dataset path from (in order) an explicit directory, the
/// config's data_dir, or $DDLAB_DATA_DIR.
void resolve_dataset_paths(DatasetSpec& spec, const DatasetOverrides& ov,
                           const std::string& config_data_dir) {
    if (!ov.train_images.empty()) spec.train_images = ov.train_images;
    if (!ov.train_labels.empty()) spec.train_labels = ov.train_labels;
    if (!ov.test_images.empty()) spec.test_images = ov.test_images;
    if (!ov.test_labels.empty()) spec.test_labels = ov.test_labels;
    if (ov.n_train) spec.n_train = *ov.n_train;
    if (ov.subsample_seed) spec.subsample_seed = *ov.subsample_seed;

    std::string dir = ov.data_dir;
    if (dir.empty()) dir = config_data_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kDataDirEnv);
        if (env) dir = env;
    }
    auto fill = [&dir](std::string& field, const char* name) {
        if (!field.empty()) return;
        if (dir.empty())
            throw ConfigError(std::string("config: no path for ") + name +
                              " (set dataset paths, --data-dir, or $" + kDataDirEnv + ")");
        field = (fs::path(dir) / name).string();
    };
    fill(spec.train_images, kTrainImages);
    fill(spec.train_labels, kTrainLabels);
    fill(spec.test_images, kTestImages);
    fill(spec.test_labels, kTestLabels);
}

SweepConfig parse_sweep_config(const json& j, std::string& config_data_dir) {
    check_keys(j, {"widths", "replicates", "seed", "workers", "output_dir", "save_checkpoints",
                   "save_sidecars", "noise", "dataset", "train", "diagnostics"},
               "");
    SweepConfig c;
    if (j.contains("widths")) c.widths = j["widths"].get<std::vector<int>>();
    if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("save_checkpoints")) c.save_checkpoints = j["save_checkpoints"].get<bool>();
    if (j.contains("save_sidecars")) c.save_sidecars = j["save_sidecars"].get<bool>();
    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, {"p", "seed", "mode"}, "noise.");
        if (n.contains("p")) c.noise_p = n["p"].get<double>();
        if (n.contains("seed")) c.noise_seed = n["seed"].get<std::uint64_t>();
        if (n.contains("mode")) c.noise_mode = parse_noise_mode(n["mode"].get<std::string>());
    }
    if (j.contains("dataset")) parse_dataset_spec(j["dataset"], c.data, config_data_dir);
    if (j.contains("train")) {
        const json& t = j["train"];
        check_keys(t, {"epochs", "batch_size", "lr0", "lr_step"}, "train.");
        if (t.contains("epochs")) c.train.epochs = t["epochs"].get<int>();
        if (t.contains("batch_size")) c.train.batch_size = t["batch_size"].get<int>();
        if (t.contains("lr0")) c.train.lr0 = t["lr0"].get<double>();
        if (t.contains("lr_step")) c.train.lr_step = t["lr_step"].get<int>();
    }
    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        check_keys(d, {"knn_k", "richness_group_size", "richness_draws", "richness_mode",
                       "cam_split", "richness_split", "sparsity_split", "ndcg_split"},
                   "diagnostics.");
        if (d.contains("knn_k")) c.diag.knn_k = d["knn_k"].get<int>();
        if (d.contains("richness_group_size"))
            c.diag.richness_group_size = d["richness_group_size"].get<int>();
        if (d.contains("richness_draws")) c.diag.richness_draws = d["richness_draws"].get<int>();
        if (d.contains("richness_mode"))
            c.diag.richness_mode = parse_richness_mode(d["richness_mode"].get<std::string>());
        if (d.contains("cam_split")) c.diag.cam_split = parse_split(d["cam_split"].get<std::string>());
        if (d.contains("richness_split"))
            c.diag.richness_split = parse_split(d["richness_split"].get<std::string>());
        if (d.contains("sparsity_split"))
            c.diag.sparsity_split = parse_split(d["sparsity_split"].get<std::string>());
        if (d.contains("ndcg_split"))
            c.diag.ndcg_split = parse_split(d["ndcg_split"].get<std::string>());
    }
    return c;
}

FrozenRepConfig parse_frozen_config(const json& j, std::string& config_data_dir) {
    check_keys(j, {"rep_width", "classifier_depths", "classifier_widths", "epochs", "batch_size",
                   "lr0", "lr_step", "seed", "output_dir", "dataset"},
               "");
    FrozenRepConfig c;
    if (j.contains("rep_width")) c.rep_width = j["rep_width"].get<int>();
    if (j.contains("classifier_depths"))
        c.classifier_depths = j["classifier_depths"].get<std::vector<int>>();
    if (j.contains("classifier_widths"))
        c.classifier_widths = j["classifier_widths"].get<std::vector<int>>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("lr0")) c.lr0 = j["lr0"].get<double>();
    if (j.contains("lr_step")) c.lr_step = j["lr_step"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("dataset")) parse_dataset_spec(j["dataset"], c.data, config_data_dir);
    return c;
}

// ---------------------------------------------------------------------------
// report: records dir -> plot-ready CSVs
// ---------------------------------------------------------------------------

void write_curve_csv(const fs::path& path, const std::string& header,
                     const std::vector<SweepSummaryRow>& rows,
                     const std::vector<double SweepSummaryRow::*>& fields) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("report: cannot write " + path.string());
    os << header << '\n';
    for (const auto& r : rows) {
        os << r.k;
        for (auto f : fields) os << ',' << format_double(r.*f);
        os << '\n';
    }
}

void write_heatmap_csv(const fs::path& path, const json& cam) {
    const auto ids = cam.at("class_ids").get<std::vector<int>>();
    const auto& pw = cam.at("pairwise");
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("report: cannot write " + path.string());
    os << "class";
    for (int id : ids) os << ',' << id;
    os << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        os << ids[i];
        for (std::size_t j = 0; j < ids.size(); ++j) {
            os << ',';
            if (j >= i) os << format_double(pw[i][j].get<double>());
        }
        os << '\n';
    }
}

int cmd_report(const std::string& records_dir, std::string out_dir) {
    const fs::path dir(records_dir);
    const fs::path records_path = dir / "records.csv";
    if (!fs::exists(records_path))
        throw DataError("report: no records.csv in " + records_dir);
    if (out_dir.empty()) out_dir = (dir / "report").string();
    fs::create_directories(out_dir);
    const auto records = read_records_csv(records_path);
    if (records.empty()) throw DataError("report: records.csv holds no rows");
    const auto rows = summarize(records);

    write_curve_csv(fs::path(out_dir) / "curves_generalization.csv",
                    "k,train_loss,train_error,test_loss,test_error", rows,
                    {&SweepSummaryRow::train_loss, &SweepSummaryRow::train_error,
                     &SweepSummaryRow::test_loss, &SweepSummaryRow::test_error});
    write_curve_csv(fs::path(out_dir) / "curves_cam.csv",
                    "k,cam_sim_input_hidden,cam_sim_hidden_output", rows,
                    {&SweepSummaryRow::cam_sim_input_hidden,
                     &SweepSummaryRow::cam_sim_hidden_output});
    write_curve_csv(fs::path(out_dir) / "curves_richness.csv", "k,richness", rows,
                    {&SweepSummaryRow::richness});
    write_curve_csv(fs::path(out_dir) / "curves_knn.csv", "k,knn_p,knn_p_star", rows,
                    {&SweepSummaryRow::knn_p, &SweepSummaryRow::knn_p_star});
    write_curve_csv(fs::path(out_dir) / "curves_sparsity.csv",
                    "k,activation_sparsity,weight_sparsity_0.1,weight_sparsity_0.01,ndcg", rows,
                    {&SweepSummaryRow::activation_sparsity, &SweepSummaryRow::weight_sparsity_at_0_1,
                     &SweepSummaryRow::weight_sparsity_at_0_01, &SweepSummaryRow::ndcg});

    // Heatmap grids come from the replicate-0 sidecars when present.
    for (const auto& row : rows) {
        char stem[64];
        std::snprintf(stem, sizeof stem, "cell_k%03d_r0.json", row.k);
        const fs::path sidecar = dir / stem;
        if (!fs::exists(sidecar)) continue;
        std::ifstream is(sidecar);
        json j;
        is >> j;
        if (!j.contains("diagnostics") || !j["diagnostics"].contains("cam")) continue;
        const json& cam = j["diagnostics"]["cam"];
        char name[64];
        if (cam.contains("input_hidden")) {
            std::snprintf(name, sizeof name, "heatmap_input_hidden_k%03d.csv", row.k);
            write_heatmap_csv(fs::path(out_dir) / name, cam["input_hidden"]);
        }
        if (cam.contains("hidden_output")) {
            std::snprintf(name, sizeof name, "heatmap_hidden_output_k%03d.csv", row.k);
            write_heatmap_csv(fs::path(out_dir) / name, cam["hidden_output"]);
        }
    }
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose: checkpoint + noise record -> JSON on stdout
// ---------------------------------------------------------------------------

struct DiagnoseArgs {
    std::string checkpoint;
    std::string noise_record;
    std::string metrics = "cam,richness,knn,sparsity,ndcg";
    DatasetOverrides data;
    int knn_k = 10;
    int richness_group_size = 20;
    int richness_draws = 50;
    std::string richness_mode = "signed_mean";
    std::uint64_t richness_seed = 0;
};

int cmd_diagnose(const DiagnoseArgs& args) {
    std::set<std::string> want;
    {
        std::stringstream ss(args.metrics);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok != "cam" && tok != "richness" && tok != "knn" && tok != "sparsity" &&
                tok != "ndcg")
                throw ConfigError("diagnose: unknown metric '" + tok + "'");
            want.insert(tok);
        }
        if (want.empty()) throw ConfigError("diagnose: no metrics requested");
    }

    const MlpModel model = load_checkpoint(args.checkpoint);

    DatasetSpec spec;
    resolve_dataset_paths(spec, args.data, "");
    const Dataset train_full = load_dataset(spec.train_images, spec.train_labels);
    Rng sub_rng(spec.subsample_seed);
    const Dataset train_base = subsample(train_full, spec.n_train, sub_rng);
    const NoiseRecord record = load_noise_record(args.noise_record);
    const NoisyDataset noisy = apply_noise_record(train_base, record);
    const Dataset test = load_dataset(spec.test_images, spec.test_labels);

    // The guard for knn must fire before any heavy work so the message is clear.
    if (want.count("knn") && noisy.noise_mask.empty())
        throw ValueError("diagnose: no noisy samples (noise record has p=0 or an empty mask)");

    const ActivationCapture cap_train = forward(model, noisy.images);
    const ActivationCapture cap_test = forward(model, test.images);
    const int last_pair = static_cast<int>(model.num_weight_layers()) - 1;

    DiagnosticsBundle bundle;
    if (want.count("cam")) {
        bundle.cam_input_hidden = cam_similarity_stats(compute_cams(cap_train, 0));
        bundle.cam_hidden_output = cam_similarity_stats(compute_cams(cap_train, last_pair));
    }
    if (want.count("richness")) {
        RichnessOptions opts;
        opts.group_size = args.richness_group_size;
        opts.draws = args.richness_draws;
        opts.mode = parse_richness_mode(args.richness_mode);
        opts.seed = args.richness_seed;
        bundle.richness = estimate_richness(cap_test, opts);
    }
    if (want.count("knn")) bundle.knn = knn_noisy_prediction(cap_train, noisy, args.knn_k);
    if (want.count("sparsity")) {
        bundle.weight_sparsity = weight_sparsity(model);
        bundle.exact_zero_weights = count_exact_zero_weights(model);
        bundle.activation_sparsity = activation_sparsity(cap_test);
    }
    if (want.count("ndcg")) bundle.ndcg = class_ndcg(cap_test);

    std::cout << to_json_string(bundle) << "\n";
    return 0;
}

std::vector<int> parse_width_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Width-sweep experiments and activation diagnostics for MLP classifiers"};
    app.require_subcommand(1);

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "Run a width sweep: train, capture, diagnose");
    std::string sweep_config_path, sweep_widths, sweep_out;
    DatasetOverrides sweep_data;
    bool dry_run = false;
    double noise_p = -1.0;
    int replicates = -1, epochs = -1, workers = -1, knn_k = -1;
    std::int64_t sweep_seed = -1, noise_seed = -1;
    sweep->add_option("--config", sweep_config_path, "JSON config file");
    sweep->add_option("--widths", sweep_widths, "Comma list of widths (overrides config)");
    sweep->add_option("--noise-p", noise_p, "Label noise probability");
    sweep->add_option("--replicates", replicates, "Replicates per width");
    sweep->add_option("--epochs", epochs, "Training epochs");
    sweep->add_option("--seed", sweep_seed, "Sweep seed");
    sweep->add_option("--noise-seed", noise_seed, "Noise draw seed");
    sweep->add_option("--workers", workers, "Parallel cell workers");
    sweep->add_option("--knn-k", knn_k, "k for the k-NN diagnostic");
    sweep->add_option("--out", sweep_out, "Output directory");
    sweep->add_option("--data-dir", sweep_data.data_dir, "Directory with the IDX files");
    sweep->add_option("--n-train", [&sweep_data](const auto& vals) {
        sweep_data.n_train = std::stoull(vals[0]);
        return true;
    }, "Training subsample size");
    sweep->add_flag("--dry-run", dry_run, "Print the resolved config and exit");

    // --- diagnose ---
    auto* diagnose = app.add_subcommand("diagnose", "Diagnostics for one checkpoint");
    DiagnoseArgs dargs;
    diagnose->add_option("checkpoint", dargs.checkpoint, "Model checkpoint file")->required();
    diagnose->add_option("--noise-record", dargs.noise_record, "Noise record JSON")->required();
    diagnose->add_option("--metrics", dargs.metrics, "Comma subset of cam,richness,knn,sparsity,ndcg");
    diagnose->add_option("--data-dir", dargs.data.data_dir, "Directory with the IDX files");
    diagnose->add_option("--n-train", [&dargs](const auto& vals) {
        dargs.data.n_train = std::stoull(vals[0]);
        return true;
    }, "Training subsample size used by the sweep");
    diagnose->add_option("--subsample-seed", [&dargs](const auto& vals) {
        dargs.data.subsample_seed = std::stoull(vals[0]);
        return true;
    }, "Subsample seed used by the sweep");
    diagnose->add_option("--knn-k", dargs.knn_k, "k for the k-NN diagnostic");
    diagnose->add_option("--richness-group-size", dargs.richness_group_size, "Richness group size");
    diagnose->add_option("--richness-draws", dargs.richness_draws, "Richness sign draws");
    diagnose->add_option("--richness-mode", dargs.richness_mode, "signed_mean or vector_norm");
    diagnose->add_option("--richness-seed", dargs.richness_seed, "Richness draw seed");

    // --- report ---
    auto* report = app.add_subcommand("report", "Turn sweep records into plot-ready CSVs");
    std::string records_dir, report_out;
    report->add_option("records_dir", records_dir, "Directory with records.csv")->required();
    report->add_option("--out", report_out, "Report output directory");

    // --- frozen-rep ---
    auto* frozen = app.add_subcommand("frozen-rep", "Depth study on a frozen random layer");
    std::string frozen_config_path, frozen_out, frozen_depths, frozen_widths;
    DatasetOverrides frozen_data;
    int frozen_epochs = -1, rep_width = -1;
    std::int64_t frozen_seed = -1;
    bool frozen_dry = false;
    frozen->add_option("--config", frozen_config_path, "JSON config file");
    frozen->add_option("--epochs", frozen_epochs, "Training epochs");
    frozen->add_option("--rep-width", rep_width, "Frozen representation width");
    frozen->add_option("--depths", frozen_depths, "Comma list of classifier depths");
    frozen->add_option("--widths", frozen_widths, "Comma list of classifier widths");
    frozen->add_option("--seed", frozen_seed, "Experiment seed");
    frozen->add_option("--out", frozen_out, "Output directory");
    frozen->add_option("--data-dir", frozen_data.data_dir, "Directory with the IDX files");
    frozen->add_option("--n-train", [&frozen_data](const auto& vals) {
        frozen_data.n_train = std::stoull(vals[0]);
        return true;
    }, "Training subsample size");
    frozen->add_flag("--dry-run", frozen_dry, "Print the resolved config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) {
            json j = json::object();
            if (!sweep_config_path.empty()) j = load_json_file(sweep_config_path);
            std::string config_data_dir;
            SweepConfig cfg = parse_sweep_config(j, config_data_dir);
            if (!sweep_widths.empty()) cfg.widths = parse_width_list(sweep_widths);
            if (noise_p >= 0.0) cfg.noise_p = noise_p;
            if (replicates > 0) cfg.replicates = replicates;
            if (epochs > 0) cfg.train.epochs = epochs;
            if (sweep_seed >= 0) cfg.seed = static_cast<std::uint64_t>(sweep_seed);
            if (noise_seed >= 0) cfg.noise_seed = static_cast<std::uint64_t>(noise_seed);
            if (workers >= 0) cfg.workers = workers;
            if (knn_k > 0) cfg.diag.knn_k = knn_k;
            if (!sweep_out.empty()) cfg.output_dir = sweep_out;
            resolve_dataset_paths(cfg.data, sweep_data, config_data_dir);
            if (dry_run) {
                std::cout << sweep_config_json(cfg);
                return 0;
            }
            const SweepResult result = run_sweep(cfg);
            int n_ok = 0;
            for (const auto& r : result.records) n_ok += r.ok ? 1 : 0;
            std::cerr << "sweep: " << n_ok << "/" << result.records.size() << " cells ok";
            if (result.interpolation_threshold)
                std::cerr << ", interpolation threshold k=" << *result.interpolation_threshold;
            std::cerr << "\n";
            return n_ok > 0 ? 0 : 3;
        }
        if (diagnose->parsed()) return cmd_diagnose(dargs);
        if (report->parsed()) return cmd_report(records_dir, report_out);
        if (frozen->parsed()) {
            json j = json::object();
            if (!frozen_config_path.empty()) j = load_json_file(frozen_config_path);
            std::string config_data_dir;
            FrozenRepConfig cfg = parse_frozen_config(j, config_data_dir);
            if (frozen_epochs > 0) cfg.epochs = frozen_epochs;
            if (rep_width > 0) cfg.rep_width = rep_width;
            if (!frozen_depths.empty()) cfg.classifier_depths = parse_width_list(frozen_depths);
            if (!frozen_widths.empty()) cfg.classifier_widths = parse_width_list(frozen_widths);
            if (frozen_seed >= 0) cfg.seed = static_cast<std::uint64_t>(frozen_seed);
            if (!frozen_out.empty()) cfg.output_dir = frozen_out;
            resolve_dataset_paths(cfg.data, frozen_data, config_data_dir);
            if (frozen_dry) {
                std::cout << frozen_rep_config_json(cfg);
                return 0;
            }
            run_frozen_rep_experiment(cfg);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
