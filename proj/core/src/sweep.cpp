#include "ddlab/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ddlab/checkpoint.hpp"
#include "ddlab/error.hpp"
#include "ddlab/noise_record.hpp"
#include "ddlab/report_json.hpp"

namespace ddlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedInit = 1;
constexpr std::uint64_t kSeedShuffle = 2;
constexpr std::uint64_t kSeedRichness = 3;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double parse_double_field(const std::string& s) {
    if (s.empty()) return kNan;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("records.csv: bad numeric field '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

void validate_config(const SweepConfig& c) {
    if (c.widths.empty()) throw ConfigError("sweep: widths must be nonempty");
    for (std::size_t i = 0; i + 1 < c.widths.size(); ++i)
        if (c.widths[i] >= c.widths[i + 1])
            throw ConfigError("sweep: widths must be strictly increasing");
    for (int k : c.widths)
        if (k < 1) throw ConfigError("sweep: widths must be positive");
    if (c.replicates < 1) throw ConfigError("sweep: replicates must be >= 1");
    if (!(c.noise_p >= 0.0 && c.noise_p <= 1.0))
        throw ConfigError("sweep: noise_p must be in [0,1]");
    if (c.output_dir.empty()) throw ConfigError("sweep: output_dir must be set");
}

struct CellOutput {
    SweepRecord record;
    std::string sidecar_json;  // empty when the cell failed
};

}  // namespace

SweepRecord::SweepRecord()
    : train_loss(kNan), train_error(kNan), test_loss(kNan), test_error(kNan),
      cam_sim_input_hidden(kNan), cam_sim_hidden_output(kNan), richness(kNan), knn_p(kNan),
      knn_p_star(kNan), activation_sparsity(kNan), weight_sparsity_at_0_1(kNan),
      weight_sparsity_at_0_01(kNan), ndcg(kNan) {}

SweepSummaryRow::SweepSummaryRow()
    : train_loss(kNan), train_error(kNan), test_loss(kNan), test_error(kNan),
      cam_sim_input_hidden(kNan), cam_sim_hidden_output(kNan), richness(kNan), knn_p(kNan),
      knn_p_star(kNan), activation_sparsity(kNan), weight_sparsity_at_0_1(kNan),
      weight_sparsity_at_0_01(kNan), ndcg(kNan) {}

std::string records_csv_header() {
    return "k,replicate,seed,params,status,noise_hash,train_loss,train_error,test_loss,"
           "test_error,cam_sim_input_hidden,cam_sim_hidden_output,richness,knn_p,knn_p_star,"
           "activation_sparsity,weight_sparsity_0.1,weight_sparsity_0.01,ndcg";
}

std::string record_csv_row(const SweepRecord& r) {
    std::ostringstream os;
    os << r.k << ',' << r.replicate << ',' << r.seed << ',' << r.params << ','
       << (r.ok ? "ok" : "failed") << ',' << hash_hex(r.noise_hash) << ','
       << format_double(r.train_loss) << ',' << format_double(r.train_error) << ','
       << format_double(r.test_loss) << ',' << format_double(r.test_error) << ','
       << format_double(r.cam_sim_input_hidden) << ',' << format_double(r.cam_sim_hidden_output)
       << ',' << format_double(r.richness) << ',' << format_double(r.knn_p) << ','
       << format_double(r.knn_p_star) << ',' << format_double(r.activation_sparsity) << ','
       << format_double(r.weight_sparsity_at_0_1) << ','
       << format_double(r.weight_sparsity_at_0_01) << ',' << format_double(r.ndcg);
    return os.str();
}

std::vector<SweepRecord> read_records_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("records.csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw DataError("records.csv: empty file");
    if (line != records_csv_header())
        throw DataError("records.csv: unexpected header in " + path.string());
    std::vector<SweepRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 19) throw DataError("records.csv: expected 19 fields, got " +
                                            std::to_string(f.size()));
        SweepRecord r;
        r.k = std::stoi(f[0]);
        r.replicate = std::stoi(f[1]);
        r.seed = std::stoull(f[2]);
        r.params = std::stoll(f[3]);
        if (f[4] == "ok")
            r.ok = true;
        else if (f[4] == "failed")
            r.ok = false;
        else
            throw DataError("records.csv: bad status '" + f[4] + "'");
        r.noise_hash = std::stoull(f[5], nullptr, 16);
        r.train_loss = parse_double_field(f[6]);
        r.train_error = parse_double_field(f[7]);
        r.test_loss = parse_double_field(f[8]);
        r.test_error = parse_double_field(f[9]);
        r.cam_sim_input_hidden = parse_double_field(f[10]);
        r.cam_sim_hidden_output = parse_double_field(f[11]);
        r.richness = parse_double_field(f[12]);
        r.knn_p = parse_double_field(f[13]);
        r.knn_p_star = parse_double_field(f[14]);
        r.activation_sparsity = parse_double_field(f[15]);
        r.weight_sparsity_at_0_1 = parse_double_field(f[16]);
        r.weight_sparsity_at_0_01 = parse_double_field(f[17]);
        r.ndcg = parse_double_field(f[18]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SweepSummaryRow> summarize(std::span<const SweepRecord> records) {
    std::vector<SweepSummaryRow> rows;
    std::map<int, std::vector<const SweepRecord*>> by_k;
    for (const auto& r : records) by_k[r.k].push_back(&r);
    for (const auto& [k, cells] : by_k) {
        SweepSummaryRow row;
        row.k = k;
        auto mean_of = [&cells](double SweepRecord::* field) {
            double sum = 0.0;
            int n = 0;
            for (const SweepRecord* r : cells) {
                if (!r->ok) continue;
                const double v = r->*field;
                if (std::isnan(v)) continue;
                sum += v;
                ++n;
            }
            return n == 0 ? kNan : sum / n;
        };
        for (const SweepRecord* r : cells)
            if (r->ok) ++row.n_ok;
        row.train_loss = mean_of(&SweepRecord::train_loss);
        row.train_error = mean_of(&SweepRecord::train_error);
        row.test_loss = mean_of(&SweepRecord::test_loss);
        row.test_error = mean_of(&SweepRecord::test_error);
        row.cam_sim_input_hidden = mean_of(&SweepRecord::cam_sim_input_hidden);
        row.cam_sim_hidden_output = mean_of(&SweepRecord::cam_sim_hidden_output);
        row.richness = mean_of(&SweepRecord::richness);
        row.knn_p = mean_of(&SweepRecord::knn_p);
        row.knn_p_star = mean_of(&SweepRecord::knn_p_star);
        row.activation_sparsity = mean_of(&SweepRecord::activation_sparsity);
        row.weight_sparsity_at_0_1 = mean_of(&SweepRecord::weight_sparsity_at_0_1);
        row.weight_sparsity_at_0_01 = mean_of(&SweepRecord::weight_sparsity_at_0_01);
        row.ndcg = mean_of(&SweepRecord::ndcg);
        rows.push_back(row);
    }
    return rows;
}

static std::string summary_csv_header() {
    return "k,n_ok,train_loss,train_error,test_loss,test_error,cam_sim_input_hidden,"
           "cam_sim_hidden_output,richness,knn_p,knn_p_star,activation_sparsity,"
           "weight_sparsity_0.1,weight_sparsity_0.01,ndcg";
}

void write_summary_csv(const fs::path& path, std::span<const SweepSummaryRow> rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("summary.csv: cannot open " + path.string() + " for writing");
    os << summary_csv_header() << '\n';
    for (const auto& r : rows) {
        os << r.k << ',' << r.n_ok << ',' << format_double(r.train_loss) << ','
           << format_double(r.train_error) << ',' << format_double(r.test_loss) << ','
           << format_double(r.test_error) << ',' << format_double(r.cam_sim_input_hidden) << ','
           << format_double(r.cam_sim_hidden_output) << ',' << format_double(r.richness) << ','
           << format_double(r.knn_p) << ',' << format_double(r.knn_p_star) << ','
           << format_double(r.activation_sparsity) << ','
           << format_double(r.weight_sparsity_at_0_1) << ','
           << format_double(r.weight_sparsity_at_0_01) << ',' << format_double(r.ndcg) << '\n';
    }
    if (!os) throw DataError("summary.csv: write failed");
}

std::vector<SweepSummaryRow> read_summary_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("summary.csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != summary_csv_header())
        throw DataError("summary.csv: unexpected header");
    std::vector<SweepSummaryRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 15) throw DataError("summary.csv: expected 15 fields");
        SweepSummaryRow r;
        r.k = std::stoi(f[0]);
        r.n_ok = std::stoi(f[1]);
        r.train_loss = parse_double_field(f[2]);
        r.train_error = parse_double_field(f[3]);
        r.test_loss = parse_double_field(f[4]);
        r.test_error = parse_double_field(f[5]);
        r.cam_sim_input_hidden = parse_double_field(f[6]);
        r.cam_sim_hidden_output = parse_double_field(f[7]);
        r.richness = parse_double_field(f[8]);
        r.knn_p = parse_double_field(f[9]);
        r.knn_p_star = parse_double_field(f[10]);
        r.activation_sparsity = parse_double_field(f[11]);
        r.weight_sparsity_at_0_1 = parse_double_field(f[12]);
        r.weight_sparsity_at_0_01 = parse_double_field(f[13]);
        r.ndcg = parse_double_field(f[14]);
        out.push_back(r);
    }
    return out;
}

std::optional<int> detect_interpolation_threshold(std::span<const SweepRecord> records,
                                                  std::size_t n_train) {
    if (n_train == 0) throw ValueError("detect_interpolation_threshold: n_train must be > 0");
    const auto rows = summarize(records);
    const double cutoff = 1.0 / static_cast<double>(n_train);
    for (const auto& row : rows) {
        if (row.n_ok == 0 || std::isnan(row.train_error)) continue;
        if (row.train_error <= cutoff) return row.k;
    }
    return std::nullopt;
}

std::string sweep_config_json(const SweepConfig& c) {
    json j;
    j["widths"] = c.widths;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
    j["save_checkpoints"] = c.save_checkpoints;
    j["save_sidecars"] = c.save_sidecars;
    j["noise"] = {{"p", c.noise_p},
                  {"seed", c.noise_seed},
                  {"mode", c.noise_mode == NoiseMode::uniform_all ? "uniform_all"
                                                                  : "uniform_other"}};
    j["dataset"] = {{"train_images", c.data.train_images},
                    {"train_labels", c.data.train_labels},
                    {"test_images", c.data.test_images},
                    {"test_labels", c.data.test_labels},
                    {"n_train", c.data.n_train},
                    {"subsample_seed", c.data.subsample_seed}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"lr0", c.train.lr0},
                  {"lr_step", c.train.lr_step}};
    j["diagnostics"] = {
        {"knn_k", c.diag.knn_k},
        {"richness_group_size", c.diag.richness_group_size},
        {"richness_draws", c.diag.richness_draws},
        {"richness_mode",
         c.diag.richness_mode == RichnessMode::signed_mean ? "signed_mean" : "vector_norm"},
        {"cam_split", split_name(c.diag.cam_split)},
        {"richness_split", split_name(c.diag.richness_split)},
        {"sparsity_split", split_name(c.diag.sparsity_split)},
        {"ndcg_split", split_name(c.diag.ndcg_split)}};
    return j.dump(2) + "\n";
}

DiagnosticsBundle diagnose_model(const MlpModel& model, const NoisyDataset& train_set,
                                 const Dataset& test_set, const DiagnosticsConfig& diag,
                                 std::uint64_t richness_seed) {
    DiagnosticsBundle bundle;
    const ActivationCapture cap_train = forward(model, train_set.images);
    const ActivationCapture cap_test = forward(model, test_set.images);
    const auto& cam_cap = diag.cam_split == Split::train ? cap_train : cap_test;
    const int last_pair = static_cast<int>(model.num_weight_layers()) - 1;

    try {
        bundle.cam_input_hidden = cam_similarity_stats(compute_cams(cam_cap, 0));
    } catch (const ValueError&) {
    }
    try {
        bundle.cam_hidden_output = cam_similarity_stats(compute_cams(cam_cap, last_pair));
    } catch (const ValueError&) {
    }
    try {
        RichnessOptions opts;
        opts.group_size = diag.richness_group_size;
        opts.draws = diag.richness_draws;
        opts.mode = diag.richness_mode;
        opts.seed = richness_seed;
        bundle.richness = estimate_richness(
            diag.richness_split == Split::train ? cap_train : cap_test, opts);
    } catch (const ValueError&) {
    }
    if (!train_set.noise_mask.empty()) {
        try {
            bundle.knn = knn_noisy_prediction(cap_train, train_set, diag.knn_k);
        } catch (const ValueError&) {
        }
    }
    bundle.weight_sparsity = weight_sparsity(model);
    bundle.exact_zero_weights = count_exact_zero_weights(model);
    try {
        bundle.activation_sparsity =
            activation_sparsity(diag.sparsity_split == Split::train ? cap_train : cap_test);
    } catch (const ValueError&) {
    }
    try {
        bundle.ndcg = class_ndcg(diag.ndcg_split == Split::train ? cap_train : cap_test);
    } catch (const ValueError&) {
    }
    return bundle;
}

namespace {

CellOutput run_cell(const SweepConfig& config, const NoisyDataset& noisy, const Dataset& test,
                    std::uint64_t noise_hash, int k, int replicate) {
    CellOutput out;
    SweepRecord& r = out.record;
    r.k = k;
    r.replicate = replicate;
    r.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(replicate)});
    r.noise_hash = noise_hash;

    const std::vector<int> widths = {static_cast<int>(noisy.images.cols()), k, 10};
    Rng init_rng(derive_seed(r.seed, {kSeedInit}));
    MlpModel model = init_model(widths, init_rng);
    r.params = count_params(model);

    TrainConfig tc = config.train;
    tc.seed = derive_seed(r.seed, {kSeedShuffle});
    try {
        train(model, noisy.images, noisy.labels_effective, tc);
    } catch (const TrainingDiverged&) {
        r.ok = false;
        return out;
    }
    r.ok = true;

    const EvalResult on_train = evaluate(model, noisy.images, noisy.labels_effective);
    const EvalResult on_test = evaluate(model, test.images, test.labels);
    r.train_loss = on_train.loss;
    r.train_error = on_train.error;
    r.test_loss = on_test.loss;
    r.test_error = on_test.error;

    const DiagnosticsBundle bundle =
        diagnose_model(model, noisy, test, config.diag, derive_seed(r.seed, {kSeedRichness}));
    if (bundle.cam_input_hidden) r.cam_sim_input_hidden = bundle.cam_input_hidden->mean;
    if (bundle.cam_hidden_output) r.cam_sim_hidden_output = bundle.cam_hidden_output->mean;
    if (bundle.richness) r.richness = bundle.richness->overall;
    if (bundle.knn) {
        r.knn_p = bundle.knn->p_original;
        r.knn_p_star = bundle.knn->p_corrupted;
    }
    if (bundle.activation_sparsity) r.activation_sparsity = *bundle.activation_sparsity;
    if (bundle.weight_sparsity) {
        r.weight_sparsity_at_0_1 = bundle.weight_sparsity->at(0.1);
        r.weight_sparsity_at_0_01 = bundle.weight_sparsity->at(0.01);
    }
    if (bundle.ndcg) r.ndcg = bundle.ndcg->value;

    const fs::path dir(config.output_dir);
    char stem[64];
    std::snprintf(stem, sizeof stem, "cell_k%03d_r%d", k, replicate);
    if (config.save_checkpoints) save_checkpoint(dir / (std::string(stem) + ".ckpt"), model);
    if (config.save_sidecars) {
        json j;
        j["cell"] = {{"k", k},
                     {"replicate", replicate},
                     {"seed", r.seed},
                     {"params", r.params},
                     {"noise_hash", hash_hex(noise_hash)}};
        j["metrics"] = {{"train_loss", r.train_loss},
                        {"train_error", r.train_error},
                        {"test_loss", r.test_loss},
                        {"test_error", r.test_error}};
        j["diagnostics"] = json::parse(to_json_string(bundle));
        out.sidecar_json = j.dump(2) + "\n";
        std::ofstream os(dir / (std::string(stem) + ".json"), std::ios::trunc);
        os << out.sidecar_json;
    }
    return out;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
    validate_config(config);
    const fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("sweep: cannot create output dir " + out_dir.string());

    const Dataset train_full = load_dataset(config.data.train_images, config.data.train_labels);
    const Dataset test = load_dataset(config.data.test_images, config.data.test_labels);
    Rng sub_rng(config.data.subsample_seed);
    const Dataset train_base = subsample(train_full, config.data.n_train, sub_rng);

    // Label noise is drawn once per sweep and persisted; on resume the stored
    // record is reloaded so every cell keeps seeing the same corruption.
    const fs::path noise_path = out_dir / "noise_record.json";
    NoisyDataset noisy;
    if (fs::exists(noise_path)) {
        const NoiseRecord rec = load_noise_record(noise_path);
        if (rec.p != config.noise_p || rec.seed != config.noise_seed ||
            rec.mode != config.noise_mode)
            throw ConfigError("sweep: noise record in output dir disagrees with config");
        noisy = apply_noise_record(train_base, rec);
    } else {
        Rng noise_rng(config.noise_seed);
        noisy = inject_label_noise(train_base, config.noise_p, noise_rng, config.noise_mode);
        save_noise_record(noise_path, make_noise_record(train_base, noisy));
    }
    const std::uint64_t noise_hash = noise_content_hash(noisy);

    const std::string cfg_json = sweep_config_json(config);
    const fs::path cfg_path = out_dir / "sweep_config.json";
    if (fs::exists(cfg_path)) {
        std::ifstream is(cfg_path);
        std::stringstream ss;
        ss << is.rdbuf();
        if (ss.str() != cfg_json)
            throw ConfigError("sweep: output dir already holds a different sweep_config.json");
    } else {
        std::ofstream os(cfg_path, std::ios::trunc);
        os << cfg_json;
        if (!os) throw DataError("sweep: cannot write config echo");
    }

    struct Cell {
        int k;
        int replicate;
    };
    std::vector<Cell> cells;
    for (int k : config.widths)
        for (int rep = 0; rep < config.replicates; ++rep) cells.push_back({k, rep});

    const fs::path records_path = out_dir / "records.csv";
    std::vector<SweepRecord> records;
    if (fs::exists(records_path)) {
        records = read_records_csv(records_path);
        if (records.size() > cells.size())
            throw ConfigError("sweep: records.csv holds more cells than the config enumerates");
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].k != cells[i].k || records[i].replicate != cells[i].replicate)
                throw ConfigError("sweep: records.csv is not a prefix of this sweep's cells");
            if (records[i].noise_hash != noise_hash)
                throw DataError("sweep: records.csv was produced under a different noise draw");
        }
    }
    const std::size_t start = records.size();

    std::ofstream rf(records_path, start == 0 ? std::ios::trunc : std::ios::app);
    if (!rf) throw DataError("sweep: cannot open records.csv for writing");
    if (start == 0) {
        rf << records_csv_header() << '\n';
        rf.flush();
    }

    if (start < cells.size()) {
        const int workers =
            std::max(1, config.workers == 0
                            ? static_cast<int>(std::thread::hardware_concurrency())
                            : config.workers);
        std::mutex mu;
        std::condition_variable cv;
        std::map<std::size_t, CellOutput> ready;
        std::atomic<std::size_t> next{start};
        std::exception_ptr worker_error;

        auto work = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) break;
                try {
                    CellOutput co =
                        run_cell(config, noisy, test, noise_hash, cells[i].k, cells[i].replicate);
                    std::lock_guard lk(mu);
                    ready.emplace(i, std::move(co));
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!worker_error) worker_error = std::current_exception();
                }
                cv.notify_all();
            }
        };
        std::vector<std::thread> pool;
        const int n_workers = std::min<std::size_t>(workers, cells.size() - start);
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);

        // Rows land in records.csv in canonical (k, replicate) order no matter
        // which worker finishes first, so reruns are byte-identical.
        for (std::size_t i = start; i < cells.size(); ++i) {
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return ready.count(i) > 0 || worker_error; });
            if (worker_error && ready.count(i) == 0) break;
            CellOutput co = std::move(ready.at(i));
            ready.erase(i);
            lk.unlock();
            rf << record_csv_row(co.record) << '\n';
            rf.flush();
            records.push_back(std::move(co.record));
        }
        for (auto& t : pool) t.join();
        if (worker_error && records.size() < cells.size()) std::rethrow_exception(worker_error);
    }

    SweepResult result;
    result.records = std::move(records);
    result.summary = summarize(result.records);
    result.interpolation_threshold =
        detect_interpolation_threshold(result.records, config.data.n_train);
    write_summary_csv(out_dir / "summary.csv", result.summary);
    return result;
}

}  // namespace ddlab
