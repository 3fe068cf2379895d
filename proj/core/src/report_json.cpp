#include "ddlab/report_json.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace ddlab {

namespace {

using nlohmann::json;

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json cam_stats_json(const CamSimilarityStats& stats) {
    json j;
    j["class_ids"] = stats.class_ids;
    j["mean"] = stats.mean;
    j["pairwise"] = matrix_rows(stats.pairwise);
    return j;
}

json richness_json(const RichnessReport& r) {
    json j;
    j["overall"] = r.overall;
    json per_class = json::array();
    for (double v : r.per_class) {
        if (std::isnan(v))
            per_class.push_back(nullptr);
        else
            per_class.push_back(v);
    }
    j["per_class"] = per_class;
    j["groups_per_class"] = r.groups_per_class;
    j["group_size"] = r.options.group_size;
    j["draws"] = r.options.draws;
    j["seed"] = r.options.seed;
    j["mode"] = r.options.mode == RichnessMode::signed_mean ? "signed_mean" : "vector_norm";
    j["exhaustive"] = r.options.exhaustive;
    return j;
}

}  // namespace

std::string to_json_string(const DiagnosticsBundle& b, int indent) {
    json j;
    if (b.cam_input_hidden || b.cam_hidden_output) {
        json cam;
        if (b.cam_input_hidden) cam["input_hidden"] = cam_stats_json(*b.cam_input_hidden);
        if (b.cam_hidden_output) cam["hidden_output"] = cam_stats_json(*b.cam_hidden_output);
        j["cam"] = std::move(cam);
    }
    if (b.richness) j["richness"] = richness_json(*b.richness);
    if (b.knn) {
        json k;
        k["k"] = b.knn->k;
        k["p"] = b.knn->p_original;
        k["p_star"] = b.knn->p_corrupted;
        k["noisy_count"] = b.knn->noisy_count;
        j["knn"] = std::move(k);
    }
    if (b.weight_sparsity || b.exact_zero_weights || b.activation_sparsity) {
        json s;
        if (b.weight_sparsity) {
            json w;
            for (const auto& [t, frac] : *b.weight_sparsity) w[format_double(t)] = frac;
            s["weight_ratio_below"] = std::move(w);
        }
        if (b.exact_zero_weights) s["exact_zero_weights"] = *b.exact_zero_weights;
        if (b.activation_sparsity) s["activation_nonzero_ratio"] = *b.activation_sparsity;
        j["sparsity"] = std::move(s);
    }
    if (b.ndcg) {
        json n;
        n["value"] = b.ndcg->value;
        n["active_neurons"] = b.ndcg->active_neurons;
        n["silent_neurons"] = b.ndcg->silent_neurons;
        j["ndcg"] = std::move(n);
    }
    return j.dump(indent);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace ddlab
