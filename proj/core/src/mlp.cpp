#include "ddlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

void affine_into(const Matrix& x, const Matrix& w, const std::vector<double>& b, Matrix& out) {
    const std::size_t n = x.rows(), m = x.cols(), p = w.cols();
    if (out.rows() != n || out.cols() != p) out = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        double* oi = out.data() + i * p;
        for (std::size_t j = 0; j < p; ++j) oi[j] = b[j];
        const double* xi = x.data() + i * m;
        for (std::size_t k = 0; k < m; ++k) {
            const double xik = xi[k];
            const double* wk = w.data() + k * p;
            for (std::size_t j = 0; j < p; ++j) oi[j] += xik * wk[j];
        }
    }
}

void relu_inplace(Matrix& m) {
    double* d = m.data();
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) d[i] = d[i] > 0.0 ? d[i] : 0.0;
}

int argmax_row(std::span<const double> row) {
    int best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

/// Scratch space reused across minibatches. acts[0] is the input batch,
/// acts[l] the post-ReLU output of layer l, acts[L] the logits.
struct Workspace {
    std::vector<Matrix> acts;
    Matrix delta;
    Matrix delta_prev;
    Gradients grads;
};

void init_workspace(const MlpModel& model, Workspace& ws) {
    const std::size_t L = model.num_weight_layers();
    ws.acts.assign(L + 1, Matrix());
    ws.grads.dw.clear();
    ws.grads.db.clear();
    for (std::size_t l = 0; l < L; ++l) {
        ws.grads.dw.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        ws.grads.db.emplace_back(model.biases[l].size(), 0.0);
    }
}

void forward_ws(const MlpModel& model, Workspace& ws) {
    const std::size_t L = model.num_weight_layers();
    for (std::size_t l = 0; l < L; ++l) {
        affine_into(ws.acts[l], model.weights[l], model.biases[l], ws.acts[l + 1]);
        if (l + 1 < L) relu_inplace(ws.acts[l + 1]);
    }
}

/// Mean softmax cross-entropy of the logits in acts[L]; writes
/// (softmax - onehot)/batch into delta. Returns the loss.
double softmax_ce(const Matrix& logits, std::span<const int> labels, Matrix& delta,
                  int num_classes) {
    const std::size_t n = logits.rows(), c = logits.cols();
    if (delta.rows() != n || delta.cols() != c) delta = Matrix(n, c);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes)
            throw ValueError("label " + std::to_string(y) + " outside [0, " +
                             std::to_string(num_classes) + ")");
        const double* zi = logits.data() + i * c;
        double m = zi[0];
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, zi[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(zi[j] - m);
        const double lse = std::log(s) + m;
        total += lse - zi[y];
        double* di = delta.data() + i * c;
        for (std::size_t j = 0; j < c; ++j) di[j] = std::exp(zi[j] - lse) * inv_n;
        di[y] -= inv_n;
    }
    return total * inv_n;
}

void backward_ws(const MlpModel& model, Workspace& ws) {
    const std::size_t L = model.num_weight_layers();
    // ws.delta holds dL/dlogits on entry.
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& a = ws.acts[l];
        const Matrix& d = ws.delta;
        Matrix& dw = ws.grads.dw[l];
        std::fill(dw.data(), dw.data() + dw.size(), 0.0);
        const std::size_t rows = a.rows(), n = a.cols(), p = d.cols();
        for (std::size_t i = 0; i < rows; ++i) {
            const double* ai = a.data() + i * n;
            const double* di = d.data() + i * p;
            for (std::size_t k = 0; k < n; ++k) {
                const double aik = ai[k];
                if (aik == 0.0) continue;
                double* dwk = dw.data() + k * p;
                for (std::size_t j = 0; j < p; ++j) dwk[j] += aik * di[j];
            }
        }
        auto& db = ws.grads.db[l];
        std::fill(db.begin(), db.end(), 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* di = d.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) db[j] += di[j];
        }
        if (l == 0) break;
        // Propagate through the weights, then gate by the ReLU mask
        // (post-activation == 0 means the unit did not pass gradient).
        const Matrix& w = model.weights[l];
        Matrix& dprev = ws.delta_prev;
        if (dprev.rows() != rows || dprev.cols() != n) dprev = Matrix(rows, n);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* di = d.data() + i * p;
            double* oi = dprev.data() + i * n;
            for (std::size_t k = 0; k < n; ++k) {
                oi[k] = dot({w.data() + k * p, p}, {di, p});
            }
            const double* ai = a.data() + i * n;
            for (std::size_t k = 0; k < n; ++k)
                if (ai[k] <= 0.0) oi[k] = 0.0;
        }
        std::swap(ws.delta, ws.delta_prev);
    }
}

}  // namespace

MlpModel init_model(std::span<const int> widths, Rng& rng) {
    if (widths.size() < 2) throw ValueError("init_model: need at least input and output widths");
    for (int w : widths)
        if (w <= 0) throw ValueError("init_model: widths must be positive");
    MlpModel model;
    model.layer_widths.assign(widths.begin(), widths.end());
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto fan_in = static_cast<double>(widths[l]);
        const double limit = std::sqrt(6.0 / fan_in);
        Matrix w(widths[l], widths[l + 1]);
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(widths[l + 1], 0.0);
    }
    return model;
}

long long count_params(const MlpModel& model) {
    long long total = 0;
    for (std::size_t l = 0; l + 1 < model.layer_widths.size(); ++l)
        total += static_cast<long long>(model.layer_widths[l] + 1) * model.layer_widths[l + 1];
    return total;
}

ActivationCapture forward(const MlpModel& model, const Matrix& batch) {
    if (batch.cols() != static_cast<std::size_t>(model.input_width()))
        throw DimensionError("forward: batch width " + std::to_string(batch.cols()) +
                             " != model input width " + std::to_string(model.input_width()));
    ActivationCapture cap;
    cap.layers.push_back(batch);
    const std::size_t L = model.num_weight_layers();
    for (std::size_t l = 0; l < L; ++l) {
        Matrix next;
        affine_into(cap.layers.back(), model.weights[l], model.biases[l], next);
        if (l + 1 < L) relu_inplace(next);
        cap.layers.push_back(std::move(next));
    }
    const Matrix& logits = cap.layers.back();
    cap.predicted.resize(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i)
        cap.predicted[i] = argmax_row(logits.row(i));
    return cap;
}

double loss_and_grads(const MlpModel& model, const Matrix& batch,
                      std::span<const int> labels, Gradients& grads) {
    if (batch.cols() != static_cast<std::size_t>(model.input_width()))
        throw DimensionError("loss_and_grads: batch width mismatch");
    if (labels.size() != batch.rows())
        throw DimensionError("loss_and_grads: labels/batch size mismatch");
    Workspace ws;
    init_workspace(model, ws);
    ws.acts[0] = batch;
    forward_ws(model, ws);
    const double loss = softmax_ce(ws.acts.back(), labels, ws.delta, model.output_width());
    backward_ws(model, ws);
    grads = std::move(ws.grads);
    return loss;
}

double lr_at(const TrainConfig& config, int epoch) {
    return config.lr0 / std::sqrt(1.0 + static_cast<double>(epoch / config.lr_step));
}

std::vector<EpochStats> train(MlpModel& model, const Matrix& images,
                              std::span<const int> labels, const TrainConfig& config) {
    if (images.rows() == 0) throw ValueError("train: empty dataset");
    if (labels.size() != images.rows()) throw DimensionError("train: labels/images size mismatch");
    if (config.epochs < 1 || config.batch_size < 1 || config.lr0 <= 0.0 || config.lr_step < 1)
        throw ValueError("train: invalid config (epochs, batch_size, lr_step >= 1; lr0 > 0)");

    const std::size_t n = images.rows();
    const std::size_t d = images.cols();
    const auto batch = static_cast<std::size_t>(config.batch_size);

    Rng shuffle_rng(config.seed);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Workspace ws;
    init_workspace(model, ws);
    Matrix xb;
    std::vector<int> yb;

    std::vector<EpochStats> history;
    history.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at(config, epoch);
        // Seeded Fisher-Yates shuffle.
        for (std::size_t i = n - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(shuffle_rng.below(i + 1));
            std::swap(order[i], order[j]);
        }
        double loss_sum = 0.0;
        std::size_t miss = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t b = std::min(batch, n - start);
            if (xb.rows() != b || xb.cols() != d) xb = Matrix(b, d);
            yb.resize(b);
            for (std::size_t i = 0; i < b; ++i) {
                const std::uint32_t src = order[start + i];
                std::memcpy(xb.data() + i * d, images.data() + static_cast<std::size_t>(src) * d,
                            d * sizeof(double));
                yb[i] = labels[src];
            }
            ws.acts[0] = xb;
            forward_ws(model, ws);
            const double batch_loss =
                softmax_ce(ws.acts.back(), yb, ws.delta, model.output_width());
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch offset " + std::to_string(start));
            backward_ws(model, ws);
            for (std::size_t l = 0; l < model.num_weight_layers(); ++l) {
                Matrix& w = model.weights[l];
                const Matrix& dw = ws.grads.dw[l];
                for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] -= lr * dw.data()[i];
                auto& bias = model.biases[l];
                const auto& db = ws.grads.db[l];
                for (std::size_t j = 0; j < bias.size(); ++j) bias[j] -= lr * db[j];
            }
            loss_sum += batch_loss * static_cast<double>(b);
            const Matrix& logits = ws.acts.back();
            for (std::size_t i = 0; i < b; ++i)
                if (argmax_row(logits.row(i)) != yb[i]) ++miss;
        }
        history.push_back({loss_sum / static_cast<double>(n),
                           static_cast<double>(miss) / static_cast<double>(n)});
    }
    return history;
}

EvalResult evaluate(const MlpModel& model, const Matrix& images, std::span<const int> labels) {
    if (images.rows() == 0) throw ValueError("evaluate: empty dataset");
    if (labels.size() != images.rows())
        throw DimensionError("evaluate: labels/images size mismatch");
    Workspace ws;
    init_workspace(model, ws);
    ws.acts[0] = images;
    forward_ws(model, ws);
    const Matrix& logits = ws.acts.back();
    const int c = model.output_width();
    double total = 0.0;
    std::size_t miss = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= c) throw ValueError("evaluate: label outside [0, num_classes)");
        const auto zi = logits.row(i);
        double m = zi[0];
        for (std::size_t j = 1; j < zi.size(); ++j) m = std::max(m, zi[j]);
        double s = 0.0;
        for (double z : zi) s += std::exp(z - m);
        total += std::log(s) + m - zi[y];
        if (argmax_row(zi) != y) ++miss;
    }
    const auto n = static_cast<double>(images.rows());
    return {total / n, static_cast<double>(miss) / n};
}

}  // namespace ddlab
