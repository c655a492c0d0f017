#include "asnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "asnn/rng.hpp"

namespace asnn {

namespace {

constexpr std::uint64_t kInitStream = 0x1d17;
constexpr std::uint64_t kShuffleStream = 0x5f1e;
constexpr std::uint64_t kDropoutStream = 0xd0f0;

void check_batch(const NetworkSpec& spec, const Matrix& batch) {
    if (batch.cols != spec.input_dim) {
        throw std::invalid_argument("forward: batch column count does not match input_dim");
    }
}

void check_shapes(const NetworkParams& params, const NetworkParams& grads) {
    if (params.layers.size() != grads.layers.size()) {
        throw std::invalid_argument("adam_step: layer counts do not match");
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        if (!params.layers[l].weights.same_shape(grads.layers[l].weights) ||
            params.layers[l].bias.size() != grads.layers[l].bias.size()) {
            throw std::invalid_argument("adam_step: parameter and gradient shapes differ");
        }
    }
}

// Workspace for one training step; every buffer is reused across steps
// so the hot loop performs no allocations after warm-up.
struct StepWorkspace {
    ForwardCache cache;
    Matrix output;
    Matrix probs;                // cross-entropy head only
    std::vector<Matrix> deltas;  // deltas[l]: loss gradient at layer l's output
};

void forward_into(const NetworkParams& params, const NetworkSpec& spec, const Matrix& batch,
                  const ForwardMode& mode, ForwardCache& cache, Matrix& output) {
    check_batch(spec, batch);
    if (params.layers.size() != spec.layer_count()) {
        throw std::invalid_argument("forward: params do not match spec");
    }

    const std::size_t hidden_count = spec.hidden_widths.size();
    cache.hidden_activations.resize(hidden_count);

    const bool apply_dropout = mode.train;
    if (apply_dropout) {
        cache.dropout_masks.resize(hidden_count);
    } else {
        cache.dropout_masks.clear();
    }
    Xoshiro256pp dropout_rng(mix_seed(mode.dropout_seed, kDropoutStream));

    for (std::size_t l = 0; l < hidden_count; ++l) {
        const Matrix& input = l == 0 ? batch : cache.hidden_activations[l - 1];
        Matrix& a = cache.hidden_activations[l];
        matmul_into(a, input, params.layers[l].weights);
        add_bias_row(a, params.layers[l].bias);
        for (double& v : a.data) {
            if (v < 0.0) v = 0.0;
        }

        const double rate = spec.dropout_rates[l];
        if (apply_dropout && rate > 0.0) {
            // Inverted dropout: kept activations scale by 1/keep so eval
            // mode needs no rescaling.
            const double keep = 1.0 - rate;
            Matrix& mask = cache.dropout_masks[l];
            mask.rows = a.rows;
            mask.cols = a.cols;
            mask.data.resize(a.data.size());
            for (std::size_t i = 0; i < mask.data.size(); ++i) {
                mask.data[i] = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
            }
            for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] *= mask.data[i];
        } else if (apply_dropout) {
            cache.dropout_masks[l] = Matrix();
        }
    }

    matmul_into(output, cache.hidden_activations[hidden_count - 1],
                params.layers.back().weights);
    add_bias_row(output, params.layers.back().bias);
}

// The loss head has already written dLoss/dLogits into ws.deltas.back().
// The ReLU derivative comes from the stored activation: a kept unit has
// a > 0 exactly when its pre-activation was positive, and a dropped unit
// contributes zero through its mask anyway.
void backward_into(const NetworkParams& params, const Matrix& batch, StepWorkspace& ws,
                   NetworkParams& grads) {
    const std::size_t layer_count = params.layers.size();
    grads.layers.resize(layer_count);

    for (std::size_t l = layer_count; l-- > 0;) {
        const Matrix& delta = ws.deltas[l];
        const Matrix& input = l == 0 ? batch : ws.cache.hidden_activations[l - 1];
        matmul_transpose_a_into(grads.layers[l].weights, input, delta);
        column_sums_into(grads.layers[l].bias, delta);

        if (l == 0) break;
        Matrix& upstream = ws.deltas[l - 1];
        matmul_transpose_b_into(upstream, delta, params.layers[l].weights);
        const Matrix& a = ws.cache.hidden_activations[l - 1];
        const bool masked = !ws.cache.dropout_masks.empty() &&
                            ws.cache.dropout_masks[l - 1].rows == upstream.rows;
        for (std::size_t i = 0; i < upstream.data.size(); ++i) {
            if (a.data[i] <= 0.0) {
                upstream.data[i] = 0.0;
            } else if (masked) {
                upstream.data[i] *= ws.cache.dropout_masks[l - 1].data[i];
            }
        }
    }
}

void ensure_delta_buffers(StepWorkspace& ws, std::size_t layer_count) {
    if (ws.deltas.size() != layer_count) ws.deltas.resize(layer_count);
}

double ce_loss_and_grads_into(const NetworkParams& params, const NetworkSpec& spec,
                              const Matrix& batch, const std::vector<std::size_t>& labels,
                              const ForwardMode& mode, StepWorkspace& ws, NetworkParams& grads) {
    if (spec.output_head != OutputHead::SoftmaxCrossEntropy) {
        throw std::invalid_argument("loss_and_grads: class labels require the cross-entropy head");
    }
    if (labels.size() != batch.rows) {
        throw std::invalid_argument("loss_and_grads: label count does not match batch rows");
    }
    for (std::size_t label : labels) {
        if (label >= spec.output_dim) {
            throw std::invalid_argument("loss_and_grads: label out of range");
        }
    }

    ensure_delta_buffers(ws, params.layers.size());
    forward_into(params, spec, batch, mode, ws.cache, ws.output);
    softmax_rows_into(ws.probs, ws.output);

    const double batch_size = static_cast<double>(batch.rows);
    Matrix& delta = ws.deltas.back();
    delta = ws.probs;

    double loss = 0.0;
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const double p = std::max(ws.probs.at(i, labels[i]), 1e-300);
        loss -= std::log(p);
        delta.at(i, labels[i]) -= 1.0;
    }
    loss /= batch_size;
    for (double& g : delta.data) g /= batch_size;

    backward_into(params, batch, ws, grads);
    return loss;
}

double mse_loss_and_grads_into(const NetworkParams& params, const NetworkSpec& spec,
                               const Matrix& batch, const Matrix& targets,
                               const ForwardMode& mode, StepWorkspace& ws, NetworkParams& grads) {
    if (spec.output_head != OutputHead::MeanSquaredError) {
        throw std::invalid_argument("loss_and_grads: matrix targets require the MSE head");
    }
    if (targets.rows != batch.rows || targets.cols != spec.output_dim) {
        throw std::invalid_argument("loss_and_grads: target shape does not match");
    }

    ensure_delta_buffers(ws, params.layers.size());
    forward_into(params, spec, batch, mode, ws.cache, ws.output);

    const double n = static_cast<double>(targets.rows * targets.cols);
    Matrix& delta = ws.deltas.back();
    delta.rows = targets.rows;
    delta.cols = targets.cols;
    delta.data.resize(targets.data.size());

    double loss = 0.0;
    for (std::size_t i = 0; i < targets.data.size(); ++i) {
        const double diff = ws.output.data[i] - targets.data[i];
        loss += diff * diff;
        delta.data[i] = 2.0 * diff / n;
    }
    loss /= n;

    backward_into(params, batch, ws, grads);
    return loss;
}

}  // namespace

void NetworkSpec::validate() const {
    if (input_dim == 0) throw std::invalid_argument("NetworkSpec: input_dim must be >= 1");
    if (output_dim == 0) throw std::invalid_argument("NetworkSpec: output_dim must be >= 1");
    if (hidden_widths.empty()) {
        throw std::invalid_argument("NetworkSpec: at least one hidden layer required");
    }
    for (std::size_t w : hidden_widths) {
        if (w == 0) throw std::invalid_argument("NetworkSpec: hidden width must be >= 1");
    }
    if (dropout_rates.size() != hidden_widths.size()) {
        throw std::invalid_argument("NetworkSpec: one dropout rate per hidden layer required");
    }
    for (double r : dropout_rates) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw std::invalid_argument("NetworkSpec: dropout rates must lie in [0, 1)");
        }
    }
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weights.data.size() + layer.bias.size();
    }
    return n;
}

AdamState AdamState::init(const NetworkParams& params, const AdamConfig& config) {
    AdamState state;
    state.config = config;
    state.first_moment.resize(params.layers.size());
    state.second_moment.resize(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        state.first_moment[l].weights = Matrix(layer.weights.rows, layer.weights.cols);
        state.first_moment[l].bias.assign(layer.bias.size(), 0.0);
        state.second_moment[l].weights = Matrix(layer.weights.rows, layer.weights.cols);
        state.second_moment[l].bias.assign(layer.bias.size(), 0.0);
    }
    return state;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Xoshiro256pp rng(mix_seed(seed, kInitStream));

    std::vector<std::size_t> in_dims{spec.input_dim};
    for (std::size_t w : spec.hidden_widths) in_dims.push_back(w);
    std::vector<std::size_t> out_dims(spec.hidden_widths);
    out_dims.push_back(spec.output_dim);

    NetworkParams params;
    params.layers.resize(spec.layer_count());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Matrix w(in_dims[l], out_dims[l]);
        const double stddev = std::sqrt(2.0 / static_cast<double>(in_dims[l]));
        for (double& value : w.data) value = stddev * rng.normal();
        params.layers[l].weights = std::move(w);
        params.layers[l].bias.assign(out_dims[l], 0.0);
    }
    return params;
}

ForwardResult forward(const NetworkParams& params, const NetworkSpec& spec,
                      const Matrix& batch, const ForwardMode& mode) {
    spec.validate();
    ForwardResult result;
    forward_into(params, spec, batch, mode, result.cache, result.output);
    return result;
}

void softmax_rows_into(Matrix& probs, const Matrix& logits) {
    probs.rows = logits.rows;
    probs.cols = logits.cols;
    probs.data.resize(logits.data.size());
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* in = logits.row_ptr(i);
        double* out = probs.row_ptr(i);
        double max_logit = in[0];
        for (std::size_t j = 1; j < logits.cols; ++j) max_logit = std::max(max_logit, in[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            out[j] = std::exp(in[j] - max_logit);
            sum += out[j];
        }
        for (std::size_t j = 0; j < logits.cols; ++j) out[j] /= sum;
    }
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix probs;
    softmax_rows_into(probs, logits);
    return probs;
}

LossAndGrads loss_and_grads(const NetworkParams& params, const NetworkSpec& spec,
                            const Matrix& batch, const std::vector<std::size_t>& labels,
                            const ForwardMode& mode) {
    spec.validate();
    StepWorkspace ws;
    LossAndGrads result;
    result.loss = ce_loss_and_grads_into(params, spec, batch, labels, mode, ws, result.grads);
    return result;
}

LossAndGrads loss_and_grads(const NetworkParams& params, const NetworkSpec& spec,
                            const Matrix& batch, const Matrix& targets,
                            const ForwardMode& mode) {
    spec.validate();
    StepWorkspace ws;
    LossAndGrads result;
    result.loss = mse_loss_and_grads_into(params, spec, batch, targets, mode, ws, result.grads);
    return result;
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state) {
    check_shapes(params, grads);
    state.step += 1;
    const auto& cfg = state.config;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](double& param, double grad, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
        const double m_hat = m / bias1;
        const double v_hat = v / bias2;
        param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    };

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        const auto& grad_layer = grads.layers[l];
        auto& m = state.first_moment[l];
        auto& v = state.second_moment[l];
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
            update(layer.weights.data[i], grad_layer.weights.data[i],
                   m.weights.data[i], v.weights.data[i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            update(layer.bias[i], grad_layer.bias[i], m.bias[i], v.bias[i]);
        }
    }
}

namespace {

// FillBatch copies the selected dataset rows into reusable batch
// buffers; StepLoss runs the fused loss/gradient pass on them.
template <typename FillBatch, typename StepLoss>
NetworkParams train_impl(const NetworkSpec& spec, std::size_t n_rows,
                         const TrainSettings& settings, const AdamConfig& adam_config,
                         FillBatch fill_batch, StepLoss step_loss) {
    spec.validate();
    if (n_rows == 0) throw std::invalid_argument("train: dataset is empty");
    if (settings.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
    if (settings.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");

    NetworkParams params = init_params(spec, settings.seed);
    AdamState adam = AdamState::init(params, adam_config);
    NetworkParams grads;
    StepWorkspace workspace;

    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < settings.epochs; ++epoch) {
        if (settings.shuffle_each_epoch) {
            Xoshiro256pp rng(mix_seed(settings.seed, kShuffleStream, epoch));
            shuffle_in_place(order, rng);
        }
        const std::size_t batches = (n_rows + settings.batch_size - 1) / settings.batch_size;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * settings.batch_size;
            const std::size_t end = std::min(begin + settings.batch_size, n_rows);
            fill_batch(order, begin, end);
            step_loss(params, mix_seed(settings.seed, epoch, b), workspace, grads);
            adam_step(params, grads, adam);
        }
    }
    return params;
}

}  // namespace

NetworkParams train(const NetworkSpec& spec, const Matrix& inputs,
                    const std::vector<std::size_t>& labels,
                    const TrainSettings& settings, const AdamConfig& adam_config) {
    if (labels.size() != inputs.rows) {
        throw std::invalid_argument("train: label count does not match inputs");
    }
    Matrix batch;
    std::vector<std::size_t> batch_labels;
    auto fill = [&](const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        if (batch.rows != n) {
            batch.rows = n;
            batch.cols = inputs.cols;
            batch.data.resize(n * inputs.cols);
        }
        batch_labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = order[begin + i];
            std::copy(inputs.row_ptr(row), inputs.row_ptr(row) + inputs.cols, batch.row_ptr(i));
            batch_labels[i] = labels[row];
        }
    };
    auto step = [&](const NetworkParams& params, std::uint64_t dropout_seed, StepWorkspace& ws,
                    NetworkParams& grads) {
        ce_loss_and_grads_into(params, spec, batch, batch_labels, train_mode(dropout_seed), ws,
                               grads);
    };
    return train_impl(spec, inputs.rows, settings, adam_config, fill, step);
}

NetworkParams train(const NetworkSpec& spec, const Matrix& inputs, const Matrix& targets,
                    const TrainSettings& settings, const AdamConfig& adam_config) {
    if (targets.rows != inputs.rows) {
        throw std::invalid_argument("train: target count does not match inputs");
    }
    Matrix batch;
    Matrix batch_targets;
    auto fill = [&](const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        if (batch.rows != n) {
            batch.rows = n;
            batch.cols = inputs.cols;
            batch.data.resize(n * inputs.cols);
            batch_targets.rows = n;
            batch_targets.cols = targets.cols;
            batch_targets.data.resize(n * targets.cols);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = order[begin + i];
            std::copy(inputs.row_ptr(row), inputs.row_ptr(row) + inputs.cols, batch.row_ptr(i));
            std::copy(targets.row_ptr(row), targets.row_ptr(row) + targets.cols,
                      batch_targets.row_ptr(i));
        }
    };
    auto step = [&](const NetworkParams& params, std::uint64_t dropout_seed, StepWorkspace& ws,
                    NetworkParams& grads) {
        mse_loss_and_grads_into(params, spec, batch, batch_targets, train_mode(dropout_seed), ws,
                                grads);
    };
    return train_impl(spec, inputs.rows, settings, adam_config, fill, step);
}

double evaluate_accuracy(const NetworkParams& params, const NetworkSpec& spec,
                         const Matrix& inputs, const std::vector<std::size_t>& labels) {
    if (spec.output_head != OutputHead::SoftmaxCrossEntropy) {
        throw std::invalid_argument("evaluate_accuracy: requires the cross-entropy head");
    }
    if (inputs.rows == 0) throw std::invalid_argument("evaluate_accuracy: empty test set");
    if (labels.size() != inputs.rows) {
        throw std::invalid_argument("evaluate_accuracy: label count does not match inputs");
    }
    spec.validate();

    constexpr std::size_t kChunk = 2048;
    ForwardCache cache;
    Matrix logits;
    Matrix chunk;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < inputs.rows; begin += kChunk) {
        const std::size_t end = std::min(begin + kChunk, inputs.rows);
        const std::size_t n = end - begin;
        chunk.rows = n;
        chunk.cols = inputs.cols;
        chunk.data.assign(inputs.row_ptr(begin), inputs.row_ptr(begin) + n * inputs.cols);
        forward_into(params, spec, chunk, eval_mode(), cache, logits);
        for (std::size_t i = 0; i < logits.rows; ++i) {
            const double* row = logits.row_ptr(i);
            std::size_t best = 0;
            for (std::size_t j = 1; j < logits.cols; ++j) {
                if (row[j] > row[best]) best = j;  // ties keep the lowest index
            }
            if (best == labels[begin + i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(inputs.rows);
}

double dataset_loss(const NetworkParams& params, const NetworkSpec& spec,
                    const Matrix& inputs, const Matrix& targets) {
    spec.validate();
    constexpr std::size_t kChunk = 2048;
    ForwardCache cache;
    Matrix out;
    Matrix chunk;
    double total = 0.0;
    for (std::size_t begin = 0; begin < inputs.rows; begin += kChunk) {
        const std::size_t end = std::min(begin + kChunk, inputs.rows);
        const std::size_t n = end - begin;
        chunk.rows = n;
        chunk.cols = inputs.cols;
        chunk.data.assign(inputs.row_ptr(begin), inputs.row_ptr(begin) + n * inputs.cols);
        forward_into(params, spec, chunk, eval_mode(), cache, out);
        for (std::size_t i = 0; i < out.rows; ++i) {
            const double* orow = out.row_ptr(i);
            const double* trow = targets.row_ptr(begin + i);
            for (std::size_t j = 0; j < out.cols; ++j) {
                const double diff = orow[j] - trow[j];
                total += diff * diff;
            }
        }
    }
    return total / static_cast<double>(inputs.rows * targets.cols);
}

}  // namespace asnn
