#pragma once

#include <cstdint>
#include <vector>

#include "asnn/matrix.hpp"

// Minimal dense network engine: seedable forward/backward propagation
// with ReLU hidden layers, inverted dropout, a softmax cross-entropy or
// mean-squared-error head, and Adam. Everything is a pure function over
// value types; identical inputs and seeds give bit-identical outputs.

namespace asnn {

enum class OutputHead { SoftmaxCrossEntropy, MeanSquaredError };

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths;
    // One dropout rate per hidden layer, each in [0, 1).
    std::vector<double> dropout_rates;
    std::size_t output_dim = 0;
    OutputHead output_head = OutputHead::SoftmaxCrossEntropy;

    // Throws std::invalid_argument on zero widths, mismatched dropout
    // list, or rates outside [0, 1).
    void validate() const;

    std::size_t layer_count() const { return hidden_widths.size() + 1; }
};

struct DenseLayer {
    Matrix weights;            // fan_in x fan_out
    std::vector<double> bias;  // fan_out

    bool operator==(const DenseLayer&) const = default;
};

struct NetworkParams {
    std::vector<DenseLayer> layers;

    std::size_t parameter_count() const;
    bool operator==(const NetworkParams&) const = default;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

struct AdamState {
    std::uint64_t step = 0;
    std::vector<DenseLayer> first_moment;
    std::vector<DenseLayer> second_moment;
    AdamConfig config;

    static AdamState init(const NetworkParams& params, const AdamConfig& config);
};

struct TrainSettings {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    bool shuffle_each_epoch = true;
};

// Forward pass mode. Eval is deterministic and dropout-free; Train
// applies inverted dropout with masks fixed by the seed, so repeating a
// call with the same seed reproduces the same masks.
struct ForwardMode {
    bool train = false;
    std::uint64_t dropout_seed = 0;
};

inline ForwardMode eval_mode() { return {}; }
inline ForwardMode train_mode(std::uint64_t dropout_seed) { return {true, dropout_seed}; }

struct ForwardCache {
    std::vector<Matrix> hidden_activations;  // post-ReLU (and mask), one per hidden layer
    std::vector<Matrix> dropout_masks;       // scaled masks; empty when not applied
};

struct ForwardResult {
    Matrix output;  // logits (cross-entropy head) or predictions (MSE head)
    ForwardCache cache;
};

struct LossAndGrads {
    double loss = 0.0;
    NetworkParams grads;  // same shapes as the parameters
};

// He-style init: weights ~ N(0, sqrt(2 / fan_in)), biases zero.
// Identical seeds give bit-identical parameters.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

ForwardResult forward(const NetworkParams& params, const NetworkSpec& spec,
                      const Matrix& batch, const ForwardMode& mode);

// Softmax over each row; rows sum to 1. Exposed for tests and accuracy
// tooling; the cross-entropy head uses the same computation.
Matrix softmax_rows(const Matrix& logits);
void softmax_rows_into(Matrix& probs, const Matrix& logits);

// Cross-entropy head: labels are class indices. Returns the mean loss
// over the batch and exact analytic gradients.
LossAndGrads loss_and_grads(const NetworkParams& params, const NetworkSpec& spec,
                            const Matrix& batch, const std::vector<std::size_t>& labels,
                            const ForwardMode& mode);

// MSE head: targets is a batch x output_dim matrix. Loss is the mean of
// squared errors over all entries.
LossAndGrads loss_and_grads(const NetworkParams& params, const NetworkSpec& spec,
                            const Matrix& batch, const Matrix& targets,
                            const ForwardMode& mode);

// One Adam update with bias correction; increments state.step.
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state);

// Full minibatch training loop: epochs * ceil(N / batch_size) Adam steps
// with per-epoch shuffling driven by settings.seed.
NetworkParams train(const NetworkSpec& spec, const Matrix& inputs,
                    const std::vector<std::size_t>& labels,
                    const TrainSettings& settings, const AdamConfig& adam_config);

NetworkParams train(const NetworkSpec& spec, const Matrix& inputs, const Matrix& targets,
                    const TrainSettings& settings, const AdamConfig& adam_config);

// Fraction of argmax-correct predictions; ties resolve to the lowest
// class index. Requires the cross-entropy head and a non-empty test set.
double evaluate_accuracy(const NetworkParams& params, const NetworkSpec& spec,
                         const Matrix& inputs, const std::vector<std::size_t>& labels);

// Mean loss of the current parameters over a dataset, computed in eval
// mode (no dropout).
double dataset_loss(const NetworkParams& params, const NetworkSpec& spec,
                    const Matrix& inputs, const Matrix& targets);

}  // namespace asnn
