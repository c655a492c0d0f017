#include "asnn/target_task.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "asnn/rng.hpp"

namespace asnn {

Architecture::Architecture(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < kMinDepth || widths_.size() > kMaxDepth) {
        throw std::invalid_argument("Architecture: depth must be 2 or 3");
    }
    for (int w : widths_) {
        if (w < kMinWidth || w > kMaxWidth) {
            throw std::invalid_argument("Architecture: widths must lie in [1, 4096]");
        }
    }
}

void EvalBudget::validate() const {
    if (trials == 0) throw std::invalid_argument("EvalBudget: trials must be >= 1");
    if (epochs == 0) throw std::invalid_argument("EvalBudget: epochs must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("EvalBudget: batch_size must be >= 1");
}

EvalBudget EvalBudget::paper() {
    EvalBudget b;
    b.trials = 10;
    b.epochs = 50;
    return b;
}

EvalBudget EvalBudget::desk() {
    EvalBudget b;
    b.trials = 3;
    b.epochs = 3;
    b.train_subset = 10000;
    return b;
}

NetworkSpec build_classifier_spec(const Architecture& arch, std::size_t input_dim,
                                  std::size_t num_classes) {
    NetworkSpec spec;
    spec.input_dim = input_dim;
    spec.hidden_widths.assign(arch.widths().begin(), arch.widths().end());
    spec.dropout_rates.assign(arch.depth(), kClassifierDropout);
    spec.output_dim = num_classes;
    spec.output_head = OutputHead::SoftmaxCrossEntropy;
    spec.validate();
    return spec;
}

namespace {

// First n rows after a seeded shuffle of the row indices.
std::vector<std::size_t> subset_indices(std::size_t total, std::size_t n, std::uint64_t seed) {
    if (n > total) throw std::invalid_argument("EvalBudget: subset larger than dataset");
    std::vector<std::size_t> indices(total);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    Xoshiro256pp rng(seed);
    shuffle_in_place(indices, rng);
    indices.resize(n);
    return indices;
}

}  // namespace

TrialResult run_trials(const Architecture& arch, const LabeledDataset& dataset,
                       const EvalBudget& budget, std::uint64_t base_seed) {
    budget.validate();

    const Matrix* train_inputs = &dataset.train_inputs;
    const std::vector<std::size_t>* train_labels = &dataset.train_labels;
    Matrix train_inputs_subset;
    std::vector<std::size_t> train_labels_subset;
    if (budget.train_subset) {
        const auto rows = subset_indices(dataset.train_inputs.rows, *budget.train_subset,
                                         mix_seed(base_seed, 0x72a1, 1));
        train_inputs_subset = gather_rows(dataset.train_inputs, rows);
        train_labels_subset.reserve(rows.size());
        for (std::size_t r : rows) train_labels_subset.push_back(dataset.train_labels[r]);
        train_inputs = &train_inputs_subset;
        train_labels = &train_labels_subset;
    }

    const Matrix* test_inputs = &dataset.test_inputs;
    const std::vector<std::size_t>* test_labels = &dataset.test_labels;
    Matrix test_inputs_subset;
    std::vector<std::size_t> test_labels_subset;
    if (budget.test_subset) {
        const auto rows = subset_indices(dataset.test_inputs.rows, *budget.test_subset,
                                         mix_seed(base_seed, 0x7e57, 1));
        test_inputs_subset = gather_rows(dataset.test_inputs, rows);
        test_labels_subset.reserve(rows.size());
        for (std::size_t r : rows) test_labels_subset.push_back(dataset.test_labels[r]);
        test_inputs = &test_inputs_subset;
        test_labels = &test_labels_subset;
    }

    const NetworkSpec spec = build_classifier_spec(arch, dataset.input_dim, dataset.num_classes);

    TrialResult result{arch, {}, 0.0};
    result.accuracies.reserve(budget.trials);
    for (std::size_t trial = 0; trial < budget.trials; ++trial) {
        TrainSettings settings;
        settings.epochs = budget.epochs;
        settings.batch_size = budget.batch_size;
        settings.seed = mix_seed(base_seed, trial);
        const NetworkParams params = train(spec, *train_inputs, *train_labels, settings, AdamConfig{});
        result.accuracies.push_back(evaluate_accuracy(params, spec, *test_inputs, *test_labels));
    }
    result.mean = std::accumulate(result.accuracies.begin(), result.accuracies.end(), 0.0) /
                  static_cast<double>(result.accuracies.size());
    return result;
}

std::vector<Architecture> enumerate_grid(const std::vector<int>& node_set, std::size_t depth) {
    if (node_set.empty()) throw std::invalid_argument("enumerate_grid: node_set is empty");
    std::vector<int> sorted_desc(node_set);
    std::sort(sorted_desc.begin(), sorted_desc.end(), std::greater<int>());
    sorted_desc.erase(std::unique(sorted_desc.begin(), sorted_desc.end()), sorted_desc.end());

    std::vector<Architecture> archs;
    std::vector<std::size_t> odometer(depth, 0);
    for (;;) {
        std::vector<int> widths(depth);
        for (std::size_t d = 0; d < depth; ++d) widths[d] = sorted_desc[odometer[d]];
        archs.emplace_back(std::move(widths));

        std::size_t d = depth;
        while (d-- > 0) {
            if (++odometer[d] < sorted_desc.size()) break;
            odometer[d] = 0;
            if (d == 0) return archs;
        }
    }
}

std::vector<TrialResult> collect_grid(const std::vector<int>& node_set, std::size_t depth,
                                      const LabeledDataset& dataset, const EvalBudget& budget,
                                      std::uint64_t base_seed) {
    const auto archs = enumerate_grid(node_set, depth);
    std::vector<TrialResult> results;
    results.reserve(archs.size());
    for (std::size_t i = 0; i < archs.size(); ++i) {
        results.push_back(run_trials(archs[i], dataset, budget, mix_seed(base_seed, 0x9f1d, i)));
    }
    return results;
}

}  // namespace asnn
