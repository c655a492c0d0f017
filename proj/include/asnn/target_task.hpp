#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asnn/data.hpp"
#include "asnn/network.hpp"

// The evaluation side of the search: build a classifier for a candidate
// architecture, train it K times with independent seeds, and report the
// accuracy vector and its mean.

namespace asnn {

// Hidden-layer widths of the target classifier. Depth is 2 or 3 and each
// width lies in [1, 4096].
class Architecture {
public:
    explicit Architecture(std::vector<int> widths);

    const std::vector<int>& widths() const { return widths_; }
    std::size_t depth() const { return widths_.size(); }

    bool operator==(const Architecture&) const = default;

    static constexpr int kMinWidth = 1;
    static constexpr int kMaxWidth = 4096;
    static constexpr std::size_t kMinDepth = 2;
    static constexpr std::size_t kMaxDepth = 3;

private:
    std::vector<int> widths_;
};

struct TrialResult {
    Architecture arch;
    std::vector<double> accuracies;  // one per trial, each in [0,1]
    double mean = 0.0;               // full precision; rounded only at serialization

    bool operator==(const TrialResult&) const = default;
};

struct EvalBudget {
    std::size_t trials = 10;
    std::size_t epochs = 50;
    std::optional<std::size_t> train_subset;
    std::optional<std::size_t> test_subset;
    std::size_t batch_size = 32;

    void validate() const;

    // Full-size evaluation: 10 trials of 50 epochs on the whole set.
    static EvalBudget paper();
    // CI-friendly evaluation: 3 trials of 3 epochs on a 10k train subset.
    static EvalBudget desk();

    bool operator==(const EvalBudget&) const = default;
};

// input -> [Dense(width, ReLU) -> Dropout(0.2)]* -> Dense(num_classes),
// softmax cross-entropy head.
NetworkSpec build_classifier_spec(const Architecture& arch, std::size_t input_dim,
                                  std::size_t num_classes);

constexpr double kClassifierDropout = 0.2;

// Trains the classifier budget.trials times; trial i uses the seed
// mix_seed(base_seed, i), so trials are independent of each other and of
// the trial count. Returns the per-trial test accuracies and their mean.
TrialResult run_trials(const Architecture& arch, const LabeledDataset& dataset,
                       const EvalBudget& budget, std::uint64_t base_seed);

// Evaluates the full Cartesian product node_set^depth, enumerated with
// widths descending (lexicographically), one run_trials call per cell.
std::vector<TrialResult> collect_grid(const std::vector<int>& node_set, std::size_t depth,
                                      const LabeledDataset& dataset, const EvalBudget& budget,
                                      std::uint64_t base_seed);

// The grid enumeration order used by collect_grid, exposed for callers
// that need the architecture list without evaluating it.
std::vector<Architecture> enumerate_grid(const std::vector<int>& node_set, std::size_t depth);

}  // namespace asnn
