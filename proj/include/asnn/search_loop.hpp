#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asnn/asnn_dataset.hpp"
#include "asnn/asnn_model.hpp"
#include "asnn/data.hpp"
#include "asnn/target_task.hpp"

// The iterative search: augment the dataset, retrain the suggestion
// network from scratch, query it with the all-100 vector, round the
// prediction, evaluate the resulting architecture, and feed the trials
// back into the dataset. A random-search driver with the same logging
// shape provides the efficiency baseline.

namespace asnn {

enum class BackendKind { RealTrainer, TabularOracle };

// Answers architecture evaluations from a stored accuracy grid plus a
// per-cell Gaussian noise model, instead of real training. Off-grid
// queries are clamped to the grid hull and interpolated multilinearly in
// log2-width space; outputs are labelled a simulation accordingly.
class TabularOracle {
public:
    // The records must cover a full Cartesian grid. noise_scale
    // multiplies the per-cell sample standard deviation; 0 makes the
    // oracle deterministic.
    static TabularOracle from_records(const std::vector<ArchRecord>& records,
                                      double noise_scale = 1.0);

    struct CellStats {
        double mean = 0.0;
        double stddev = 0.0;
    };

    // Hull-clamped log2 multilinear interpolation of cell means and
    // standard deviations; exact on grid points.
    CellStats interpolate(const std::vector<double>& widths) const;

    // K accuracies drawn as mean + noise_scale * stddev * N(0,1), each
    // clamped to [0,1]. Deterministic given (arch, trials, seed).
    TrialResult evaluate(const Architecture& arch, std::size_t trials, std::uint64_t seed) const;

    std::size_t depth() const { return axes_.size(); }
    double noise_scale() const { return noise_scale_; }

private:
    TabularOracle() = default;

    std::vector<std::vector<int>> axes_;       // ascending widths per dimension
    std::vector<std::vector<double>> log_axes_;
    std::vector<double> cell_means_;
    std::vector<double> cell_stddevs_;
    double noise_scale_ = 1.0;
};

// Uniform interface over the two evaluation backends.
class EvalBackend {
public:
    virtual ~EvalBackend() = default;
    virtual TrialResult evaluate(const Architecture& arch, std::size_t trials,
                                 std::uint64_t seed) const = 0;
    virtual std::string name() const = 0;
};

class OracleBackend final : public EvalBackend {
public:
    explicit OracleBackend(TabularOracle oracle) : oracle_(std::move(oracle)) {}
    TrialResult evaluate(const Architecture& arch, std::size_t trials,
                         std::uint64_t seed) const override {
        return oracle_.evaluate(arch, trials, seed);
    }
    std::string name() const override { return "oracle"; }
    const TabularOracle& oracle() const { return oracle_; }

private:
    TabularOracle oracle_;
};

class TrainerBackend final : public EvalBackend {
public:
    TrainerBackend(const LabeledDataset& dataset, EvalBudget budget)
        : dataset_(&dataset), budget_(std::move(budget)) {}
    TrialResult evaluate(const Architecture& arch, std::size_t trials,
                         std::uint64_t seed) const override {
        EvalBudget budget = budget_;
        budget.trials = trials;
        return run_trials(arch, *dataset_, budget, seed);
    }
    std::string name() const override { return "real"; }

private:
    const LabeledDataset* dataset_;
    EvalBudget budget_;
};

struct LoopConfig {
    std::size_t max_iterations = 5;
    std::optional<double> target_mean_accuracy;
    std::size_t trials_per_eval = 10;
    AugmentConfig augment;
    AsnnConfig asnn;
    BackendKind backend = BackendKind::TabularOracle;
    std::uint64_t seed = 0;
    WidthBounds bounds;

    void validate() const;
};

struct IterationLog {
    std::size_t iteration = 0;
    std::vector<double> prediction;  // real-valued, before rounding
    Architecture arch;
    TrialResult trial;
    std::size_t dataset_records = 0;  // record count after the append
    double best_so_far = 0.0;         // best evaluated mean so far

    bool operator==(const IterationLog&) const = default;
};

// Runs the full loop. The stopping guard checks the best mean in the
// dataset (initial records included) before each iteration, so a target
// already met by the initial records returns an empty log.
std::vector<IterationLog> run_asnn_search(const LoopConfig& cfg,
                                          const std::vector<ArchRecord>& initial_records,
                                          const EvalBackend& backend);

struct WidthRange {
    int min_width = 16;
    int max_width = 256;
    bool log_uniform = true;

    bool operator==(const WidthRange&) const = default;
};

// Baseline: each iteration draws widths independently at random and
// evaluates them, with the same logging shape as the suggestion loop.
std::vector<IterationLog> run_random_search(const LoopConfig& cfg, const WidthRange& range,
                                            std::size_t depth, const EvalBackend& backend);

struct StrategyConfig {
    std::string name;
    enum class Kind { Asnn, Random } kind = Kind::Asnn;
    LoopConfig loop;
    std::vector<ArchRecord> initial_records;  // Asnn only
    WidthRange range;                         // Random only
    std::size_t depth = 2;                    // Random only
};

struct ComparisonRow {
    std::string strategy;
    std::size_t seed_index = 0;
    std::size_t iteration = 0;
    Architecture arch;
    double mean = 0.0;
    double best_so_far = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    // strategy -> per-iteration median of best_so_far across seeds
    std::map<std::string, std::vector<double>> median_best_so_far;
    // strategy -> median number of evaluations to reach the target
    // (only when a target is configured; runs that never reach it are
    // excluded from the median but counted here)
    std::map<std::string, std::optional<double>> median_evals_to_target;
    std::map<std::string, std::size_t> runs_missing_target;
};

// Runs every strategy over n_seeds derived seeds against one shared
// backend. All strategies must use the same iteration and trial budget.
ComparisonReport compare_strategies(const std::vector<StrategyConfig>& strategies,
                                    std::size_t n_seeds, const EvalBackend& backend);

}  // namespace asnn
