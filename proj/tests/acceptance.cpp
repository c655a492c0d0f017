// Acceptance suite: end-to-end checks with pinned thresholds, one
// pass/fail line per criterion. Exit code is the number of failures.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "asnn/asnn_dataset.hpp"
#include "asnn/asnn_model.hpp"
#include "asnn/data.hpp"
#include "asnn/io.hpp"
#include "asnn/network.hpp"
#include "asnn/rng.hpp"
#include "asnn/search_loop.hpp"
#include "asnn/tables.hpp"
#include "asnn/target_task.hpp"

using namespace asnn;
using Clock = std::chrono::steady_clock;

namespace {

namespace fs = std::filesystem;

struct CriterionResult {
    bool ok = false;
    std::string detail;
};

std::vector<ArchRecord> grid_records(std::size_t depth) {
    std::vector<ArchRecord> records;
    for (const auto& trial : grid_to_trials(embedded_grid(depth))) {
        records.push_back(ArchRecord::from_trial(trial));
    }
    return records;
}

// 1. Every stored grid mean matches its recomputed mean within 5e-6.
CriterionResult table_integrity() {
    const auto report = verify_embedded_tables(5e-6);
    std::ostringstream detail;
    detail << report.rows_checked << " rows, " << report.mismatches.size() << " mismatches";

    const auto& two = grid_2layer();
    const auto& three = grid_3layer();
    bool spot = false;
    for (const auto& row : two) {
        if (row.widths == std::vector<int>{256, 16}) spot = row.stored_mean == 0.98310;
    }
    bool spot3 = false;
    for (const auto& row : three) {
        if (row.widths == std::vector<int>{128, 128, 16}) spot3 = row.stored_mean == 0.98171;
    }
    return {report.rows_checked == 89 && report.ok() && spot && spot3, detail.str()};
}

// Smallest |pre-activation| of a dropout-free net, recomputed with plain
// matrix algebra; trials reseed until every unit sits safely away from
// the ReLU kink, which central differences would otherwise step across.
double min_preactivation(const NetworkSpec& spec, const NetworkParams& params,
                         const Matrix& batch) {
    double smallest = 1e300;
    Matrix a = batch;
    for (std::size_t l = 0; l < spec.hidden_widths.size(); ++l) {
        Matrix z = matmul(a, params.layers[l].weights);
        add_bias_row(z, params.layers[l].bias);
        for (double v : z.data) smallest = std::min(smallest, std::fabs(v));
        a = z;
        for (double& v : a.data) v = v > 0.0 ? v : 0.0;
    }
    return smallest;
}

// 2. Analytic gradients vs central finite differences, both heads,
// 50 random nets of at most 200 parameters.
CriterionResult gradient_correctness() {
    Xoshiro256pp data_rng(424242);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const bool classification = trial % 2 == 0;
        NetworkSpec spec;
        spec.input_dim = 3 + trial % 4;
        spec.hidden_widths = {4 + trial % 5, 3 + trial % 4};
        spec.dropout_rates = {0.0, 0.0};
        spec.output_dim = 2 + trial % 3;
        spec.output_head = classification ? OutputHead::SoftmaxCrossEntropy
                                          : OutputHead::MeanSquaredError;

        const std::size_t batch_rows = 3;
        NetworkParams params;
        Matrix batch(batch_rows, spec.input_dim);
        for (std::uint64_t attempt = 0;; ++attempt) {
            params = init_params(spec, 1000 + trial + 100000 * attempt);
            for (auto& v : batch.data) v = data_rng.normal();
            if (min_preactivation(spec, params, batch) > 1e-2) break;
        }
        if (params.parameter_count() > 200) return {false, "net exceeds 200 parameters"};

        std::vector<std::size_t> labels(batch_rows);
        for (auto& l : labels) l = data_rng.uniform_below(spec.output_dim);
        Matrix targets(batch_rows, spec.output_dim);
        for (auto& v : targets.data) v = data_rng.normal();

        const ForwardMode mode = eval_mode();
        auto loss_at = [&]() {
            return classification ? loss_and_grads(params, spec, batch, labels, mode).loss
                                  : loss_and_grads(params, spec, batch, targets, mode).loss;
        };
        const LossAndGrads lg = classification
                                    ? loss_and_grads(params, spec, batch, labels, mode)
                                    : loss_and_grads(params, spec, batch, targets, mode);

        std::vector<double*> param_ptrs, grad_ptrs;
        for (auto& layer : params.layers) {
            for (auto& w : layer.weights.data) param_ptrs.push_back(&w);
            for (auto& b : layer.bias) param_ptrs.push_back(&b);
        }
        NetworkParams grads = lg.grads;
        for (auto& layer : grads.layers) {
            for (auto& w : layer.weights.data) grad_ptrs.push_back(&w);
            for (auto& b : layer.bias) grad_ptrs.push_back(&b);
        }

        const double h = 1e-4;
        for (std::size_t i = 0; i < param_ptrs.size(); ++i) {
            const double original = *param_ptrs[i];
            *param_ptrs[i] = original + h;
            const double lp = loss_at();
            *param_ptrs[i] = original - h;
            const double lm = loss_at();
            *param_ptrs[i] = original;
            const double numeric = (lp - lm) / (2.0 * h);
            const double analytic = *grad_ptrs[i];
            worst = std::max(worst, std::fabs(analytic - numeric) /
                                        std::max({1.0, std::fabs(analytic), std::fabs(numeric)}));
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max relative error %.3e over 50 trials", worst);
    return {worst < 1e-4, detail};
}

// 3. One hand-derived Adam step matches the implementation to 1e-12.
CriterionResult adam_unit_oracle() {
    NetworkParams params;
    params.layers.resize(1);
    params.layers[0].weights = Matrix(1, 1, {0.0});
    params.layers[0].bias = {0.0};
    NetworkParams grads = params;
    grads.layers[0].weights.data[0] = 1.0;

    AdamConfig config;  // lr 1e-3, beta1 0.9, beta2 0.999, eps 1e-7
    AdamState state = AdamState::init(params, config);
    adam_step(params, grads, state);

    // After one step: m-hat = v-hat = 1, so w = -lr / (1 + eps).
    const double expected = -1e-3 / (1.0 + 1e-7);
    const double got = params.layers[0].weights.data[0];
    char detail[96];
    std::snprintf(detail, sizeof(detail), "|w - expected| = %.3e", std::fabs(got - expected));
    return {std::fabs(got - expected) < 1e-12 && state.step == 1, detail};
}

// 4. Augmentation is a within-record permutation scaled by 100, counts
// are balanced, and shuffling preserves the multiset.
CriterionResult augmentation_faithfulness() {
    const auto records = grid_records(2);
    const auto dataset = AsnnDataset::ingest_records(records);
    AugmentConfig cfg;
    cfg.target_size = 10000;
    cfg.seed = 99;
    const auto samples = dataset.augment(cfg);
    if (samples.size() != 10000) return {false, "wrong sample count"};

    std::map<std::vector<double>, int> counts;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& record = records[i % records.size()];
        std::vector<double> expected(10);
        for (std::size_t j = 0; j < 10; ++j) expected[j] = record.accuracies[j] * 100.0;
        std::vector<double> input = samples[i].input;
        std::sort(input.begin(), input.end());
        std::sort(expected.begin(), expected.end());
        if (input != expected) return {false, "input is not a permutation of its source"};
        counts[samples[i].target] += 1;
    }
    for (const auto& [target, count] : counts) {
        if (count != 400) return {false, "per-record counts are not 400"};
    }

    const auto shuffled = shuffle_samples(samples, 7);
    auto key = [](const AsnnSample& s) {
        std::vector<double> k = s.input;
        k.insert(k.end(), s.target.begin(), s.target.end());
        return k;
    };
    std::vector<std::vector<double>> before, after;
    for (const auto& s : samples) before.push_back(key(s));
    for (const auto& s : shuffled) after.push_back(key(s));
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    if (before != after) return {false, "shuffle changed the sample multiset"};

    return {true, "10000 samples, 400 per record, multisets preserved"};
}

// 5. Default-configuration training recovers constant targets.
CriterionResult asnn_sanity() {
    std::ostringstream detail;
    bool ok = true;
    for (double target : {16.0, 256.0}) {
        std::vector<AsnnSample> samples(200);
        for (auto& s : samples) {
            s.input.assign(10, 100.0);
            s.target = {target, target};
        }
        AsnnConfig cfg;  // defaults: [64,64], 200 epochs, batch 64, lr 1e-3
        cfg.seed = 2024;
        const AsnnModel model = train_asnn(samples, cfg);
        const auto prediction = predict(model, canonical_query(10));
        const double err = std::max(std::fabs(prediction[0] - target),
                                    std::fabs(prediction[1] - target));
        detail << "target " << target << ": max err " << err << "  ";
        ok = ok && err <= 0.5;
    }
    return {ok, detail.str()};
}

// 6. Oracle end-to-end: 20 seeded searches of 10 iterations each against
// the noisy 2-layer oracle; the median of the final best means must
// reach the grid's top band. The random baseline runs under the same
// budget and the curves are written out; no winner is asserted.
CriterionResult oracle_end_to_end(const std::string& out_dir) {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));

    // Brute-force sweep of the zero-noise response surface over the
    // integer hull; the 0.9825 threshold sits inside its top band.
    const TabularOracle quiet = TabularOracle::from_records(records, 0.0);
    double sweep_max = 0.0;
    for (int w1 = 16; w1 <= 256; ++w1) {
        for (int w2 = 16; w2 <= 256; ++w2) {
            sweep_max = std::max(sweep_max, quiet.interpolate({double(w1), double(w2)}).mean);
        }
    }
    constexpr double kThreshold = 0.9825;
    if (kThreshold > sweep_max) return {false, "threshold exceeds the response surface"};

    LoopConfig loop;
    loop.max_iterations = 10;
    loop.trials_per_eval = 10;
    loop.augment.target_size = 10000;
    // Compact regressor sized for single-digit-second retraining; the
    // higher learning rate is what lets the width to accuracy slope
    // emerge from inputs whose common level dwarfs their variation.
    loop.asnn.hidden_widths = {8, 8};
    loop.asnn.epochs = 800;
    loop.asnn.batch_size = 64;
    loop.asnn.learning_rate = 0.02;
    loop.seed = 20250807;

    StrategyConfig suggest;
    suggest.name = "asnn";
    suggest.kind = StrategyConfig::Kind::Asnn;
    suggest.loop = loop;
    suggest.initial_records = records;

    StrategyConfig random;
    random.name = "random";
    random.kind = StrategyConfig::Kind::Random;
    random.loop = loop;
    random.range = WidthRange{16, 256, true};
    random.depth = 2;

    const std::size_t n_seeds = 20;
    const auto report = compare_strategies({suggest, random}, n_seeds, backend);
    write_comparison_csv(report, out_dir + "/comparison.csv");
    write_comparison_summary_csv(report, out_dir + "/comparison_summary.csv");

    std::vector<double> finals;
    std::size_t monotone = 0;
    for (const auto& row : report.rows) {
        if (row.strategy != "asnn") continue;
        if (row.iteration == loop.max_iterations - 1) finals.push_back(row.best_so_far);
        if (row.iteration == 0 && row.arch.widths()[0] >= 128) ++monotone;
    }
    if (finals.size() != n_seeds) return {false, "missing per-seed results"};
    std::sort(finals.begin(), finals.end());
    const double median = 0.5 * (finals[n_seeds / 2 - 1] + finals[n_seeds / 2]);

    char detail[240];
    std::snprintf(detail, sizeof(detail),
                  "median best %.5f (threshold %.4f, surface max %.5f); "
                  "first-round width >= 128 in %zu/%zu seeds; curves in %s",
                  median, kThreshold, sweep_max, monotone, n_seeds, out_dir.c_str());
    return {median >= kThreshold, detail};
}

// 7. Desk-budget real training on the separable synthetic task.
CriterionResult desk_scale_smoke() {
    SyntheticSpec spec;  // defaults: 10 classes, dim 64, 12000/2000, margin 6
    const LabeledDataset data = make_synthetic(7, spec);
    const TrialResult result = run_trials(Architecture({64, 32}), data, EvalBudget::desk(), 11);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "mean accuracy %.4f over %zu trials", result.mean,
                  result.accuracies.size());
    return {result.mean >= 0.95, detail};
}

// 8. The full-budget path exists and is documented; the published
// absolute MNIST accuracies are out of scope for this suite.
CriterionResult paper_budget_documented() {
    const EvalBudget budget = EvalBudget::paper();
    const bool ok = budget.trials == 10 && budget.epochs == 50 && !budget.train_subset &&
                    !budget.test_subset;
    return {ok,
            "full budget preset = 10 trials x 50 epochs on the full set; absolute MNIST "
            "accuracies (e.g. 0.98363 for 448x65) need that budget plus the real dataset "
            "and are not asserted here -- see README for the --budget paper procedure"};
}

// 9. Re-running every subcommand with the same seed and output directory
// reproduces byte-identical files.
CriterionResult determinism(const std::string& scratch) {
    const std::string cli = ASNN_CLI_PATH;
    const std::string out = scratch + "/det";
    const std::string log = scratch + "/cli.log";

    // A tiny explicit budget so collect-grid runs in seconds.
    const std::string cfg_path = scratch + "/tiny.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"budget": {"trials": 1, "epochs": 1, "batch_size": 32},)"
            << R"( "dataset": {"synthetic": {"classes": 2, "dim": 4, "n_train": 96,)"
            << R"( "n_test": 48, "margin": 6.0}}, "node_set": [4, 8]})";
    }

    const std::vector<std::string> commands = {
        " verify-tables --seed 3 --out " + out,
        " collect-grid --config " + cfg_path + " --backend real --seed 3 --out " + out,
        " search-asnn --backend oracle --iterations 2 --asnn-hidden 4 --asnn-epochs 2"
        " --augment-size 300 --seed 3 --dump-samples --save-model --out " + out,
        " search-random --backend oracle --iterations 3 --seed 3 --out " + out,
        " compare --backend oracle --iterations 2 --compare-seeds 2 --asnn-hidden 4"
        " --asnn-epochs 2 --augment-size 300 --seed 3 --out " + out,
    };

    auto snapshot = [&]() {
        std::map<std::string, std::string> files;
        for (const auto& entry : fs::directory_iterator(out)) {
            std::ifstream in(entry.path(), std::ios::binary);
            files[entry.path().filename().string()] =
                std::string((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        }
        return files;
    };

    std::size_t files_checked = 0;
    for (const auto& command : commands) {
        fs::remove_all(out);
        const std::string full = cli + command + " >> " + log + " 2>&1";
        if (std::system(full.c_str()) != 0) return {false, "command failed:" + command};
        const auto first = snapshot();
        if (std::system(full.c_str()) != 0) return {false, "rerun failed:" + command};
        const auto second = snapshot();
        if (first != second) return {false, "outputs differ for" + command};
        if (first.empty()) return {false, "no outputs for" + command};
        files_checked += first.size();
    }

    // Exit-code contract: 1 for configuration errors, 2 for data errors.
    auto exit_code = [&](const std::string& args) {
        const int status = std::system((cli + args + " >> " + log + " 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    if (exit_code(" search-asnn --backend real --out " + out) != 1) {
        return {false, "missing dataset should exit 1"};
    }
    if (exit_code(" search-asnn --initial-csv /nonexistent.csv --out " + out) != 2) {
        return {false, "missing records file should exit 2"};
    }

    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "%zu files byte-identical across reruns; exit codes 1/2 as specified",
                  files_checked);
    return {true, detail};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    const std::string scratch =
        (fs::temp_directory_path() / ("asnn_acceptance_" + std::to_string(::getpid()))).string();
    fs::create_directories(scratch);
    // The comparison curves are a deliverable; they land next to the
    // test binary rather than in the scratch directory.
    const std::string artifacts = "acceptance_artifacts";
    fs::create_directories(artifacts);

    struct Criterion {
        int number;
        const char* name;
        double time_bound_s;
        std::function<CriterionResult()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "table-integrity", 1.0, [] { return table_integrity(); }},
        {2, "gradient-correctness", 30.0, [] { return gradient_correctness(); }},
        {3, "adam-unit-oracle", 30.0, [] { return adam_unit_oracle(); }},
        {4, "augmentation-faithfulness", 5.0, [] { return augmentation_faithfulness(); }},
        {5, "asnn-sanity", 60.0, [] { return asnn_sanity(); }},
        {6, "oracle-end-to-end", 300.0, [&] { return oracle_end_to_end(artifacts); }},
        {7, "desk-scale-smoke", 120.0, [] { return desk_scale_smoke(); }},
        {8, "paper-budget-documented", 30.0, [] { return paper_budget_documented(); }},
        {9, "determinism", 600.0, [&] { return determinism(scratch); }},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.number != only) continue;
        const auto start = Clock::now();
        CriterionResult result;
        try {
            result = criterion.run();
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = elapsed <= criterion.time_bound_s;
        const bool pass = result.ok && in_time;
        std::printf("[%s] %d. %s: %s (%.1f s, bound %.0f s%s)\n", pass ? "PASS" : "FAIL",
                    criterion.number, criterion.name, result.detail.c_str(), elapsed,
                    criterion.time_bound_s,
                    result.ok && !in_time ? ", exceeded time bound" : "");
        std::fflush(stdout);
        if (!pass) ++failures;
    }

    fs::remove_all(scratch);
    return failures;
}
