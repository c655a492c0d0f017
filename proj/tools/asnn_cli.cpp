#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asnn/errors.hpp"
#include "asnn/io.hpp"
#include "asnn/run_config.hpp"
#include "asnn/search_loop.hpp"
#include "asnn/tables.hpp"

namespace {

using nlohmann::json;

// Flag values collected by CLI11; only flags the user actually passed
// are merged over the config file.
struct FlagValues {
    bool dump_samples = false;
    bool save_model = false;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> backend;
    std::optional<std::string> budget;
    std::optional<std::size_t> depth;
    std::optional<std::string> node_set;
    std::optional<std::size_t> iterations;
    std::optional<double> target;
    std::optional<std::size_t> augment_size;
    std::optional<std::size_t> asnn_epochs;
    std::optional<std::string> asnn_hidden;
    std::optional<std::size_t> asnn_batch;
    std::optional<double> asnn_lr;
    std::optional<int> min_width;
    std::optional<int> max_width;
    std::optional<bool> log_uniform;
    std::optional<double> noise_scale;
    std::optional<std::string> initial_csv;
    std::optional<std::size_t> compare_seeds;
    std::optional<std::string> mnist_dir;
    bool synthetic = false;
    std::optional<std::size_t> classes;
    std::optional<std::size_t> dim;
    std::optional<std::size_t> n_train;
    std::optional<std::size_t> n_test;
    std::optional<double> margin;
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::istringstream stream(text);
    std::string piece;
    while (std::getline(stream, piece, ',')) {
        if (!piece.empty()) values.push_back(std::stoi(piece));
    }
    if (values.empty()) throw asnn::ConfigError("empty list: '" + text + "'");
    return values;
}

json flags_to_patch(const std::string& mode, const FlagValues& flags) {
    json patch;
    patch["mode"] = mode;
    if (flags.seed) patch["seed"] = *flags.seed;
    if (flags.out_dir) patch["out_dir"] = *flags.out_dir;
    if (flags.backend) patch["backend"] = *flags.backend;
    if (flags.budget) patch["budget"] = *flags.budget;
    if (flags.depth) patch["depth"] = *flags.depth;
    if (flags.node_set) patch["node_set"] = parse_int_list(*flags.node_set);
    if (flags.iterations) patch["loop"]["max_iterations"] = *flags.iterations;
    if (flags.target) patch["loop"]["target_mean_accuracy"] = *flags.target;
    if (flags.augment_size) patch["loop"]["augment_size"] = *flags.augment_size;
    if (flags.asnn_epochs) patch["loop"]["asnn"]["epochs"] = *flags.asnn_epochs;
    if (flags.asnn_hidden) {
        const auto widths = parse_int_list(*flags.asnn_hidden);
        patch["loop"]["asnn"]["hidden_widths"] =
            std::vector<std::size_t>(widths.begin(), widths.end());
    }
    if (flags.asnn_batch) patch["loop"]["asnn"]["batch_size"] = *flags.asnn_batch;
    if (flags.asnn_lr) patch["loop"]["asnn"]["learning_rate"] = *flags.asnn_lr;
    if (flags.min_width) patch["random"]["min_width"] = *flags.min_width;
    if (flags.max_width) patch["random"]["max_width"] = *flags.max_width;
    if (flags.log_uniform) patch["random"]["log_uniform"] = *flags.log_uniform;
    if (flags.noise_scale) patch["oracle"]["noise_scale"] = *flags.noise_scale;
    if (flags.initial_csv) {
        patch["initial_records"]["source"] = "csv";
        patch["initial_records"]["path"] = *flags.initial_csv;
    }
    if (flags.compare_seeds) patch["compare_seeds"] = *flags.compare_seeds;
    if (flags.mnist_dir) patch["dataset"]["mnist"]["dir"] = *flags.mnist_dir;
    if (flags.synthetic) {
        json synthetic = json::object();
        if (flags.classes) synthetic["classes"] = *flags.classes;
        if (flags.dim) synthetic["dim"] = *flags.dim;
        if (flags.n_train) synthetic["n_train"] = *flags.n_train;
        if (flags.n_test) synthetic["n_test"] = *flags.n_test;
        if (flags.margin) synthetic["margin"] = *flags.margin;
        patch["dataset"]["synthetic"] = std::move(synthetic);
    }
    return patch;
}

asnn::RunConfig resolve_config(const std::string& mode, const FlagValues& flags) {
    json doc = json::object();
    if (flags.config_path) {
        std::ifstream in(*flags.config_path);
        if (!in) throw asnn::ConfigError("cannot read config file: " + *flags.config_path);
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw asnn::ConfigError("malformed config file: " + std::string(e.what()));
        }
    }
    doc.merge_patch(flags_to_patch(mode, flags));
    return asnn::parse_run_config(doc);
}

std::unique_ptr<asnn::EvalBackend> build_backend(const asnn::RunConfig& config,
                                                 std::optional<asnn::LabeledDataset>& dataset) {
    if (config.backend == asnn::BackendKind::TabularOracle) {
        std::vector<asnn::ArchRecord> records;
        for (const auto& trial : asnn::grid_to_trials(asnn::embedded_grid(config.depth))) {
            records.push_back(asnn::ArchRecord::from_trial(trial));
        }
        return std::make_unique<asnn::OracleBackend>(
            asnn::TabularOracle::from_records(records, config.oracle_noise_scale));
    }
    dataset = asnn::load_dataset(config);
    return std::make_unique<asnn::TrainerBackend>(*dataset, config.budget);
}

int run_verify_tables(const asnn::RunConfig& config) {
    const auto report = asnn::verify_embedded_tables();
    const std::string text = asnn::format_verification(report);
    std::ofstream out(config.out_dir + "/verify_report.txt");
    out << text;
    std::cout << text;
    return report.ok() ? 0 : 2;
}

int run_collect_grid(const asnn::RunConfig& config) {
    const auto dataset = asnn::load_dataset(config);
    const auto results = asnn::collect_grid(config.node_set, config.depth, dataset,
                                            config.budget, config.seed);
    asnn::write_grid_csv(results, config.out_dir + "/grid.csv");
    std::cout << "evaluated " << results.size() << " architectures -> " << config.out_dir
              << "/grid.csv\n";
    return 0;
}

void print_search_summary(const std::vector<asnn::IterationLog>& logs,
                          const asnn::RunConfig& config) {
    if (logs.empty()) {
        std::cout << "target already met by the initial records; nothing evaluated\n";
        return;
    }
    for (const auto& log : logs) {
        char line[160];
        std::snprintf(line, sizeof(line), "iter %zu: arch %s mean %.5f best %.5f\n",
                      log.iteration, asnn::format_arch(log.arch).c_str(), log.trial.mean,
                      log.best_so_far);
        std::cout << line;
    }
    const auto& best = *std::max_element(
        logs.begin(), logs.end(),
        [](const auto& a, const auto& b) { return a.trial.mean < b.trial.mean; });
    char line[160];
    std::snprintf(line, sizeof(line), "final architecture: %s (mean %.5f)\n",
                  asnn::format_arch(best.arch).c_str(), best.trial.mean);
    std::cout << line << "run log: " << config.out_dir << "/run_log.jsonl\n";
}

std::vector<asnn::ArchRecord> load_checked_initial_records(const asnn::RunConfig& config) {
    auto initial = asnn::load_initial_records(config);
    if (!initial.empty() && initial.front().accuracies.size() != config.budget.trials) {
        throw asnn::ConfigError(
            "initial records carry " + std::to_string(initial.front().accuracies.size()) +
            " trials per record but the budget evaluates " +
            std::to_string(config.budget.trials) + "; they must match");
    }
    return initial;
}

int run_search_asnn(const asnn::RunConfig& config, bool dump_samples, bool save_model_file) {
    std::optional<asnn::LabeledDataset> dataset;
    const auto backend = build_backend(config, dataset);
    const auto initial = load_checked_initial_records(config);
    const auto logs = asnn::run_asnn_search(config.loop_config(), initial, *backend);
    asnn::write_run_log_jsonl(logs, config.out_dir + "/run_log.jsonl");

    std::vector<asnn::ArchRecord> final_records = initial;
    for (const auto& log : logs) {
        final_records.push_back(asnn::ArchRecord::from_trial(log.trial));
    }
    asnn::write_grid_csv(final_records, config.out_dir + "/final_dataset.csv");

    if (dump_samples || save_model_file) {
        // Debug artifacts: the augmented view of the final dataset and a
        // suggestion model trained on it.
        auto final_dataset = asnn::AsnnDataset::ingest_records(final_records);
        asnn::AugmentConfig augment;
        augment.target_size = config.augment_size;
        augment.seed = config.seed;
        const auto samples =
            asnn::shuffle_samples(final_dataset.augment(augment), config.seed);
        if (dump_samples) {
            asnn::write_samples_csv(samples, config.out_dir + "/samples.csv");
        }
        if (save_model_file) {
            asnn::AsnnConfig asnn_cfg = config.asnn;
            asnn_cfg.seed = config.seed;
            asnn::save_model(asnn::train_asnn(samples, asnn_cfg),
                             config.out_dir + "/model.json");
        }
    }
    print_search_summary(logs, config);
    return 0;
}

int run_search_random(const asnn::RunConfig& config) {
    std::optional<asnn::LabeledDataset> dataset;
    const auto backend = build_backend(config, dataset);
    const auto logs = asnn::run_random_search(config.loop_config(), config.random_range,
                                              config.depth, *backend);
    asnn::write_run_log_jsonl(logs, config.out_dir + "/run_log.jsonl");
    print_search_summary(logs, config);
    return 0;
}

int run_compare(const asnn::RunConfig& config) {
    std::optional<asnn::LabeledDataset> dataset;
    const auto backend = build_backend(config, dataset);

    asnn::StrategyConfig suggest;
    suggest.name = "asnn";
    suggest.kind = asnn::StrategyConfig::Kind::Asnn;
    suggest.loop = config.loop_config();
    suggest.initial_records = load_checked_initial_records(config);

    asnn::StrategyConfig random;
    random.name = "random";
    random.kind = asnn::StrategyConfig::Kind::Random;
    random.loop = config.loop_config();
    random.range = config.random_range;
    random.depth = config.depth;

    const auto report =
        asnn::compare_strategies({suggest, random}, config.compare_seeds, *backend);
    asnn::write_comparison_csv(report, config.out_dir + "/comparison.csv");
    asnn::write_comparison_summary_csv(report, config.out_dir + "/comparison_summary.csv");

    for (const auto& [strategy, medians] : report.median_best_so_far) {
        if (medians.empty()) continue;
        char line[160];
        std::snprintf(line, sizeof(line), "%s: median best after %zu iterations = %.5f\n",
                      strategy.c_str(), medians.size(), medians.back());
        std::cout << line;
    }
    std::cout << "curves: " << config.out_dir << "/comparison.csv\n";
    return 0;
}

int dispatch(const asnn::RunConfig& config, bool dump_samples, bool save_model_file) {
    try {
        std::filesystem::create_directories(config.out_dir);
        asnn::write_config_echo(config);
    } catch (const std::exception& e) {
        throw asnn::ConfigError("output directory not writable: " + config.out_dir);
    }
    switch (config.mode) {
        case asnn::RunMode::VerifyTables: return run_verify_tables(config);
        case asnn::RunMode::CollectGrid: return run_collect_grid(config);
        case asnn::RunMode::AsnnSearch:
            return run_search_asnn(config, dump_samples, save_model_file);
        case asnn::RunMode::RandomSearch: return run_search_random(config);
        case asnn::RunMode::Compare: return run_compare(config);
    }
    return 3;
}

void add_common_flags(CLI::App* cmd, FlagValues& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override it");
    cmd->add_option("--seed", flags.seed, "base seed for the run");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--backend", flags.backend, "evaluation backend: real or oracle");
    cmd->add_option("--budget", flags.budget, "evaluation budget preset: desk or paper");
    cmd->add_option("--depth", flags.depth, "architecture depth (2 or 3)");
}

void add_dataset_flags(CLI::App* cmd, FlagValues& flags) {
    cmd->add_option("--mnist-dir", flags.mnist_dir, "directory with the four IDX files");
    cmd->add_flag("--synthetic", flags.synthetic, "use the synthetic blob dataset");
    cmd->add_option("--classes", flags.classes, "synthetic: number of classes");
    cmd->add_option("--dim", flags.dim, "synthetic: input dimension");
    cmd->add_option("--n-train", flags.n_train, "synthetic: training samples");
    cmd->add_option("--n-test", flags.n_test, "synthetic: test samples");
    cmd->add_option("--margin", flags.margin, "synthetic: class separation");
}

void add_loop_flags(CLI::App* cmd, FlagValues& flags) {
    cmd->add_option("--iterations", flags.iterations, "maximum search iterations");
    cmd->add_option("--target", flags.target, "stop when this mean accuracy is reached");
    cmd->add_option("--augment-size", flags.augment_size, "augmented dataset size");
    cmd->add_option("--asnn-epochs", flags.asnn_epochs, "suggestion network epochs");
    cmd->add_option("--asnn-hidden", flags.asnn_hidden, "suggestion network widths, e.g. 64,64");
    cmd->add_option("--asnn-batch", flags.asnn_batch, "suggestion network batch size");
    cmd->add_option("--asnn-lr", flags.asnn_lr, "suggestion network learning rate");
    cmd->add_option("--noise-scale", flags.noise_scale, "oracle noise multiplier (0 = none)");
    cmd->add_option("--initial-csv", flags.initial_csv, "grid CSV with the initial records");
}

void add_random_flags(CLI::App* cmd, FlagValues& flags) {
    cmd->add_option("--min-width", flags.min_width, "random search: minimum width");
    cmd->add_option("--max-width", flags.max_width, "random search: maximum width");
    cmd->add_option("--log-uniform", flags.log_uniform, "random search: log-uniform widths");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accuracy-to-architecture suggestion search"};
    app.require_subcommand(1);

    FlagValues flags;
    std::string mode;

    auto* verify = app.add_subcommand("verify-tables", "recompute the bundled grid means");
    add_common_flags(verify, flags);
    verify->callback([&] { mode = "verify-tables"; });

    auto* collect = app.add_subcommand("collect-grid", "evaluate a width grid with the trainer");
    add_common_flags(collect, flags);
    add_dataset_flags(collect, flags);
    collect->add_option("--node-set", flags.node_set, "widths per layer, e.g. 16,32,64");
    collect->callback([&] { mode = "collect-grid"; });

    auto* search = app.add_subcommand("search-asnn", "run the iterative suggestion search");
    add_common_flags(search, flags);
    add_dataset_flags(search, flags);
    add_loop_flags(search, flags);
    search->add_flag("--dump-samples", flags.dump_samples,
                     "write the augmented sample view of the final dataset");
    search->add_flag("--save-model", flags.save_model,
                     "train and save a suggestion model on the final dataset");
    search->callback([&] { mode = "search-asnn"; });

    auto* random = app.add_subcommand("search-random", "run the random-search baseline");
    add_common_flags(random, flags);
    add_dataset_flags(random, flags);
    add_loop_flags(random, flags);
    add_random_flags(random, flags);
    random->callback([&] { mode = "search-random"; });

    auto* compare = app.add_subcommand("compare", "suggestion search vs random, many seeds");
    add_common_flags(compare, flags);
    add_dataset_flags(compare, flags);
    add_loop_flags(compare, flags);
    add_random_flags(compare, flags);
    compare->add_option("--compare-seeds", flags.compare_seeds, "independent seeds per strategy");
    compare->callback([&] { mode = "compare"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return dispatch(resolve_config(mode, flags), flags.dump_samples, flags.save_model);
    } catch (const asnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const asnn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
