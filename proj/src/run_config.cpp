#include "asnn/run_config.hpp"

#include <filesystem>
#include <fstream>

#include "asnn/errors.hpp"
#include "asnn/io.hpp"
#include "asnn/tables.hpp"

namespace asnn {

namespace {

void check_keys(const nlohmann::json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown key '" + key + "' in " + context);
        }
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("invalid value for '") + key + "'");
    }
}

EvalBudget parse_budget(const nlohmann::json& value) {
    if (value.is_string()) {
        const std::string name = value.get<std::string>();
        if (name == "desk") return EvalBudget::desk();
        if (name == "paper") return EvalBudget::paper();
        throw ConfigError("unknown budget preset '" + name + "' (use desk or paper)");
    }
    if (!value.is_object()) throw ConfigError("budget must be a preset name or an object");
    check_keys(value, "budget", {"trials", "epochs", "train_subset", "test_subset", "batch_size"});
    EvalBudget budget;
    budget.trials = get_or<std::size_t>(value, "trials", 10);
    budget.epochs = get_or<std::size_t>(value, "epochs", 50);
    budget.batch_size = get_or<std::size_t>(value, "batch_size", 32);
    if (value.contains("train_subset") && !value.at("train_subset").is_null()) {
        budget.train_subset = value.at("train_subset").get<std::size_t>();
    }
    if (value.contains("test_subset") && !value.at("test_subset").is_null()) {
        budget.test_subset = value.at("test_subset").get<std::size_t>();
    }
    return budget;
}

DatasetConfig parse_dataset(const nlohmann::json& value) {
    if (!value.is_object()) throw ConfigError("dataset must be an object");
    check_keys(value, "dataset", {"mnist", "synthetic"});
    if (value.contains("mnist") && value.contains("synthetic")) {
        throw ConfigError("conflicting dataset sources: both mnist and synthetic given");
    }

    DatasetConfig dataset;
    if (value.contains("mnist")) {
        const auto& mnist = value.at("mnist");
        check_keys(mnist, "dataset.mnist",
                   {"dir", "train_images", "train_labels", "test_images", "test_labels"});
        dataset.source = DatasetConfig::Source::Mnist;
        const bool has_dir = mnist.contains("dir");
        const bool has_paths = mnist.contains("train_images") || mnist.contains("train_labels") ||
                               mnist.contains("test_images") || mnist.contains("test_labels");
        if (has_dir && has_paths) {
            throw ConfigError("dataset.mnist: give either dir or the four explicit paths");
        }
        if (has_dir) {
            dataset.mnist_dir = mnist.at("dir").get<std::string>();
        } else {
            for (const char* key : {"train_images", "train_labels", "test_images", "test_labels"}) {
                if (!mnist.contains(key)) {
                    throw ConfigError(std::string("dataset.mnist: missing required field: ") + key);
                }
            }
            dataset.mnist_paths.train_images = mnist.at("train_images").get<std::string>();
            dataset.mnist_paths.train_labels = mnist.at("train_labels").get<std::string>();
            dataset.mnist_paths.test_images = mnist.at("test_images").get<std::string>();
            dataset.mnist_paths.test_labels = mnist.at("test_labels").get<std::string>();
        }
    } else if (value.contains("synthetic")) {
        const auto& synthetic = value.at("synthetic");
        check_keys(synthetic, "dataset.synthetic",
                   {"classes", "dim", "n_train", "n_test", "margin"});
        dataset.source = DatasetConfig::Source::Synthetic;
        dataset.synthetic.classes = get_or<std::size_t>(synthetic, "classes", 10);
        dataset.synthetic.dim = get_or<std::size_t>(synthetic, "dim", 64);
        dataset.synthetic.n_train = get_or<std::size_t>(synthetic, "n_train", 12000);
        dataset.synthetic.n_test = get_or<std::size_t>(synthetic, "n_test", 2000);
        dataset.synthetic.margin = get_or<double>(synthetic, "margin", 6.0);
    }
    return dataset;
}

void validate_mode_requirements(const RunConfig& config) {
    const bool needs_dataset =
        config.mode == RunMode::CollectGrid ||
        ((config.mode == RunMode::AsnnSearch || config.mode == RunMode::RandomSearch ||
          config.mode == RunMode::Compare) &&
         config.backend == BackendKind::RealTrainer);
    if (needs_dataset && config.dataset.source == DatasetConfig::Source::None) {
        throw ConfigError("missing required field: dataset (mnist or synthetic) for mode " +
                          run_mode_name(config.mode));
    }
    if (config.mode == RunMode::CollectGrid && config.node_set.empty()) {
        throw ConfigError("missing required field: node_set for mode collect-grid");
    }
    if (config.depth != 2 && config.depth != 3) {
        throw ConfigError("depth must be 2 or 3");
    }
    if ((config.mode == RunMode::AsnnSearch || config.mode == RunMode::Compare) &&
        config.initial_records.source == InitialRecordsConfig::Source::Tables &&
        config.budget.trials != kPaperTrialCount) {
        throw ConfigError(
            "initial records from the bundled grids carry 10 trials per record; "
            "set budget trials to 10 or point initial_records at a matching CSV");
    }
    if (config.oracle_noise_scale < 0.0) {
        throw ConfigError("oracle.noise_scale must be >= 0");
    }
}

}  // namespace

std::string run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::CollectGrid: return "collect-grid";
        case RunMode::AsnnSearch: return "search-asnn";
        case RunMode::RandomSearch: return "search-random";
        case RunMode::Compare: return "compare";
        case RunMode::VerifyTables: return "verify-tables";
    }
    throw std::logic_error("unreachable");
}

RunMode run_mode_from_name(const std::string& name) {
    if (name == "collect-grid") return RunMode::CollectGrid;
    if (name == "search-asnn") return RunMode::AsnnSearch;
    if (name == "search-random") return RunMode::RandomSearch;
    if (name == "compare") return RunMode::Compare;
    if (name == "verify-tables") return RunMode::VerifyTables;
    throw ConfigError("unknown mode '" + name + "'");
}

LoopConfig RunConfig::loop_config() const {
    LoopConfig loop;
    loop.max_iterations = max_iterations;
    loop.target_mean_accuracy = target_mean_accuracy;
    loop.trials_per_eval = budget.trials;
    loop.augment.target_size = augment_size;
    loop.asnn = asnn;
    loop.backend = backend;
    loop.seed = seed;
    loop.bounds = bounds;
    return loop;
}

static RunConfig parse_run_config_impl(const nlohmann::json& doc);

RunConfig parse_run_config(const nlohmann::json& doc) {
    try {
        return parse_run_config_impl(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration value: ") + e.what());
    }
}

static RunConfig parse_run_config_impl(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    check_keys(doc, "configuration",
               {"mode", "seed", "out_dir", "backend", "depth", "budget", "dataset", "node_set",
                "loop", "random", "oracle", "initial_records", "compare_seeds"});

    if (!doc.contains("mode")) throw ConfigError("missing required field: mode");

    RunConfig config;
    config.mode = run_mode_from_name(doc.at("mode").get<std::string>());
    config.seed = get_or<std::uint64_t>(doc, "seed", 0);
    config.out_dir = get_or<std::string>(doc, "out_dir", "out");
    config.depth = get_or<std::size_t>(doc, "depth", 2);

    if (doc.contains("backend")) {
        const std::string backend = doc.at("backend").get<std::string>();
        if (backend == "real") {
            config.backend = BackendKind::RealTrainer;
        } else if (backend == "oracle") {
            config.backend = BackendKind::TabularOracle;
        } else {
            throw ConfigError("unknown backend '" + backend + "' (use real or oracle)");
        }
    }

    if (doc.contains("budget")) {
        config.budget = parse_budget(doc.at("budget"));
    } else if (config.backend == BackendKind::TabularOracle) {
        // The oracle simulates full-budget evaluations, so K defaults to
        // the 10 trials its grid records carry.
        config.budget = EvalBudget::paper();
    }
    if (doc.contains("dataset")) config.dataset = parse_dataset(doc.at("dataset"));
    if (doc.contains("node_set")) config.node_set = doc.at("node_set").get<std::vector<int>>();

    if (doc.contains("loop")) {
        const auto& loop = doc.at("loop");
        check_keys(loop, "loop",
                   {"max_iterations", "target_mean_accuracy", "augment_size", "asnn",
                    "min_width", "max_width"});
        config.max_iterations = get_or<std::size_t>(loop, "max_iterations", 5);
        if (loop.contains("target_mean_accuracy") && !loop.at("target_mean_accuracy").is_null()) {
            config.target_mean_accuracy = loop.at("target_mean_accuracy").get<double>();
        }
        config.augment_size = get_or<std::size_t>(loop, "augment_size", 10000);
        config.bounds.min_width = get_or<int>(loop, "min_width", Architecture::kMinWidth);
        config.bounds.max_width = get_or<int>(loop, "max_width", Architecture::kMaxWidth);
        if (loop.contains("asnn")) {
            const auto& asnn = loop.at("asnn");
            check_keys(asnn, "loop.asnn",
                       {"hidden_widths", "epochs", "batch_size", "learning_rate"});
            config.asnn.hidden_widths =
                get_or<std::vector<std::size_t>>(asnn, "hidden_widths", {64, 64});
            config.asnn.epochs = get_or<std::size_t>(asnn, "epochs", 200);
            config.asnn.batch_size = get_or<std::size_t>(asnn, "batch_size", 64);
            config.asnn.learning_rate = get_or<double>(asnn, "learning_rate", 1e-3);
        }
    }

    if (doc.contains("random")) {
        const auto& random = doc.at("random");
        check_keys(random, "random", {"min_width", "max_width", "log_uniform"});
        config.random_range.min_width = get_or<int>(random, "min_width", 16);
        config.random_range.max_width = get_or<int>(random, "max_width", 256);
        config.random_range.log_uniform = get_or<bool>(random, "log_uniform", true);
    }

    if (doc.contains("oracle")) {
        const auto& oracle = doc.at("oracle");
        check_keys(oracle, "oracle", {"noise_scale"});
        config.oracle_noise_scale = get_or<double>(oracle, "noise_scale", 1.0);
    }

    if (doc.contains("initial_records")) {
        const auto& initial = doc.at("initial_records");
        check_keys(initial, "initial_records", {"source", "path"});
        const std::string source = get_or<std::string>(initial, "source", "tables");
        if (source == "tables") {
            config.initial_records.source = InitialRecordsConfig::Source::Tables;
        } else if (source == "csv") {
            config.initial_records.source = InitialRecordsConfig::Source::Csv;
            if (!initial.contains("path")) {
                throw ConfigError("initial_records: missing required field: path");
            }
            config.initial_records.csv_path = initial.at("path").get<std::string>();
        } else {
            throw ConfigError("initial_records.source must be tables or csv");
        }
    }

    config.compare_seeds = get_or<std::size_t>(doc, "compare_seeds", 5);

    validate_mode_requirements(config);
    return config;
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config file " + path + ": " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    nlohmann::json doc;
    doc["mode"] = run_mode_name(config.mode);
    doc["seed"] = config.seed;
    doc["out_dir"] = config.out_dir;
    doc["backend"] = config.backend == BackendKind::RealTrainer ? "real" : "oracle";
    doc["depth"] = config.depth;

    nlohmann::json budget;
    budget["trials"] = config.budget.trials;
    budget["epochs"] = config.budget.epochs;
    budget["batch_size"] = config.budget.batch_size;
    budget["train_subset"] =
        config.budget.train_subset ? nlohmann::json(*config.budget.train_subset) : nullptr;
    budget["test_subset"] =
        config.budget.test_subset ? nlohmann::json(*config.budget.test_subset) : nullptr;
    doc["budget"] = std::move(budget);

    nlohmann::json dataset = nlohmann::json::object();
    if (config.dataset.source == DatasetConfig::Source::Mnist) {
        nlohmann::json mnist;
        if (!config.dataset.mnist_dir.empty()) {
            mnist["dir"] = config.dataset.mnist_dir;
        } else {
            mnist["train_images"] = config.dataset.mnist_paths.train_images;
            mnist["train_labels"] = config.dataset.mnist_paths.train_labels;
            mnist["test_images"] = config.dataset.mnist_paths.test_images;
            mnist["test_labels"] = config.dataset.mnist_paths.test_labels;
        }
        dataset["mnist"] = std::move(mnist);
    } else if (config.dataset.source == DatasetConfig::Source::Synthetic) {
        nlohmann::json synthetic;
        synthetic["classes"] = config.dataset.synthetic.classes;
        synthetic["dim"] = config.dataset.synthetic.dim;
        synthetic["n_train"] = config.dataset.synthetic.n_train;
        synthetic["n_test"] = config.dataset.synthetic.n_test;
        synthetic["margin"] = config.dataset.synthetic.margin;
        dataset["synthetic"] = std::move(synthetic);
    }
    doc["dataset"] = std::move(dataset);

    doc["node_set"] = config.node_set;

    nlohmann::json loop;
    loop["max_iterations"] = config.max_iterations;
    loop["target_mean_accuracy"] =
        config.target_mean_accuracy ? nlohmann::json(*config.target_mean_accuracy) : nullptr;
    loop["augment_size"] = config.augment_size;
    loop["min_width"] = config.bounds.min_width;
    loop["max_width"] = config.bounds.max_width;
    nlohmann::json asnn;
    asnn["hidden_widths"] = config.asnn.hidden_widths;
    asnn["epochs"] = config.asnn.epochs;
    asnn["batch_size"] = config.asnn.batch_size;
    asnn["learning_rate"] = config.asnn.learning_rate;
    loop["asnn"] = std::move(asnn);
    doc["loop"] = std::move(loop);

    nlohmann::json random;
    random["min_width"] = config.random_range.min_width;
    random["max_width"] = config.random_range.max_width;
    random["log_uniform"] = config.random_range.log_uniform;
    doc["random"] = std::move(random);

    doc["oracle"] = {{"noise_scale", config.oracle_noise_scale}};

    nlohmann::json initial;
    initial["source"] =
        config.initial_records.source == InitialRecordsConfig::Source::Tables ? "tables" : "csv";
    if (config.initial_records.source == InitialRecordsConfig::Source::Csv) {
        initial["path"] = config.initial_records.csv_path;
    }
    doc["initial_records"] = std::move(initial);

    doc["compare_seeds"] = config.compare_seeds;
    return doc;
}

void write_config_echo(const RunConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const std::string path = config.out_dir + "/config.json";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config echo: " + path);
    out << run_config_to_json(config).dump(2) << "\n";
}

std::vector<ArchRecord> load_initial_records(const RunConfig& config) {
    if (config.initial_records.source == InitialRecordsConfig::Source::Csv) {
        return read_grid_csv(config.initial_records.csv_path);
    }
    std::vector<ArchRecord> records;
    for (const auto& trial : grid_to_trials(embedded_grid(config.depth))) {
        records.push_back(ArchRecord::from_trial(trial));
    }
    return records;
}

LabeledDataset load_dataset(const RunConfig& config) {
    switch (config.dataset.source) {
        case DatasetConfig::Source::Mnist:
            return load_mnist_idx(config.dataset.mnist_dir.empty()
                                      ? config.dataset.mnist_paths
                                      : mnist_paths_in_dir(config.dataset.mnist_dir));
        case DatasetConfig::Source::Synthetic:
            return make_synthetic(config.seed, config.dataset.synthetic);
        case DatasetConfig::Source::None:
            break;
    }
    throw ConfigError("no dataset configured");
}

}  // namespace asnn
