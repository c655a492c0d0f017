#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "asnn/data.hpp"
#include "asnn/search_loop.hpp"
#include "asnn/target_task.hpp"

// Run configuration for the CLI: JSON file and/or flags, parsed strictly
// (unknown keys are rejected, missing required fields are named). The
// effective configuration is echoed to the output directory and parsing
// that echo reproduces an equal RunConfig.

namespace asnn {

enum class RunMode { CollectGrid, AsnnSearch, RandomSearch, Compare, VerifyTables };

std::string run_mode_name(RunMode mode);
RunMode run_mode_from_name(const std::string& name);

struct DatasetConfig {
    enum class Source { None, Mnist, Synthetic };
    Source source = Source::None;
    std::string mnist_dir;    // either a directory...
    MnistPaths mnist_paths;   // ...or four explicit paths
    SyntheticSpec synthetic;

    bool operator==(const DatasetConfig&) const = default;
};

struct InitialRecordsConfig {
    enum class Source { Tables, Csv };
    Source source = Source::Tables;
    std::string csv_path;

    bool operator==(const InitialRecordsConfig&) const = default;
};

struct RunConfig {
    RunMode mode = RunMode::VerifyTables;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    BackendKind backend = BackendKind::TabularOracle;
    std::size_t depth = 2;
    EvalBudget budget = EvalBudget::desk();
    DatasetConfig dataset;
    std::vector<int> node_set{16, 32, 64, 128, 256};
    std::size_t max_iterations = 5;
    std::optional<double> target_mean_accuracy;
    std::size_t augment_size = 10000;
    AsnnConfig asnn;
    WidthBounds bounds;
    WidthRange random_range;
    double oracle_noise_scale = 1.0;
    InitialRecordsConfig initial_records;
    std::size_t compare_seeds = 5;

    // The search-loop view of this configuration (trials come from the
    // budget, the loop seed from the top-level seed).
    LoopConfig loop_config() const;

    bool operator==(const RunConfig&) const = default;
};

// Strict parse; throws ConfigError on unknown keys, missing required
// fields, conflicting dataset sources, or mode-specific violations.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config_file(const std::string& path);

nlohmann::json run_config_to_json(const RunConfig& config);

// Writes the fully-resolved configuration to <out_dir>/config.json.
void write_config_echo(const RunConfig& config);

// Loads the initial suggestion-dataset records named by the config
// (bundled grid of the configured depth, or a grid CSV).
std::vector<ArchRecord> load_initial_records(const RunConfig& config);

// Materialises the dataset named by the config; throws ConfigError when
// none is configured.
LabeledDataset load_dataset(const RunConfig& config);

}  // namespace asnn
