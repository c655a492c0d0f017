#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asnn/asnn_dataset.hpp"
#include "asnn/network.hpp"
#include "asnn/target_task.hpp"

// The suggestion network itself: a dense regressor from scaled accuracy
// vectors to real-valued architecture widths, trained with the MSE head.
// Querying it with the all-100 vector (accuracy 1.0 after scaling) asks
// for the architecture a perfect score would come from; the prediction
// is rounded to integers to obtain a trainable architecture.

namespace asnn {

struct AsnnConfig {
    std::vector<std::size_t> hidden_widths{64, 64};
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    bool operator==(const AsnnConfig&) const = default;
};

struct AsnnModel {
    NetworkSpec spec;
    NetworkParams params;
    double final_training_loss = 0.0;
};

struct WidthBounds {
    int min_width = Architecture::kMinWidth;
    int max_width = Architecture::kMaxWidth;

    bool operator==(const WidthBounds&) const = default;
};

// All-100 query of the given length.
std::vector<double> canonical_query(std::size_t length);

// Trains the regressor on the supervised pairs. Requires at least 100
// samples with consistent input and target lengths.
AsnnModel train_asnn(const std::vector<AsnnSample>& samples, const AsnnConfig& cfg);

// Single deterministic forward pass in eval mode.
std::vector<double> predict(const AsnnModel& model, const std::vector<double>& query);

// Rounds each component half away from zero, then clamps into bounds.
// Throws std::invalid_argument on non-finite predictions.
Architecture quantize(const std::vector<double>& prediction, const WidthBounds& bounds = {});

// Versioned JSON checkpoint; load rejects unknown versions.
void save_model(const AsnnModel& model, const std::string& path);
AsnnModel load_model(const std::string& path);

}  // namespace asnn
