#include "asnn/asnn_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

std::vector<double> canonical_query(std::size_t length) {
    return std::vector<double>(length, 100.0);
}

AsnnModel train_asnn(const std::vector<AsnnSample>& samples, const AsnnConfig& cfg) {
    if (samples.size() < 100) {
        throw std::invalid_argument("train_asnn: at least 100 samples required");
    }
    const std::size_t input_dim = samples.front().input.size();
    const std::size_t output_dim = samples.front().target.size();
    for (const auto& sample : samples) {
        if (sample.input.size() != input_dim || sample.target.size() != output_dim) {
            throw std::invalid_argument("train_asnn: inconsistent sample dimensions");
        }
    }

    Matrix inputs(samples.size(), input_dim);
    Matrix targets(samples.size(), output_dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].input.begin(), samples[i].input.end(), inputs.row_ptr(i));
        std::copy(samples[i].target.begin(), samples[i].target.end(), targets.row_ptr(i));
    }

    AsnnModel model;
    model.spec.input_dim = input_dim;
    model.spec.hidden_widths = cfg.hidden_widths;
    model.spec.dropout_rates.assign(cfg.hidden_widths.size(), 0.0);
    model.spec.output_dim = output_dim;
    model.spec.output_head = OutputHead::MeanSquaredError;
    model.spec.validate();

    TrainSettings settings;
    settings.epochs = cfg.epochs;
    settings.batch_size = cfg.batch_size;
    settings.seed = cfg.seed;

    AdamConfig adam;
    adam.learning_rate = cfg.learning_rate;

    model.params = train(model.spec, inputs, targets, settings, adam);
    model.final_training_loss = dataset_loss(model.params, model.spec, inputs, targets);
    return model;
}

std::vector<double> predict(const AsnnModel& model, const std::vector<double>& query) {
    if (query.size() != model.spec.input_dim) {
        throw std::invalid_argument("predict: query length does not match the model input");
    }
    Matrix batch(1, query.size());
    std::copy(query.begin(), query.end(), batch.row_ptr(0));
    const Matrix out = forward(model.params, model.spec, batch, eval_mode()).output;
    return std::vector<double>(out.data.begin(), out.data.end());
}

Architecture quantize(const std::vector<double>& prediction, const WidthBounds& bounds) {
    if (bounds.min_width < Architecture::kMinWidth || bounds.max_width > Architecture::kMaxWidth ||
        bounds.min_width > bounds.max_width) {
        throw std::invalid_argument("quantize: invalid width bounds");
    }
    std::vector<int> widths;
    widths.reserve(prediction.size());
    for (double value : prediction) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("quantize: non-finite prediction component");
        }
        const double rounded = std::round(value);  // half away from zero
        const double clamped = std::clamp(rounded, static_cast<double>(bounds.min_width),
                                          static_cast<double>(bounds.max_width));
        widths.push_back(static_cast<int>(clamped));
    }
    return Architecture(std::move(widths));
}

void save_model(const AsnnModel& model, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = "asnn-model";
    doc["version"] = kCheckpointVersion;
    doc["input_dim"] = model.spec.input_dim;
    doc["hidden_widths"] = model.spec.hidden_widths;
    doc["output_dim"] = model.spec.output_dim;
    doc["final_training_loss"] = model.final_training_loss;

    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.params.layers) {
        nlohmann::json l;
        l["rows"] = layer.weights.rows;
        l["cols"] = layer.weights.cols;
        l["weights"] = layer.weights.data;
        l["bias"] = layer.bias;
        layers.push_back(std::move(l));
    }
    doc["layers"] = std::move(layers);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model checkpoint: " + path);
    out << doc.dump(2) << "\n";
}

AsnnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read model checkpoint: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model checkpoint: " + std::string(e.what()));
    }

    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kCheckpointVersion) {
        throw DataError("unsupported model checkpoint version");
    }

    AsnnModel model;
    model.spec.input_dim = doc.at("input_dim").get<std::size_t>();
    model.spec.hidden_widths = doc.at("hidden_widths").get<std::vector<std::size_t>>();
    model.spec.dropout_rates.assign(model.spec.hidden_widths.size(), 0.0);
    model.spec.output_dim = doc.at("output_dim").get<std::size_t>();
    model.spec.output_head = OutputHead::MeanSquaredError;
    model.final_training_loss = doc.at("final_training_loss").get<double>();

    for (const auto& l : doc.at("layers")) {
        DenseLayer layer;
        layer.weights = Matrix(l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>(),
                               l.at("weights").get<std::vector<double>>());
        layer.bias = l.at("bias").get<std::vector<double>>();
        model.params.layers.push_back(std::move(layer));
    }

    model.spec.validate();
    if (model.params.layers.size() != model.spec.layer_count()) {
        throw DataError("model checkpoint layer count does not match its shape");
    }
    return model;
}

}  // namespace asnn
