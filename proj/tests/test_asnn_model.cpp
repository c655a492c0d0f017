#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "asnn/asnn_model.hpp"
#include "asnn/errors.hpp"

using namespace asnn;

namespace {

std::vector<AsnnSample> constant_samples(std::size_t n, std::vector<double> target) {
    std::vector<AsnnSample> samples(n);
    for (auto& s : samples) {
        s.input.assign(10, 100.0);
        s.target = target;
    }
    return samples;
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() /
            (name + "_" + std::to_string(::getpid())))
        .string();
}

}  // namespace

TEST_CASE("training on a constant dataset recovers the target") {
    const auto samples = constant_samples(200, {16.0, 16.0});
    AsnnConfig cfg;
    cfg.seed = 11;
    const AsnnModel model = train_asnn(samples, cfg);
    const auto prediction = predict(model, canonical_query(10));
    REQUIRE(prediction.size() == 2);
    CHECK(std::fabs(prediction[0] - 16.0) <= 0.5);
    CHECK(std::fabs(prediction[1] - 16.0) <= 0.5);
    CHECK(model.final_training_loss < 1.0);
}

TEST_CASE("training is deterministic and loss improves") {
    auto samples = constant_samples(150, {32.0, 48.0});
    // Mild variation so the fit is not trivial.
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].input[i % 10] = 95.0 + static_cast<double>(i % 5);
    }
    AsnnConfig cfg;
    cfg.seed = 3;
    cfg.epochs = 40;
    const AsnnModel a = train_asnn(samples, cfg);
    const AsnnModel b = train_asnn(samples, cfg);
    CHECK(a.params == b.params);
    CHECK(a.final_training_loss == b.final_training_loss);

    // Loss after training beats the loss of the freshly initialised
    // parameters on the same data.
    Matrix inputs(samples.size(), 10), targets(samples.size(), 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].input.begin(), samples[i].input.end(), inputs.row_ptr(i));
        std::copy(samples[i].target.begin(), samples[i].target.end(), targets.row_ptr(i));
    }
    const NetworkParams fresh = init_params(a.spec, cfg.seed);
    CHECK(a.final_training_loss < dataset_loss(fresh, a.spec, inputs, targets));
}

TEST_CASE("train_asnn validates its inputs") {
    CHECK_THROWS_AS(train_asnn(constant_samples(99, {16.0, 16.0}), AsnnConfig{}),
                    std::invalid_argument);
    auto mixed = constant_samples(150, {16.0, 16.0});
    mixed[7].target = {16.0, 16.0, 16.0};
    CHECK_THROWS_AS(train_asnn(mixed, AsnnConfig{}), std::invalid_argument);
}

TEST_CASE("predict is deterministic and validates the query length") {
    const AsnnModel model = train_asnn(constant_samples(120, {20.0, 24.0}), AsnnConfig{});
    const auto a = predict(model, canonical_query(10));
    const auto b = predict(model, canonical_query(10));
    CHECK(a == b);
    CHECK_THROWS_AS(predict(model, std::vector<double>(9, 100.0)), std::invalid_argument);
}

TEST_CASE("quantize rounds half away from zero and clamps") {
    CHECK(quantize({447.6, 64.5}) == Architecture({448, 65}));
    CHECK(quantize({-3.2, 20.0}) == Architecture({1, 20}));
    CHECK(quantize({339.4, 183.9, 66.2}) == Architecture({339, 184, 66}));
    CHECK(quantize({5000.0, 12.0}) == Architecture({4096, 12}));

    // Idempotent on already-integral values.
    const Architecture once = quantize({17.2, 90.7});
    const std::vector<double> as_reals(once.widths().begin(), once.widths().end());
    CHECK(quantize(as_reals) == once);

    CHECK_THROWS_AS(quantize({std::numeric_limits<double>::quiet_NaN(), 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(quantize({std::numeric_limits<double>::infinity(), 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(quantize({16.0, 16.0}, WidthBounds{10, 100000}), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip and reject version mismatches") {
    const AsnnModel model = train_asnn(constant_samples(120, {20.0, 24.0}), AsnnConfig{});
    const std::string path = temp_file("asnn_model.json");
    save_model(model, path);
    const AsnnModel loaded = load_model(path);
    CHECK(loaded.params == model.params);
    CHECK(loaded.spec.input_dim == model.spec.input_dim);
    CHECK(loaded.spec.hidden_widths == model.spec.hidden_widths);
    CHECK(loaded.final_training_loss == model.final_training_loss);

    // Same prediction after reload.
    CHECK(predict(loaded, canonical_query(10)) == predict(model, canonical_query(10)));

    // Corrupt the version field.
    {
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto pos = text.find("\"version\": 1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 12, "\"version\": 9");
        std::ofstream out(path);
        out << text;
    }
    CHECK_THROWS_AS(load_model(path), DataError);
    CHECK_THROWS_AS(load_model(path + ".missing"), DataError);
    std::filesystem::remove(path);
}
