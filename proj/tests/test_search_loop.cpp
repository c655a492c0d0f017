#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "asnn/errors.hpp"
#include "asnn/search_loop.hpp"
#include "asnn/tables.hpp"

using namespace asnn;

namespace {

std::vector<ArchRecord> grid_records(std::size_t depth) {
    std::vector<ArchRecord> records;
    for (const auto& trial : grid_to_trials(embedded_grid(depth))) {
        records.push_back(ArchRecord::from_trial(trial));
    }
    return records;
}

double grid_mean(std::size_t depth, const std::vector<int>& widths) {
    for (const auto& row : embedded_grid(depth)) {
        if (row.widths == widths) {
            return std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) / 10.0;
        }
    }
    REQUIRE(false);
    return 0.0;
}

// Quick loop configuration: a tiny suggestion network so the loop tests
// stay fast. Quality is covered by the acceptance suite.
LoopConfig fast_loop(std::size_t iterations) {
    LoopConfig cfg;
    cfg.max_iterations = iterations;
    cfg.trials_per_eval = 10;
    cfg.augment.target_size = 500;
    cfg.asnn.hidden_widths = {4};
    cfg.asnn.epochs = 3;
    cfg.asnn.batch_size = 64;
    cfg.seed = 9;
    return cfg;
}

}  // namespace

TEST_CASE("oracle reproduces grid cells exactly when noise is off") {
    const TabularOracle oracle2 = TabularOracle::from_records(grid_records(2), 0.0);
    const TrialResult cell = oracle2.evaluate(Architecture({256, 16}), 10, 77);
    for (double a : cell.accuracies) CHECK(a == doctest::Approx(0.98310).epsilon(1e-12));
    CHECK(cell.mean == doctest::Approx(0.98310).epsilon(1e-12));

    const TabularOracle oracle3 = TabularOracle::from_records(grid_records(3), 0.0);
    const TrialResult cell3 = oracle3.evaluate(Architecture({16, 16, 16}), 5, 1);
    CHECK(cell3.mean == doctest::Approx(0.93763).epsilon(1e-12));

    // Idempotent: same arch, same seed, same result; and seed-free
    // because noise is off.
    const TrialResult again = oracle2.evaluate(Architecture({256, 16}), 10, 12345);
    CHECK(again.accuracies == cell.accuracies);
}

TEST_CASE("off-grid queries interpolate log2-multilinearly") {
    const TabularOracle oracle = TabularOracle::from_records(grid_records(2), 0.0);

    // Independent hand computation: (91, 64) sits between the (64,64)
    // and (128,64) cells; weight = log2(91) - 6.
    const double t = std::log2(91.0) - 6.0;
    const double lo = grid_mean(2, {64, 64});
    const double hi = grid_mean(2, {128, 64});
    const double expected = lo + t * (hi - lo);

    const TrialResult result = oracle.evaluate(Architecture({91, 64}), 4, 3);
    CHECK(result.mean == doctest::Approx(expected).epsilon(1e-12));
    // The log2 midpoint of the two cells is (0.97663 + 0.98025) / 2;
    // an integer-width query lands within a hair of it.
    CHECK(std::fabs(result.mean - 0.97844) < 5e-5);

    // Out-of-hull queries clamp to the boundary.
    const TrialResult clamped = oracle.evaluate(Architecture({448, 65}), 4, 3);
    const TrialResult edge = oracle.evaluate(Architecture({256, 65}), 4, 3);
    CHECK(clamped.mean == edge.mean);

    // Depth mismatch is an error.
    CHECK_THROWS_AS(oracle.evaluate(Architecture({64, 64, 64}), 4, 3), DataError);
}

TEST_CASE("three-layer off-grid queries interpolate the same way") {
    const TabularOracle oracle = TabularOracle::from_records(grid_records(3), 0.0);
    const double t = std::log2(91.0) - 6.0;
    const double lo = grid_mean(3, {64, 64, 32});
    const double hi = grid_mean(3, {128, 64, 32});
    const double expected = lo + t * (hi - lo);
    CHECK(oracle.evaluate(Architecture({91, 64, 32}), 3, 1).mean ==
          doctest::Approx(expected).epsilon(1e-12));

    // Off-grid in two dimensions at once: bilinear between four cells.
    const double u = std::log2(48.0) - 5.0;
    const double c00 = grid_mean(3, {64, 32, 32});
    const double c01 = grid_mean(3, {64, 64, 32});
    const double c10 = grid_mean(3, {128, 32, 32});
    const double c11 = grid_mean(3, {128, 64, 32});
    const double bilinear =
        (1 - t) * ((1 - u) * c00 + u * c01) + t * ((1 - u) * c10 + u * c11);
    CHECK(oracle.evaluate(Architecture({91, 48, 32}), 3, 1).mean ==
          doctest::Approx(bilinear).epsilon(1e-12));
}

TEST_CASE("oracle noise is seeded and bounded") {
    const TabularOracle oracle = TabularOracle::from_records(grid_records(2), 1.0);
    const TrialResult a = oracle.evaluate(Architecture({64, 64}), 10, 5);
    const TrialResult b = oracle.evaluate(Architecture({64, 64}), 10, 5);
    const TrialResult c = oracle.evaluate(Architecture({64, 64}), 10, 6);
    CHECK(a.accuracies == b.accuracies);
    CHECK_FALSE(a.accuracies == c.accuracies);
    for (double acc : a.accuracies) {
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
    // Noise is small: stays near the cell mean.
    CHECK(std::fabs(a.mean - grid_mean(2, {64, 64})) < 0.01);
}

TEST_CASE("oracle construction validates its grid") {
    auto records = grid_records(2);
    records.pop_back();
    CHECK_THROWS_AS(TabularOracle::from_records(records, 1.0), DataError);
    CHECK_THROWS_AS(TabularOracle::from_records({}, 1.0), DataError);
}

TEST_CASE("the suggestion loop runs its full budget and logs consistently") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));
    const auto cfg = fast_loop(5);
    const auto logs = run_asnn_search(cfg, records, backend);
    REQUIRE(logs.size() == 5);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        CHECK(logs[i].iteration == i);
        CHECK(logs[i].dataset_records == records.size() + i + 1);
        CHECK(logs[i].trial.accuracies.size() == 10);
        CHECK(logs[i].prediction.size() == 2);
        for (int w : logs[i].arch.widths()) {
            CHECK(w >= cfg.bounds.min_width);
            CHECK(w <= cfg.bounds.max_width);
        }
        for (double a : logs[i].trial.accuracies) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }
        if (i > 0) CHECK(logs[i].best_so_far >= logs[i - 1].best_so_far);
        CHECK(logs[i].best_so_far ==
              doctest::Approx(std::max_element(logs.begin(), logs.begin() + i + 1,
                                               [](const auto& a, const auto& b) {
                                                   return a.trial.mean < b.trial.mean;
                                               })
                                  ->trial.mean));
    }
}

TEST_CASE("a target already met by the initial records returns an empty log") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));
    auto cfg = fast_loop(5);
    cfg.target_mean_accuracy = 0.9;  // the grid's best mean is 0.98310
    const auto logs = run_asnn_search(cfg, records, backend);
    CHECK(logs.empty());
}

TEST_CASE("the suggestion loop replays identically from its seed") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));
    const auto cfg = fast_loop(3);
    const auto a = run_asnn_search(cfg, records, backend);
    const auto b = run_asnn_search(cfg, records, backend);
    CHECK(a == b);
}

TEST_CASE("random search is seeded, bounded, and tracks the running best") {
    const OracleBackend backend(TabularOracle::from_records(grid_records(2), 0.0));
    auto cfg = fast_loop(20);
    WidthRange range{16, 256, true};

    const auto a = run_random_search(cfg, range, 2, backend);
    const auto b = run_random_search(cfg, range, 2, backend);
    REQUIRE(a.size() == 20);
    CHECK(a == b);

    // With zero noise, best-so-far equals the max over the drawn cells'
    // interpolated means, recomputed independently here.
    const TabularOracle reference = TabularOracle::from_records(grid_records(2), 0.0);
    double best = 0.0;
    for (const auto& log : a) {
        for (int w : log.arch.widths()) {
            CHECK(w >= range.min_width);
            CHECK(w <= range.max_width);
        }
        const std::vector<double> widths(log.arch.widths().begin(), log.arch.widths().end());
        best = std::max(best, reference.interpolate(widths).mean);
        CHECK(log.best_so_far == doctest::Approx(best).epsilon(1e-12));
    }

    // Linear draws respect the range too.
    WidthRange linear{20, 40, false};
    for (const auto& log : run_random_search(cfg, linear, 2, backend)) {
        for (int w : log.arch.widths()) {
            CHECK(w >= 20);
            CHECK(w <= 40);
        }
    }
}

TEST_CASE("compare_strategies emits one row per seed, iteration, and strategy") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));

    StrategyConfig suggest;
    suggest.name = "asnn";
    suggest.kind = StrategyConfig::Kind::Asnn;
    suggest.loop = fast_loop(3);
    suggest.initial_records = records;

    StrategyConfig random;
    random.name = "random";
    random.kind = StrategyConfig::Kind::Random;
    random.loop = fast_loop(3);
    random.range = WidthRange{16, 256, true};
    random.depth = 2;

    const auto report = compare_strategies({suggest, random}, 4, backend);
    CHECK(report.rows.size() == 4 * 3 * 2);
    REQUIRE(report.median_best_so_far.count("asnn") == 1);
    REQUIRE(report.median_best_so_far.count("random") == 1);
    CHECK(report.median_best_so_far.at("asnn").size() == 3);
    for (const auto& [name, medians] : report.median_best_so_far) {
        for (std::size_t i = 1; i < medians.size(); ++i) {
            CHECK(medians[i] >= medians[i - 1]);
        }
    }

    // A strategy compared with itself yields identical curves.
    StrategyConfig clone = suggest;
    clone.name = "asnn2";
    const auto twin = compare_strategies({suggest, clone}, 2, backend);
    CHECK(twin.median_best_so_far.at("asnn") == twin.median_best_so_far.at("asnn2"));

    // Budget mismatch is rejected.
    StrategyConfig bigger = random;
    bigger.loop.max_iterations = 7;
    CHECK_THROWS_AS(compare_strategies({suggest, bigger}, 2, backend), std::invalid_argument);
}

TEST_CASE("compare handles strategies that stop before evaluating") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 0.0));

    // The suggestion runs start with the grid's best (0.98310) already
    // above the target, so they evaluate nothing; random keeps drawing
    // until it crosses the bar or exhausts the budget.
    StrategyConfig suggest;
    suggest.name = "asnn";
    suggest.kind = StrategyConfig::Kind::Asnn;
    suggest.loop = fast_loop(4);
    suggest.loop.target_mean_accuracy = 0.98;
    suggest.initial_records = records;

    StrategyConfig random;
    random.name = "random";
    random.kind = StrategyConfig::Kind::Random;
    random.loop = suggest.loop;
    random.range = WidthRange{16, 256, true};
    random.depth = 2;

    const auto report = compare_strategies({suggest, random}, 3, backend);
    for (const auto& row : report.rows) CHECK(row.strategy == "random");
    CHECK(report.median_best_so_far.at("asnn").empty());
    CHECK_FALSE(report.median_evals_to_target.at("asnn").has_value());
    CHECK(report.runs_missing_target.at("asnn") == 3);
}

TEST_CASE("loop preconditions are validated") {
    const auto records = grid_records(2);
    const OracleBackend backend(TabularOracle::from_records(records, 1.0));
    auto cfg = fast_loop(0);
    CHECK_THROWS_AS(run_asnn_search(cfg, records, backend), std::invalid_argument);
    cfg = fast_loop(2);
    cfg.target_mean_accuracy = 1.5;
    CHECK_THROWS_AS(run_asnn_search(cfg, records, backend), std::invalid_argument);
    cfg = fast_loop(2);
    CHECK_THROWS_AS(run_random_search(cfg, WidthRange{50, 20, false}, 2, backend),
                    std::invalid_argument);
}
