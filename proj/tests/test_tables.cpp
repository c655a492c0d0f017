#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "asnn/tables.hpp"

using namespace asnn;

namespace {

double row_mean(const GridRow& row) {
    return std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) /
           static_cast<double>(row.accuracies.size());
}

const GridRow* find_row(const std::vector<GridRow>& grid, const std::vector<int>& widths) {
    for (const auto& row : grid) {
        if (row.widths == widths) return &row;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("both grids have full coverage and ten trials per row") {
    CHECK(grid_2layer().size() == 25);
    CHECK(grid_3layer().size() == 64);
    for (const auto& row : grid_2layer()) CHECK(row.accuracies.size() == 10);
    for (const auto& row : grid_3layer()) CHECK(row.accuracies.size() == 10);
    CHECK(&embedded_grid(2) == &grid_2layer());
    CHECK(&embedded_grid(3) == &grid_3layer());
    CHECK_THROWS_AS(embedded_grid(4), std::invalid_argument);
}

TEST_CASE("every stored mean matches its recomputed mean") {
    const auto report = verify_embedded_tables();
    CHECK(report.rows_checked == 89);
    CHECK(report.ok());
    CHECK(format_verification(report).find("all row means verified") != std::string::npos);
}

TEST_CASE("spot checks against the published means") {
    const GridRow* r = find_row(grid_2layer(), {256, 256});
    REQUIRE(r != nullptr);
    CHECK(r->stored_mean == 0.98281);
    CHECK(row_mean(*r) == doctest::Approx(0.98281).epsilon(5e-6));

    r = find_row(grid_2layer(), {256, 16});
    REQUIRE(r != nullptr);
    CHECK(r->stored_mean == 0.98310);

    r = find_row(grid_3layer(), {128, 128, 16});
    REQUIRE(r != nullptr);
    CHECK(r->stored_mean == 0.98171);
    CHECK(row_mean(*r) == doctest::Approx(0.98171).epsilon(5e-6));

    r = find_row(grid_3layer(), {16, 16, 16});
    REQUIRE(r != nullptr);
    CHECK(r->stored_mean == 0.93763);
}

TEST_CASE("corrupted rows are flagged exactly") {
    std::vector<GridRow> copy = grid_2layer();
    copy[3].stored_mean += 0.001;
    copy[17].accuracies[4] += 0.002;
    const auto report = verify_grid(copy, 2);
    REQUIRE(report.mismatches.size() == 2);
    CHECK(report.mismatches[0].row == 3);
    CHECK(report.mismatches[1].row == 17);
    CHECK(format_verification(report).find("mismatch") != std::string::npos);
}

TEST_CASE("grid rows convert to evaluation records") {
    const auto trials = grid_to_trials(grid_2layer());
    REQUIRE(trials.size() == 25);
    CHECK(trials[0].arch == Architecture({256, 256}));
    CHECK(trials[0].accuracies.size() == 10);
    CHECK(trials[0].mean == doctest::Approx(0.98281).epsilon(5e-6));
}
