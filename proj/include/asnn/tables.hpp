#pragma once

#include <string>
#include <vector>

#include "asnn/target_task.hpp"

// Bundled benchmark grids: 10-trial MNIST test accuracies for every cell
// of the 2-layer {16,32,64,128,256}^2 and 3-layer {16,32,64,128}^3 width
// sweeps, with the published per-row means. They back the tabular oracle
// and the verify-tables command, so everything runs offline.

namespace asnn {

struct GridRow {
    std::vector<int> widths;
    std::vector<double> accuracies;  // 10 trials
    double stored_mean = 0.0;        // as printed, 5 decimals
};

const std::vector<GridRow>& grid_2layer();
const std::vector<GridRow>& grid_3layer();

// Grid for a given depth (2 or 3).
const std::vector<GridRow>& embedded_grid(std::size_t depth);

struct TableMismatch {
    std::size_t table;  // 2 or 3 (grid depth)
    std::size_t row;    // index within that grid
    double stored_mean;
    double recomputed_mean;
};

struct TableVerification {
    std::size_t rows_checked = 0;
    std::vector<TableMismatch> mismatches;

    bool ok() const { return mismatches.empty(); }
};

// Recomputes every row mean and flags rows where the stored value is off
// by more than tolerance (default matches 5-decimal rounding).
TableVerification verify_grid(const std::vector<GridRow>& grid, std::size_t depth,
                              double tolerance = 5e-6);

// Verifies both embedded grids.
TableVerification verify_embedded_tables(double tolerance = 5e-6);

std::string format_verification(const TableVerification& report);

// Converts grid rows into evaluation results (the record format consumed
// by the suggestion dataset).
std::vector<TrialResult> grid_to_trials(const std::vector<GridRow>& grid);

}  // namespace asnn
