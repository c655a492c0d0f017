#pragma once

#include <string>
#include <vector>

#include "asnn/asnn_dataset.hpp"
#include "asnn/search_loop.hpp"
#include "asnn/target_task.hpp"

// File formats. All writers are deterministic: identical inputs produce
// byte-identical files.

namespace asnn {

// Grid results CSV: header L1,L2[,L3],E1,...,EK,mean with accuracies at
// 4 decimals and the mean at 5 decimals (recomputed from the rounded
// accuracies, so a written file always re-imports cleanly).
void write_grid_csv(const std::vector<TrialResult>& results, const std::string& path);
void write_grid_csv(const std::vector<ArchRecord>& records, const std::string& path);

// Parses a grid CSV back into records; validates the header shape, the
// accuracy range, and that each stored mean matches the recomputed mean
// within 5e-6.
std::vector<ArchRecord> read_grid_csv(const std::string& path);

// Debug dump of augmented samples: in1..inK,t1..tL at 6 decimals.
void write_samples_csv(const std::vector<AsnnSample>& samples, const std::string& path);

// Run log: one schema-versioned JSON object per line.
void write_run_log_jsonl(const std::vector<IterationLog>& logs, const std::string& path);
std::vector<IterationLog> read_run_log_jsonl(const std::string& path);

// Comparison rows: strategy,seed,iteration,arch,mean,best_so_far.
void write_comparison_csv(const ComparisonReport& report, const std::string& path);

// Per-iteration medians and evaluations-to-target per strategy.
void write_comparison_summary_csv(const ComparisonReport& report, const std::string& path);

// "256x16" style architecture notation used in the comparison CSV.
std::string format_arch(const Architecture& arch);

}  // namespace asnn
