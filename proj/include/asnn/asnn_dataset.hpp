#pragma once

#include <cstdint>
#include <vector>

#include "asnn/target_task.hpp"

// Supervised dataset for the suggestion network: rows map an accuracy
// vector to the architecture that produced it. Inputs are the accuracies
// scaled by exactly 100; augmentation permutes the accuracy values
// within a record and never fabricates new ones.

namespace asnn {

struct ArchRecord {
    Architecture arch;
    std::vector<double> accuracies;
    double mean = 0.0;

    static ArchRecord from_trial(const TrialResult& trial);
};

struct AsnnSample {
    std::vector<double> input;   // accuracies * 100
    std::vector<double> target;  // widths as reals

    bool operator==(const AsnnSample&) const = default;
};

struct AugmentConfig {
    std::size_t target_size = 10000;
    std::uint64_t seed = 0;
    enum class Strategy { PermuteWithinRecord } strategy = Strategy::PermuteWithinRecord;
};

constexpr double kInputScale = 100.0;
constexpr std::size_t kPaperTrialCount = 10;

class AsnnDataset {
public:
    // All records must share one depth and one trial count; duplicate
    // (arch, accuracies) rows are rejected. Throws DataError.
    static AsnnDataset ingest_records(std::vector<ArchRecord> records);

    // Appends one evaluation as a new record. The trial count must match
    // the dataset's (10 when built from the bundled grids).
    void append_trial(const TrialResult& trial);

    // Emits about cfg.target_size samples: source records are cycled
    // round-robin (per-record counts differ by at most one) and each
    // sample applies a fresh seeded uniform permutation to the record's
    // accuracies before scaling by 100.
    std::vector<AsnnSample> augment(const AugmentConfig& cfg) const;

    const std::vector<ArchRecord>& records() const { return records_; }
    std::size_t record_count() const { return records_.size(); }
    std::size_t depth() const { return depth_; }
    std::size_t trial_count() const { return trial_count_; }

    // Highest record mean; the search loop's stopping guard.
    double best_mean() const;

private:
    AsnnDataset() = default;

    std::vector<ArchRecord> records_;
    std::size_t depth_ = 0;
    std::size_t trial_count_ = 0;
};

// Seeded uniform permutation of sample order; the multiset is unchanged.
std::vector<AsnnSample> shuffle_samples(std::vector<AsnnSample> samples, std::uint64_t seed);

}  // namespace asnn
