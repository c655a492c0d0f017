#include "asnn/asnn_dataset.hpp"

#include <algorithm>
#include <numeric>

#include "asnn/errors.hpp"
#include "asnn/rng.hpp"

namespace asnn {

ArchRecord ArchRecord::from_trial(const TrialResult& trial) {
    ArchRecord record{trial.arch, trial.accuracies, trial.mean};
    return record;
}

namespace {

void validate_record(const ArchRecord& record, std::size_t depth, std::size_t trial_count) {
    if (record.arch.depth() != depth) {
        throw DataError("record depth does not match dataset depth");
    }
    if (record.accuracies.size() != trial_count) {
        throw DataError("record trial count does not match dataset trial count");
    }
    for (double a : record.accuracies) {
        if (!(a >= 0.0 && a <= 1.0)) throw DataError("accuracy outside [0, 1]");
    }
}

bool is_duplicate(const ArchRecord& a, const ArchRecord& b) {
    return a.arch == b.arch && a.accuracies == b.accuracies;
}

}  // namespace

AsnnDataset AsnnDataset::ingest_records(std::vector<ArchRecord> records) {
    if (records.empty()) throw DataError("ingest_records: no records");

    AsnnDataset dataset;
    dataset.depth_ = records.front().arch.depth();
    dataset.trial_count_ = records.front().accuracies.size();
    if (dataset.trial_count_ == 0) throw DataError("ingest_records: record has no accuracies");

    for (const auto& record : records) {
        validate_record(record, dataset.depth_, dataset.trial_count_);
        for (const auto& existing : dataset.records_) {
            if (is_duplicate(existing, record)) {
                throw DataError("ingest_records: duplicate (architecture, accuracies) record");
            }
        }
        dataset.records_.push_back(record);
    }
    return dataset;
}

void AsnnDataset::append_trial(const TrialResult& trial) {
    const ArchRecord record = ArchRecord::from_trial(trial);
    validate_record(record, depth_, trial_count_);
    for (const auto& existing : records_) {
        if (is_duplicate(existing, record)) {
            throw DataError("append_trial: duplicate (architecture, accuracies) record");
        }
    }
    records_.push_back(record);
}

std::vector<AsnnSample> AsnnDataset::augment(const AugmentConfig& cfg) const {
    if (cfg.target_size < records_.size()) {
        throw DataError("augment: target_size smaller than the record count");
    }

    Xoshiro256pp rng(mix_seed(cfg.seed, 0xa06));
    std::vector<std::size_t> permutation(trial_count_);

    std::vector<AsnnSample> samples;
    samples.reserve(cfg.target_size);
    for (std::size_t i = 0; i < cfg.target_size; ++i) {
        const ArchRecord& record = records_[i % records_.size()];

        std::iota(permutation.begin(), permutation.end(), std::size_t{0});
        shuffle_in_place(permutation, rng);

        AsnnSample sample;
        sample.input.resize(trial_count_);
        for (std::size_t j = 0; j < trial_count_; ++j) {
            sample.input[j] = record.accuracies[permutation[j]] * kInputScale;
        }
        sample.target.assign(record.arch.widths().begin(), record.arch.widths().end());
        samples.push_back(std::move(sample));
    }
    return samples;
}

double AsnnDataset::best_mean() const {
    double best = records_.front().mean;
    for (const auto& record : records_) best = std::max(best, record.mean);
    return best;
}

std::vector<AsnnSample> shuffle_samples(std::vector<AsnnSample> samples, std::uint64_t seed) {
    Xoshiro256pp rng(mix_seed(seed, 0x5affe));
    shuffle_in_place(samples, rng);
    return samples;
}

}  // namespace asnn
