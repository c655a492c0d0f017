#include "asnn/search_loop.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "asnn/errors.hpp"
#include "asnn/rng.hpp"

namespace asnn {

namespace {

// Per-iteration stream identifiers.
constexpr std::uint64_t kAugmentStream = 0xa9;
constexpr std::uint64_t kShuffleStream = 0x5a;
constexpr std::uint64_t kTrainStream = 0x7e;
constexpr std::uint64_t kEvalStream = 0xe7;
constexpr std::uint64_t kDrawStream = 0xd4;
constexpr std::uint64_t kSeedStream = 0x5eed;

double sample_stddev(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    double sum_sq = 0.0;
    for (double v : values) sum_sq += (v - mean) * (v - mean);
    return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

}  // namespace

TabularOracle TabularOracle::from_records(const std::vector<ArchRecord>& records,
                                          double noise_scale) {
    if (records.empty()) throw DataError("TabularOracle: no records");
    if (noise_scale < 0.0) throw std::invalid_argument("TabularOracle: negative noise scale");

    const std::size_t depth = records.front().arch.depth();
    TabularOracle oracle;
    oracle.noise_scale_ = noise_scale;
    oracle.axes_.resize(depth);

    std::vector<std::set<int>> axis_sets(depth);
    for (const auto& record : records) {
        if (record.arch.depth() != depth) {
            throw DataError("TabularOracle: records have mixed depths");
        }
        for (std::size_t d = 0; d < depth; ++d) {
            axis_sets[d].insert(record.arch.widths()[d]);
        }
    }
    std::size_t cell_count = 1;
    for (std::size_t d = 0; d < depth; ++d) {
        oracle.axes_[d].assign(axis_sets[d].begin(), axis_sets[d].end());
        oracle.log_axes_.emplace_back();
        for (int w : oracle.axes_[d]) {
            oracle.log_axes_[d].push_back(std::log2(static_cast<double>(w)));
        }
        cell_count *= oracle.axes_[d].size();
    }
    if (records.size() != cell_count) {
        throw DataError("TabularOracle: records do not cover a full grid");
    }

    oracle.cell_means_.assign(cell_count, 0.0);
    oracle.cell_stddevs_.assign(cell_count, 0.0);
    std::vector<bool> seen(cell_count, false);
    for (const auto& record : records) {
        std::size_t index = 0;
        for (std::size_t d = 0; d < depth; ++d) {
            const auto& axis = oracle.axes_[d];
            const auto it = std::lower_bound(axis.begin(), axis.end(), record.arch.widths()[d]);
            index = index * axis.size() + static_cast<std::size_t>(it - axis.begin());
        }
        if (seen[index]) throw DataError("TabularOracle: duplicate grid cell");
        seen[index] = true;
        oracle.cell_means_[index] =
            std::accumulate(record.accuracies.begin(), record.accuracies.end(), 0.0) /
            static_cast<double>(record.accuracies.size());
        oracle.cell_stddevs_[index] = sample_stddev(record.accuracies);
    }
    return oracle;
}

TabularOracle::CellStats TabularOracle::interpolate(const std::vector<double>& widths) const {
    if (widths.size() != axes_.size()) {
        throw DataError("TabularOracle: query depth does not match grid depth");
    }

    // Bracketing cell and interpolation weight per dimension, after
    // clamping the width into the grid hull.
    std::vector<std::size_t> lower(axes_.size());
    std::vector<double> frac(axes_.size());
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const auto& axis = axes_[d];
        const auto& log_axis = log_axes_[d];
        if (axis.size() == 1) {
            lower[d] = 0;
            frac[d] = 0.0;
            continue;
        }
        double w = std::clamp(widths[d], static_cast<double>(axis.front()),
                              static_cast<double>(axis.back()));
        const double x = std::log2(w);
        std::size_t k = 0;
        while (k + 2 < axis.size() && x >= log_axis[k + 1]) ++k;
        lower[d] = k;
        frac[d] = (x - log_axis[k]) / (log_axis[k + 1] - log_axis[k]);
        frac[d] = std::clamp(frac[d], 0.0, 1.0);
    }

    CellStats stats;
    const std::size_t corners = std::size_t{1} << axes_.size();
    for (std::size_t corner = 0; corner < corners; ++corner) {
        double weight = 1.0;
        std::size_t index = 0;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            const bool upper = (corner >> d) & 1u;
            weight *= upper ? frac[d] : 1.0 - frac[d];
            const std::size_t offset =
                std::min(lower[d] + (upper ? 1 : 0), axes_[d].size() - 1);
            index = index * axes_[d].size() + offset;
        }
        if (weight == 0.0) continue;
        stats.mean += weight * cell_means_[index];
        stats.stddev += weight * cell_stddevs_[index];
    }
    return stats;
}

TrialResult TabularOracle::evaluate(const Architecture& arch, std::size_t trials,
                                    std::uint64_t seed) const {
    if (arch.depth() != axes_.size()) {
        throw DataError("TabularOracle: architecture depth does not match grid depth");
    }
    if (trials == 0) throw std::invalid_argument("TabularOracle: trials must be >= 1");

    std::vector<double> widths(arch.widths().begin(), arch.widths().end());
    const CellStats stats = interpolate(widths);

    Xoshiro256pp rng(mix_seed(seed, 0x0c1e));
    TrialResult result{arch, {}, 0.0};
    result.accuracies.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        const double noise = noise_scale_ == 0.0 ? 0.0 : noise_scale_ * stats.stddev * rng.normal();
        result.accuracies.push_back(std::clamp(stats.mean + noise, 0.0, 1.0));
    }
    result.mean = std::accumulate(result.accuracies.begin(), result.accuracies.end(), 0.0) /
                  static_cast<double>(result.accuracies.size());
    return result;
}

void LoopConfig::validate() const {
    if (max_iterations == 0) throw std::invalid_argument("LoopConfig: max_iterations must be >= 1");
    if (trials_per_eval == 0) throw std::invalid_argument("LoopConfig: trials_per_eval must be >= 1");
    if (target_mean_accuracy && !(*target_mean_accuracy > 0.0 && *target_mean_accuracy <= 1.0)) {
        throw std::invalid_argument("LoopConfig: target accuracy must lie in (0, 1]");
    }
}

std::vector<IterationLog> run_asnn_search(const LoopConfig& cfg,
                                          const std::vector<ArchRecord>& initial_records,
                                          const EvalBackend& backend) {
    cfg.validate();
    AsnnDataset dataset = AsnnDataset::ingest_records(initial_records);

    std::vector<IterationLog> logs;
    double best_evaluated = 0.0;
    for (std::size_t iteration = 0; iteration < cfg.max_iterations; ++iteration) {
        if (cfg.target_mean_accuracy && dataset.best_mean() >= *cfg.target_mean_accuracy) break;

        AugmentConfig augment_cfg = cfg.augment;
        augment_cfg.seed = mix_seed(cfg.seed, kAugmentStream, iteration);
        auto samples = shuffle_samples(dataset.augment(augment_cfg),
                                       mix_seed(cfg.seed, kShuffleStream, iteration));

        // Retrained from scratch each round with a fresh derived seed.
        AsnnConfig asnn_cfg = cfg.asnn;
        asnn_cfg.seed = mix_seed(cfg.seed, kTrainStream, iteration);
        const AsnnModel model = train_asnn(samples, asnn_cfg);

        const auto prediction = predict(model, canonical_query(dataset.trial_count()));
        const Architecture arch = quantize(prediction, cfg.bounds);

        TrialResult trial = backend.evaluate(arch, cfg.trials_per_eval,
                                             mix_seed(cfg.seed, kEvalStream, iteration));
        dataset.append_trial(trial);

        best_evaluated = std::max(best_evaluated, trial.mean);
        logs.push_back(IterationLog{iteration, prediction, arch, std::move(trial),
                                    dataset.record_count(), best_evaluated});
    }
    return logs;
}

std::vector<IterationLog> run_random_search(const LoopConfig& cfg, const WidthRange& range,
                                            std::size_t depth, const EvalBackend& backend) {
    cfg.validate();
    if (range.min_width < Architecture::kMinWidth || range.max_width > Architecture::kMaxWidth ||
        range.min_width > range.max_width) {
        throw std::invalid_argument("run_random_search: invalid width range");
    }

    Xoshiro256pp rng(mix_seed(cfg.seed, kDrawStream));
    std::vector<IterationLog> logs;
    double best_evaluated = 0.0;
    for (std::size_t iteration = 0; iteration < cfg.max_iterations; ++iteration) {
        if (cfg.target_mean_accuracy && best_evaluated >= *cfg.target_mean_accuracy) break;

        std::vector<double> drawn(depth);
        for (std::size_t d = 0; d < depth; ++d) {
            if (range.log_uniform) {
                const double lo = std::log2(static_cast<double>(range.min_width));
                const double hi = std::log2(static_cast<double>(range.max_width));
                drawn[d] = std::exp2(lo + (hi - lo) * rng.uniform());
            } else {
                const std::uint64_t span =
                    static_cast<std::uint64_t>(range.max_width - range.min_width) + 1;
                drawn[d] = static_cast<double>(range.min_width) +
                           static_cast<double>(rng.uniform_below(span));
            }
        }
        const Architecture arch =
            quantize(drawn, WidthBounds{range.min_width, range.max_width});

        TrialResult trial = backend.evaluate(arch, cfg.trials_per_eval,
                                             mix_seed(cfg.seed, kEvalStream, iteration));
        best_evaluated = std::max(best_evaluated, trial.mean);
        logs.push_back(IterationLog{iteration, drawn, arch, std::move(trial),
                                    iteration + 1, best_evaluated});
    }
    return logs;
}

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ComparisonReport compare_strategies(const std::vector<StrategyConfig>& strategies,
                                    std::size_t n_seeds, const EvalBackend& backend) {
    if (strategies.empty()) throw std::invalid_argument("compare_strategies: no strategies");
    if (n_seeds == 0) throw std::invalid_argument("compare_strategies: n_seeds must be >= 1");
    for (const auto& s : strategies) {
        if (s.loop.max_iterations != strategies.front().loop.max_iterations ||
            s.loop.trials_per_eval != strategies.front().loop.trials_per_eval) {
            throw std::invalid_argument("compare_strategies: strategies have different budgets");
        }
    }

    // Seeds are independent runs, so they may execute in parallel; every
    // run derives its own streams from its seed, and rows are assembled
    // in seed order afterwards, so the report does not depend on the
    // schedule or the thread count.
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n_seeds, std::thread::hardware_concurrency()));

    ComparisonReport report;
    for (const auto& strategy : strategies) {
        std::vector<std::vector<IterationLog>> per_seed_logs(n_seeds);
        for (std::size_t wave = 0; wave < n_seeds; wave += workers) {
            const std::size_t wave_end = std::min(wave + workers, n_seeds);
            std::vector<std::future<std::vector<IterationLog>>> futures;
            for (std::size_t seed_index = wave; seed_index < wave_end; ++seed_index) {
                futures.push_back(std::async(std::launch::async, [&, seed_index] {
                    LoopConfig cfg = strategy.loop;
                    cfg.seed = mix_seed(strategy.loop.seed, kSeedStream, seed_index);
                    return strategy.kind == StrategyConfig::Kind::Asnn
                               ? run_asnn_search(cfg, strategy.initial_records, backend)
                               : run_random_search(cfg, strategy.range, strategy.depth, backend);
                }));
            }
            for (std::size_t i = 0; i < futures.size(); ++i) {
                per_seed_logs[wave + i] = futures[i].get();
            }
        }

        std::vector<std::vector<double>> best_curves;
        std::vector<double> evals_to_target;
        std::size_t missing = 0;
        for (std::size_t seed_index = 0; seed_index < n_seeds; ++seed_index) {
            std::vector<double> curve;
            bool reached = false;
            for (const auto& log : per_seed_logs[seed_index]) {
                report.rows.push_back(ComparisonRow{strategy.name, seed_index, log.iteration,
                                                    log.arch, log.trial.mean, log.best_so_far});
                curve.push_back(log.best_so_far);
                if (!reached && strategy.loop.target_mean_accuracy &&
                    log.best_so_far >= *strategy.loop.target_mean_accuracy) {
                    evals_to_target.push_back(static_cast<double>(log.iteration + 1));
                    reached = true;
                }
            }
            best_curves.push_back(std::move(curve));
            if (strategy.loop.target_mean_accuracy && !reached) ++missing;
        }

        std::size_t longest = 0;
        for (const auto& curve : best_curves) longest = std::max(longest, curve.size());
        std::vector<double> medians;
        for (std::size_t i = 0; i < longest; ++i) {
            std::vector<double> at_i;
            for (const auto& curve : best_curves) {
                // Early-stopped runs hold their final best.
                if (!curve.empty()) at_i.push_back(i < curve.size() ? curve[i] : curve.back());
            }
            medians.push_back(median(std::move(at_i)));
        }
        report.median_best_so_far[strategy.name] = std::move(medians);
        report.median_evals_to_target[strategy.name] =
            evals_to_target.empty() ? std::nullopt
                                    : std::optional<double>(median(std::move(evals_to_target)));
        report.runs_missing_target[strategy.name] = missing;
    }
    return report;
}

}  // namespace asnn
