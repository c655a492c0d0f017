#include "asnn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

constexpr int kRunLogSchemaVersion = 1;

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

std::string format_fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

double round_to(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

std::string grid_header(std::size_t depth, std::size_t trials) {
    std::ostringstream header;
    for (std::size_t d = 0; d < depth; ++d) header << "L" << (d + 1) << ",";
    for (std::size_t k = 0; k < trials; ++k) header << "E" << (k + 1) << ",";
    header << "mean";
    return header.str();
}

void write_grid_rows(std::ofstream& out, std::size_t depth, std::size_t trials,
                     const std::vector<const ArchRecord*>& records) {
    out << grid_header(depth, trials) << "\n";
    for (const ArchRecord* record : records) {
        double sum = 0.0;
        std::ostringstream line;
        for (int w : record->arch.widths()) line << w << ",";
        for (double a : record->accuracies) {
            const double rounded = round_to(a, 4);
            sum += rounded;
            line << format_fixed(rounded, 4) << ",";
        }
        line << format_fixed(sum / static_cast<double>(trials), 5);
        out << line.str() << "\n";
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_grid_csv(const std::vector<ArchRecord>& records, const std::string& path) {
    auto out = open_for_write(path);
    if (records.empty()) {
        out << grid_header(2, kPaperTrialCount) << "\n";
        return;
    }
    std::vector<const ArchRecord*> pointers;
    pointers.reserve(records.size());
    for (const auto& r : records) pointers.push_back(&r);
    write_grid_rows(out, records.front().arch.depth(), records.front().accuracies.size(),
                    pointers);
}

void write_grid_csv(const std::vector<TrialResult>& results, const std::string& path) {
    std::vector<ArchRecord> records;
    records.reserve(results.size());
    for (const auto& r : results) records.push_back(ArchRecord::from_trial(r));
    write_grid_csv(records, path);
}

std::vector<ArchRecord> read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty grid CSV");
    const auto header = split_csv_line(line);

    std::size_t depth = 0;
    while (depth < header.size() && header[depth] == "L" + std::to_string(depth + 1)) ++depth;
    std::size_t trials = 0;
    while (depth + trials < header.size() &&
           header[depth + trials] == "E" + std::to_string(trials + 1)) {
        ++trials;
    }
    if (depth == 0 || trials == 0 || depth + trials + 1 != header.size() ||
        header.back() != "mean") {
        throw DataError(path + ": malformed grid CSV header");
    }

    std::vector<ArchRecord> records;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != depth + trials + 1) {
            throw DataError(path + ": wrong field count on line " + std::to_string(line_number));
        }
        try {
            std::vector<int> widths(depth);
            for (std::size_t d = 0; d < depth; ++d) widths[d] = std::stoi(fields[d]);
            std::vector<double> accuracies(trials);
            for (std::size_t k = 0; k < trials; ++k) {
                accuracies[k] = std::stod(fields[depth + k]);
                if (!(accuracies[k] >= 0.0 && accuracies[k] <= 1.0)) {
                    throw DataError(path + ": accuracy outside [0,1] on line " +
                                    std::to_string(line_number));
                }
            }
            const double stored_mean = std::stod(fields.back());
            const double recomputed =
                std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
                static_cast<double>(trials);
            if (std::abs(stored_mean - recomputed) > 5e-6 + 1e-12) {
                throw DataError(path + ": mean mismatch on line " + std::to_string(line_number));
            }
            records.push_back(ArchRecord{Architecture(std::move(widths)), std::move(accuracies),
                                         recomputed});
        } catch (const std::invalid_argument& e) {
            throw DataError(path + ": line " + std::to_string(line_number) + ": " + e.what());
        } catch (const std::out_of_range&) {
            throw DataError(path + ": unparsable number on line " + std::to_string(line_number));
        }
    }
    return records;
}

void write_samples_csv(const std::vector<AsnnSample>& samples, const std::string& path) {
    auto out = open_for_write(path);
    if (samples.empty()) {
        out << "\n";
        return;
    }
    std::ostringstream header;
    for (std::size_t i = 0; i < samples.front().input.size(); ++i) {
        header << "in" << (i + 1) << ",";
    }
    for (std::size_t i = 0; i < samples.front().target.size(); ++i) {
        if (i) header << ",";
        header << "t" << (i + 1);
    }
    out << header.str() << "\n";
    for (const auto& sample : samples) {
        std::ostringstream line;
        for (double v : sample.input) line << format_fixed(v, 6) << ",";
        for (std::size_t i = 0; i < sample.target.size(); ++i) {
            if (i) line << ",";
            line << format_fixed(sample.target[i], 6);
        }
        out << line.str() << "\n";
    }
}

void write_run_log_jsonl(const std::vector<IterationLog>& logs, const std::string& path) {
    auto out = open_for_write(path);
    for (const auto& log : logs) {
        nlohmann::json doc;
        doc["schema_version"] = kRunLogSchemaVersion;
        doc["iteration"] = log.iteration;
        doc["prediction"] = log.prediction;
        doc["architecture"] = log.arch.widths();
        doc["accuracies"] = log.trial.accuracies;
        doc["mean"] = log.trial.mean;
        doc["dataset_records"] = log.dataset_records;
        doc["best_so_far"] = log.best_so_far;
        out << doc.dump() << "\n";
    }
}

std::vector<IterationLog> read_run_log_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path);

    std::vector<IterationLog> logs;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": line " + std::to_string(line_number) + ": " + e.what());
        }
        if (doc.value("schema_version", -1) != kRunLogSchemaVersion) {
            throw DataError(path + ": unsupported run log schema on line " +
                            std::to_string(line_number));
        }
        Architecture arch(doc.at("architecture").get<std::vector<int>>());
        TrialResult trial{arch, doc.at("accuracies").get<std::vector<double>>(),
                          doc.at("mean").get<double>()};
        logs.push_back(IterationLog{doc.at("iteration").get<std::size_t>(),
                                    doc.at("prediction").get<std::vector<double>>(), arch,
                                    std::move(trial), doc.at("dataset_records").get<std::size_t>(),
                                    doc.at("best_so_far").get<double>()});
    }
    return logs;
}

std::string format_arch(const Architecture& arch) {
    std::ostringstream out;
    for (std::size_t i = 0; i < arch.widths().size(); ++i) {
        if (i) out << "x";
        out << arch.widths()[i];
    }
    return out.str();
}

void write_comparison_csv(const ComparisonReport& report, const std::string& path) {
    auto out = open_for_write(path);
    out << "strategy,seed,iteration,arch,mean,best_so_far\n";
    for (const auto& row : report.rows) {
        out << row.strategy << "," << row.seed_index << "," << row.iteration << ","
            << format_arch(row.arch) << "," << format_fixed(row.mean, 5) << ","
            << format_fixed(row.best_so_far, 5) << "\n";
    }
}

void write_comparison_summary_csv(const ComparisonReport& report, const std::string& path) {
    auto out = open_for_write(path);
    out << "strategy,iteration,median_best_so_far\n";
    for (const auto& [strategy, medians] : report.median_best_so_far) {
        for (std::size_t i = 0; i < medians.size(); ++i) {
            out << strategy << "," << i << "," << format_fixed(medians[i], 6) << "\n";
        }
    }
    out << "\nstrategy,median_evals_to_target,runs_missing_target\n";
    for (const auto& [strategy, value] : report.median_evals_to_target) {
        out << strategy << ",";
        if (value) {
            out << format_fixed(*value, 1);
        } else {
            out << "n/a";
        }
        out << "," << report.runs_missing_target.at(strategy) << "\n";
    }
}

}  // namespace asnn
