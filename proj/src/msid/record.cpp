#include "msid/record.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "msid/errors.hpp"

namespace msid {

void RecordMetadata::validate() const {
    if (sample_rate_hz <= 0.0) {
        throw ArgumentError("sample_rate_hz must be positive");
    }
    if (samples_per_period <= 0) {
        throw ArgumentError("samples_per_period must be positive");
    }
    if (prefix_samples < 0) {
        throw ArgumentError("prefix_samples must be non-negative");
    }
    if (num_periods <= 0) {
        throw ArgumentError("num_periods must be positive");
    }
}

void MeasurementRecord::validate() const {
    metadata.validate();
    const std::size_t n = time_s.size();
    if (load.size() != n || indentation.size() != n) {
        throw DataError("record channels have unequal lengths");
    }
    if (n < static_cast<std::size_t>(metadata.expected_samples())) {
        std::ostringstream msg;
        msg << "record too short: " << n << " samples, metadata demands at least "
            << metadata.expected_samples();
        throw DataError(msg.str());
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(time_s[i] > time_s[i - 1])) {
            std::ostringstream msg;
            msg << "time not strictly increasing at sample " << i;
            throw DataError(msg.str());
        }
    }
    if (n >= 2) {
        const double mean_step = (time_s.back() - time_s.front()) / static_cast<double>(n - 1);
        const double nominal = 1.0 / metadata.sample_rate_hz;
        if (std::abs(mean_step - nominal) > 1e-6 * nominal) {
            std::ostringstream msg;
            msg << "mean time step " << mean_step << " s deviates from 1/sample_rate = "
                << nominal << " s";
            throw DataError(msg.str());
        }
    }
}

namespace {

constexpr const char* kCsvHeader = "time_s,load,indentation";

double parse_field(std::string_view field, std::size_t line_no, const char* name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc() || ptr != last) {
        std::ostringstream msg;
        msg << "malformed " << name << " value '" << std::string(field) << "' at line "
            << line_no;
        throw DataError(msg.str());
    }
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite " << name << " value at line " << line_no;
        throw DataError(msg.str());
    }
    return value;
}

void append_double(std::string& out, double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    out.append(buf, ptr);
}

}  // namespace

MeasurementRecord read_record_csv(const std::string& csv_path, const RecordMetadata& metadata) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open record file: " + csv_path);
    }

    MeasurementRecord record;
    record.metadata = metadata;

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty record file: " + csv_path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw DataError("record header must be '" + std::string(kCsvHeader) + "', got '" +
                        line + "' in " + csv_path);
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                       : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos) {
            std::ostringstream msg;
            msg << "expected 3 comma-separated fields at line " << line_no << " of "
                << csv_path;
            throw DataError(msg.str());
        }
        std::string_view view(line);
        record.time_s.push_back(parse_field(view.substr(0, c1), line_no, "time_s"));
        record.load.push_back(parse_field(view.substr(c1 + 1, c2 - c1 - 1), line_no, "load"));
        record.indentation.push_back(parse_field(view.substr(c2 + 1), line_no, "indentation"));
    }

    record.validate();
    return record;
}

MeasurementRecord read_record(const std::string& csv_path) {
    const std::string meta_path = sidecar_path(csv_path);
    std::ifstream meta_in(meta_path, std::ios::binary);
    if (!meta_in) {
        throw IoError("cannot open metadata sidecar: " + meta_path);
    }
    std::ostringstream buf;
    buf << meta_in.rdbuf();
    return read_record_csv(csv_path, metadata_from_json(buf.str()));
}

void write_record(const MeasurementRecord& record, const std::string& csv_path) {
    record.validate();

    std::string body(kCsvHeader);
    body.push_back('\n');
    for (std::size_t i = 0; i < record.time_s.size(); ++i) {
        append_double(body, record.time_s[i]);
        body.push_back(',');
        append_double(body, record.load[i]);
        body.push_back(',');
        append_double(body, record.indentation[i]);
        body.push_back('\n');
    }

    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open record file for writing: " + csv_path);
    }
    out << body;
    if (!out) {
        throw IoError("failed writing record file: " + csv_path);
    }

    std::ofstream meta_out(sidecar_path(csv_path), std::ios::binary);
    if (!meta_out) {
        throw IoError("cannot open metadata sidecar for writing: " + sidecar_path(csv_path));
    }
    meta_out << metadata_to_json(record.metadata);
}

std::string sidecar_path(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return csv_path.substr(0, csv_path.size() - suffix.size()) + ".meta.json";
    }
    return csv_path + ".meta.json";
}

SegmentResult segment_periods(const MeasurementRecord& record) {
    record.validate();
    const RecordMetadata& meta = record.metadata;
    const std::size_t n_period = static_cast<std::size_t>(meta.samples_per_period);

    SegmentResult result;
    result.dropped_trailing_samples =
        record.time_s.size() - static_cast<std::size_t>(meta.expected_samples());

    std::size_t offset = static_cast<std::size_t>(meta.prefix_samples);
    for (int p = 0; p < meta.num_periods; ++p) {
        result.block.periods_u.emplace_back(record.load.begin() + offset,
                                            record.load.begin() + offset + n_period);
        result.block.periods_y.emplace_back(record.indentation.begin() + offset,
                                            record.indentation.begin() + offset + n_period);
        offset += n_period;
    }
    return result;
}

namespace {

double grand_mean(const std::vector<std::vector<double>>& rows) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& row : rows) {
        for (double v : row) {
            acc += v;
        }
        count += row.size();
    }
    return acc / static_cast<double>(count);
}

double mean_of(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) {
        acc += v;
    }
    return acc / static_cast<double>(values.size());
}

}  // namespace

MeanRemovalResult remove_mean(const PeriodBlock& block) {
    if (block.num_periods() == 0 || block.period_length() == 0) {
        throw ArgumentError("remove_mean on empty period block");
    }
    MeanRemovalResult result;
    result.mean_load = grand_mean(block.periods_u);
    result.mean_indentation = grand_mean(block.periods_y);
    result.block = block;
    for (auto& row : result.block.periods_u) {
        for (double& v : row) {
            v -= result.mean_load;
        }
    }
    for (auto& row : result.block.periods_y) {
        for (double& v : row) {
            v -= result.mean_indentation;
        }
    }
    return result;
}

int DriftSummary::num_flagged() const {
    int count = 0;
    for (const DriftEntry& entry : records) {
        count += entry.flagged ? 1 : 0;
    }
    return count;
}

DriftSummary drift_metric(const std::vector<MeasurementRecord>& records, double threshold) {
    if (records.empty()) {
        throw ArgumentError("drift_metric needs at least one record");
    }
    if (threshold < 0.0) {
        throw ArgumentError("drift threshold must be non-negative");
    }
    const RecordMetadata& first = records.front().metadata;
    for (const MeasurementRecord& record : records) {
        const RecordMetadata& meta = record.metadata;
        if (meta.sample_rate_hz != first.sample_rate_hz ||
            meta.samples_per_period != first.samples_per_period ||
            meta.prefix_samples != first.prefix_samples) {
            throw DataError("inconsistent metadata across records");
        }
    }

    DriftSummary summary;
    summary.threshold = threshold;
    double reference_mean = 0.0;
    double reference_rms = 0.0;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const SegmentResult segmented = segment_periods(records[r]);
        DriftEntry entry;
        for (const auto& row : segmented.block.periods_u) {
            entry.period_mean_load.push_back(mean_of(row));
        }
        for (const auto& row : segmented.block.periods_y) {
            entry.period_mean_indentation.push_back(mean_of(row));
        }
        entry.mean_load = mean_of(entry.period_mean_load);
        entry.mean_indentation = mean_of(entry.period_mean_indentation);

        if (r == 0) {
            reference_mean = entry.mean_load;
            double acc = 0.0;
            std::size_t count = 0;
            for (const auto& row : segmented.block.periods_u) {
                for (double v : row) {
                    acc += v * v;
                }
                count += row.size();
            }
            reference_rms = std::sqrt(acc / static_cast<double>(count));
            entry.load_shift_rel = std::numeric_limits<double>::quiet_NaN();
        } else if (std::abs(reference_mean) <= 1e-9 * reference_rms) {
            // Set point indistinguishable from zero: a relative shift is
            // meaningless, so it is reported as NaN and never flagged.
            entry.load_shift_rel = std::numeric_limits<double>::quiet_NaN();
        } else {
            entry.load_shift_rel = (entry.mean_load - reference_mean) / reference_mean;
            entry.flagged = std::abs(entry.load_shift_rel) > threshold;
        }
        summary.records.push_back(std::move(entry));
    }
    return summary;
}

std::string metadata_to_json(const RecordMetadata& metadata) {
    nlohmann::json doc{{"sample_rate_hz", metadata.sample_rate_hz},
                       {"samples_per_period", metadata.samples_per_period},
                       {"prefix_samples", metadata.prefix_samples},
                       {"num_periods", metadata.num_periods},
                       {"realization_index", metadata.realization_index},
                       {"channel_units",
                        {{"load", metadata.load_unit},
                         {"indentation", metadata.indentation_unit}}}};
    if (metadata.probe) {
        doc["probe"] = {{"stiffness_n_per_m", metadata.probe->stiffness_n_per_m},
                        {"tip_diameter_um", metadata.probe->tip_diameter_um}};
    }
    return doc.dump(2) + "\n";
}

RecordMetadata metadata_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("metadata JSON parse failure: ") + e.what());
    }
    try {
        RecordMetadata metadata;
        metadata.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
        metadata.samples_per_period = doc.at("samples_per_period").get<int>();
        metadata.prefix_samples = doc.at("prefix_samples").get<int>();
        metadata.num_periods = doc.at("num_periods").get<int>();
        metadata.realization_index = doc.at("realization_index").get<int>();
        if (doc.contains("channel_units")) {
            metadata.load_unit = doc["channel_units"].value("load", "");
            metadata.indentation_unit = doc["channel_units"].value("indentation", "");
        }
        if (doc.contains("probe")) {
            ProbeInfo probe;
            probe.stiffness_n_per_m = doc["probe"].value("stiffness_n_per_m", 0.0);
            probe.tip_diameter_um = doc["probe"].value("tip_diameter_um", 0.0);
            metadata.probe = probe;
        }
        metadata.validate();
        return metadata;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("metadata JSON missing or mistyped field: ") + e.what());
    }
}

}  // namespace msid
