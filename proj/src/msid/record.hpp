#pragma once

#include <optional>
#include <string>
#include <vector>

namespace msid {

/// Cantilever probe descriptors carried along as metadata.
struct ProbeInfo {
    double stiffness_n_per_m = 0.0;
    double tip_diameter_um = 0.0;
};

/// Acquisition metadata of one measured record, stored in the `.meta.json`
/// sidecar next to the sample CSV.
struct RecordMetadata {
    double sample_rate_hz = 1000.0;
    int samples_per_period = 12800;
    int prefix_samples = 3200;  ///< at the acquisition rate
    int num_periods = 1;
    int realization_index = 0;
    std::string load_unit;
    std::string indentation_unit;
    std::optional<ProbeInfo> probe;

    int expected_samples() const { return prefix_samples + num_periods * samples_per_period; }
    void validate() const;
};

/// One acquired experiment: time-aligned load (input) and indentation
/// (output) streams.
struct MeasurementRecord {
    RecordMetadata metadata;
    std::vector<double> time_s;
    std::vector<double> load;
    std::vector<double> indentation;

    /// Checks channel lengths, record length against the metadata, strict
    /// time monotonicity and the mean time step. Throws DataError.
    void validate() const;
};

/// P periods of both channels, one row per period.
struct PeriodBlock {
    std::vector<std::vector<double>> periods_u;
    std::vector<std::vector<double>> periods_y;

    int num_periods() const { return static_cast<int>(periods_u.size()); }
    int period_length() const {
        return periods_u.empty() ? 0 : static_cast<int>(periods_u.front().size());
    }
};

struct SegmentResult {
    PeriodBlock block;
    std::size_t dropped_trailing_samples = 0;
};

struct MeanRemovalResult {
    PeriodBlock block;
    double mean_load = 0.0;
    double mean_indentation = 0.0;
};

/// Per-record set-point summary produced by drift_metric.
struct DriftEntry {
    std::vector<double> period_mean_load;
    std::vector<double> period_mean_indentation;
    double mean_load = 0.0;
    double mean_indentation = 0.0;
    /// Relative shift of mean load versus the first record. NaN for the
    /// first record and whenever the reference mean is indistinguishable
    /// from zero.
    double load_shift_rel = 0.0;
    bool flagged = false;
};

struct DriftSummary {
    double threshold = 0.05;
    std::vector<DriftEntry> records;
    int num_flagged() const;
};

/// Parses `time_s,load,indentation` CSV rows and attaches the given metadata.
MeasurementRecord read_record_csv(const std::string& csv_path, const RecordMetadata& metadata);

/// read_record_csv with metadata taken from the `.meta.json` sidecar.
MeasurementRecord read_record(const std::string& csv_path);

/// Writes the sample CSV (17 significant digits) and the metadata sidecar.
void write_record(const MeasurementRecord& record, const std::string& csv_path);

/// Sidecar path of a record CSV: `<base>.csv` -> `<base>.meta.json`.
std::string sidecar_path(const std::string& csv_path);

/// Drops the prefix, slices P contiguous periods per channel and drops any
/// trailing excess (count reported in the result).
SegmentResult segment_periods(const MeasurementRecord& record);

/// Subtracts the grand mean (over all periods jointly) per channel.
MeanRemovalResult remove_mean(const PeriodBlock& block);

/// Set-point drift across records: per-period channel means plus the relative
/// shift of each record's mean load versus the first record, flagged above
/// `threshold`.
DriftSummary drift_metric(const std::vector<MeasurementRecord>& records,
                          double threshold = 0.05);

std::string metadata_to_json(const RecordMetadata& metadata);
RecordMetadata metadata_from_json(const std::string& text);

}  // namespace msid
