#pragma once

#include <string>
#include <vector>

#include "msid/bla.hpp"
#include "msid/frf.hpp"
#include "msid/multisine.hpp"
#include "msid/record.hpp"

namespace msid {

struct AnalysisOptions {
    std::string method = "etfe";  ///< reported FRF curve: "etfe" or "lpm"
    LpmConfig lpm;                ///< used when method == "lpm"
    double drift_threshold = 0.05;

    void validate() const;
};

/// Medians over excited bins. Gap fields compare the reported curve
/// magnitude against the variance curves and are NaN when the corresponding
/// variance is unavailable.
struct AnalysisSummary {
    double median_mag_db = 0.0;
    double median_noise_gap_db = 0.0;
    double median_total_gap_db = 0.0;
    double median_nl_fraction = 0.0;
    int drift_flagged = 0;
};

/// One record as seen by the analysis: where it came from (empty for
/// in-memory analyses) and which design realization it claims to be.
struct AnalyzedRecord {
    std::string path;
    int realization_index = 0;
    int num_periods = 0;
};

struct AnalysisResult {
    MultisineDesign design;
    AnalysisOptions options;
    std::vector<AnalyzedRecord> records;
    BlaResult bla;       ///< robust statistics, always ETFE-based
    FrfEstimate curve;   ///< reported FRF curve per options.method
    DriftSummary drift;
    AnalysisSummary summary;
};

/// Full analysis chain: per-record validation against the design,
/// segmentation, mean removal, per-period spectra, per-period ETFE,
/// robust BLA, drift metrics. With method "lpm" the reported curve is the
/// realization average of LPM fits on period-averaged spectra; the robust
/// variance decomposition stays ETFE-based either way.
///
/// Records must share one period count and carry distinct realization
/// indices that exist in the design.
AnalysisResult analyze_records(const MultisineDesign& design,
                               const std::vector<MeasurementRecord>& records,
                               const AnalysisOptions& options = {});

/// Loads the design and records from disk, then analyze_records. The given
/// record paths are remembered in the result.
AnalysisResult analyze_files(const std::string& design_path,
                             const std::vector<std::string>& record_paths,
                             const AnalysisOptions& options = {});

/// Report document (de)serialization. The JSON embeds the design, options,
/// record references, the full BLA decomposition with per-realization FRFs,
/// the reported curve, drift metrics and the summary.
std::string analysis_to_json(const AnalysisResult& result);
AnalysisResult analysis_from_json(const std::string& text);

/// Writes report.json, bla_curves.csv, frf.csv and drift.csv into `out_dir`
/// (created if missing). Record references inside report.json are stored
/// relative to `out_dir` so moved trees keep working.
void save_analysis(const AnalysisResult& result, const std::string& out_dir);

/// Human-readable summary block printed by the CLI after analyze.
std::string summary_text(const AnalysisResult& result);

/// Plot-ready figure bundle derived from a saved report: reference signals,
/// time-domain periods, per-period spectra, load-indentation trajectories
/// and the BLA curves. `format` is "csv" or "json"; either way exactly five
/// `fig_*` files are written into `out_dir`.
std::vector<std::string> write_report_bundle(const std::string& report_path,
                                             const std::string& out_dir,
                                             const std::string& format = "csv");

}  // namespace msid
